from hypothesis import HealthCheck, given, settings

from splverify.fml.parser import parse_automata, parse_feature_module
from splverify.fml.printer import pretty_print

from strategies import modules, spec_files

SETTINGS = settings(max_examples=1000, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@SETTINGS
@given(modules())
def test_module_print_parse_identity(mod):
    text = pretty_print(mod)
    assert parse_feature_module(text) == mod, text


@SETTINGS
@given(spec_files())
def test_automata_print_parse_identity(autos):
    text = pretty_print(autos)
    assert parse_automata(text) == autos, text


def test_printed_output_is_a_fixed_point():
    src = """feature F;
struct s { int a; bool b; };
int g = -3;
int f(int x, struct s *p) {
  if (x > 0 && !p->b) return x - -1; else { while (x < 3) bound 4 x = x + 1; }
  return (x + 1) * 2;
}
"""
    once = pretty_print(parse_feature_module(src))
    assert pretty_print(parse_feature_module(once)) == once
