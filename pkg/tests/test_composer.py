import pytest

from splverify.checker import check
from splverify.composer import compose, merge, weave
from splverify.errors import CompositionError, WeaveError
from splverify.fml import ast as A
from splverify.fml.parser import parse_automata, parse_feature_module
from splverify.speclang import SpecificationSet

BASE = """feature Base;
struct msg { int id; };
int total = 0;
int send(int x) { total = total + x; return x; }
void main() { send(1); }
"""
LOG = """feature Log;
struct msg { int logged; };
int send(int x) { int r = original(x); total = total + 10; return r; }
"""
CAP = """feature Cap;
int send(int x) { if (x > 5) { return 0; } return original(x); }
"""


def modules(*srcs):
    # composition order is the argument order (sorting is stable on equal indices)
    return [parse_feature_module(s) for s in srcs]


def calls(fn):
    return {n.name for n in A.walk(fn.body) if isinstance(n, A.Call)}


def test_top_version_keeps_name_and_chain_renames():
    prog = compose(modules(BASE, LOG, CAP), {"Base", "Log", "Cap"})
    assert {"send", "send_Log", "send_Base"} <= set(prog.functions)
    assert calls(prog.functions["send"]) == {"send_Log"}
    assert calls(prog.functions["send_Log"]) == {"send_Base"}
    assert not any(isinstance(n, A.Original) for f in prog.functions.values() for n in A.walk(f.body))
    assert prog.feature_of_function("send") == "Cap"
    assert prog.feature_of_function("send_Base") == "Base"


def test_skipping_a_feature():
    prog = compose(modules(BASE, LOG, CAP), {"Base", "Cap"})
    assert calls(prog.functions["send"]) == {"send_Base"}
    assert "send_Log" not in prog.functions


def test_records_merge_fields():
    prog = compose(modules(BASE, LOG), {"Base", "Log"})
    assert [f.name for f in prog.records["msg"].fields] == ["id", "logged"]
    assert prog.selection == frozenset({"Base", "Log"})


def test_unresolved_original():
    with pytest.raises(CompositionError, match="unresolved original"):
        compose(modules(BASE, LOG), {"Log"})


@pytest.mark.parametrize("extra, message", [
    ("feature X;\nstruct msg { int id; };", "re-introduces field"),
    ("feature X;\nint total = 1;", "re-introduces global"),
    ("feature X;\nvoid send(int x) {}", "alternative definition"),
    ("feature X;\nvoid total() {}", "both as global and function"),
])
def test_merge_errors(extra, message):
    with pytest.raises(CompositionError, match=message):
        merge(modules(BASE, extra))


def test_unknown_or_invalid_product(email_line):
    with pytest.raises(CompositionError):
        compose(email_line.modules, {"Nope"})
    with pytest.raises(CompositionError, match="invalid product"):
        compose(email_line.modules, {"EMailClient"}, email_line.fm)


def _specs(text):
    specs = SpecificationSet()
    specs.add("Base", parse_automata(text))
    return specs


def test_weave_hooks_and_namespacing():
    specs = _specs("""automaton Limit {
  introduction { int seen = 0; }
  before int send(x:int) { seen = seen + x; }
  after r = int send(_:int) { if (seen > 0 && r > 100) { fail; } }
}""")
    prog = compose(modules(BASE), {"Base"})
    woven = weave(prog, specs, {"Base"})
    assert "Limit::seen" in woven.globals
    assert "send::body" in woven.functions
    assert {h.position for h in woven.hooks.values()} == {"before", "after"}
    assert woven.selection == prog.selection
    assert check(woven)[0].safe


def test_weave_filters_by_product_and_name():
    specs = _specs("automaton A { before int send(_:int) {} }\nautomaton B { before int send(_:int) {} }")
    prog = compose(modules(BASE), {"Base"})
    assert len(weave(prog, specs, {"Base"}, automata=["B"]).hooks) == 1
    assert not weave(prog, specs, set()).hooks


@pytest.mark.parametrize("spec, message", [
    ("automaton A { before void absent() {} }", "absent from the program"),
    ("automaton A { before void send(_:int) {} }", "signature"),
    ("automaton A { introduction { shadow struct nope { int q; }; } before int send(_:int) {} }",
     "unknown struct"),
    ("automaton A { introduction { shadow struct msg { int id; }; } before int send(_:int) {} }",
     "collides"),
])
def test_weave_errors(spec, message):
    prog = compose(modules(BASE), {"Base"})
    with pytest.raises(WeaveError, match=message):
        weave(prog, _specs(spec), {"Base"})
