from fractions import Fraction

import pytest

from splverify.casestudy import expected_interactions
from splverify.harness import (InteractionQuery, combine, compare_strategies, cost_of,
                               verify_brute_force, verify_simulator)
from splverify.checker import BOUND_EXCEEDED, SAFE, VIOLATION, CheckMetrics, Verdict
from splverify.productline import load_manifest
from test_productline import write_line


def test_email_detects_documented_interactions(email_report, email_line):
    found = {r.interaction.id for r in email_report.detection if r.interaction}
    assert found == {it.id for it in expected_interactions(email_line)}
    assert email_report.unexpected() == []
    for row in email_report.detection:
        assert row.simulator_verdict == VIOLATION
        assert row.feature in row.interaction.features


def test_strategies_agree_on_email(email_brute, email_sim):
    for name, run in email_sim.runs.items():
        assert run.verdict.violation == (email_brute.tables[name].b > 0), name


def test_simulator_witness_is_violating_product(email_brute, email_sim):
    for name, run in email_sim.runs.items():
        if run.verdict.violation:
            assert run.verdict.selection in email_brute.tables[name].violating_products()


def test_zero_violation_line(tmp_path):
    line = load_manifest(write_line(tmp_path, limit=5))
    brute, sim = verify_brute_force(line), verify_simulator(line)
    assert brute.ok and sim.ok
    report = compare_strategies(line, brute=brute, simulator=sim)
    assert report.detection == [] and len(report.absence) == 1
    assert report.single() is None


def test_partial_violation_line(tmp_path):
    line = load_manifest(write_line(tmp_path, limit=2))
    report = compare_strategies(line)
    (row,) = report.detection
    assert (row.b, row.n) == (1, 2)
    assert row.stats.hit_probability == Fraction(1, 2)
    assert row.stats.minimum <= row.stats.maximum <= row.brute_total
    assert report.single().automaton == "Small"


def test_query_candidates(email_line):
    q = InteractionQuery.for_automaton(email_line, "EncryptBodySpec")
    assert q.feature == "Encrypt" and len(q.candidates) == 40
    assert len(InteractionQuery.for_automaton(email_line, "SignSpec").candidates) == 24


def test_parallel_equals_serial(email_line, email_brute):
    par = verify_brute_force(email_line, workers=2, automata=["EncryptBodySpec", "SignSpec"])
    for name, tab in par.tables.items():
        assert tab.pairs() == email_brute.tables[name].pairs()


def test_combine_priorities():
    v, s, b = Verdict(VIOLATION, "A"), Verdict(SAFE), Verdict(BOUND_EXCEEDED, bound="loop")
    assert combine([s, b, v]) is v
    assert combine([s, b]) is b
    assert combine([]).kind == SAFE


def test_costs():
    m = CheckMetrics(states_explored=10)
    assert cost_of(m, "states") == 10
    with pytest.raises(ValueError):
        cost_of(m, "bogus")
