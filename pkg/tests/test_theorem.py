"""Checking a product equals checking the simulator restricted to that product."""

from splverify.checker import Verdict


def _key(v: Verdict):
    return v.kind


def test_random_lines_agree(theorem_rows):
    assert len(theorem_rows) > 1000
    bad = [(i, sorted(p), a, v1.kind, v2.kind) for i, (p, a, v1, v2, _) in theorem_rows
           if _key(v1) != _key(v2)]
    assert not bad, bad[:5]


def test_random_lines_include_violations(theorem_rows):
    kinds = {v1.kind for _, (_, _, v1, _, _) in theorem_rows}
    assert len(kinds) >= 2


def test_email_products_agree(email_theorem_rows):
    bad = [(sorted(p), a) for p, a, v1, v2, _ in email_theorem_rows if v1.kind != v2.kind]
    assert not bad


def test_violation_paths_replay(theorem_rows, email_theorem_rows):
    rows = [r for _, r in theorem_rows] + email_theorem_rows
    assert sum(r[4] for r in rows) == 0


def test_strategies_agree(random_strategy_runs):
    for line, brute, sim in random_strategy_runs:
        for name, run in sim.runs.items():
            table = brute.tables.get(name)
            # a dead feature has no candidate products and nothing to violate
            brute_bad = table is not None and table.b > 0
            assert run.verdict.violation == brute_bad, (name, sorted(line.fm.features))


def test_simulator_counterexamples_are_real(random_strategy_runs):
    for line, brute, sim in random_strategy_runs:
        for run in sim.runs.values():
            if not run.verdict.violation:
                continue
            p = run.verdict.selection
            assert line.fm.is_valid(p) and run.feature in p
            assert brute.tables[run.automaton].entries[p][0].violation
