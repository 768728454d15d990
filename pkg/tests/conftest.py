import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from randomlines import random_line  # noqa: E402

from splverify.casestudy import load_email_line  # noqa: E402
from splverify.checker import check, replay  # noqa: E402
from splverify.composer import compose, weave  # noqa: E402
from splverify.errors import SplError  # noqa: E402
from splverify.harness import compare_strategies, verify_brute_force, verify_simulator  # noqa: E402
from splverify.varenc import select, var_enc, weave_simulator  # noqa: E402

THEOREM_LINES = 200


@pytest.fixture(scope="session")
def email_line():
    return load_email_line()


@pytest.fixture(scope="session")
def email_brute(email_line):
    return verify_brute_force(email_line)


@pytest.fixture(scope="session")
def email_sim(email_line):
    return verify_simulator(email_line)


@pytest.fixture(scope="session")
def email_report(email_line, email_brute, email_sim):
    return compare_strategies(email_line, brute=email_brute, simulator=email_sim)


@pytest.fixture(scope="session")
def random_lines():
    return [random_line(random.Random(seed))[0] for seed in range(THEOREM_LINES)]


def _replays(program, verdict):
    if not verdict.violation:
        return None
    try:
        return replay(program, verdict.path).automaton == verdict.automaton
    except SplError:
        return False


def product_vs_simulator(line):
    """Per (product, automaton of a selected feature): the two verdicts.

    One side checks the composed and woven product; the other checks the
    simulator with its feature variables fixed to the product. The last
    element counts violation paths that failed to replay.
    """
    sim = var_enc(line.modules, line.fm, line.entry)
    rows = []
    for p in line.fm.enumerate_products():
        prog = compose(line.modules, p, line.fm, line.entry)
        configured = select(sim, p)
        for f, a in line.specs.automata(line.fm.features):
            if f not in p:
                continue
            woven = weave(prog, line.specs, p, automata=[a.name], feature_order=line.fm.features)
            woven_sim = weave_simulator(configured, line.specs, automata=[a.name])
            v_prod, _ = check(woven)
            v_sim, _ = check(woven_sim)
            bad = sum(_replays(w, v) is False for w, v in ((woven, v_prod), (woven_sim, v_sim)))
            rows.append((p, a.name, v_prod, v_sim, bad))
    return rows


@pytest.fixture(scope="session")
def theorem_rows(random_lines):
    return [(i, row) for i, line in enumerate(random_lines) for row in product_vs_simulator(line)]


@pytest.fixture(scope="session")
def email_theorem_rows(email_line):
    return product_vs_simulator(email_line)


@pytest.fixture(scope="session")
def random_strategy_runs(random_lines):
    return [(line, verify_brute_force(line), verify_simulator(line)) for line in random_lines]


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    if acceptance is not None and acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(acceptance.RESULTS):
            terminalreporter.write_line(acceptance.RESULTS[key])
