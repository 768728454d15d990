import itertools
import random
from fractions import Fraction
from math import factorial

import numpy as np
import pytest

from splverify.ordering import analyze_orderings, runtime_classes, weighted_quantile


def brute_costs(pairs):
    """First-violation cost of every ordering, by enumeration."""
    out = []
    for perm in itertools.permutations(pairs):
        total = 0
        for cost, bad in perm:
            total += cost
            if bad:
                break
        out.append(total)
    return np.array(out, dtype=float)


def random_table(rng, n_max=8):
    n = rng.randint(1, n_max)
    pairs = [(rng.randint(1, 30), rng.random() < 0.4) for _ in range(n)]
    if not any(b for _, b in pairs):
        i = rng.randrange(n)
        pairs[i] = (pairs[i][0], True)
    return pairs


def test_matches_factorial_oracle():
    rng = random.Random(7)
    for _ in range(1000):
        pairs = random_table(rng, 6)
        st = analyze_orderings(pairs)
        costs = brute_costs(pairs)
        assert st.exact
        assert st.minimum == pytest.approx(costs.min(), abs=1e-9)
        assert st.maximum == pytest.approx(costs.max(), abs=1e-9)
        assert st.mean == pytest.approx(costs.mean(), rel=1e-9)
        for q, got in zip((25, 50, 75), (st.q1, st.median, st.q3)):
            assert got == pytest.approx(np.percentile(costs, q), abs=1e-9)


def test_matches_oracle_at_eight():
    rng = random.Random(11)
    for _ in range(5):
        pairs = random_table(rng, 8)
        pairs += [(rng.randint(1, 30), False) for _ in range(8 - len(pairs))]
        st = analyze_orderings(pairs)
        costs = brute_costs(pairs)
        assert st.summary == pytest.approx(tuple(np.percentile(costs, [0, 25, 50, 75, 100])))


def test_distribution_counts_all_orderings():
    pairs = [(3, False), (5, True), (2, False), (7, True)]
    st = analyze_orderings(pairs)
    assert sum(c for _, c in st.distribution) == factorial(4) == st.permutations


def test_classes_equal_to_n_is_exact():
    rng = random.Random(3)
    for _ in range(200):
        pairs = random_table(rng, 7)
        n = len(pairs)
        exact = analyze_orderings(pairs)
        approx = analyze_orderings(pairs, exact_limit=0, class_count=n)
        assert approx.summary == pytest.approx(exact.summary)
        assert approx.mean == pytest.approx(exact.mean)


def test_all_violating_gives_runtimes():
    pairs = [(t, True) for t in (4, 9, 1, 12, 6)]
    st = analyze_orderings(pairs, exact_limit=0, class_count=2)
    assert st.exact
    assert st.maximum == 12 and st.minimum == 1


def test_no_violation_is_point_mass():
    st = analyze_orderings([(2, False), (3, False)])
    assert st.summary == (5, 5, 5, 5, 5)
    assert st.b == 0


def test_hit_probability():
    pairs = [(1, i < 8) for i in range(40)]
    assert analyze_orderings(pairs).hit_probability == Fraction(1, 5)


def test_class_approximation_bounded():
    rng = random.Random(5)
    pairs = [(rng.randint(1, 100), rng.random() < 0.3) for _ in range(30)]
    pairs[0] = (pairs[0][0], True)
    st = analyze_orderings(pairs, exact_limit=10, class_count=5)
    assert not st.exact and st.classes == 5
    assert st.maximum <= sum(c for c, _ in pairs)
    assert st.minimum <= st.q1 <= st.median <= st.q3 <= st.maximum


def test_runtime_classes_contiguous():
    labels = runtime_classes([1, 2, 50, 51, 100], 3)
    assert labels == [0, 0, 1, 1, 2]
    assert runtime_classes([5, 5, 5], 4) == [0, 0, 0]


def test_weighted_quantile_linear():
    dist = [(1, 1), (2, 1), (3, 1), (4, 1)]
    assert weighted_quantile(dist, Fraction(1, 2)) == pytest.approx(2.5)
    assert weighted_quantile(dist, 1) == 4


@pytest.mark.parametrize("args", [([],), ([(1, True)], 10, 0)])
def test_errors(args):
    with pytest.raises(ValueError):
        analyze_orderings(*args)


def test_box_keys():
    box = analyze_orderings([(1, True), (2, False)]).box("x")
    assert {"whislo", "q1", "med", "q3", "whishi", "label"} <= set(box)
