"""Cost of brute-force detection over all orderings of the candidate products.

For an ordering p_1..p_n, the cost is t(p_1) + ... + t(p_i) where p_i is the
first violating product. The distribution over all n! orderings is computed
combinatorially: if the first violator is v and the set S of non-violators
precedes it, the number of orderings is |S|! * (n - |S| - 1)!. Subsets of
non-violators are counted by a dynamic program over groups of equal runtime,
so the work grows with the number of distinct runtimes, not with n!.
"""

from __future__ import annotations

from bisect import bisect_right
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import accumulate
from math import comb, factorial
from typing import Iterable, Optional, Sequence


@dataclass
class PermutationStats:
    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float
    mean: float
    b: int
    n: int
    exact: bool
    classes: Optional[int] = None
    distribution: list = field(default_factory=list)   # (cost, number of orderings), ascending

    @property
    def hit_probability(self) -> Fraction:
        """Chance that the first checked product already violates."""
        return Fraction(self.b, self.n)

    @property
    def permutations(self) -> int:
        return factorial(self.n)

    @property
    def summary(self) -> tuple:
        return (self.minimum, self.q1, self.median, self.q3, self.maximum)

    def box(self, label: str = "") -> dict:
        """Statistics in the form ``matplotlib.axes.Axes.bxp`` expects."""
        return {"label": label, "whislo": self.minimum, "q1": self.q1, "med": self.median,
                "q3": self.q3, "whishi": self.maximum, "mean": self.mean, "fliers": []}

    def to_dict(self) -> dict:
        return {"min": self.minimum, "q1": self.q1, "median": self.median, "q3": self.q3,
                "max": self.maximum, "mean": self.mean, "b": self.b, "n": self.n,
                "hit_probability": float(self.hit_probability), "exact": self.exact,
                "classes": self.classes}


def _pairs(table) -> list:
    if hasattr(table, "pairs"):
        return list(table.pairs())
    return [(cost, bool(bad)) for cost, bad in table]


def _groups(pairs) -> list:
    """Collapse equal runtimes: [(value, non-violating count, violating count)]."""
    acc: dict = {}
    for cost, bad in pairs:
        m, b = acc.get(cost, (0, 0))
        acc[cost] = (m, b + 1) if bad else (m + 1, b)
    return [(v, m, b) for v, (m, b) in sorted(acc.items())]


def ordering_distribution(groups: Sequence[tuple], n: int) -> list:
    """Exact multiset of first-violation costs over all orderings, as (cost, count)."""
    subsets = {(0, 0): 1}                     # (size, runtime sum) -> number of subsets
    for value, m, _ in groups:
        if not m:
            continue
        nxt: dict = defaultdict(int)
        for (k, s), c in subsets.items():
            for j in range(m + 1):
                nxt[(k + j, s + j * value)] += c * comb(m, j)
        subsets = nxt
    dist: dict = defaultdict(int)
    for value, _, bv in groups:
        if not bv:
            continue
        for (k, s), c in subsets.items():
            dist[s + value] += bv * c * factorial(k) * factorial(n - k - 1)
    return sorted(dist.items())


def runtime_classes(values: Iterable, class_count: int) -> list:
    """Partition runtimes into at most ``class_count`` classes of similar value.

    Sorted distinct values are cut at the ``class_count - 1`` widest gaps, so
    every class is a contiguous run. With at least as many classes as distinct
    values, each value forms its own class. Returns one class index per input.
    """
    values = list(values)
    distinct = sorted(set(values))
    gaps = sorted(range(1, len(distinct)), key=lambda i: (-(distinct[i] - distinct[i - 1]), i))
    cuts = set(gaps[:class_count - 1])
    index, cls = {}, 0
    for i, v in enumerate(distinct):
        if i in cuts:
            cls += 1
        index[v] = cls
    return [index[v] for v in values]


def _class_groups(pairs, class_count: int) -> list:
    labels = runtime_classes([c for c, _ in pairs], class_count)
    members: dict = defaultdict(list)
    for (cost, bad), lab in zip(pairs, labels):
        members[lab].append((cost, bad))
    groups = []
    for lab in sorted(members):
        items = members[lab]
        rep = sum(c for c, _ in items) / len(items)
        if all(c == items[0][0] for c, _ in items):
            rep = items[0][0]
        groups.append((rep, sum(not b for _, b in items), sum(b for _, b in items)))
    return groups


def weighted_quantile(dist: Sequence[tuple], q) -> float:
    """Linear-interpolated quantile of the multiset that ``dist`` describes."""
    counts = list(accumulate(c for _, c in dist))
    total = counts[-1]
    h = Fraction(total - 1) * Fraction(q)
    lo = int(h)
    frac = h - lo

    def at(i):
        return dist[bisect_right(counts, i)][0]

    a = at(lo)
    if frac == 0:
        return a
    b = at(lo + 1)
    return a + float(frac) * (b - a)


def analyze_orderings(table, exact_limit: int = 10, class_count: int = 5) -> PermutationStats:
    """Distribution of brute-force detection cost over all candidate orderings.

    ``table`` is a :class:`~splverify.harness.RuntimeTable` or an iterable of
    ``(cost, violates)`` pairs. Up to ``exact_limit`` candidates the result is
    exact; beyond that, runtimes are grouped into ``class_count`` classes and
    each class is represented by its mean runtime. When every candidate
    violates, the first check always decides, so the distribution is the
    runtimes themselves and is computed exactly. Without any violating
    candidate every ordering checks all of them, a point mass at the total.
    """
    pairs = _pairs(table)
    if not pairs:
        raise ValueError("runtime table is empty")
    if class_count < 1:
        raise ValueError("class_count must be at least 1")
    n = len(pairs)
    b = sum(bad for _, bad in pairs)
    exact = n <= exact_limit or b == n
    groups = _groups(pairs) if exact else _class_groups(pairs, class_count)
    if b:
        dist = ordering_distribution(groups, n)
    else:
        dist = [(sum(v * m for v, m, _ in groups), factorial(n))]
    total = sum(c for _, c in dist)
    mean = float(sum(Fraction(v) * c for v, c in dist) / total)
    q = [weighted_quantile(dist, x) for x in (0, Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), 1)]
    return PermutationStats(q[0], q[1], q[2], q[3], q[4], mean, b, n, exact,
                            None if exact else class_count, dist)
