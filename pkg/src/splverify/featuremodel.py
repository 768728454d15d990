"""Feature models: the set of valid products and its propositional encoding."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .errors import FeatureModelError

Product = frozenset  # frozenset[str]


# -- propositional formulas -------------------------------------------------

@dataclass(frozen=True)
class FVar:
    name: str


@dataclass(frozen=True)
class FNot:
    arg: "Formula"


@dataclass(frozen=True)
class FAnd:
    args: tuple


@dataclass(frozen=True)
class FOr:
    args: tuple


@dataclass(frozen=True)
class FConst:
    value: bool


Formula = FVar | FNot | FAnd | FOr | FConst  # type: ignore[operator]


def evaluate(formula, selected) -> bool:
    if isinstance(formula, FVar):
        return formula.name in selected
    if isinstance(formula, FNot):
        return not evaluate(formula.arg, selected)
    if isinstance(formula, FAnd):
        return all(evaluate(a, selected) for a in formula.args)
    if isinstance(formula, FOr):
        return any(evaluate(a, selected) for a in formula.args)
    return formula.value


def to_text(formula) -> str:
    if isinstance(formula, FVar):
        return formula.name
    if isinstance(formula, FNot):
        inner = to_text(formula.arg)
        return f"!({inner})" if isinstance(formula.arg, (FAnd, FOr)) else "!" + inner
    if isinstance(formula, FConst):
        return "true" if formula.value else "false"
    op = " && " if isinstance(formula, FAnd) else " || "
    if not formula.args:
        return "true" if isinstance(formula, FAnd) else "false"
    parts = []
    for a in formula.args:
        s = to_text(a)
        parts.append(f"({s})" if isinstance(a, (FAnd, FOr)) and len(a.args) > 1 else s)
    return op.join(parts)


_FTOKEN = re.compile(r"\s*(<->|->|&&|\|\||[&|!~()]|[A-Za-z_][A-Za-z0-9_]*)")


def parse_formula(text: str):
    """Parse ``A & (B | !C) -> D`` style constraints.

    Also accepts ``&&``, ``||``, ``<->`` and the sugar ``A requires B``
    (same as ``->``) and ``A excludes B``.
    """
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _FTOKEN.match(text, pos)
        if not m:
            raise FeatureModelError(f"bad constraint syntax at {text[pos:]!r}")
        tokens.append(m.group(1))
        pos = m.end()
    tokens.append("")
    i = 0

    def peek():
        return tokens[i]

    def take():
        nonlocal i
        i += 1
        return tokens[i - 1]

    def equiv():
        left = implies()
        while peek() == "<->":
            take()
            right = implies()
            left = FOr((FAnd((left, right)), FAnd((FNot(left), FNot(right)))))
        return left

    def implies():
        left = disj()
        if peek() in ("->", "requires"):
            take()
            return FOr((FNot(left), implies()))
        if peek() == "excludes":
            take()
            return FNot(FAnd((left, implies())))
        return left

    def disj():
        args = [conj()]
        while peek() in ("|", "||"):
            take()
            args.append(conj())
        return args[0] if len(args) == 1 else FOr(tuple(args))

    def conj():
        args = [neg()]
        while peek() in ("&", "&&"):
            take()
            args.append(neg())
        return args[0] if len(args) == 1 else FAnd(tuple(args))

    def neg():
        if peek() in ("!", "~"):
            take()
            return FNot(neg())
        tok = take()
        if tok == "(":
            inner = equiv()
            if take() != ")":
                raise FeatureModelError(f"unbalanced parentheses in {text!r}")
            return inner
        if tok in ("true", "false"):
            return FConst(tok == "true")
        if not tok or not re.match(r"[A-Za-z_]", tok) or tok in ("requires", "excludes"):
            raise FeatureModelError(f"unexpected {tok!r} in constraint {text!r}")
        return FVar(tok)

    f = equiv()
    if peek() != "":
        raise FeatureModelError(f"trailing input {peek()!r} in constraint {text!r}")
    return f


def formula_vars(formula) -> set:
    if isinstance(formula, FVar):
        return {formula.name}
    if isinstance(formula, FNot):
        return formula_vars(formula.arg)
    if isinstance(formula, (FAnd, FOr)):
        return set().union(*(formula_vars(a) for a in formula.args)) if formula.args else set()
    return set()


# -- feature models ---------------------------------------------------------

class FeatureModel:
    """Features in global composition order plus the explicit set of valid products.

    Constraint-form models are expanded to the explicit set on construction
    (``from_constraints``); the two forms are interchangeable afterwards.
    """

    def __init__(self, features: Sequence[str], products: Iterable[Iterable[str]]):
        self.features = tuple(features)
        if len(set(self.features)) != len(self.features):
            raise FeatureModelError("duplicate feature names")
        self._index = {f: i for i, f in enumerate(self.features)}
        prods = set()
        for p in products:
            p = frozenset(p)
            self._check_known(p)
            prods.add(p)
        self.products = frozenset(prods)
        self.constraints: tuple = ()

    @classmethod
    def from_constraints(cls, features: Sequence[str], constraints: Sequence) -> "FeatureModel":
        constraints = [parse_formula(c) if isinstance(c, str) else c for c in constraints]
        known = set(features)
        for c in constraints:
            unknown = formula_vars(c) - known
            if unknown:
                raise FeatureModelError(f"constraint mentions unknown features {sorted(unknown)}")
        valid = []
        for bits in itertools.product((True, False), repeat=len(features)):
            sel = frozenset(f for f, b in zip(features, bits) if b)
            if all(evaluate(c, sel) for c in constraints):
                valid.append(sel)
        fm = cls(features, valid)
        fm.constraints = tuple(constraints)
        return fm

    def _check_known(self, p) -> None:
        unknown = set(p) - set(self._index)
        if unknown:
            raise FeatureModelError(f"unknown features {sorted(unknown)}")

    def index(self, feature: str) -> int:
        return self._index[feature]

    def sort_key(self, p) -> tuple:
        """Canonical product order: true-first per feature in global order."""
        return tuple(0 if f in p else 1 for f in self.features)

    def ordered(self, p) -> list[str]:
        return [f for f in self.features if f in p]

    def is_valid(self, p) -> bool:
        p = frozenset(p)
        self._check_known(p)
        return p in self.products

    def enumerate_products(self, must_contain: Optional[str] = None) -> list:
        if must_contain is not None and must_contain not in self._index:
            raise FeatureModelError(f"unknown feature {must_contain!r}")
        ps = [p for p in self.products if must_contain is None or must_contain in p]
        return sorted(ps, key=self.sort_key)

    # -- encodings ------------------------------------------------------------

    def encode_dnf(self):
        """One conjunct per valid product, in canonical product order."""
        disjuncts = []
        for p in self.enumerate_products():
            lits = tuple(FVar(f) if f in p else FNot(FVar(f)) for f in self.features)
            disjuncts.append(FAnd(lits))
        return FOr(tuple(disjuncts))

    def assignment_index(self, p) -> int:
        return sum(1 << self._index[f] for f in p)

    def assignment_product(self, a: int) -> frozenset:
        return frozenset(f for i, f in enumerate(self.features) if a >> i & 1)

    def universe_mask(self) -> int:
        return (1 << (1 << len(self.features))) - 1

    def feature_mask(self, feature: str) -> int:
        """Bitmask over all 2^|F| assignments with ``feature`` set."""
        i = self._index[feature]
        mask = 0
        for a in range(1 << len(self.features)):
            if a >> i & 1:
                mask |= 1 << a
        return mask

    def products_mask(self) -> int:
        mask = 0
        for p in self.products:
            mask |= 1 << self.assignment_index(p)
        return mask

    def __repr__(self) -> str:
        return f"FeatureModel({len(self.features)} features, {len(self.products)} products)"


def simplify_dnf(fm: FeatureModel):
    """Prime-implicant cover of the valid-product set (Quine-McCluskey merge + greedy cover)."""
    n = len(fm.features)
    minterms = {tuple(1 if f in p else 0 for f in fm.features) for p in fm.products}
    if not minterms:
        return FConst(False)
    terms = set(minterms)
    primes = set()
    while terms:
        merged, used = set(), set()
        tl = sorted(terms, key=lambda t: tuple(-1 if x is None else x for x in t))
        for a, b in itertools.combinations(tl, 2):
            diff = [k for k in range(n) if a[k] != b[k]]
            if len(diff) == 1 and a[diff[0]] is not None and b[diff[0]] is not None:
                t = list(a)
                t[diff[0]] = None
                merged.add(tuple(t))
                used.update((a, b))
        primes |= terms - used
        terms = merged

    def covers(t, m):
        return all(x is None or x == y for x, y in zip(t, m))

    remaining, chosen = set(minterms), []
    order = sorted(primes, key=lambda t: (sum(x is not None for x in t), tuple(-1 if x is None else x for x in t)))
    while remaining:
        best = max(order, key=lambda t: sum(covers(t, m) for m in remaining))
        chosen.append(best)
        remaining = {m for m in remaining if not covers(best, m)}
    disj = []
    for t in chosen:
        lits = tuple(FVar(f) if x == 1 else FNot(FVar(f)) for f, x in zip(fm.features, t) if x is not None)
        disj.append(lits[0] if len(lits) == 1 else FAnd(lits) if lits else FConst(True))
    return disj[0] if len(disj) == 1 else FOr(tuple(disj))


def parse_feature_model(text: str) -> FeatureModel:
    """Read the ``.fm`` format.

    ``features: A B C`` names the features in composition order; each
    ``product: ...`` line lists one valid product explicitly; any other
    non-comment line is a constraint, and the model is their conjunction.
    Explicit products and constraints cannot be mixed.
    """
    features, products, constraints = None, [], []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("features:"):
            features = line[len("features:"):].split()
        elif line.startswith("product:"):
            products.append(line[len("product:"):].split())
        else:
            constraints.append(line)
    if features is None:
        raise FeatureModelError("feature model lacks a 'features:' line")
    if products and constraints:
        raise FeatureModelError("mix of explicit products and constraints")
    if products:
        return FeatureModel(features, products)
    return FeatureModel.from_constraints(features, constraints)
