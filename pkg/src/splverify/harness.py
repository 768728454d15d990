"""Both verification strategies over a product line, with per-task costs.

Brute force composes, weaves and checks every valid product once per automaton
of each selected feature. The simulator strategy encodes the line once and
checks it against each automaton. Costs are ``states`` (instructions executed
by the checker, deterministic) or ``wallclock`` seconds; generation time
(composition, weaving, encoding) is measured separately.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional

from .checker import BOUND_EXCEEDED, SAFE, VIOLATION, CheckOptions, Verdict, check
from .composer import compose, weave
from .errors import SplError
from .ordering import PermutationStats, analyze_orderings
from .productline import Interaction, ProductLine
from .varenc import var_enc, weave_simulator

COSTS = ("states", "wallclock")


def _check_cost(cost: str) -> None:
    if cost not in COSTS:
        raise ValueError(f"unknown cost measure {cost!r}; expected one of {COSTS}")


def cost_of(metrics, cost: str):
    _check_cost(cost)
    return metrics.states_explored if cost == "states" else metrics.wall_time


def combine(verdicts: Iterable[Verdict]) -> Verdict:
    """One verdict for several automata: the first violation, else a bound, else SAFE."""
    bound = None
    for v in verdicts:
        if v.violation:
            return v
        if v.kind == BOUND_EXCEEDED and bound is None:
            bound = v
    return bound or Verdict(SAFE)


@dataclass
class InteractionQuery:
    """Checks needed to decide one automaton: every product selecting its owner."""

    automaton: str
    feature: str
    candidates: list

    @classmethod
    def for_automaton(cls, line: ProductLine, automaton: str) -> "InteractionQuery":
        feature = line.specs.owner(automaton)
        return cls(automaton, feature, line.fm.enumerate_products(must_contain=feature))


@dataclass
class RuntimeTable:
    query: InteractionQuery
    entries: dict = field(default_factory=dict)      # product -> (Verdict, cost)
    generation: dict = field(default_factory=dict)   # product -> seconds

    @property
    def automaton(self) -> str:
        return self.query.automaton

    @property
    def feature(self) -> str:
        return self.query.feature

    def pairs(self) -> list:
        """(cost, violates) per candidate, in candidate order."""
        return [(self.entries[p][1], self.entries[p][0].violation) for p in self.query.candidates]

    @property
    def n(self) -> int:
        return len(self.query.candidates)

    @property
    def b(self) -> int:
        return sum(v.violation for v, _ in self.entries.values())

    @property
    def total(self):
        return sum(c for _, c in self.entries.values())

    @property
    def maximum(self):
        return max(c for _, c in self.entries.values())

    def violating_products(self) -> list:
        return [p for p in self.query.candidates if self.entries[p][0].violation]

    @property
    def complete(self) -> bool:
        return all(p in self.entries for p in self.query.candidates)


@dataclass
class BruteForceResult:
    line: ProductLine
    tables: dict = field(default_factory=dict)        # automaton -> RuntimeTable
    cost: str = "states"

    @property
    def verdicts(self) -> dict:
        """(product, feature) -> combined verdict over that feature's automata."""
        out: dict = {}
        for auto, tab in self.tables.items():
            for p, (v, _) in tab.entries.items():
                out.setdefault((p, tab.feature), []).append(v)
        return {k: combine(vs) for k, vs in out.items()}

    def feature_verdicts(self) -> dict:
        """feature -> verdict over all products (the first violation in product order)."""
        per: dict = {}
        order = {p: i for i, p in enumerate(self.line.fm.enumerate_products())}
        for (p, f), v in sorted(self.verdicts.items(), key=lambda kv: order[kv[0][0]]):
            per.setdefault(f, []).append(v)
        return {f: combine(vs) for f, vs in per.items()}

    def automaton_violates(self, automaton: str) -> bool:
        return self.tables[automaton].b > 0

    @property
    def ok(self) -> bool:
        return all(v.safe for v in self.verdicts.values())


@dataclass
class SimulatorRun:
    automaton: str
    feature: str
    verdict: Verdict
    cost: float
    metrics: object
    weave_time: float


@dataclass
class SimulatorResult:
    line: ProductLine
    runs: dict = field(default_factory=dict)          # automaton -> SimulatorRun
    encode_time: float = 0.0
    cost: str = "states"

    def feature_verdicts(self) -> dict:
        per: dict = {}
        for run in self.runs.values():
            per.setdefault(run.feature, []).append(run.verdict)
        return {f: combine(vs) for f, vs in per.items()}

    @property
    def ok(self) -> bool:
        return all(r.verdict.safe for r in self.runs.values())


def _automata(line: ProductLine, automata) -> list:
    pairs = line.specs.automata(line.fm.features)
    if automata is None:
        return pairs
    wanted = set(automata)
    unknown = wanted - {a.name for _, a in pairs}
    if unknown:
        raise SplError(f"unknown automata {sorted(unknown)}")
    return [(f, a) for f, a in pairs if a.name in wanted]


def _check_product(line: ProductLine, product, names: list, opts: CheckOptions, cost: str) -> list:
    """Check one product against the named automata: [(automaton, Verdict, cost, gen seconds)]."""
    t0 = time.perf_counter()
    try:
        prog = compose(line.modules, product, line.fm, line.entry)
    except SplError as exc:
        raise type(exc)(f"product {{{', '.join(line.fm.ordered(product))}}}: {exc}") from exc
    base_gen = time.perf_counter() - t0
    out = []
    for name in names:
        t0 = time.perf_counter()
        try:
            woven = weave(prog, line.specs, product, automata=[name], feature_order=line.fm.features)
        except SplError as exc:
            raise type(exc)(f"product {{{', '.join(line.fm.ordered(product))}}}: {exc}") from exc
        gen = base_gen + time.perf_counter() - t0
        verdict, metrics = check(woven, opts)
        out.append((name, verdict, cost_of(metrics, cost), gen))
    return out


def _product_task(args):
    return _check_product(*args)


def verify_brute_force(line: ProductLine, opts: Optional[CheckOptions] = None, cost: str = "states",
                       automata=None, workers: int = 1) -> BruteForceResult:
    """Check every valid product against the automata of each selected feature.

    With ``workers > 1`` products are checked in separate processes; results
    do not depend on the number of workers.
    """
    opts = opts or CheckOptions()
    _check_cost(cost)
    chosen = _automata(line, automata)
    result = BruteForceResult(line, cost=cost)
    for f, a in chosen:
        result.tables[a.name] = RuntimeTable(InteractionQuery.for_automaton(line, a.name))
    tasks = []
    for p in line.fm.enumerate_products():
        names = [a.name for f, a in chosen if f in p]
        if names:
            tasks.append((line, p, names, opts, cost))
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_product_task, tasks))
    else:
        outcomes = [_check_product(*t) for t in tasks]
    for (_, p, _, _, _), rows in zip(tasks, outcomes):
        for name, verdict, c, gen in rows:
            tab = result.tables[name]
            tab.entries[p] = (verdict, c)
            tab.generation[p] = gen
    return result


def verify_simulator(line: ProductLine, opts: Optional[CheckOptions] = None, cost: str = "states",
                     automata=None, restrict: bool = True) -> SimulatorResult:
    """Encode the line once and check the simulator against each automaton.

    Hooks of an automaton only run when its owning feature is selected, so
    with ``restrict`` exploration is limited to selections containing that
    feature; the verdict is the same either way.
    """
    opts = opts or CheckOptions()
    _check_cost(cost)
    t0 = time.perf_counter()
    sim = var_enc(line.modules, line.fm, line.entry)
    result = SimulatorResult(line, encode_time=time.perf_counter() - t0, cost=cost)
    for f, a in _automata(line, automata):
        t0 = time.perf_counter()
        woven = weave_simulator(sim, line.specs, automata=[a.name])
        wt = time.perf_counter() - t0
        run_opts = opts
        if restrict:
            run_opts = replace(opts, assume=tuple(opts.assume) + (f,))
        verdict, metrics = check(woven, run_opts)
        result.runs[a.name] = SimulatorRun(a.name, f, verdict, cost_of(metrics, cost), metrics, wt)
    return result


# -- comparison ---------------------------------------------------------------

@dataclass
class ComparisonRow:
    automaton: str
    feature: str
    interaction: Optional[Interaction]
    b: int
    n: int
    brute_total: float
    brute_max: float
    simulator_cost: float
    simulator_verdict: str
    stats: Optional[PermutationStats]
    brute_generation: float
    simulator_generation: float

    @property
    def label(self) -> str:
        return f"#{self.interaction.id}" if self.interaction else self.automaton

    def to_dict(self) -> dict:
        return {"automaton": self.automaton, "feature": self.feature,
                "interaction": self.interaction.id if self.interaction else None,
                "pair": list(self.interaction.features) if self.interaction else None,
                "b": self.b, "n": self.n, "brute_total": self.brute_total,
                "brute_max": self.brute_max, "simulator_cost": self.simulator_cost,
                "simulator_verdict": self.simulator_verdict,
                "stats": self.stats.to_dict() if self.stats else None,
                "brute_generation": self.brute_generation,
                "simulator_generation": self.simulator_generation}


@dataclass
class ComparisonReport:
    rows: list = field(default_factory=list)
    cost: str = "states"
    encode_time: float = 0.0

    @property
    def absence(self) -> list:
        """Rows of automata no product violates: Σ t over candidates vs the simulator."""
        return [r for r in self.rows if r.b == 0]

    @property
    def detection(self) -> list:
        rows = [r for r in self.rows if r.b > 0]
        return sorted(rows, key=lambda r: (r.interaction is None, r.interaction.id if r.interaction else 0))

    def single(self, automaton: Optional[str] = None) -> Optional[ComparisonRow]:
        """The row for a single-interaction chart; by default the rarest violation."""
        rows = self.detection
        if automaton is not None:
            rows = [r for r in self.rows if r.automaton == automaton]
        if not rows:
            return None
        return min(rows, key=lambda r: (r.b / r.n, r.interaction.id if r.interaction else 1 << 30))

    def unexpected(self) -> list:
        return [r for r in self.detection if r.interaction is None]

    def to_dict(self) -> dict:
        return {"cost": self.cost, "encode_time": self.encode_time,
                "absence": [r.to_dict() for r in self.absence],
                "detection": [r.to_dict() for r in self.detection]}


def compare_strategies(line: ProductLine, opts: Optional[CheckOptions] = None, cost: str = "states",
                       exact_limit: int = 10, class_count: int = 5,
                       brute: Optional[BruteForceResult] = None,
                       simulator: Optional[SimulatorResult] = None) -> ComparisonReport:
    """Per automaton: brute-force totals and ordering statistics next to the simulator cost."""
    brute = brute or verify_brute_force(line, opts, cost)
    simulator = simulator or verify_simulator(line, opts, cost)
    report = ComparisonReport(cost=cost, encode_time=simulator.encode_time)
    for name, tab in brute.tables.items():
        run = simulator.runs.get(name)
        if run is None or not tab.entries:
            continue
        stats = analyze_orderings(tab, exact_limit, class_count) if tab.b else None
        report.rows.append(ComparisonRow(
            name, tab.feature, line.interaction_for(name), tab.b, tab.n, tab.total, tab.maximum,
            run.cost, run.verdict.kind, stats, sum(tab.generation.values()),
            simulator.encode_time + run.weave_time))
    return report


__all__ = ["COSTS", "InteractionQuery", "RuntimeTable", "BruteForceResult", "SimulatorRun",
           "SimulatorResult", "ComparisonRow", "ComparisonReport", "PermutationStats",
           "analyze_orderings", "verify_brute_force", "verify_simulator", "compare_strategies",
           "combine", "cost_of", "VIOLATION", "SAFE", "BOUND_EXCEEDED"]
