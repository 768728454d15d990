"""Bounded explicit-state reachability of ``fail`` in woven programs and simulators.

Exploration is depth-first: ``if`` true-branch first, ``nondet`` low to high.
In an unconfigured simulator the feature variables start out as lifted
booleans (:class:`Cond`) covering every assignment; every explored state
carries the set of assignments it stands for as a bitmask. A branch on a
feature condition splits that set; both sides run to the end of the branch
and identical resulting states are merged again, so code that does not
depend on a feature is explored once for all products.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

from ..errors import ExecutionError, ReplayDivergence, SplError
from ..fml.program import Program
from .lowering import (ALLOC, BRANCH, CALL, FAIL, JUMP, LOOP, NONDET, RETURN, SET_GLOBAL,
                       SET_LOCAL, STORE, Cond, Ref, lower)

SAFE = "SAFE"
VIOLATION = "VIOLATION"
BOUND_EXCEEDED = "BOUND_EXCEEDED"


@dataclass
class CheckOptions:
    unroll_bound: int = 64
    call_depth: int = 64
    heap_limit: int = 4096
    dedup: bool = True
    max_states: Optional[int] = None
    # simulators only: explore just the selections containing these features
    assume: tuple = ()


@dataclass
class Step:
    index: int
    location: str
    statement: str
    feature: str
    condition: Optional[str] = None

    def to_dict(self) -> dict:
        return {"index": self.index, "location": self.location, "statement": self.statement,
                "feature": self.feature, "condition": self.condition}


@dataclass
class ErrorPath:
    steps: list = field(default_factory=list)
    choices: tuple = ()
    selection: Optional[frozenset] = None
    automaton: str = ""
    site: str = ""

    def to_dict(self, feature_order=None) -> dict:
        sel = None
        if self.selection is not None:
            sel = [f for f in feature_order if f in self.selection] if feature_order else sorted(self.selection)
        return {"automaton": self.automaton, "site": self.site, "choices": list(self.choices),
                "selection": sel, "steps": [s.to_dict() for s in self.steps]}


@dataclass
class Verdict:
    kind: str
    automaton: Optional[str] = None
    site: Optional[str] = None
    selection: Optional[frozenset] = None
    path: Optional[ErrorPath] = None
    bound: Optional[str] = None

    @property
    def safe(self) -> bool:
        return self.kind == SAFE

    @property
    def violation(self) -> bool:
        return self.kind == VIOLATION

    def same_outcome(self, other: "Verdict") -> bool:
        return (self.kind, self.automaton) == (other.kind, other.automaton)

    def to_dict(self, feature_order=None) -> dict:
        sel = None
        if self.selection is not None:
            sel = [f for f in feature_order if f in self.selection] if feature_order else sorted(self.selection)
        return {"verdict": self.kind, "automaton": self.automaton, "site": self.site,
                "selection": sel, "bound": self.bound,
                "path": self.path.to_dict(feature_order) if self.path else None}


@dataclass
class CheckMetrics:
    states_explored: int = 0
    unique_states: int = 0
    wall_time: float = 0.0
    peak_frontier: int = 0

    def to_dict(self) -> dict:
        return {"states_explored": self.states_explored, "unique_states": self.unique_states,
                "wall_time": self.wall_time, "peak_frontier": self.peak_frontier}


class _Violation(Exception):
    def __init__(self, mask, hist, automaton, site):
        self.mask, self.hist, self.automaton, self.site = mask, hist, automaton, site


class _Abort(Exception):
    pass


def _copy_state(st):
    frames, G, H = st
    return ([[f[0], f[1], f[2][:], f[3]] for f in frames], G[:], [r[:] for r in H])


def canonical_key(st) -> tuple:
    """Hashable state identity with heap ids renumbered by reachability order."""
    frames, G, H = st
    ren: dict = {}
    order: list = []

    def canon(v):
        if type(v) is Ref:
            i = ren.get(v.id)
            if i is None:
                i = len(order)
                ren[v.id] = i
                order.append(v.id)
            return ("r", i)
        return v

    gk = tuple([canon(v) for v in G])
    fk = tuple((fr[0].index, fr[1], tuple([canon(v) for v in fr[2]]), fr[3]) for fr in frames)
    hk = []
    i = 0
    while i < len(order):
        hk.append(tuple([canon(v) for v in H[order[i]]]))
        i += 1
    return gk, fk, tuple(hk)


class Machine:
    """Executes a lowered program; shared by the explorer and by replay."""

    def __init__(self, program: Program, opts: CheckOptions, lifted: bool):
        self.program = program
        self.opts = opts
        self.features = tuple(program.features)
        self.lifted = lifted and bool(program.feature_vars) and program.selection is None
        n = len(self.features)
        self.universe = ((1 << (1 << n)) - 1) if self.lifted else 1
        self.lp = lower(program, self.universe)
        self.funcs = self.lp.functions
        self.steps = 0

    def feature_mask(self, i: int) -> int:
        mask = 0
        for a in range(1 << len(self.features)):
            if a >> i & 1:
                mask |= 1 << a
        return mask

    def initial_mask(self) -> int:
        mask = self.universe
        if self.lifted:
            for f in self.opts.assume:
                if f not in self.features:
                    raise SplError(f"cannot assume unknown feature {f}")
                mask &= self.feature_mask(self.features.index(f))
        return mask

    def initial_state(self, selection: Optional[frozenset] = None):
        G = list(self.lp.global_inits)
        if self.program.feature_vars:
            for i, f in enumerate(self.features):
                slot = self.lp.global_index[self.program.feature_vars[f]]
                if selection is not None:
                    G[slot] = f in selection
                elif self.lifted:
                    G[slot] = Cond(self.feature_mask(i), self.universe)
        entry = self.lp.entry
        return ([[entry, 0, list(entry.local_defaults), None]], G, [])

    def run(self, st, stop=None, trace=None):
        """Run until an event; returns a tuple whose first item names the event."""
        frames, G, H = st
        funcs = self.funcs
        opts = self.opts
        call_depth, heap_limit, unroll = opts.call_depth, opts.heap_limit, opts.unroll_bound
        max_states = opts.max_states
        steps = self.steps
        try:
            while True:
                fr = frames[-1]
                if stop is not None:
                    d = len(frames) - 1
                    if d < stop[0] or (d == stop[0] and fr[1] == stop[1]):
                        return ("stop",)
                code = fr[0]
                pc = fr[1]
                ins = code.instrs[pc]
                op = ins.op
                a = ins.args
                L = fr[2]
                steps += 1
                if max_states is not None and steps > max_states:
                    raise _Abort()
                if trace is not None:
                    trace(len(frames), code, ins, L, G, H)
                if op == SET_LOCAL:
                    L[a[0]] = a[1](L, G, H)
                    fr[1] = pc + 1
                elif op == CALL:
                    if len(frames) >= call_depth:
                        return ("bound", "call-depth")
                    callee = funcs[a[1]]
                    nl = list(callee.local_defaults)
                    for i, f in enumerate(a[2]):
                        nl[i] = f(L, G, H)
                    fr[1] = pc + 1
                    frames.append([callee, 0, nl, a[0]])
                elif op == RETURN:
                    v = a[0](L, G, H) if a[0] is not None else None
                    frames.pop()
                    if not frames:
                        return ("end",)
                    dst = fr[3]
                    if dst is not None:
                        if dst[0] == "local":
                            frames[-1][2][dst[1]] = v
                        else:
                            G[dst[1]] = v
                elif op == BRANCH:
                    c = a[0](L, G, H)
                    if type(c) is Cond:
                        return ("split", c, a[1], a[2])
                    fr[1] = pc + 1 if c else a[1]
                elif op == JUMP:
                    fr[1] = a[0]
                elif op == STORE:
                    r = a[0](L, G, H)
                    if r is None:
                        raise ExecutionError(f"{ins.pos}: null dereference writing ->{a[3]}")
                    H[r.id][a[1]] = a[2](L, G, H)
                    fr[1] = pc + 1
                elif op == SET_GLOBAL:
                    G[a[0]] = a[1](L, G, H)
                    fr[1] = pc + 1
                elif op == NONDET:
                    return ("nondet", a[0], a[1], a[2])
                elif op == ALLOC:
                    if len(H) >= heap_limit:
                        return ("bound", "heap")
                    H.append([a[1], *a[2]])
                    ref = Ref(len(H) - 1)
                    if a[0][0] == "local":
                        L[a[0][1]] = ref
                    else:
                        G[a[0][1]] = ref
                    fr[1] = pc + 1
                elif op == LOOP:
                    n = L[a[0]] + 1
                    L[a[0]] = n
                    if n > a[1]:
                        return ("bound", "loop")
                    if n > unroll:
                        return ("bound", "unroll")
                    fr[1] = pc + 1
                elif op == FAIL:
                    return ("fail", a[0], a[1])
                else:  # pragma: no cover
                    raise SplError(f"bad opcode {op}")
        finally:
            self.steps = steps


def _set_dst(st, dst, value) -> None:
    frames, G, _ = st
    if dst is None:
        return
    if dst[0] == "local":
        frames[-1][2][dst[1]] = value
    else:
        G[dst[1]] = value


class Explorer:
    def __init__(self, program: Program, opts: CheckOptions):
        self.m = Machine(program, opts, lifted=True)
        self.opts = opts
        self.visited: dict = {}
        self.bound_hit: Optional[str] = None
        self.peak = 0

    def _dedup(self, st, mask: int) -> int:
        """Return the part of ``mask`` not yet explored from this state."""
        if not self.opts.dedup:
            return mask
        key = canonical_key(st)
        seen = self.visited.get(key, 0)
        rest = mask & ~seen
        if rest:
            self.visited[key] = seen | mask
        return rest

    def explore(self, work: list, stop=None) -> list:
        collected = []
        while work:
            if len(work) > self.peak:
                self.peak = len(work)
            st, mask, hist = work.pop()
            ev = self.m.run(st, stop)
            kind = ev[0]
            if kind == "end":
                continue
            if kind == "stop":
                collected.append((st, mask, hist))
            elif kind == "fail":
                raise _Violation(mask, hist, ev[1], ev[2])
            elif kind == "bound":
                if self.bound_hit is None:
                    self.bound_hit = ev[1]
            elif kind == "nondet":
                _, dst, lo, hi = ev
                mask = self._dedup(st, mask)
                if not mask:
                    continue
                succ = []
                for v in range(lo, hi + 1):
                    s2 = _copy_state(st) if v < hi else st
                    _set_dst(s2, dst, v)
                    s2[0][-1][1] += 1
                    succ.append((s2, mask, ("nd", hist, v)))
                work.extend(reversed(succ))
            elif kind == "split":
                _, c, false_pc, join = ev
                frames = st[0]
                depth = len(frames) - 1
                pc = frames[-1][1]
                m_true, m_false = mask & c.mask, mask & ~c.mask
                if not m_false or not m_true:
                    frames[-1][1] = pc + 1 if m_true else false_pc
                    work.append((st, mask, hist))
                    continue
                sides = []
                s_true = _copy_state(st)
                s_true[0][-1][1] = pc + 1
                sides += self.explore([(s_true, m_true, hist)], (depth, join))
                st[0][-1][1] = false_pc
                sides += self.explore([(st, m_false, hist)], (depth, join))
                merged = self._merge(sides)
                work.extend(reversed(merged))
        return collected

    def _merge(self, states: list) -> list:
        groups: dict = {}
        order = []
        for st, mask, hist in states:
            key = canonical_key(st)
            g = groups.get(key)
            if g is None:
                groups[key] = [st, mask, [(hist, mask)]]
                order.append(key)
            else:
                g[1] |= mask
                g[2].append((hist, mask))
        out = []
        for key in order:
            st, mask, alts = groups[key]
            hist = alts[0][0] if len(alts) == 1 else ("merge", tuple(alts))
            if self.opts.dedup:
                seen = self.visited.get(key, 0)
                rest = mask & ~seen
                if not rest:
                    continue
                self.visited[key] = seen | mask
                mask = rest
            out.append((st, mask, hist))
        return out


def _choices_for(hist, assignment: int) -> tuple:
    out = []
    while hist is not None:
        if hist[0] == "nd":
            out.append(hist[2])
            hist = hist[1]
        else:
            for h, m in hist[1]:
                if m >> assignment & 1:
                    hist = h
                    break
            else:  # pragma: no cover
                raise SplError("counterexample reconstruction lost its product")
    return tuple(reversed(out))


def _pick_assignment(mask: int, n: int) -> int:
    """Canonical assignment in ``mask``: features true-first in global order."""
    best, best_key = None, None
    a, bit = 0, mask
    while bit:
        if bit & 1:
            key = tuple(0 if a >> i & 1 else 1 for i in range(n))
            if best_key is None or key < best_key:
                best, best_key = a, key
        bit >>= 1
        a += 1
    return best


def check(program: Program, opts: Optional[CheckOptions] = None):
    """Decide whether a ``fail`` is reachable; returns ``(Verdict, CheckMetrics)``."""
    opts = opts or CheckOptions()
    t0 = time.perf_counter()
    ex = Explorer(program, opts)
    m = ex.m
    verdict = None
    try:
        ex.explore([(m.initial_state(), m.initial_mask(), None)])
    except _Violation as v:
        n = len(m.features)
        if m.lifted:
            a = _pick_assignment(v.mask, n)
            selection = frozenset(f for i, f in enumerate(m.features) if a >> i & 1)
        else:
            a, selection = 0, program.selection
        choices = _choices_for(v.hist, a)
        path = error_path(program, choices, selection, opts)
        verdict = Verdict(VIOLATION, v.automaton, v.site, selection, path)
    except _Abort:
        verdict = Verdict(BOUND_EXCEEDED, bound="states")
    if verdict is None:
        verdict = Verdict(BOUND_EXCEEDED, bound=ex.bound_hit) if ex.bound_hit else Verdict(SAFE)
    metrics = CheckMetrics(m.steps, len(ex.visited), time.perf_counter() - t0, ex.peak)
    return verdict, metrics


# -- concrete runs: counterexamples, replay, and the enumeration oracle -------

def _concrete(program: Program, choices, selection, opts: CheckOptions, record: bool):
    m = Machine(program, opts, lifted=False)
    st = m.initial_state(selection if program.feature_vars else None)
    steps: list[Step] = []
    last: dict = {}

    def trace(depth, code, ins, L, G, H):
        key = (code.name, ins.stmt_id)
        if ins.op == BRANCH:
            c = ins.args[0](L, G, H)
            steps.append(Step(len(steps) + 1, str(ins.pos) if ins.pos.line else "-", ins.text, code.automaton or code.feature,
                              "true" if c else "false"))
        elif last.get(depth) != key:
            steps.append(Step(len(steps) + 1, str(ins.pos) if ins.pos.line else "-", ins.text, code.automaton or code.feature))
        last[depth] = key
        if ins.op == CALL:
            last.pop(depth + 1, None)

    it = iter(choices)
    while True:
        ev = m.run(st, None, trace if record else None)
        if ev[0] == "nondet":
            _, dst, lo, hi = ev
            try:
                v = next(it)
            except StopIteration:
                return ("diverged", "ran out of recorded choices"), steps
            if not lo <= v <= hi:
                return ("diverged", f"choice {v} outside nondet({lo}, {hi})"), steps
            _set_dst(st, dst, v)
            st[0][-1][1] += 1
            continue
        if ev[0] == "split":  # pragma: no cover - concrete runs never see lifted values
            raise SplError("lifted value in a concrete run")
        return ev, steps


def error_path(program: Program, choices, selection, opts: Optional[CheckOptions] = None) -> ErrorPath:
    opts = opts or CheckOptions()
    ev, steps = _concrete(program, choices, selection, opts, record=True)
    if ev[0] != "fail":
        raise SplError(f"counterexample does not reach fail ({ev})")
    return ErrorPath(steps, tuple(choices), selection, ev[1], ev[2])


def replay(program: Program, path: ErrorPath, opts: Optional[CheckOptions] = None) -> Verdict:
    """Re-execute a counterexample; raises ReplayDivergence unless it hits the same fail."""
    opts = opts or CheckOptions()
    try:
        ev, steps = _concrete(program, path.choices, path.selection, opts, record=True)
    except (ExecutionError, SplError) as exc:
        raise ReplayDivergence(f"replay failed: {exc}") from exc
    if ev[0] != "fail" or ev[1] != path.automaton or ev[2] != path.site:
        raise ReplayDivergence(f"replay ended with {ev[0]} instead of fail in {path.automaton}")
    if [(s.location, s.statement, s.condition) for s in steps] != \
            [(s.location, s.statement, s.condition) for s in path.steps]:
        raise ReplayDivergence("replay took a different path")
    return Verdict(VIOLATION, ev[1], ev[2], path.selection, path)


def enumerate_executions(program: Program, opts: Optional[CheckOptions] = None, limit: int = 100000):
    """Naive oracle: run every nondet choice sequence (and every selection) concretely.

    Returns the set of outcomes: ``("fail", automaton)``, ``("end",)`` or
    ``("bound", kind)``.
    """
    opts = opts or CheckOptions()
    outcomes = set()
    selections = [None]
    if program.feature_vars and program.selection is None:
        import itertools
        selections = [frozenset(f for f, b in zip(program.features, bits) if b)
                      for bits in itertools.product((True, False), repeat=len(program.features))]
    elif program.selection is not None:
        selections = [program.selection]
    for sel in selections:
        pending = [()]
        while pending:
            prefix = pending.pop()
            if len(outcomes) > limit:
                raise SplError("oracle limit exceeded")
            m = Machine(program, opts, lifted=False)
            st = m.initial_state(sel if program.feature_vars else None)
            idx = 0
            while True:
                ev = m.run(st)
                if ev[0] != "nondet":
                    break
                _, dst, lo, hi = ev
                if idx < len(prefix):
                    v = prefix[idx]
                else:
                    v = lo
                    pending.extend(prefix[:idx] + (w,) for w in range(hi, lo, -1))
                    prefix = prefix + (lo,)
                idx += 1
                _set_dst(st, dst, v)
                st[0][-1][1] += 1
            if ev[0] == "fail":
                outcomes.add(("fail", ev[1]))
            elif ev[0] == "bound":
                outcomes.add(("bound", ev[1]))
            else:
                outcomes.add(("end",))
    return outcomes
