"""Automata-based feature specifications: parsing entry points and validation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .fml import ast as A
from .fml.parser import parse_automata, parse_automaton  # noqa: F401  (public surface)


@dataclass
class SpecificationSet:
    """Feature name -> automata, in declaration order."""

    by_feature: dict = field(default_factory=dict)

    def add(self, feature: str, automata: Iterable[A.Automaton]) -> None:
        self.by_feature.setdefault(feature, []).extend(automata)

    def automata(self, features: Optional[Iterable[str]] = None) -> list[tuple[str, A.Automaton]]:
        """(feature, automaton) pairs; ``features`` fixes the feature order and filter."""
        order = list(features) if features is not None else list(self.by_feature)
        return [(f, a) for f in order for a in self.by_feature.get(f, ())]

    def owner(self, automaton: str) -> str:
        for f, autos in self.by_feature.items():
            if any(a.name == automaton for a in autos):
                return f
        raise KeyError(automaton)

    def find(self, automaton: str) -> A.Automaton:
        for autos in self.by_feature.values():
            for a in autos:
                if a.name == automaton:
                    return a
        raise KeyError(automaton)

    def names(self) -> list[str]:
        return [a.name for _, a in self.automata()]

    def __bool__(self) -> bool:
        return any(self.by_feature.values())


@dataclass
class SideEffectReport:
    automaton: str
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def _locals_of(body, params) -> set:
    names = set(params)
    for n in A.walk(body):
        if isinstance(n, A.VarDecl):
            names.add(n.name)
    return names


def _program_function_writes(fn: A.FunctionDecl, functions: dict, seen: set) -> list[str]:
    if fn.name in seen:
        return []
    seen.add(fn.name)
    out = []
    local = _locals_of(fn.body, [p.name for p in fn.params])
    for n in A.walk(fn.body):
        if isinstance(n, A.Assign):
            if isinstance(n.target, A.FieldRef):
                out.append(f"{fn.name} writes field {n.target.name!r} ({n.pos})")
            elif n.target.name not in local:
                out.append(f"{fn.name} writes global {n.target.name!r} ({n.pos})")
        elif isinstance(n, A.New):
            out.append(f"{fn.name} allocates struct {n.record} ({n.pos})")
        elif isinstance(n, A.Call) and n.name in functions:
            out += _program_function_writes(functions[n.name], functions, seen)
    return out


def check_side_effect_freedom(a: A.Automaton, program_records: Iterable[A.RecordDecl],
                              program_functions: Optional[dict] = None) -> SideEffectReport:
    """Report writes in intercept bodies that reach program state.

    Allowed targets are locals, the automaton's own globals, its shadow
    fields and fields of records it introduces. Calls into program functions
    are followed transitively when ``program_functions`` is given.
    """
    report = SideEffectReport(a.name)
    shadow_fields = {f.name for sh in a.shadows for f in sh.fields}
    auto_fields = {f.name for r in a.records for f in r.fields}
    program_fields = {f.name for r in program_records for f in r.fields}
    auto_globals = {g.name for g in a.globals}
    auto_functions = {f.name: f for f in a.functions}
    auto_records = {r.name for r in a.records}
    program_functions = program_functions or {}

    bodies = [(f"{ic.position} {ic.function}", ic.body,
               [p.name for p in ic.params if p.name != "_"] + ([ic.return_binding] if ic.return_binding else []))
              for ic in a.intercepts]
    bodies += [(f.name, f.body, [p.name for p in f.params]) for f in a.functions]
    seen_prog: set = set()
    for site, body, params in bodies:
        local = _locals_of(body, params)
        for n in A.walk(body):
            if isinstance(n, A.Assign):
                t = n.target
                if isinstance(t, A.Var):
                    if t.name not in local and t.name not in auto_globals:
                        report.violations.append(f"{site}: writes program variable {t.name!r} ({n.pos})")
                elif t.name in shadow_fields:
                    pass
                elif t.name in auto_fields and t.name not in program_fields:
                    pass
                else:
                    report.violations.append(f"{site}: writes program field {t.name!r} ({n.pos})")
            elif isinstance(n, A.New) and n.record not in auto_records:
                report.violations.append(f"{site}: allocates program struct {n.record} ({n.pos})")
            elif isinstance(n, A.Call) and n.name not in auto_functions and n.name in program_functions:
                for w in _program_function_writes(program_functions[n.name], program_functions, seen_prog):
                    report.violations.append(f"{site}: calls impure {n.name}: {w}")
    return report


def namespaced(automaton: str, name: str) -> str:
    return f"{automaton}::{name}"
