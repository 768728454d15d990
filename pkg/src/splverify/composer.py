"""Superimposition of feature modules and weaving of automata into programs."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Optional

from .errors import CompositionError, WeaveError
from .featuremodel import FeatureModel
from .fml import ast as A
from .fml.program import HookInfo, Program
from .speclang import SpecificationSet, namespaced


def fresh(base: str, taken) -> str:
    if base not in taken:
        return base
    k = 2
    while f"{base}_{k}" in taken:
        k += 1
    return f"{base}_{k}"


@dataclass
class Merged:
    """Records/globals merged over a module list, plus every version of each function."""

    records: dict = field(default_factory=dict)
    globals: dict = field(default_factory=dict)
    versions: dict = field(default_factory=dict)  # name -> [(feature, FunctionDecl)] bottom-up
    provenance: dict = field(default_factory=dict)


def merge(modules: Iterable[A.FeatureModule]) -> Merged:
    """Merge records and globals; collect function versions in composition order.

    Raises CompositionError on field/global collisions, on signature
    mismatches between versions of one function (alternative definitions)
    and on ``original`` with nothing below it.
    """
    m = Merged()
    for mod in modules:
        for rec in mod.records:
            if rec.name not in m.records:
                m.records[rec.name] = rec
                m.provenance[f"record:{rec.name}"] = mod.name
            else:
                old = m.records[rec.name]
                names = {f.name for f in old.fields}
                for f in rec.fields:
                    if f.name in names:
                        raise CompositionError(
                            f"feature {mod.name} re-introduces field {rec.name}.{f.name} "
                            f"(from {m.provenance[f'field:{rec.name}.{f.name}']})")
                m.records[rec.name] = replace(old, fields=old.fields + rec.fields)
            for f in rec.fields:
                m.provenance[f"field:{rec.name}.{f.name}"] = mod.name
        for g in mod.globals:
            if g.name in m.globals:
                raise CompositionError(f"feature {mod.name} re-introduces global {g.name}")
            m.globals[g.name] = g
            m.provenance[f"global:{g.name}"] = mod.name
        for fn in mod.functions:
            chain = m.versions.get(fn.name)
            if chain is None:
                if fn.calls_original:
                    raise CompositionError(
                        f"unresolved original: feature {mod.name} refines {fn.name}, "
                        f"which no earlier feature defines")
                m.versions[fn.name] = [(mod.name, fn)]
            else:
                if chain[0][1].signature != fn.signature:
                    raise CompositionError(
                        f"alternative definition: feature {mod.name} defines {fn.name} with a "
                        f"signature differing from feature {chain[0][0]}'s")
                chain.append((mod.name, fn))
    clash = set(m.globals) & set(m.versions)
    if clash:
        raise CompositionError(f"names used both as global and function: {sorted(clash)}")
    return m


def replace_original(body, target: str):
    def fn(node):
        if isinstance(node, A.Original):
            return A.Call(target, node.args, node.pos)
        return node
    return A.map_tree(body, fn)


def sort_modules(modules: Iterable[A.FeatureModule]) -> list[A.FeatureModule]:
    return sorted(modules, key=lambda m: m.order_index)


def compose(modules: Iterable[A.FeatureModule], product, fm: Optional[FeatureModel] = None,
            entry: str = "main") -> Program:
    """Superimpose the selected modules in composition order.

    The top version of each function keeps its name; each lower version
    reached through ``original`` is renamed ``<function>_<feature>``.
    """
    product = frozenset(product)
    modules = sort_modules(modules)
    known = {m.name for m in modules}
    if product - known:
        raise CompositionError(f"unknown features {sorted(product - known)}")
    if fm is not None and not fm.is_valid(product):
        raise CompositionError(f"invalid product {sorted(product)}")
    selected = [m for m in modules if m.name in product]
    merged = merge(selected)
    prog = Program(records=dict(merged.records), globals=dict(merged.globals), entry=entry,
                   provenance=dict(merged.provenance), selection=product)
    taken = set(merged.versions) | set(merged.globals)
    for name, chain in merged.versions.items():
        k = len(chain) - 1
        current = name
        while True:
            feature, fn = chain[k]
            if fn.calls_original:
                lower = fresh(f"{name}_{chain[k - 1][0]}", taken)
                taken.add(lower)
                body = replace_original(fn.body, lower)
            else:
                lower, body = None, fn.body
            prog.functions[current] = replace(fn, name=current, body=body)
            prog.provenance[f"function:{current}"] = feature
            if lower is None:
                break
            k -= 1
            current = lower
    return prog


# -- weaving ------------------------------------------------------------------

def _rename_automaton_code(a: A.Automaton, node, prog: Program, hooked: set):
    """Namespace automaton state and route calls to hooked functions to their bodies."""
    gnames = {g.name for g in a.globals}
    fnames = {f.name for f in a.functions}
    rnames = {r.name for r in a.records}
    shadow = {f.name for sh in a.shadows for f in sh.fields}

    def ty(t: A.Type) -> A.Type:
        if t.kind == "ref" and t.record in rnames:
            return A.ref(namespaced(a.name, t.record))
        return t

    def fn(n):
        if isinstance(n, A.Var) and n.name in gnames:
            return replace(n, name=namespaced(a.name, n.name))
        if isinstance(n, A.Call):
            if n.name in fnames:
                return replace(n, name=namespaced(a.name, n.name))
            if n.name in hooked:
                return replace(n, name=f"{n.name}::body")
        if isinstance(n, A.FieldRef) and n.name in shadow:
            return replace(n, name=namespaced(a.name, n.name))
        if isinstance(n, A.New) and n.record in rnames:
            return replace(n, record=namespaced(a.name, n.record))
        if isinstance(n, (A.VarDecl, A.Param, A.FieldDecl, A.GlobalDecl)):
            return replace(n, type=ty(n.type))
        if isinstance(n, A.FunctionDecl):
            return replace(n, ret=ty(n.ret))
        return n
    return A.map_tree(node, fn)


def _signature_matches(ic: A.Intercept, target: A.FunctionDecl) -> bool:
    if len(ic.params) != len(target.params) or ic.ret != target.ret:
        return False
    return all(ep.type == p.type for ep, p in zip(ic.params, target.params))


def weave_automata(prog: Program, automata: list, guards: Optional[dict] = None) -> Program:
    """Weave ``(feature, automaton)`` pairs into a copy of ``prog``.

    Each intercept becomes a hook function; every intercepted function ``m``
    is renamed ``m::body`` and replaced by a wrapper that runs BEFORE hooks,
    the body, then AFTER hooks, all in automaton declaration order. With
    ``guards`` (feature -> feature variable), each hook call is wrapped in
    ``if (<feature variable>)``.
    """
    out = prog.copy()
    program_fields = {f.name for r in prog.records.values() for f in r.fields}
    hooked: dict = {}  # function -> [(position, hook name, feature, binding)]
    for feature, a in automata:
        for ic in a.intercepts:
            hooked.setdefault(ic.function, [])
    for feature, a in automata:
        for sh in a.shadows:
            rec = out.records.get(sh.record)
            if rec is None:
                raise WeaveError(f"{a.name}: shadow on unknown struct {sh.record}")
            for f in sh.fields:
                if f.name in program_fields:
                    raise WeaveError(f"{a.name}: shadow field {f.name} collides with a program field name")
            existing = {f.name for f in rec.fields}
            added = tuple(replace(f, name=namespaced(a.name, f.name)) for f in sh.fields)
            dup = existing & {f.name for f in added}
            if dup:
                raise WeaveError(f"{a.name}: duplicate shadow fields {sorted(dup)}")
            out.records[sh.record] = replace(rec, fields=rec.fields + added)
            for f in added:
                out.provenance[f"field:{sh.record}.{f.name}"] = f"automaton:{a.name}"
        for d in a.intro_decls:
            d2 = _rename_automaton_code(a, d, out, set(hooked))
            if isinstance(d, A.RecordDecl):
                d2 = replace(d2, name=namespaced(a.name, d.name))
                out.records[d2.name] = d2
                out.provenance[f"record:{d2.name}"] = f"automaton:{a.name}"
            elif isinstance(d, A.GlobalDecl):
                d2 = replace(d2, name=namespaced(a.name, d.name))
                out.globals[d2.name] = d2
                out.provenance[f"global:{d2.name}"] = f"automaton:{a.name}"
            else:
                d2 = replace(d2, name=namespaced(a.name, d.name))
                out.functions[d2.name] = d2
                out.provenance[f"function:{d2.name}"] = f"automaton:{a.name}"
                out.hooks[d2.name] = HookInfo(a.name, feature, "helper", d.name, -1)
        for k, ic in enumerate(a.intercepts):
            target = prog.functions.get(ic.function)
            if target is None:
                raise WeaveError(f"{a.name}: intercepted function {ic.function} is absent from the program")
            if not _signature_matches(ic, target):
                raise WeaveError(f"{a.name}: intercept signature does not match {ic.function}")
            params = tuple(A.Param(p.name if p.name != "_" else f"_arg{i}", p.type, p.pos)
                           for i, p in enumerate(ic.params))
            if ic.return_binding:
                params += (A.Param(ic.return_binding, ic.ret),)
            hook_name = namespaced(a.name, f"{ic.position}_{ic.function}_{k}")
            body = _rename_automaton_code(a, ic.body, out, set(hooked))
            out.functions[hook_name] = A.FunctionDecl(hook_name, params, A.VOID, body, ic.pos)
            out.provenance[f"function:{hook_name}"] = f"automaton:{a.name}"
            out.hooks[hook_name] = HookInfo(a.name, feature, ic.position, ic.function, k)
            hooked[ic.function].append((ic.position, hook_name, feature, ic.return_binding))
    for fname, hooks in hooked.items():
        target = prog.functions[fname]
        body_name = f"{fname}::body"
        out.functions[body_name] = replace(target, name=body_name)
        out.provenance[f"function:{body_name}"] = prog.provenance.get(f"function:{fname}", "")
        args = tuple(A.Var(p.name) for p in target.params)
        ret_var = f"{fname}::ret"
        stmts: list = []

        def hook_call(name, feature, extra=()):
            call = A.ExprStmt(A.Call(name, args + extra))
            if guards is not None:
                return A.If(A.Var(guards[feature]), (call,), None)
            return call

        for pos, name, feature, _ in hooks:
            if pos == "before":
                stmts.append(hook_call(name, feature))
        if target.ret.kind == "void":
            stmts.append(A.ExprStmt(A.Call(body_name, args)))
        else:
            stmts.append(A.VarDecl(target.ret, ret_var, A.Call(body_name, args)))
        for pos, name, feature, binding in hooks:
            if pos == "after":
                extra = (A.Var(ret_var),) if binding else ()
                stmts.append(hook_call(name, feature, extra))
        if target.ret.kind != "void":
            stmts.append(A.Return(A.Var(ret_var)))
        out.functions[fname] = A.FunctionDecl(fname, target.params, target.ret, tuple(stmts), target.pos)
        out.provenance[f"function:{fname}"] = prog.provenance.get(f"function:{fname}", "")
    out.automata = tuple(a.name for _, a in automata)
    return out


def weave(cp: Program, specs: SpecificationSet, product, automata: Optional[Iterable[str]] = None,
          feature_order: Optional[Iterable[str]] = None) -> Program:
    """Weave the automata of the selected features (optionally only those named)."""
    product = frozenset(product)
    order = list(feature_order) if feature_order is not None else list(specs.by_feature)
    wanted = set(automata) if automata is not None else None
    pairs = [(f, a) for f, a in specs.automata(order)
             if f in product and (wanted is None or a.name in wanted)]
    out = weave_automata(cp, pairs)
    out.selection = cp.selection
    return out
