"""Variability encoding: one product simulator for a whole product line."""

from __future__ import annotations

from dataclasses import replace
from typing import Iterable

from .composer import fresh, merge, replace_original, sort_modules, weave_automata
from .errors import CompositionError, EncodingError
from .featuremodel import FAnd, FConst, FeatureModel, FNot, FVar, to_text
from .fml import ast as A
from .fml.program import Program
from .speclang import SpecificationSet


def formula_to_expr(formula, names: dict) -> A.Expr:
    if isinstance(formula, FVar):
        return A.Var(names[formula.name])
    if isinstance(formula, FNot):
        return A.Unary("!", formula_to_expr(formula.arg, names))
    if isinstance(formula, FConst):
        return A.BoolLit(formula.value)
    op = "&&" if isinstance(formula, FAnd) else "||"
    if not formula.args:
        return A.BoolLit(isinstance(formula, FAnd))
    out = formula_to_expr(formula.args[0], names)
    for a in formula.args[1:]:
        out = A.Binary(op, out, formula_to_expr(a, names))
    return out


def var_enc(modules: Iterable[A.FeatureModule], fm: FeatureModel, entry: str = "main") -> Program:
    """Encode every feature of the line into a single simulator program.

    For a function defined by features f1 < ... < fk, version i becomes
    ``<m>_<fi>`` (``original`` replaced by a call to the level below) and
    level i >= 2 gets a dispatcher ``if (fi) <m>_<fi>(..) else <level i-1>(..)``.
    The top dispatcher keeps the name ``<m>``; intermediate ones are named
    ``<m>_disp_<fi>``. The entry body runs only when ``feature_model()`` holds.
    """
    modules = sort_modules(modules)
    names = [m.name for m in modules]
    if set(names) != set(fm.features):
        raise EncodingError("modules and feature model disagree on the feature set")
    modules = sorted(modules, key=lambda m: fm.index(m.name))
    try:
        merged = merge(modules)
    except CompositionError as exc:
        raise EncodingError(str(exc)) from exc

    prog = Program(records=dict(merged.records), globals={}, entry=entry,
                   provenance=dict(merged.provenance), features=tuple(fm.features))
    taken = set(merged.globals) | set(merged.versions) | set(merged.records)

    fvars = {}
    for f in fm.features:
        v = fresh(f, taken)
        taken.add(v)
        fvars[f] = v
        prog.globals[v] = A.GlobalDecl(A.BOOL, v)
        prog.provenance[f"global:{v}"] = "varenc"
    prog.feature_vars = fvars
    prog.globals.update(merged.globals)

    fm_name = fresh("feature_model", taken)
    taken.add(fm_name)

    for name, chain in merged.versions.items():
        if len(chain) == 1:
            feature, fn = chain[0]
            prog.functions[name] = fn
            prog.provenance[f"function:{name}"] = feature
            continue
        version_names = []
        for feature, _ in chain:
            v = fresh(f"{name}_{feature}", taken)
            taken.add(v)
            version_names.append(v)
        level = [version_names[0]]
        for i in range(1, len(chain)):
            if i == len(chain) - 1:
                level.append(name)
            else:
                d = fresh(f"{name}_disp_{chain[i][0]}", taken)
                taken.add(d)
                level.append(d)
        params = chain[0][1].params
        ret = chain[0][1].ret
        args = tuple(A.Var(p.name) for p in params)
        for i, (feature, fn) in enumerate(chain):
            body = replace_original(fn.body, level[i - 1]) if (i > 0 and fn.calls_original) else fn.body
            prog.functions[version_names[i]] = replace(fn, name=version_names[i], body=body)
            prog.provenance[f"function:{version_names[i]}"] = feature
        for i in range(1, len(chain)):
            feature = chain[i][0]
            if ret.kind == "void":
                then = (A.ExprStmt(A.Call(version_names[i], args)),)
                orelse = (A.ExprStmt(A.Call(level[i - 1], args)),)
            else:
                then = (A.Return(A.Call(version_names[i], args)),)
                orelse = (A.Return(A.Call(level[i - 1], args)),)
            body = (A.If(A.Var(fvars[feature]), then, orelse),)
            prog.functions[level[i]] = A.FunctionDecl(level[i], params, ret, body)
            prog.provenance[f"function:{level[i]}"] = "varenc"

    prog.functions[fm_name] = A.FunctionDecl(
        fm_name, (), A.BOOL, (A.Return(formula_to_expr(fm.encode_dnf(), fvars)),))
    prog.provenance[f"function:{fm_name}"] = "varenc"

    main = prog.functions.get(entry)
    if main is None:
        raise EncodingError(f"entry function {entry!r} missing")
    guarded: tuple = (A.If(A.Call(fm_name, ()), main.body, None),)
    if main.ret.kind == "int":
        guarded += (A.Return(A.IntLit(0)),)
    elif main.ret.kind != "void":
        raise EncodingError("entry function must return void or int")
    prog.functions[entry] = replace(main, body=guarded)
    prog.hooks = {}
    prog.feature_model_fn = fm_name
    prog.formula_text = to_text(fm.encode_dnf())
    return prog


def select(sim: Program, product) -> Program:
    """Fix every feature variable to the product's membership."""
    product = frozenset(product)
    unknown = product - set(sim.features)
    if unknown:
        raise EncodingError(f"unknown features {sorted(unknown)}")
    out = sim.copy()
    for f, v in sim.feature_vars.items():
        out.globals[v] = A.GlobalDecl(A.BOOL, v, A.BoolLit(f in product))
    out.selection = product
    return out


def weave_simulator(sim: Program, specs: SpecificationSet, automata=None) -> Program:
    """Weave every feature's automata, each hook guarded by its feature variable."""
    wanted = set(automata) if automata is not None else None
    pairs = [(f, a) for f, a in specs.automata(sim.features) if wanted is None or a.name in wanted]
    out = weave_automata(sim, pairs, guards=sim.feature_vars)
    out.selection = sim.selection
    return out


def simulator_text(sim: Program) -> str:
    """FML text of the simulator with a ``# varenc`` header."""
    header = [
        "# varenc feature-variables: " + " ".join(f"{f}={v}" for f, v in sim.feature_vars.items()),
        f"# varenc feature_model: {sim.feature_model_fn}() = {sim.formula_text}",
    ]
    if sim.selection is not None:
        header.append("# varenc selection: " + " ".join(f for f in sim.features if f in sim.selection))
    return "\n".join(header) + "\n\n" + sim.text()
