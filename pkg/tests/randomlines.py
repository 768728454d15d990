"""Random small product lines: refinement chains, automata and feature models."""

import random

from splverify.featuremodel import parse_feature_model
from splverify.fml.parser import parse_automata, parse_feature_module
from splverify.productline import make_line
from splverify.speclang import SpecificationSet


def _stmt(rng, n_globals, callees, depth=0):
    g = lambda: f"g{rng.randrange(n_globals)}"  # noqa: E731
    c = rng.randint(-1, 3)
    kinds = ["assign", "assign", "nondet", "if"]
    if depth == 0:
        kinds.append("loop")
    if callees:
        kinds.append("call")
    k = rng.choice(kinds)
    if k == "assign":
        return [f"{g()} = {g()} + {c};"]
    if k == "nondet":
        return [f"{g()} = {g()} + nondet(0, {rng.randint(1, 2)});"]
    if k == "call":
        name, is_int = rng.choice(callees)
        if is_int:
            return [f"{g()} = {name}({g()});"]
        return [f"{name}({g()} + x);"]
    if k == "if":
        then = _stmt(rng, n_globals, callees, depth + 1)
        cond = rng.choice([f"x > {c}", f"{g()} == {c}", f"{g()} < x"])
        if rng.random() < 0.4:
            other = _stmt(rng, n_globals, callees, depth + 1)
            return [f"if ({cond}) {{", *then, "} else {", *other, "}"]
        return [f"if ({cond}) {{", *then, "}"]
    n = rng.randint(1, 2)
    v = f"k{rng.randrange(1000)}"
    return [f"int {v} = 0;", f"while ({v} < x && {v} < {n}) bound {n} {{", f"{g()} = {g()} + 1;",
            f"{v} = {v} + 1;", "}"]


def _function(rng, name, is_int, n_globals, callees, refine):
    stmts = [_stmt(rng, n_globals, callees) for _ in range(rng.randint(0, 3))]
    if refine:
        call = "int r = original(x);" if is_int else "original(x);"
        stmts.insert(rng.randint(0, len(stmts)), [call])
    body = [line for s in stmts for line in s]
    if is_int:
        ret = "r" if refine else f"x + g{rng.randrange(n_globals)}"
        body.append(f"return {ret};")
    head = f"int {name}(int x) {{" if is_int else f"void {name}(int x) {{"
    return [head, *body, "}"]


def _automaton(rng, name, functions, n_globals):
    kind = rng.choice(["guard", "counter", "result"])
    ints = [f for f, is_int in functions if is_int]
    voids = [f for f, is_int in functions if not is_int]
    c = rng.randint(0, 4)
    if kind == "result" and ints:
        f = rng.choice(ints)
        return [f"automaton {name} {{", f"after r = int {f}(x:int) {{",
                f"if (r == {c} && x >= 0) {{ fail; }}", "}", "}"]
    if kind == "counter" and voids:
        f1, f2 = rng.choice(voids), rng.choice(voids)
        return [f"automaton {name} {{", "introduction { int cnt = 0; }",
                f"before void {f1}(_:int) {{ cnt = cnt + 1; }}",
                f"after void {f2}(x:int) {{ if (cnt > {c + 1} && x != g0) {{ fail; }} }}", "}"]
    f, is_int = rng.choice(functions)
    ret = "int" if is_int else "void"
    return [f"automaton {name} {{", f"before {ret} {f}(x:int) {{",
            f"if (g{rng.randrange(n_globals)} > {c + 1}) {{ fail; }}", "}", "}"]


def _feature_model(rng, features):
    lines = ["features: " + " ".join(features), features[0]]
    for _ in range(rng.randint(0, len(features))):
        a, b = rng.sample(features[1:], 2) if len(features) > 2 else (features[-1], features[0])
        lines.append(rng.choice([f"{a} requires {b}", f"{a} excludes {b}", f"{a} | {b}",
                                 f"!{a} | !{b}"]))
    return "\n".join(lines)


def random_line(rng: random.Random, max_features: int = 6):
    """Returns ``(line, sources)``; ``sources`` maps a file label to its text."""
    while True:
        n = rng.randint(1, max_features)
        features = [f"F{i}" for i in range(n)]
        fm = parse_feature_model(_feature_model(rng, features))
        if fm.enumerate_products():
            break
    n_globals = rng.randint(1, 3)
    n_funcs = rng.randint(1, 3)
    functions = [(f"fn{i}", rng.random() < 0.4) for i in range(n_funcs)]
    sources = {}
    modules = []
    base = [f"feature {features[0]};"] + [f"int g{i} = {rng.randint(0, 2)};" for i in range(n_globals)]
    for i in reversed(range(n_funcs)):
        name, is_int = functions[i]
        base += _function(rng, name, is_int, n_globals, functions[i + 1:], refine=False)
    base += ["void main() {", "int i = 0;", "while (i < 2) bound 2 {",
             f"{functions[0][0]}(nondet(0, 2));", "i = i + 1;", "}"]
    base += [f"g0 = {name}(g0);" for name, is_int in functions if is_int][:1]
    base += ["}"]
    sources[features[0]] = "\n".join(base)
    for fi, f in enumerate(features[1:], 1):
        lines = [f"feature {f};"]
        for i, (name, is_int) in enumerate(functions):
            if rng.random() < 0.5:
                refine = rng.random() < 0.85
                lines += _function(rng, name, is_int, n_globals, functions[i + 1:], refine)
        sources[f] = "\n".join(lines)
    for f in features:
        modules.append(parse_feature_module(sources[f], file=f"{f}.fml"))
    specs = SpecificationSet()
    for f in features:
        autos = []
        for k in range(rng.choice([0, 1, 1, 2])):
            text = "\n".join(_automaton(rng, f"{f}Spec{k}", functions, n_globals))
            sources[f"{f}Spec{k}"] = text
            autos += parse_automata(text, f"{f}.spec")
        if autos:
            specs.add(f, autos)
    return make_line(modules, fm, specs, name="random"), sources
