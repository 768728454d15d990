"""Command-line front end.

Exit codes: 0 all safe or command succeeded, 1 violation found, 2 usage or
input error, 3 a checker bound was exceeded (and nothing violated).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Optional

from . import __version__
from .casestudy import BUNDLES, bundle_path, expected_interactions
from .checker import BOUND_EXCEEDED, CheckOptions, Verdict, check, render_error_path
from .composer import compose, weave
from .errors import SplError
from .featuremodel import parse_feature_model
from .fml.parser import parse_automata, parse_feature_module
from .fml.printer import pretty_print
from .harness import combine, compare_strategies, verify_brute_force, verify_simulator
from .productline import load_manifest, project, typecheck_product_line, validate_specs
from .report import format_report, plot_report, write_csv
from .varenc import select, simulator_text, var_enc, weave_simulator

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT, EXIT_BOUND = 0, 1, 2, 3


def exit_code(verdicts) -> int:
    verdicts = list(verdicts)
    if any(v.violation for v in verdicts):
        return EXIT_VIOLATION
    if any(v.kind == BOUND_EXCEEDED for v in verdicts):
        return EXIT_BOUND
    return EXIT_OK


def _resolve(manifest: str) -> Path:
    p = Path(manifest)
    if not p.exists() and manifest in BUNDLES:
        return bundle_path(manifest)
    return p


def _line(args):
    line = load_manifest(_resolve(args.manifest))
    if getattr(args, "fragment", None):
        line = project(line, [f.strip() for f in args.fragment.split(",") if f.strip()])
    return line


def _product(line, text: Optional[str]) -> frozenset:
    if not text:
        raise SplError("--product is required (comma-separated feature names)")
    p = frozenset(f.strip() for f in text.split(",") if f.strip())
    unknown = p - set(line.features)
    if unknown:
        raise SplError(f"unknown features {sorted(unknown)}")
    if not line.fm.is_valid(p):
        raise SplError(f"{{{', '.join(line.fm.ordered(p))}}} is not a valid product")
    return p


def _opts(args) -> CheckOptions:
    return CheckOptions(unroll_bound=args.unroll_bound, call_depth=args.call_depth, dedup=args.dedup)


def _emit(args, data: dict, text: str) -> None:
    if args.format == "json":
        print(json.dumps(data, indent=2, default=str))
    else:
        print(text)


def _selection_text(line, sel) -> str:
    return "{" + ", ".join(line.fm.ordered(sel)) + "}" if sel is not None else "-"


# -- subcommands --------------------------------------------------------------

def cmd_parse(args) -> int:
    out, data = [], []
    for name in args.files:
        path = Path(name)
        try:
            text = path.read_text()
        except OSError as exc:
            raise SplError(f"cannot read {name}: {exc}") from exc
        if path.suffix == ".spec":
            nodes = parse_automata(text, name)
            out += [pretty_print(a) for a in nodes]
            data.append({"file": name, "automata": [a.name for a in nodes]})
        elif path.suffix == ".fm":
            fm = parse_feature_model(text)
            out.append(f"# {name}: {len(fm.features)} features, {len(fm.enumerate_products())} products")
            data.append({"file": name, "features": list(fm.features),
                         "products": [fm.ordered(p) for p in fm.enumerate_products()]})
        else:
            mod = parse_feature_module(text, file=name)
            out.append(pretty_print(mod))
            data.append({"file": name, "feature": mod.name})
    _emit(args, {"parsed": data}, "\n".join(out))
    return EXIT_OK


def cmd_typecheck(args) -> int:
    line = _line(args)
    rep = typecheck_product_line(line.modules, line.fm, line.entry)
    problems = [f"{_selection_text(line, p)}: {m}" for p, m in rep.failures]
    problems += validate_specs(line)
    text = "\n".join(problems) if problems else f"ok: {rep.products_checked} products type check"
    _emit(args, {"products": rep.products_checked, "problems": problems}, text)
    return EXIT_INPUT if problems else EXIT_OK


def cmd_compose(args) -> int:
    line = _line(args)
    p = _product(line, args.product)
    prog = compose(line.modules, p, line.fm, line.entry)
    if args.weave:
        prog = weave(prog, line.specs, p, feature_order=line.fm.features)
    text = prog.text()
    _emit(args, {"product": line.fm.ordered(p), "program": text}, text)
    return EXIT_OK


def cmd_encode(args) -> int:
    line = _line(args)
    sim = var_enc(line.modules, line.fm, line.entry)
    if args.product:
        sim = select(sim, _product(line, args.product))
    if args.weave:
        sim = weave_simulator(sim, line.specs)
    text = simulator_text(sim)
    _emit(args, {"feature_variables": sim.feature_vars, "feature_model": sim.formula_text,
                 "program": text}, text)
    return EXIT_OK


def _verdict_text(line, v: Verdict) -> str:
    if v.violation:
        return f"VIOLATION of {v.automaton} in {_selection_text(line, v.selection)}"
    if v.kind == BOUND_EXCEEDED:
        return f"BOUND_EXCEEDED ({v.bound})"
    return v.kind


def cmd_check(args) -> int:
    """One program: a product (woven) with --product, otherwise the whole simulator."""
    line = _line(args)
    opts = _opts(args)
    if args.product:
        p = _product(line, args.product)
        prog = weave(compose(line.modules, p, line.fm, line.entry), line.specs, p,
                     feature_order=line.fm.features)
    else:
        prog = weave_simulator(var_enc(line.modules, line.fm, line.entry), line.specs)
    v, m = check(prog, opts)
    text = _verdict_text(line, v) + f"\nstates explored: {m.states_explored}"
    if v.violation:
        text += "\n\n" + render_error_path(v.path, line.features)
    _emit(args, {"verdict": v.to_dict(line.features), "metrics": m.to_dict()}, text)
    return exit_code([v])


def _verify(line, args):
    opts = _opts(args)
    brute = sim = None
    if args.strategy in ("brute", "both"):
        brute = verify_brute_force(line, opts, args.cost, workers=args.jobs)
    if args.strategy in ("simulator", "both"):
        sim = verify_simulator(line, opts, args.cost)
    return brute, sim


def _verify_rows(line, brute, sim) -> list:
    rows = []
    for feature, a in line.specs.automata(line.fm.features):
        row = {"automaton": a.name, "feature": feature}
        verdicts = []
        if brute is not None:
            tab = brute.tables[a.name]
            bv = combine(tab.entries[p][0] for p in tab.query.candidates)
            row["brute"] = {"verdict": bv.kind, "violating": tab.b, "candidates": tab.n,
                            "products": [line.fm.ordered(p) for p in tab.violating_products()]}
            verdicts.append(bv)
        if sim is not None:
            sv = sim.runs[a.name].verdict
            row["simulator"] = {"verdict": sv.kind,
                                "selection": line.fm.ordered(sv.selection) if sv.selection else None,
                                "cost": sim.runs[a.name].cost}
            verdicts.append(sv)
        v = combine(verdicts)
        row["verdict"] = v
        it = line.interaction_for(a.name)
        row["interaction"] = it if v.violation else None
        row["expected"] = it is not None
        rows.append(row)
    return rows


def cmd_verify(args) -> int:
    line = _line(args)
    brute, sim = _verify(line, args)
    rows = _verify_rows(line, brute, sim)
    lines = []
    for r in rows:
        parts = [f"{r['automaton']:<24}", f"{r['feature']:<12}"]
        if "brute" in r:
            b = r["brute"]
            parts.append(f"brute: {b['verdict']} ({b['violating']}/{b['candidates']})")
        if "simulator" in r:
            s = r["simulator"]
            sel = f" in {{{', '.join(s['selection'])}}}" if s["selection"] else ""
            parts.append(f"simulator: {s['verdict']}{sel}")
        if r["interaction"] is not None:
            it = r["interaction"]
            parts.append(f"interaction #{it.id} {'+'.join(it.features)}")
        elif r["verdict"].violation:
            parts.append("unlisted interaction")
        lines.append("  ".join(parts))
    found = [r for r in rows if r["verdict"].violation]
    lines.append("")
    lines.append(f"{len(found)} violated specification(s); "
                 f"{sum(r['interaction'] is not None for r in found)} match listed interactions")
    if args.paths:
        for r in found:
            lines += ["", render_error_path(r["verdict"].path, line.features)]
    data = {"line": line.name, "strategy": args.strategy, "cost": args.cost,
            "results": [{**{k: v for k, v in r.items() if k not in ("verdict", "interaction")},
                         "verdict": r["verdict"].to_dict(line.features),
                         "interaction": r["interaction"].id if r["interaction"] else None}
                        for r in rows]}
    _emit(args, data, "\n".join(lines))
    return exit_code(r["verdict"] for r in rows)


def _write_outputs(report, out_dir, fmt) -> list:
    paths = write_csv(report, out_dir)
    paths += plot_report(report, out_dir)
    (Path(out_dir) / "report.json").write_text(json.dumps(report.to_dict(), indent=2, default=str))
    return paths + [Path(out_dir) / "report.json"]


def cmd_analyze(args) -> int:
    line = _line(args)
    report = compare_strategies(line, _opts(args), args.cost, args.exact_limit, args.classes)
    text = format_report(report)
    if args.out_dir:
        paths = _write_outputs(report, args.out_dir, args.format)
        text += "\n\nwritten: " + ", ".join(str(p) for p in paths)
    _emit(args, report.to_dict(), text)
    return EXIT_OK


def cmd_casestudy(args) -> int:
    """Run the bundled e-mail line and compare against its documented interactions."""
    if args.path:
        print(bundle_path("email"))
        return EXIT_OK
    line = load_manifest(bundle_path("email"))
    args.manifest = str(bundle_path("email"))
    brute, sim = _verify(line, args)
    rows = _verify_rows(line, brute, sim)
    expected = {it.id: it for it in expected_interactions(line)}
    detected = {r["interaction"].id for r in rows if r["interaction"] is not None}
    extra = [r["automaton"] for r in rows if r["verdict"].violation and r["interaction"] is None]
    lines = [f"products: {len(line.fm.enumerate_products())}"]
    for i, it in sorted(expected.items()):
        mark = "detected" if i in detected else "MISSED"
        lines.append(f"#{i:<3} {'+'.join(it.features):<22} {it.automaton:<24} {mark}")
    if extra:
        lines.append("unlisted violations: " + ", ".join(extra))
    ok = detected == set(expected) and not extra
    lines.append("all documented interactions detected, no others" if ok else "MISMATCH")
    if args.out_dir and brute is not None and sim is not None:
        report = compare_strategies(line, _opts(args), args.cost, args.exact_limit, args.classes,
                                    brute=brute, simulator=sim)
        lines += ["", format_report(report)]
        paths = _write_outputs(report, args.out_dir, args.format)
        lines.append("\nwritten: " + ", ".join(str(p) for p in paths))
    data = {"expected": sorted(expected), "detected": sorted(detected), "unlisted": extra, "ok": ok}
    _emit(args, data, "\n".join(lines))
    return EXIT_OK if ok else EXIT_VIOLATION


# -- argument parsing ---------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="splverify",
                                 description="Verify product lines by brute force or product simulation.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    bounds = argparse.ArgumentParser(add_help=False)
    bounds.add_argument("--unroll-bound", type=int, default=64, help="loop iterations (default 64)")
    bounds.add_argument("--call-depth", type=int, default=64, help="call stack depth (default 64)")
    bounds.add_argument("--dedup", action=argparse.BooleanOptionalAction, default=True,
                        help="merge revisited states (default on)")
    analysis = argparse.ArgumentParser(add_help=False)
    analysis.add_argument("--cost", choices=("states", "wallclock"), default="states")
    analysis.add_argument("--exact-limit", type=int, default=10)
    analysis.add_argument("--classes", type=int, default=5)
    analysis.add_argument("--out-dir", help="write CSV files, figures and report.json here")
    strategy = argparse.ArgumentParser(add_help=False)
    strategy.add_argument("--strategy", choices=("brute", "simulator", "both"), default="both")
    strategy.add_argument("--jobs", type=int, default=1, help="processes for brute force")
    manifest = argparse.ArgumentParser(add_help=False)
    manifest.add_argument("manifest", help="manifest file or directory ('email' for the bundled line)")
    manifest.add_argument("--fragment", help="restrict the line to these comma-separated features")

    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("parse", parents=[common], help="parse and pretty-print .fml/.spec/.fm files")
    p.add_argument("files", nargs="+")
    p.set_defaults(func=cmd_parse)
    p = sub.add_parser("typecheck", parents=[common, manifest], help="type check every product")
    p.set_defaults(func=cmd_typecheck)
    p = sub.add_parser("compose", parents=[common, manifest], help="print one composed product")
    p.add_argument("--product", required=True)
    p.add_argument("--weave", action="store_true", help="also weave the specifications")
    p.set_defaults(func=cmd_compose)
    p = sub.add_parser("encode", parents=[common, manifest], help="print the product simulator")
    p.add_argument("--product", help="fix the feature variables to this product")
    p.add_argument("--weave", action="store_true", help="also weave the specifications")
    p.set_defaults(func=cmd_encode)
    p = sub.add_parser("check", parents=[common, bounds, manifest],
                       help="check one product, or the simulator when no product is given")
    p.add_argument("--product")
    p.set_defaults(func=cmd_check)
    p = sub.add_parser("verify", parents=[common, bounds, strategy, manifest],
                       help="verify every specification of the line")
    p.add_argument("--cost", choices=("states", "wallclock"), default="states")
    p.add_argument("--paths", action=argparse.BooleanOptionalAction, default=True,
                   help="print an error path per violation (default on)")
    p.set_defaults(func=cmd_verify)
    p = sub.add_parser("analyze", parents=[common, bounds, analysis, manifest],
                       help="compare both strategies and the cost over all orderings")
    p.set_defaults(func=cmd_analyze)
    p = sub.add_parser("casestudy", parents=[common, bounds, strategy, analysis],
                       help="regression run of the bundled e-mail line")
    p.add_argument("--path", action="store_true", help="print the bundle directory and exit")
    p.set_defaults(func=cmd_casestudy)
    return ap


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except SplError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main() -> None:
    try:
        code = run()
        sys.stdout.flush()
    except BrokenPipeError:
        # output piped into a pager or head that exited early
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        code = EXIT_OK
    sys.exit(code)


if __name__ == "__main__":
    main()
