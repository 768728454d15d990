"""Product lines on disk: the manifest, its modules, feature model and specs."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

import yaml

from .composer import compose, sort_modules, weave
from .errors import CompositionError, ManifestError, SplError, WeaveError
from .featuremodel import FeatureModel, parse_feature_model
from .fml import ast as A
from .fml.parser import parse_automata, parse_feature_module
from .fml.program import typecheck_program
from .speclang import SpecificationSet, check_side_effect_freedom


@dataclass(frozen=True)
class Interaction:
    """A documented interaction: the automaton expected to fail and the feature pair."""

    id: int
    features: tuple
    automaton: str


@dataclass
class ProductLine:
    name: str
    modules: list            # FeatureModule, composition order
    fm: FeatureModel
    specs: SpecificationSet
    entry: str = "main"
    root: Optional[Path] = None
    interactions: list = field(default_factory=list)

    def interaction_for(self, automaton: str) -> Optional[Interaction]:
        for it in self.interactions:
            if it.automaton == automaton:
                return it
        return None

    @property
    def features(self) -> list[str]:
        return [m.name for m in self.modules]

    def module(self, name: str) -> A.FeatureModule:
        for m in self.modules:
            if m.name == name:
                return m
        raise KeyError(name)


@dataclass
class TypeReport:
    failures: list = field(default_factory=list)  # (product frozenset, message)
    products_checked: int = 0

    @property
    def ok(self) -> bool:
        return not self.failures

    def failing_products(self) -> list:
        seen = []
        for p, _ in self.failures:
            if p not in seen:
                seen.append(p)
        return seen


def make_line(modules: Iterable[A.FeatureModule], fm: FeatureModel,
              specs: Optional[SpecificationSet] = None, entry: str = "main", name: str = "line") -> ProductLine:
    """Assemble a line from parsed parts; module order follows the feature model."""
    modules = list(modules)
    by_name = {m.name: m for m in modules}
    if set(by_name) != set(fm.features) or len(by_name) != len(modules):
        raise ManifestError("modules and feature model must name the same features once each")
    ordered = [A.FeatureModule(m.name, m.decls, i, m.pos)
               for i, m in enumerate(by_name[f] for f in fm.features)]
    specs = specs or SpecificationSet()
    stray = set(specs.by_feature) - set(fm.features)
    if stray:
        raise ManifestError(f"specifications for unknown features {sorted(stray)}")
    return ProductLine(name, ordered, fm, specs, entry)


def load_manifest(path) -> ProductLine:
    """Read a YAML manifest (a file, or a directory holding ``manifest.yaml``).

    Keys: ``name``, ``entry`` (default ``main``), ``feature_model`` (an
    ``.fm`` file), ``modules`` (``.fml`` files in composition order) and
    ``specs`` (feature -> list of ``.spec`` files). The order of ``modules``
    must match the feature order of the feature model. An optional
    ``interactions`` list records known interactions as
    ``{id, features: [A, B], automaton}``.
    """
    path = Path(path)
    if path.is_dir():
        path = path / "manifest.yaml"
    try:
        data = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ManifestError(f"{path}: malformed manifest: {exc}") from exc
    if not isinstance(data, dict):
        raise ManifestError(f"{path}: manifest must be a mapping")
    for key in ("feature_model", "modules"):
        if key not in data:
            raise ManifestError(f"{path}: missing key {key!r}")
    root = path.parent

    def read(rel: str) -> tuple[str, str]:
        p = root / rel
        try:
            return p.read_text(), str(p.relative_to(root)) if p.is_relative_to(root) else str(p)
        except OSError as exc:
            raise ManifestError(f"{path}: cannot read {rel}: {exc}") from exc

    fm_text, _ = read(data["feature_model"])
    fm = parse_feature_model(fm_text)
    modules = []
    for i, rel in enumerate(data["modules"]):
        text, fname = read(rel)
        mod = parse_feature_module(text, file=fname)
        if not mod.name:
            mod = A.FeatureModule(Path(rel).stem, mod.decls, i, mod.pos)
        modules.append(A.FeatureModule(mod.name, mod.decls, i, mod.pos))
    names = [m.name for m in modules]
    if names != list(fm.features):
        raise ManifestError(f"{path}: module order {names} differs from feature order {list(fm.features)}")
    specs = SpecificationSet()
    for feature, files in (data.get("specs") or {}).items():
        if isinstance(files, str):
            files = [files]
        for rel in files:
            text, fname = read(rel)
            specs.add(feature, parse_automata(text, fname))
    line = make_line(modules, fm, specs, data.get("entry", "main"), data.get("name", root.name))
    line.root = root
    known = set(specs.names())
    for item in data.get("interactions") or ():
        try:
            it = Interaction(int(item["id"]), tuple(item["features"]), str(item["automaton"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ManifestError(f"{path}: malformed interaction entry {item!r}") from exc
        if it.automaton not in known:
            raise ManifestError(f"{path}: interaction {it.id} names unknown automaton {it.automaton}")
        if set(it.features) - set(fm.features):
            raise ManifestError(f"{path}: interaction {it.id} names unknown features")
        line.interactions.append(it)
    return line


def project(line: ProductLine, features) -> ProductLine:
    """The fragment of ``line`` over a subset of its features.

    Products are the valid products intersected with the subset; modules,
    specifications and interactions outside the subset are dropped.
    """
    keep = set(features)
    unknown = keep - set(line.features)
    if unknown:
        raise ManifestError(f"unknown features {sorted(unknown)}")
    order = [f for f in line.fm.features if f in keep]
    fm = FeatureModel(order, {frozenset(p & keep) for p in line.fm.enumerate_products()})
    specs = SpecificationSet()
    for f, a in line.specs.automata(order):
        specs.add(f, [a])
    out = make_line([m for m in line.modules if m.name in keep], fm, specs, line.entry,
                    f"{line.name}[{','.join(order)}]")
    out.root = line.root
    out.interactions = [it for it in line.interactions
                        if set(it.features) <= keep and line.specs.owner(it.automaton) in keep]
    return out


def typecheck_product_line(modules: Iterable[A.FeatureModule], fm: FeatureModel,
                           entry: str = "main") -> TypeReport:
    """Compose and type check every valid product; collect (product, problem) pairs."""
    modules = sort_modules(modules)
    report = TypeReport()
    for p in fm.enumerate_products():
        report.products_checked += 1
        try:
            prog = compose(modules, p, fm, entry)
        except CompositionError as exc:
            report.failures.append((p, str(exc)))
            continue
        for msg in typecheck_program(prog):
            report.failures.append((p, msg))
    return report


def validate_specs(line: ProductLine) -> list[str]:
    """Problems with the specs: impure intercepts, or hooks that fail to weave/type check."""
    problems = []
    records = [r for m in line.modules for r in m.records]
    functions = {}
    for m in line.modules:
        for f in m.functions:
            functions.setdefault(f.name, f)
    for feature, a in line.specs.automata(line.fm.features):
        rep = check_side_effect_freedom(a, records, functions)
        problems += [f"{a.name}: {v}" for v in rep.violations]
    seen: set = set()
    for p in line.fm.enumerate_products():
        try:
            prog = compose(line.modules, p, line.fm, line.entry)
            woven = weave(prog, line.specs, p, feature_order=line.fm.features)
        except (CompositionError, WeaveError) as exc:
            msg = f"{sorted(p)}: {exc}"
        except SplError as exc:  # pragma: no cover
            msg = f"{sorted(p)}: {exc}"
        else:
            errs = typecheck_program(woven)
            msg = f"{sorted(p)}: {errs[0]}" if errs else None
        if msg and msg not in seen:
            seen.add(msg)
            problems.append(msg)
    return problems
