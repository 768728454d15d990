import pytest

from splverify.errors import ManifestError
from splverify.productline import load_manifest, project, typecheck_product_line, validate_specs

BASE = "feature Base;\nint n = 0;\nvoid step(int x) { n = n + x; }\nvoid main() { step(nondet(0, 2)); }\n"
EXTRA = "feature Extra;\nvoid step(int x) { original(x + 1); }\n"
SPEC = "automaton Small { after void step(x:int) { if (n > LIMIT) { fail; } } }\n"


def write_line(tmp_path, limit=5, manifest=None, **files):
    files = {"Base.fml": BASE, "Extra.fml": EXTRA, "line.fm": "features: Base Extra\nBase\n",
             "Base.spec": SPEC.replace("LIMIT", str(limit)), **files}
    for name, text in files.items():
        (tmp_path / name).write_text(text)
    (tmp_path / "manifest.yaml").write_text(manifest or """name: tiny
feature_model: line.fm
modules: [Base.fml, Extra.fml]
specs: {Base: [Base.spec]}
interactions:
  - {id: 1, features: [Base, Extra], automaton: Small}
""")
    return tmp_path


def test_load_directory_or_file(tmp_path):
    root = write_line(tmp_path)
    for target in (root, root / "manifest.yaml"):
        line = load_manifest(target)
        assert line.name == "tiny" and list(line.features) == ["Base", "Extra"]
        assert line.interaction_for("Small").id == 1
        assert line.specs.owner("Small") == "Base"


@pytest.mark.parametrize("manifest, message", [
    ("modules: [Base.fml]", "missing key"),
    ("- a\n- b", "mapping"),
    ("feature_model: line.fm\nmodules: [Extra.fml, Base.fml]", "order"),
    ("feature_model: line.fm\nmodules: [Base.fml, Gone.fml]", "cannot read"),
    ("feature_model: line.fm\nmodules: [Base.fml, Extra.fml]\nspecs: {Base: [Base.spec]}\n"
     "interactions: [{id: 2, features: [Base], automaton: Nope}]", "unknown automaton"),
    ("feature_model: line.fm\nmodules: [Base.fml, Extra.fml]\nspecs: {Base: [Base.spec]}\n"
     "interactions: [{features: [Base]}]", "malformed interaction"),
    ("feature_model: [unclosed", "malformed"),
])
def test_manifest_errors(tmp_path, manifest, message):
    with pytest.raises(ManifestError, match=message):
        load_manifest(write_line(tmp_path, manifest=manifest))


def test_missing_manifest(tmp_path):
    with pytest.raises(ManifestError):
        load_manifest(tmp_path)


def test_typecheck_and_specs(tmp_path):
    line = load_manifest(write_line(tmp_path))
    report = typecheck_product_line(line.modules, line.fm, line.entry)
    assert report.ok and report.products_checked == 2
    assert validate_specs(line) == []


def test_impure_spec_reported(tmp_path):
    spec = "automaton Small { after void step(x:int) { n = 0; } }\n"
    line = load_manifest(write_line(tmp_path, **{"Base.spec": spec}))
    assert any("writes program variable 'n'" in p for p in validate_specs(line))


def test_project(email_line):
    part = project(email_line, ["Forward", "EMailClient"])
    assert list(part.features) == ["EMailClient", "Forward"]
    assert len(part.fm.enumerate_products()) == 2
    assert {f for f, _ in part.specs.automata()} <= {"EMailClient", "Forward"}
    assert all(set(it.features) <= {"EMailClient", "Forward"} for it in part.interactions)
    with pytest.raises(ManifestError):
        project(email_line, ["Nope"])
