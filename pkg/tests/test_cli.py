import json
import subprocess
import sys

import pytest

from splverify.casestudy import bundle_path
from splverify.cli import run
from test_productline import write_line

VALID = "EMailClient,Keys,Encrypt,Decrypt,Forward"


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_files(capsys):
    root = bundle_path()
    code, out, _ = call(capsys, "parse", str(root / "Forward.fml"), str(root / "Forward.spec"),
                        str(root / "email.fm"))
    assert code == 0
    assert "feature Forward;" in out and "automaton" in out


def test_parse_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.fml"
    bad.write_text("void f() { x + 1; }")
    code, _, err = call(capsys, "parse", str(bad))
    assert code == 2 and "bad.fml:1:" in err


def test_typecheck(capsys):
    code, out, _ = call(capsys, "typecheck", "email", "--format", "json")
    assert code == 0
    assert json.loads(out) == {"products": 40, "problems": []}


def test_compose_and_weave(capsys):
    code, out, _ = call(capsys, "compose", "email", "--product", VALID, "--weave")
    assert code == 0 and "forward" in out and "::" in out


def test_invalid_product(capsys):
    code, _, err = call(capsys, "compose", "email", "--product", "EMailClient")
    assert code == 2 and "not a valid product" in err


def test_encode_fragment(capsys):
    code, out, _ = call(capsys, "encode", "email", "--fragment", "EMailClient,Forward")
    assert code == 0
    assert "void incoming_Forward(" in out and "bool feature_model()" in out


def test_check_product_violation(capsys):
    code, out, _ = call(capsys, "check", "email", "--product", VALID)
    assert code == 1 and "VIOLATION" in out


def test_check_simulator_json(capsys):
    code, out, _ = call(capsys, "check", "email", "--format", "json")
    data = json.loads(out)
    assert code == 1 and data["verdict"]["verdict"] == "VIOLATION"


def test_check_bound_exit(capsys):
    code, _, _ = call(capsys, "check", "email", "--product", VALID, "--call-depth", "1")
    assert code == 3


def test_verify_safe_line(tmp_path, capsys):
    code, _, _ = call(capsys, "verify", str(write_line(tmp_path, limit=5)))
    assert code == 0


def test_verify_violating_line(tmp_path, capsys):
    code, out, _ = call(capsys, "verify", str(write_line(tmp_path, limit=2)), "--strategy", "brute")
    assert code == 1 and "Small" in out


def test_analyze_writes_outputs(tmp_path, capsys):
    out_dir = tmp_path / "out"
    code, _, _ = call(capsys, "analyze", str(write_line(tmp_path, limit=2)), "--out-dir", str(out_dir))
    assert code == 0
    assert (out_dir / "detection.csv").is_file()


def test_casestudy_with_figures(tmp_path, capsys):
    out_dir = tmp_path / "out"
    code, out, _ = call(capsys, "casestudy", "--out-dir", str(out_dir))
    assert code == 0
    for name in ("absence.csv", "detection.csv", "single.csv", "report.json"):
        assert (out_dir / name).stat().st_size > 0
    pngs = list(out_dir.glob("*.png"))
    assert len(pngs) == 3
    assert all(p.read_bytes()[:4] == b"\x89PNG" for p in pngs)


def test_casestudy_path(capsys):
    code, out, _ = call(capsys, "casestudy", "--path")
    assert code == 0 and out.strip() == str(bundle_path())


def test_missing_manifest(capsys):
    code, _, err = call(capsys, "typecheck", "/nonexistent/manifest.yaml")
    assert code == 2 and err.startswith("error:")


@pytest.mark.parametrize("argv", [[], ["verify"], ["nonsense"]])
def test_usage_errors(capsys, argv):
    assert call(capsys, *argv)[0] == 2


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "splverify.cli", "--version"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("splverify ")
