import json
import shutil
import subprocess
import sys

import pytest

from conftest import CORPUS
from rigorcert.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_prove_example(tmp_path, capsys):
    code, out, _ = run(capsys, "prove", "--spec", CORPUS / "example.ineq", "--jobs", 1, "--out", tmp_path)
    assert code == 0
    assert sorted(p.name for p in tmp_path.glob("*.cert")) == ["atan_below_identity.cert"]
    assert "VERIFIED" in out and "1/1 ok" in out


def test_prove_false_claim(tmp_path, capsys):
    code, out, _ = run(capsys, "prove", "--spec", CORPUS / "false.ineq", "--out", tmp_path, "--max-depth", 12)
    assert code == 1
    assert "FAILURE" in out and "on [2, 4]" in out
    assert not list(tmp_path.glob("*.cert"))


def test_missing_file_and_bad_args(tmp_path, capsys):
    code, _, err = run(capsys, "prove", "--spec", tmp_path / "nope.ineq", "--out", tmp_path)
    assert code == 2 and "cannot read" in err
    code, _, _ = run(capsys, "prove", "--spec", CORPUS / "example.ineq", "--only", "nope", "--out", tmp_path)
    assert code == 2
    code, _, _ = run(capsys, "prove", "--spec", CORPUS / "example.ineq", "--jobs", 0, "--out", tmp_path)
    assert code == 2
    with pytest.raises(SystemExit) as e:
        main(["prove"])
    assert e.value.code == 2


def test_parse_error_is_usage(tmp_path, capsys):
    bad = tmp_path / "bad.ineq"
    bad.write_text('ineq "b" vars x in [0,1]; claims x + < 0;')
    code, _, err = run(capsys, "prove", "--spec", bad, "--out", tmp_path / "o")
    assert code == 2 and "1:38:" in err


@pytest.fixture
def proved(tmp_path, capsys):
    spec = tmp_path / "desk.ineq"
    shutil.copy(CORPUS / "desk.ineq", spec)
    out = tmp_path / "certs"
    assert run(capsys, "prove", "--spec", spec, "--out", out)[0] == 0
    return spec, out


def test_check_fresh_output(proved, capsys):
    spec, out = proved
    code, text, _ = run(capsys, "check", "--spec", spec, "--cert", out)
    assert code == 0 and "REJECTED" not in text


def test_check_hand_edited_certificate(proved, capsys):
    spec, out = proved
    f = out / "atan_product.cert"
    lines = f.read_text().splitlines()
    i = next(k for k, line in enumerate(lines) if "(split" in line)
    head, mid = lines[i].rsplit(" ", 1)
    lines[i] = f"{head} {mid}1"
    f.write_text("\n".join(lines) + "\n")
    code, text, _ = run(capsys, "check", "--spec", spec, "--cert", out)
    assert code == 1
    (bad,) = [line for line in text.splitlines() if line.startswith("REJECTED")]
    assert "atan_product" in bad and "rejected at" in bad


def test_check_edited_spec(proved, capsys):
    spec, out = proved
    spec.write_text(spec.read_text().replace("[4, 6.3504]", "[4, 6.35]", 1))
    code, text, _ = run(capsys, "check", "--spec", spec, "--cert", out)
    assert code == 1 and "digest mismatch" in text


def test_check_missing_and_corrupt(proved, capsys):
    spec, out = proved
    (out / "disk.cert").unlink()
    (out / "am_gm.cert").write_text("garbage\n")
    code, text, _ = run(capsys, "check", "--spec", spec, "--cert", out)
    assert code == 1 and "missing disk.cert" in text and "format:" in text
    code, _, _ = run(capsys, "check", "--spec", spec, "--cert", out / "none")
    assert code == 2


def test_jobs_do_not_change_bytes(tmp_path, capsys):
    dirs = []
    for jobs in (1, 3):
        d = tmp_path / f"j{jobs}"
        code, out, _ = run(capsys, "prove", "--spec", CORPUS / "desk.ineq", "--jobs", jobs, "--out", d)
        assert code == 0
        dirs.append((d, out))
    (a, out_a), (b, out_b) = dirs
    assert out_a == out_b
    names = sorted(p.name for p in a.glob("*.cert"))
    assert names == sorted(p.name for p in b.glob("*.cert"))
    for n in names:
        assert (a / n).read_bytes() == (b / n).read_bytes()
    stats = json.loads((a / "stats.json").read_text())
    assert "_total_wall_time" in stats
    assert all("time" not in (a / n).read_text() for n in names)


def test_json_report(tmp_path, capsys):
    code, out, _ = run(capsys, "prove", "--spec", CORPUS / "example.ineq", "--out", tmp_path,
                       "--report", "json")
    data = json.loads(out)
    assert code == 0 and data["summary"] == {"total": 1, "ok": 1}
    assert data["items"][0]["verdict"] == "verified"


def test_precision_from_environment(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("RIGOR_DEFAULT_PRECISION", "15")
    assert run(capsys, "prove", "--spec", CORPUS / "example.ineq", "--out", tmp_path)[0] == 0
    assert "(taylor 1 15 " in (tmp_path / "atan_below_identity.cert").read_text()
    monkeypatch.setenv("RIGOR_DEFAULT_PRECISION", "many")
    assert run(capsys, "prove", "--spec", CORPUS / "example.ineq", "--out", tmp_path)[0] == 2


def test_lp_worked_system(tmp_path, capsys):
    code, out, _ = run(capsys, "lp", "--sys", CORPUS / "worked.lp", "--dual-hints", CORPUS / "worked.dual",
                       "--out", tmp_path)
    assert code == 0 and "0 <= -0.2974" in out
    code, out, _ = run(capsys, "lp-check", "--sys", CORPUS / "worked.lp", "--cert", tmp_path)
    assert code == 0 and "-0.2974" in out


def test_lp_row_hint_and_solver(tmp_path, capsys):
    code, out, _ = run(capsys, "lp", "--sys", CORPUS / "worked.lp", "--dual-hints", CORPUS / "worked_rows.dual",
                       "--out", tmp_path)
    assert code == 0 and "0 <= -0.3024" in out
    code, out, _ = run(capsys, "lp", "--sys", CORPUS / "symbolic.lp", "--out", tmp_path)
    assert code == 0 and "2/2 ok" in out
    assert run(capsys, "lp-check", "--sys", CORPUS / "symbolic.lp", "--cert", tmp_path)[0] == 0


def test_lp_feasible_and_bad_hint(tmp_path, capsys):
    code, out, _ = run(capsys, "lp", "--sys", CORPUS / "feasible.lp", "--out", tmp_path)
    assert code == 1 and "NoCertificateFound" in out
    hint = tmp_path / "h.dual"
    hint.write_text('dual "worked" 1 2 3;')
    code, _, err = run(capsys, "lp", "--sys", CORPUS / "worked.lp", "--dual-hints", hint, "--out", tmp_path)
    assert code == 2 and "3 multipliers" in err


def test_lp_check_detects_tampering(tmp_path, capsys):
    assert run(capsys, "lp", "--sys", CORPUS / "worked.lp", "--out", tmp_path)[0] == 0
    f = tmp_path / "worked.lpcert"
    lines = f.read_text().splitlines()
    nums = lines[4].split()
    nums[1] = str(int(nums[1]) + 1)
    lines[4] = " ".join(nums)
    f.write_text("\n".join(lines) + "\n")
    code, out, _ = run(capsys, "lp-check", "--sys", CORPUS / "worked.lp", "--cert", tmp_path)
    assert code == 1 and "nonzero_coefficient" in out


def test_console_script(tmp_path):
    exe = shutil.which("rigorcert")
    cmd = [exe] if exe else [sys.executable, "-m", "rigorcert.cli"]
    r = subprocess.run(cmd + ["prove", "--spec", str(CORPUS / "example.ineq"), "--out", str(tmp_path)],
                       capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
