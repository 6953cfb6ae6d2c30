import json
import subprocess
import sys
from pathlib import Path

import pytest

from gcurv.cli import EXIT_FAIL, EXIT_PASS, EXIT_USAGE, main, parse_point


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_list(capsys):
    code, out, _ = run(capsys, "list")
    assert code == EXIT_PASS
    assert "neutral_flat_example_m2" in out and "sphere_in_flat_3" in out


def test_report_json(capsys):
    code, out, _ = run(capsys, "report", "--scenario", "neutral_flat_example_m2", "--point", "u=1,v=0", "--json")
    assert code == EXIT_PASS
    doc = json.loads(out)
    assert doc["point"] == [1.0, 0.0, 0.0, 0.0]
    assert doc["metric"][0][1] == pytest.approx(0.5)
    assert doc["max_abs_gen_riemann"] < 1e-8


def test_report_with_hypersurface(capsys):
    code, out, _ = run(capsys, "report", "--scenario", "sphere_in_flat_3", "--point", "t=1,p=0.2", "--json")
    assert code == EXIT_PASS
    assert json.loads(out)["hypersurface"]["T_plus"] == pytest.approx(2.0)


def test_report_outside_domain(capsys):
    code, _, err = run(capsys, "report", "--scenario", "neutral_flat_example_m2", "--point", "u=0")
    assert code == EXIT_USAGE and "domain" in err


def test_parse_point():
    assert parse_point("v=2, u=1", ("u", "v", "w")) == [1.0, 2.0, 0.0]
    with pytest.raises(Exception, match="bad point entry"):
        parse_point("q=1", ("u", "v"))
    with pytest.raises(Exception, match="bad number"):
        parse_point("u=abc", ("u", "v"))


def test_verify_pass(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "identities", "--scenario", "sphere_in_flat_3")
    assert code == EXIT_PASS
    assert out.strip().endswith("passed") and "FAIL" not in out


def test_verify_fail(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "flatness", "--scenario", "torus_constant_H_2")
    assert code == EXIT_FAIL
    assert "max_rm" in out


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "--suite", "nope", "--scenario", "flat_trivial_3"],
        ["verify", "--suite", "identities", "--scenario", "no_such_scenario"],
        ["verify", "--suite", "identities"],
        ["verify", "--suite", "identities", "--scenario", "missing.json"],
        [],
    ],
)
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == EXIT_USAGE


def test_json_is_byte_identical(capsys):
    argv = ["verify", "--suite", "all", "--scenario", "random_exact_1_3", "--seed", "3", "--json"]
    first = run(capsys, *argv)[1]
    second = run(capsys, *argv)[1]
    assert first == second
    reports = json.loads(first)
    assert reports and all("wall_time" not in r for r in reports)


def test_timing_flag(capsys):
    _, out, _ = run(capsys, "verify", "--suite", "identities", "--scenario", "flat_trivial_3", "--json", "--timing")
    assert all("wall_time" in r for r in json.loads(out))


def test_tolerance_override(capsys):
    code, _, _ = run(capsys, "verify", "--suite", "identities", "--scenario", "sphere_in_flat_3", "--tol", "1e-300")
    assert code == EXIT_FAIL


def test_scenario_file_path(capsys, tmp_path):
    path = Path(__file__).resolve().parents[1] / "scenarios" / "rotation_flux.json"
    assert run(capsys, "verify", "--suite", "constraints", "--scenario", str(path))[0] == EXIT_PASS
    broken = tmp_path / "broken.json"
    broken.write_text('{"name": "x"}', encoding="utf-8")
    code, _, err = run(capsys, "verify", "--suite", "identities", "--scenario", str(broken))
    assert code == EXIT_USAGE and "missing field" in err


def test_reconstruct(capsys, tmp_path):
    out = tmp_path / "mesh.json"
    code, text, _ = run(capsys, "reconstruct", "--scenario", "cylinder_in_flat", "--grid", "33", "--out", str(out))
    assert code == EXIT_PASS and "FAIL" not in text
    mesh = json.loads(out.read_text(encoding="utf-8"))
    assert mesh["grid"] == [33, 33] and len(mesh["points"]) == 33 * 33
    assert {"path_residual", "metric_residual"} <= set(mesh["diagnostics"])


def test_coarse_reconstruct_fails_but_writes(capsys, tmp_path):
    out = tmp_path / "mesh.json"
    code, text, _ = run(capsys, "reconstruct", "--scenario", "cylinder_in_flat", "--grid", "9", "--out", str(out))
    assert code == EXIT_FAIL and "FAIL  k_recovery" in text
    assert len(json.loads(out.read_text(encoding="utf-8"))["points"]) == 81


def test_reconstruct_needs_surface(capsys, tmp_path):
    code, _, err = run(capsys, "reconstruct", "--scenario", "flat_trivial_3", "--out", str(tmp_path / "m.json"))
    assert code == EXIT_USAGE and "surface" in err


def test_console_script():
    proc = subprocess.run([sys.executable, "-m", "gcurv.cli", "list"], capture_output=True, text=True)
    assert proc.returncode == 0 and "flat_trivial_3" in proc.stdout
