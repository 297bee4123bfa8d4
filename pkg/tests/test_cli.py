import csv
import io
import json
import subprocess
import sys

import pytest

from softcoul import cli, fourier, potentials, specfun
from softcoul.errors import NonConvergenceError


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_potential_table(capsys):
    code, out, _ = run(["potential-table", "--C", "1", "--r", "1"], capsys)
    assert code == 0
    (row,) = rows_of(out)
    assert float(row["V"]) == pytest.approx(0.36787944117144233)
    assert float(row["dVdr"]) == pytest.approx(0.0, abs=1e-15)
    assert float(row["laplacian"]) == pytest.approx(-0.36787944117144233)


def test_eig_scan_decreasing(capsys):
    code, out, _ = run(["eig-scan", "--C", "0.1,0.01"], capsys)
    assert code == 0
    E = [float(r["re"]) for r in rows_of(out)]
    assert E[0] > E[1] > -0.25
    assert all(r["class"] == "Bound" for r in rows_of(out))


def test_eig_scan_resolution_error(capsys):
    code, _, err = run(["eig-scan", "--C", "0.1", "--h", "0.1"], capsys)
    assert code == 2
    assert json.loads(err)["error"] == "GridResolutionError"


def test_ft_table_both_methods(capsys):
    code, out, _ = run(["ft-table", "--C", "1", "--k", "-1"], capsys)
    assert code == 0
    rows = rows_of(out)
    assert len(rows) == 50
    pairs = {}
    for r in rows:
        pairs.setdefault(r["xi"], {})[r["method"]] = float(r["re"])
    for vals in pairs.values():
        assert abs(vals["closed_form"] - vals["quadrature"]) < 1e-6


def test_coulomb_limit(capsys):
    code, out, _ = run(["coulomb-limit"], capsys)
    devs = [float(r["deviation"]) for r in rows_of(out)]
    assert code == 0 and devs[0] > devs[1] > devs[2]


def test_complex_scaling(capsys):
    code, out, _ = run(["complex-scaling", "--theta", "0.3", "--n", "200"], capsys)
    assert code == 0
    rows = rows_of(out)
    assert len(rows) == 200
    assert any(r["class"] == "Bound" for r in rows)


def test_dilatation_check(capsys):
    code, out, _ = run(["dilatation-check"], capsys)
    rows = rows_of(out)
    assert code == 0 and len(rows) == 9
    assert all(r["passes_II"] == "true" and r["passes_III"] == "true" for r in rows)


def test_propagate_missing_trajectory(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"grid": {"n": 40, "box": 20}, "t_final": 0.01, "trajectory_file": "gone.json"}))
    code, _, err = run(["propagate", "--config", str(cfg)], capsys)
    assert code == 2
    payload = json.loads(err)
    assert payload["error"] == "ConfigError" and "gone.json" in payload["message"]


def test_propagate_runs(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"grid": {"n": 40, "box": 20}, "dt": 0.01, "t_final": 0.05, "diagnostics_stride": 1}))
    out = tmp_path / "prop.csv"
    code, _, _ = run(["propagate", "--config", str(cfg), "--out", str(out)], capsys)
    assert code == 0
    rows = rows_of(out.read_text())
    assert len(rows) == 6
    assert all(abs(float(r["norm"]) - 1) < 1e-12 for r in rows)


def test_determinism_and_manifest(tmp_path, capsys):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        assert run(["ft-table", "--C", "0.5,1", "--xi", "0.5,1,2", "--method", "closed", "--out", str(p)], capsys)[0] == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
    man = json.loads((tmp_path / "a.csv.manifest.json").read_text())
    assert man["experiment"] == "ft-table"
    assert {"parameters", "seed", "versions", "wall_time"} <= set(man)


def test_jobs_preserve_order(capsys):
    argv = ["ft-table", "--C", "0.5,1,2", "--xi", "0.5,1,2,4", "--method", "closed"]
    serial = run(argv + ["--jobs", "1"], capsys)[1]
    parallel = run(argv + ["--jobs", "3"], capsys)[1]
    assert serial == parallel


@pytest.mark.parametrize(
    "argv",
    [
        ["ft-table", "--C", "abc"],
        ["ft-table", "--k", "1"],
        ["eig-scan", "--C", "0.01,0.1"],
        ["complex-scaling", "--theta", "2"],
        ["potential-table", "--r", "0,1"],
        ["no-such-command"],
        ["ft-table", "--jobs", "0"],
    ],
)
def test_bad_arguments_exit_2(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 2
    assert json.loads(err)["exit_code"] == 2


def test_numerical_failure_exit_3(monkeypatch, capsys):
    def boom(*a, **k):
        raise NonConvergenceError("forced")

    monkeypatch.setattr(fourier, "radial_ft_quadrature", boom)
    code, _, err = run(["ft-table", "--C", "1", "--xi", "1", "--method", "quadrature", "--k", "-1"], capsys)
    assert code == 3
    assert json.loads(err)["error"] == "NonConvergenceError"


@pytest.mark.parametrize("name", sorted(cli.SCHEMAS))
def test_help_documents_schema(name, capsys):
    code, out, _ = run([name, "--help"], capsys)
    assert code == 0
    assert f"CSV columns: {cli.SCHEMAS[name]}" in out


def test_selftest_passes(capsys):
    code, out, err = run(["selftest"], capsys)
    assert code == 0
    assert all(r["passed"] == "true" for r in rows_of(out))
    assert "FAIL" not in err


def test_selftest_catches_laplacian_sign_flip(monkeypatch, capsys):
    orig = potentials.laplacian
    monkeypatch.setattr(potentials, "laplacian", lambda spec, r: -orig(spec, r))
    code, out, _ = run(["selftest"], capsys)
    assert code == 1
    failed = {r["suite"] for r in rows_of(out) if r["passed"] == "false"}
    assert "potentials" in failed


def test_selftest_catches_k1_region_change(monkeypatch, capsys):
    monkeypatch.setattr(specfun, "SERIES_RADIUS", 10.0)
    code, out, _ = run(["selftest"], capsys)
    assert code == 1
    failed = {r["suite"] for r in rows_of(out) if r["passed"] == "false"}
    assert "specfun" in failed


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "softcoul.cli", "coulomb-limit", "--C", "0.1"], capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.splitlines()[0] == "C,xi,deviation"
