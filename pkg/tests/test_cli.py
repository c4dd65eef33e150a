import json

import numpy as np
import pytest

from epr_sfg.cli import EXIT_NUMERIC, EXIT_USAGE, EXIT_VERIFY, main
from epr_sfg.sweeps import SweepSpec, fmt, grid


def _csv(path):
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    rows = np.array([[float(v) if v not in ("true", "false") else v == "true"
                      for v in line.split(",")] for line in lines[1:]], dtype=float)
    return header, rows


def _point(capsys, *argv):
    assert main(["point", "--json", *argv]) == 0
    return json.loads(capsys.readouterr().out)


def test_point_anchor(capsys):
    out = _point(capsys, "--gamma3", "1", "--rho1", "0.1", "--rho3", "0.1", "--pump", "1",
                 "--r", "0.6", "--omega", "0")
    assert out["s_min"] == pytest.approx(0.633, abs=5e-4)
    assert out["s_min_db"] == pytest.approx(-1.98, abs=0.01)
    assert out["inseparable"] is True


def test_point_text_and_edge_cases(capsys):
    assert main(["point", "--r", "0"]) == 0
    text = capsys.readouterr().out
    assert "s_min        1\n" in text and "inseparable  false" in text
    out = _point(capsys, "--rho1", "0", "--rho3", "0", "--pump", "1", "--gamma3", "1", "--r", "1")
    assert out["s_min"] == pytest.approx(0.265802228834, abs=1e-12)


def test_point_csv_row(tmp_path, capsys):
    out = tmp_path / "p.csv"
    assert main(["point", "--out", str(out)]) == 0
    header, rows = _csv(out)
    assert header[6] == "s_min"
    assert out.read_bytes().endswith(b"\n") and b"\r" not in out.read_bytes()
    assert (tmp_path / "p.csv.manifest.json").exists()


def test_spectrum(tmp_path):
    out = tmp_path / "fig2.csv"
    assert main(["spectrum", "--r", "0", "0.6", "1", "2", "--out", str(out)]) == 0
    header, rows = _csv(out)
    assert header == ["omega", "smin_r=0", "smin_r=0.6", "smin_r=1", "smin_r=2"]
    assert len(rows) == 301
    np.testing.assert_array_equal(rows[:, 1], 1.0)
    for col in range(2, 5):
        assert np.argmin(rows[:, col]) == 0
    assert rows[0, 4] < rows[0, 3] < rows[0, 2]
    # Omega = 0 row prints exactly what `point` prints
    first_line = out.read_text().splitlines()[1]
    assert first_line.split(",")[2] == "0.633329501262"


def test_spectrum_is_symmetric(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["spectrum", "--start", "0", "--stop", "2", "--step", "0.25", "--out", str(a)])
    main(["spectrum", "--start", "-2", "--stop", "0", "--step", "0.25", "--out", str(b)])
    _, ra = _csv(a)
    _, rb = _csv(b)
    np.testing.assert_array_equal(ra[:, 1:], rb[::-1, 1:])


def test_pump_sweep_fig3(tmp_path):
    out = tmp_path / "fig3.csv"
    assert main(["pump-sweep", "--start", "0", "--out", str(out)]) == 0
    header, rows = _csv(out)
    assert header[1:] == ["smin_gamma3=0.6_r=2", "smin_gamma3=1_r=2", "smin_gamma3=1.4_r=2"]
    np.testing.assert_array_equal(rows[0, 1:], 1.0)
    manifest = json.loads((tmp_path / "fig3.csv.manifest.json").read_text())
    argmins = [manifest["summary"][h]["argmin_pump"] for h in header[1:]]
    assert argmins[0] < argmins[1] < argmins[2]


def test_pump_sweep_fig4_contains_anchor(tmp_path):
    out = tmp_path / "fig4.csv"
    assert main(["pump-sweep", "--gamma3", "1", "--r", "0.6", "1", "2", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    row = next(line for line in lines if line.startswith("1,"))
    assert row.split(",")[1] == "0.633329501262"


def test_squeeze_sweep(tmp_path):
    out = tmp_path / "fig5.csv"
    assert main(["squeeze-sweep", "--out", str(out)]) == 0
    _, rows = _csv(out)
    assert rows[0, 1] == 1.0
    assert np.all(np.diff(rows[:, 1]) < 0)
    manifest = json.loads((tmp_path / "fig5.csv.manifest.json").read_text())
    assert manifest["summary"]["asymptote"] == pytest.approx(0.181016, abs=1e-6)


def test_verify_passes_and_is_deterministic(tmp_path, capsys):
    out = tmp_path / "verdict.json"
    assert main(["verify", "--draws", "40", "--seed", "3", "--out", str(out)]) == 0
    verdict = json.loads(out.read_text())
    assert verdict["pass"]
    assert {"battery", "max_error", "tolerance", "pass"} <= set(verdict["batteries"][0])
    capsys.readouterr()
    main(["verify", "--draws", "1", "--seed", "9", "--json"])
    first = capsys.readouterr().out
    main(["verify", "--draws", "1", "--seed", "9", "--json"])
    assert capsys.readouterr().out == first


def test_verify_catches_injected_fault(capsys):
    assert main(["verify", "--draws", "20", "--inject-fault"]) == EXIT_VERIFY
    text = capsys.readouterr().out
    assert "FAIL  sum_rule" in text and "offending draw" in text


def test_montecarlo_short(tmp_path):
    out, trace = tmp_path / "mc.csv", tmp_path / "trace.csv"
    code = main(["montecarlo", "--duration", "2e4", "--omegas", "0", "1", "--out", str(out),
                 "--dump-trace", str(trace), "--dump-samples", "100"])
    assert code == 0
    header, rows = _csv(out)
    assert header[:4] == ["omega", "analytic", "simulated", "stderr"]
    assert rows.shape == (2, len(header))
    assert trace.read_text().splitlines()[0] == "t,Xa2,Ya2,Xb3,Yb3"
    assert len(trace.read_text().splitlines()) == 101
    manifest = json.loads((tmp_path / "mc.csv.manifest.json").read_text())
    assert manifest["seed"] == manifest["params"]["seed"]
    assert str(trace) in manifest["outputs"]


def test_montecarlo_divergence_exit_code(tmp_path):
    with pytest.warns(RuntimeWarning):
        code = main(["montecarlo", "--dt", "5", "--duration", "2e6", "--segment", "1024",
                     "--omegas", "0"])
    assert code == EXIT_NUMERIC


def test_config_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# standard point but no squeezing\nr = 0\npump=1\nrho1=0.1\n")
    out = _point(capsys, "--config", str(cfg))
    assert out["r"] == 0.0 and out["s_min"] == 1.0
    out = _point(capsys, "--config", str(cfg), "--r", "0.6")
    assert out["s_min"] == pytest.approx(0.633329501262)
    js = tmp_path / "run.json"
    js.write_text(json.dumps({"r": 1, "rho1": 0, "rho3": 0}))
    assert _point(capsys, "--config", str(js))["s_min"] == pytest.approx(0.265802228834)


def test_manifest_rerun_is_byte_identical(tmp_path):
    first = tmp_path / "first.csv"
    assert main(["spectrum", "--r", "0.6", "2", "--step", "0.1", "--pump", "1.3",
                 "--out", str(first)]) == 0
    second = tmp_path / "second.csv"
    assert main(["spectrum", "--config", f"{first}.manifest.json", "--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()


@pytest.mark.parametrize(
    "argv",
    [
        ["point", "--r", "0.6", "1"],
        ["point", "--r", "-1"],
        ["spectrum", "--start", "2", "--stop", "1"],
        ["spectrum", "--step", "0"],
        ["point", "--nope"],
        ["verify", "--draws", "0"],
        [],
    ],
)
def test_usage_errors(argv, capsys):
    try:
        code = main(argv)
    except SystemExit as exc:  # argparse rejects before dispatch
        code = exc.code
    assert code == EXIT_USAGE


def test_bad_config_file(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("just words\n")
    assert main(["point", "--config", str(cfg)]) == EXIT_USAGE


def test_grid_and_formatting():
    g = grid(0.0, 3.0, 0.01)
    assert len(g) == 301 and g[60] == 0.6 and g[-1] == 3.0
    assert fmt(0.1 + 0.2) == "0.3"
    assert fmt(1 / 3) == "0.333333333333"
    assert fmt(True) == "true"
    with pytest.raises(ValueError):
        SweepSpec("frequency", 0, 1, 0.1)
