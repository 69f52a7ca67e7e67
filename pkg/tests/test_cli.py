import json
import math

import numpy as np
import pytest

import fractalcurve as fc
from fractalcurve import cli, io
from fractalcurve.errors import EstimationFailureError

from conftest import KOCH_DIM


def run_cli(args):
    return cli.main([str(a) for a in args])


def write_cfg(path, cfg):
    path.write_text(json.dumps(cfg, indent=1))
    return path


def test_dimension_koch(tmp_path):
    cfg = write_cfg(tmp_path / "cfg.json", {
        "curve": {"kind": "koch"},
        "dimension": {"levels": [2, 3, 4, 5, 6, 7], "tol": 1e-3},
        "output": str(tmp_path / "out"),
    })
    assert run_cli(["dimension", cfg]) == 0
    report = json.loads((tmp_path / "out" / "dimension.json").read_text())
    assert abs(report["alpha_star"] - KOCH_DIM) < 5e-3
    assert len(report["slopes_per_level"]) == 5
    manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
    assert manifest["config_sha256"] == cli.config_sha256(json.loads(cfg.read_text()))


def test_dimension_line_and_usage_error(tmp_path):
    cfg = write_cfg(tmp_path / "line.json", {
        "curve": {"kind": "line"},
        "dimension": {"levels": [1, 2, 3, 4, 5, 6], "tol": 1e-4},
        "output": str(tmp_path / "out"),
    })
    assert run_cli(["dimension", cfg]) == 0
    report = json.loads((tmp_path / "out" / "dimension.json").read_text())
    assert abs(report["alpha_star"] - 1.0) < 1e-3

    short = write_cfg(tmp_path / "short.json", {
        "curve": {"kind": "koch"},
        "dimension": {"levels": [0]},
        "output": str(tmp_path / "o2"),
    })
    assert run_cli(["dimension", short]) == 2


def test_staircase_space_and_time(tmp_path):
    cfg = write_cfg(tmp_path / "cfg.json", {
        "curve": {"kind": "koch", "level": 4},
        "alpha_space": "auto",
        "time_set": {"kind": "cantor", "T": 1.0, "level": 5},
        "output": str(tmp_path / "out"),
    })
    assert run_cli(["staircase", cfg]) == 0
    stair = io.read_staircase_csv(tmp_path / "out" / "staircase.csv")
    assert np.all(np.diff(stair["S"]) >= 0)
    # auto alpha lands near the similarity dimension, so S(1) ~ 1/Gamma(1+dim)
    expect = 1.0 / math.gamma(1.0 + KOCH_DIM)
    assert abs(stair["S"][-1] - expect) < 1e-2

    tstair = io.read_staircase_csv(tmp_path / "out" / "time_staircase.csv")
    dS = np.diff(tstair["S"])
    assert np.all(dS >= 0) and np.any(dS == 0)  # devil's staircase has plateaus
    ts = io.read_timeset_csv(tmp_path / "out" / "timeset.csv")
    assert len(ts["lo"]) == 2 ** 5


def test_derive_and_integrate(tmp_path):
    base = {
        "curve": {"kind": "line", "segments": 128},
        "alpha_space": 1.0,
        "field": {"kind": "staircase"},
        "output": str(tmp_path / "out"),
    }
    cfg = write_cfg(tmp_path / "cfg.json", base)
    assert run_cli(["derive", cfg]) == 0
    data = io.read_field_csv(tmp_path / "out" / "derive.csv")
    np.testing.assert_allclose(data["re"], 1.0, atol=1e-12)
    np.testing.assert_array_equal(data["im"], 0.0)

    base2 = dict(base, field={"kind": "constant", "value": 1.0},
                 integrate={"a": 0.25, "b": 0.75})
    cfg2 = write_cfg(tmp_path / "cfg2.json", base2)
    assert run_cli(["integrate", cfg2]) == 0
    result = json.loads((tmp_path / "out" / "integrate.json").read_text())
    assert result["value_re"] == pytest.approx(0.5, rel=1e-12)


def test_evolve_artifacts_and_roundtrip(tmp_path):
    cfg = write_cfg(tmp_path / "cfg.json", {
        "curve": {"kind": "koch", "level": 4},
        "alpha_space": KOCH_DIM,
        "run": {
            "d_tau": 1e-3, "steps": 40, "snapshot_stride": 10, "boundary": "periodic",
            "initial": {"kind": "plane_wave", "k_periods": 1},
            "potential": {"kind": "none"},
        },
        "output": str(tmp_path / "out"),
    })
    assert run_cli(["evolve", cfg]) == 0
    out = tmp_path / "out"
    snaps = sorted(out.glob("snapshot_*.csv"))
    assert [s.name for s in snaps] == [f"snapshot_{i:06d}.csv" for i in (0, 10, 20, 30, 40)]

    phase = json.loads((out / "phase_check.json").read_text())
    assert phase["relative_error"] < 1e-3

    cont = io.read_continuity_csv(out / "continuity.csv")
    assert len(cont["tau"]) == 3
    np.testing.assert_allclose(cont["total_probability"],
                               cont["total_probability"][0], rtol=1e-12)

    # snapshot files round-trip the binary doubles exactly
    data = io.read_snapshot_csv(snaps[0])
    grid = fc.build_koch(4)
    chart = fc.build_staircase(grid, KOCH_DIM)
    psi0 = fc.plane_wave(
        fc.PlaneWaveParams.from_wavenumber(2 * math.pi / chart.total), grid, chart)
    np.testing.assert_array_equal(data["v"], grid.params)
    # the seam node is the wrap image of the first node under periodic runs
    np.testing.assert_array_equal(data["re"][:-1], np.real(psi0.values)[:-1])
    np.testing.assert_array_equal(data["im"][:-1], np.imag(psi0.values)[:-1])
    assert data["re"][-1] == data["re"][0] and data["im"][-1] == data["im"][0]


def test_evolve_harmonic_ground_report(tmp_path):
    cfg = write_cfg(tmp_path / "cfg.json", {
        "curve": {"kind": "line", "segments": 511, "end": [16.0, 0.0, 0.0]},
        "alpha_space": 1.0,
        "run": {
            "d_tau": 1e-3, "steps": 50, "snapshot_stride": 25, "boundary": "dirichlet",
            "initial": {"kind": "harmonic_ground"},
            "potential": {"kind": "harmonic", "omega": 1.0},
        },
        "output": str(tmp_path / "out"),
    })
    assert run_cli(["evolve", cfg]) == 0
    report = json.loads((tmp_path / "out" / "stationary_report.json").read_text())
    assert report["max_modulus_drift"] < 1e-8


def test_continuity_subcommand_writes_no_snapshots(tmp_path):
    cfg = write_cfg(tmp_path / "cfg.json", {
        "curve": {"kind": "line", "segments": 255, "end": [16.0, 0.0, 0.0]},
        "alpha_space": 1.0,
        "run": {
            "d_tau": 1e-3, "steps": 30, "snapshot_stride": 10, "boundary": "dirichlet",
            "initial": {"kind": "gaussian", "sigma_frac": 0.0625, "k0_periods": 1},
        },
        "output": str(tmp_path / "out"),
    })
    assert run_cli(["continuity", cfg]) == 0
    out = tmp_path / "out"
    assert not list(out.glob("snapshot_*.csv"))
    cont = io.read_continuity_csv(out / "continuity.csv")
    assert len(cont["tau"]) == 2
    drift = np.abs(cont["total_probability"] - cont["total_probability"][0])
    assert np.max(drift) < 1e-10


def test_determinism_byte_identical(tmp_path):
    cfg = write_cfg(tmp_path / "cfg.json", {
        "curve": {"kind": "koch", "level": 3},
        "alpha_space": "auto",
        "time_set": {"kind": "cantor", "T": 1.0, "level": 4},
        "run": {
            "d_tau": 2e-3, "steps": 20, "snapshot_stride": 5, "boundary": "periodic",
            "initial": {"kind": "gaussian", "k0_periods": 1},
        },
        "output": str(tmp_path / "default_out"),
    })
    for sub in ("evolve", "staircase"):
        a, b = tmp_path / f"{sub}_a", tmp_path / f"{sub}_b"
        assert run_cli([sub, cfg, "--output-dir", a]) == 0
        assert run_cli([sub, cfg, "--output-dir", b]) == 0
        files_a = sorted(p.name for p in a.iterdir())
        assert files_a == sorted(p.name for p in b.iterdir()) and files_a
        for name in files_a:
            assert (a / name).read_bytes() == (b / name).read_bytes()


def test_config_error_paths(tmp_path):
    missing = tmp_path / "missing.json"
    assert run_cli(["evolve", missing]) == 2

    bad = tmp_path / "bad.json"
    bad.write_text("{ not json")
    assert run_cli(["evolve", bad]) == 2

    nocurve = write_cfg(tmp_path / "nocurve.json", {
        "run": {"d_tau": 1e-3, "steps": 5, "initial": {"kind": "plane_wave"}},
        "output": str(tmp_path / "o"),
    })
    assert run_cli(["evolve", nocurve]) == 2

    badkind = write_cfg(tmp_path / "badkind.json", {
        "curve": {"kind": "sierpinski", "level": 2},
        "dimension": {"levels": [2, 3, 4]},
        "output": str(tmp_path / "o"),
    })
    assert run_cli(["dimension", badkind]) == 2

    ground_periodic = write_cfg(tmp_path / "gp.json", {
        "curve": {"kind": "line", "segments": 64},
        "run": {"d_tau": 1e-3, "steps": 5, "boundary": "periodic",
                "initial": {"kind": "harmonic_ground"},
                "potential": {"kind": "harmonic"}},
        "output": str(tmp_path / "o"),
    })
    assert run_cli(["evolve", ground_periodic]) == 2

    assert run_cli(["unknown-command", nocurve]) == 2


def test_numerical_failure_exit_code(tmp_path, monkeypatch):
    def boom(*args, **kwargs):
        raise EstimationFailureError("no dichotomy", alpha=1.0, slopes=[0.1, -0.2])

    monkeypatch.setattr(cli, "estimate_gamma_dimension", boom)
    cfg = write_cfg(tmp_path / "cfg.json", {
        "curve": {"kind": "koch"},
        "dimension": {"levels": [2, 3, 4]},
        "output": str(tmp_path / "out"),
    })
    assert run_cli(["dimension", cfg]) == 1
    diag = json.loads((tmp_path / "out" / "error.json").read_text())
    assert diag["error"] == "EstimationFailureError"
    assert diag["slopes"] == [0.1, -0.2]


def test_output_root_env(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_ROOT_ENV, str(tmp_path / "root"))
    cfg = write_cfg(tmp_path / "cfg.json", {
        "curve": {"kind": "line", "segments": 16},
        "alpha_space": 1.0,
        "field": {"kind": "constant", "value": 2.0},
        "output": "nested/out",
    })
    assert run_cli(["integrate", cfg]) == 0
    assert (tmp_path / "root" / "nested" / "out" / "integrate.json").exists()


def test_curve_csv_roundtrip(tmp_path):
    grid = fc.build_koch(3)
    path = tmp_path / "curve.csv"
    io.write_curve_csv(path, grid)
    data = io.read_curve_csv(path)
    np.testing.assert_array_equal(data["v"], grid.params)
    np.testing.assert_array_equal(
        np.stack([data["x"], data["y"], data["z"]], axis=1), grid.points)
