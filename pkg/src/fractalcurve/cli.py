"""Configuration-driven command line front end.

One JSON config file describes an experiment; the subcommand selects
what to compute.  All numeric output is written through :mod:`.io` at 17
significant digits with no timestamps, so identical configs produce
byte-identical artifacts.  Exit codes: 0 success, 1 numerical failure,
2 config or usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, io
from .calculus import FieldOnCurve, falpha_derivative, falpha_integral
from .curves import build_cantor_dust, build_cantor_time, build_koch, build_line
from .dynamics import (
    CrankNicolsonEvolver,
    PhysicalConstants,
    PlaneWaveParams,
    PotentialOnCurve,
    WaveFunction,
    fit_phase_rate,
    plane_wave,
    stationary_ground_state,
)
from .errors import FractalCurveError
from .flow import continuity_residual, total_probability
from .measure import build_staircase, estimate_gamma_dimension, gamma_premeasure

OUTPUT_ROOT_ENV = "FRACTALCURVE_OUTPUT_ROOT"


class ConfigError(Exception):
    """Invalid or inconsistent experiment configuration."""


def _require(cond, message):
    if not cond:
        raise ConfigError(message)


def _get(cfg, key, default=None, required=False):
    if key in cfg:
        return cfg[key]
    _require(not required, f"config is missing required key {key!r}")
    return default


def load_config(path) -> dict:
    try:
        with open(path, "r") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}")
    _require(isinstance(cfg, dict), "config root must be a JSON object")
    return cfg


def config_sha256(cfg: dict) -> str:
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def _build_curve(curve_cfg, level=None):
    _require(isinstance(curve_cfg, dict), "'curve' must be an object")
    kind = _get(curve_cfg, "kind", required=True)
    if kind == "koch":
        lvl = level if level is not None else _get(curve_cfg, "level", required=True)
        _require(isinstance(lvl, int) and lvl >= 0, "koch level must be a non-negative integer")
        return build_koch(lvl)
    if kind == "cantor_dust":
        lvl = level if level is not None else _get(curve_cfg, "level", required=True)
        _require(isinstance(lvl, int) and lvl >= 0, "dust level must be a non-negative integer")
        return build_cantor_dust(lvl, T=float(_get(curve_cfg, "T", 1.0)))
    if kind == "line":
        start = _get(curve_cfg, "start", [0.0, 0.0, 0.0])
        end = _get(curve_cfg, "end", [1.0, 0.0, 0.0])
        if level is not None:
            return build_line(start, end, 2 ** level, level=level)
        n = _get(curve_cfg, "segments", required=True)
        _require(isinstance(n, int) and n >= 1, "line segments must be a positive integer")
        return build_line(start, end, n, level=int(_get(curve_cfg, "level", 0)))
    raise ConfigError(f"unknown curve kind {kind!r}")


def _dimension_grids(curve_cfg, levels):
    _require(len(levels) >= 3, "dimension estimation needs at least 3 levels")
    _require(all(isinstance(l, int) and l >= 0 for l in levels), "levels must be integers >= 0")
    _require(list(levels) == sorted(set(levels)), "levels must be strictly increasing")
    return [_build_curve(curve_cfg, level=l) for l in levels]


def _resolve_alpha(cfg, grid):
    requested = _get(cfg, "alpha_space", 1.0)
    if requested == "auto":
        curve_cfg = cfg["curve"]
        kind = _get(curve_cfg, "kind", required=True)
        top = min(grid.level, 7) if kind != "line" else 6
        levels = list(range(max(1, top - 4), top + 1))
        if len(levels) < 3:
            levels = [1, 2, 3]
        est = estimate_gamma_dimension(_dimension_grids(curve_cfg, levels), tol=1e-3)
        return est.alpha_star
    _require(isinstance(requested, (int, float)) and requested > 0,
             "alpha_space must be positive or 'auto'")
    return float(requested)


def _physics(cfg) -> PhysicalConstants:
    phys = _get(cfg, "physics", {})
    try:
        return PhysicalConstants(hbar=float(_get(phys, "hbar", 1.0)),
                                 mass=float(_get(phys, "mass", 1.0)))
    except ValueError as exc:
        raise ConfigError(str(exc))


def _time_chart(cfg):
    ts_cfg = _get(cfg, "time_set", {"kind": "full"})
    kind = _get(ts_cfg, "kind", "full")
    if kind == "full":
        return None, None
    if kind == "cantor":
        T = float(_get(ts_cfg, "T", 1.0))
        level = _get(ts_cfg, "level", required=True)
        _require(isinstance(level, int) and level >= 0, "time_set level must be an integer >= 0")
        ts = build_cantor_time(T, level)
        return ts, ts.time_staircase
    raise ConfigError(f"unknown time_set kind {kind!r}")


def _output_dir(cfg, override=None) -> Path:
    out = override if override is not None else _get(cfg, "output", required=True)
    path = Path(out)
    if not path.is_absolute():
        root = os.environ.get(OUTPUT_ROOT_ENV)
        if root:
            path = Path(root) / path
    path.mkdir(parents=True, exist_ok=True)
    return path


def _manifest(cfg, derived) -> dict:
    return {
        "config": cfg,
        "config_sha256": config_sha256(cfg),
        "package_version": __version__,
        "derived": derived,
    }


def _make_field(cfg, grid, chart) -> FieldOnCurve:
    fld = _get(cfg, "field", required=True)
    kind = _get(fld, "kind", required=True)
    s_total = chart.values[-1] - chart.values[0]
    if kind == "constant":
        return FieldOnCurve.constant(grid, chart, float(_get(fld, "value", 1.0)))
    if kind == "staircase":
        return FieldOnCurve.from_chart_function(grid, chart, lambda s: s)
    if kind == "staircase_squared":
        return FieldOnCurve.from_chart_function(grid, chart, lambda s: s ** 2)
    if kind == "sin_staircase":
        q = float(_get(fld, "k_periods", 1.0))
        k = 2.0 * math.pi * q / s_total
        return FieldOnCurve.from_chart_function(grid, chart, lambda s: np.sin(k * s))
    raise ConfigError(f"unknown field kind {kind!r}")


def _initial_state(run_cfg, grid, chart, time_chart, constants, boundary):
    init = _get(run_cfg, "initial", required=True)
    kind = _get(init, "kind", required=True)
    s0 = chart.values[0]
    s_total = chart.values[-1] - chart.values[0]
    if kind == "plane_wave":
        q = float(_get(init, "k_periods", 1.0))
        k = 2.0 * math.pi * q / s_total
        params = PlaneWaveParams.from_wavenumber(
            k, A=complex(_get(init, "A", 1.0)), B=complex(_get(init, "B", 0.0)),
            constants=constants)
        return plane_wave(params, grid, chart, time_chart=time_chart, constants=constants), params
    if kind == "gaussian":
        center = s0 + float(_get(init, "center_frac", 0.5)) * s_total
        sigma = float(_get(init, "sigma_frac", 1.0 / 12.0)) * s_total
        _require(sigma > 0, "gaussian sigma_frac must be positive")
        k0 = 2.0 * math.pi * float(_get(init, "k0_periods", 0.0)) / s_total
        s = chart.values
        vals = np.zeros(grid.node_count, dtype=complex)
        # wrapped images keep the packet smooth across the seam of periodic runs
        images = (-1, 0, 1) if boundary == "periodic" else (0,)
        for j in images:
            vals += np.exp(-((s - center + j * s_total) ** 2) / (4.0 * sigma ** 2))
        vals *= np.exp(1j * k0 * s)
        psi = WaveFunction(FieldOnCurve(grid, vals, chart),
                           time_chart=time_chart, constants=constants)
        return psi.normalized(), None
    if kind == "harmonic_ground":
        _require(boundary == "dirichlet", "harmonic_ground requires dirichlet boundary")
        potential = _potential(run_cfg, grid, chart, constants)
        _require(potential is not None, "harmonic_ground requires a potential")
        psi = stationary_ground_state(grid, chart, potential, constants=constants,
                                      time_chart=time_chart,
                                      xi_points=_get(run_cfg, "xi_points"))
        return psi, None
    raise ConfigError(f"unknown initial state kind {kind!r}")


def _potential(run_cfg, grid, chart, constants):
    pot = _get(run_cfg, "potential", {"kind": "none"})
    kind = _get(pot, "kind", "none")
    if kind == "none":
        return None
    if kind == "harmonic":
        omega = float(_get(pot, "omega", 1.0))
        _require(omega > 0, "harmonic omega must be positive")
        s0 = chart.values[0]
        s_total = chart.values[-1] - chart.values[0]
        center = s0 + float(_get(pot, "center_frac", 0.5)) * s_total
        fld = FieldOnCurve.from_chart_function(
            grid, chart, lambda s: 0.5 * constants.mass * omega ** 2 * (s - center) ** 2)
        return PotentialOnCurve(fld)
    raise ConfigError(f"unknown potential kind {kind!r}")


def cmd_dimension(cfg, out_dir: Path) -> int:
    dim_cfg = _get(cfg, "dimension", required=True)
    levels = _get(dim_cfg, "levels", required=True)
    tol = float(_get(dim_cfg, "tol", 1e-3))
    _require(tol > 0, "dimension tol must be positive")
    grids = _dimension_grids(_get(cfg, "curve", required=True), levels)
    est = estimate_gamma_dimension(grids, tol=tol)
    report = est.to_report_dict()
    report["premeasure_at_alpha"] = [gamma_premeasure(g, est.alpha_star).value for g in grids]
    io.write_json(out_dir / "dimension.json", report)
    io.write_json(out_dir / "manifest.json", _manifest(cfg, {"alpha_star": est.alpha_star}))
    return 0


def cmd_staircase(cfg, out_dir: Path) -> int:
    wrote = False
    derived = {}
    if "curve" in cfg:
        grid = _build_curve(cfg["curve"])
        alpha = _resolve_alpha(cfg, grid)
        chart = build_staircase(grid, alpha, p0=_get(cfg, "p0"))
        io.write_staircase_csv(out_dir / "staircase.csv", chart)
        derived["alpha_space"] = alpha
        derived["staircase_total"] = chart.total
        wrote = True
    ts, time_chart = _time_chart(cfg)
    if ts is not None:
        io.write_staircase_csv(out_dir / "time_staircase.csv", time_chart)
        io.write_timeset_csv(out_dir / "timeset.csv", ts)
        derived["time_staircase_total"] = time_chart.total
        wrote = True
    _require(wrote, "staircase needs a 'curve' or a cantor 'time_set' section")
    io.write_json(out_dir / "manifest.json", _manifest(cfg, derived))
    return 0


def _field_context(cfg):
    grid = _build_curve(_get(cfg, "curve", required=True))
    alpha = _resolve_alpha(cfg, grid)
    chart = build_staircase(grid, alpha, p0=_get(cfg, "p0"))
    return grid, alpha, chart


def cmd_derive(cfg, out_dir: Path) -> int:
    grid, alpha, chart = _field_context(cfg)
    f = _make_field(cfg, grid, chart)
    df = falpha_derivative(f)
    io.write_field_csv(out_dir / "derive.csv", df)
    io.write_json(out_dir / "manifest.json", _manifest(cfg, {"alpha_space": alpha}))
    return 0


def cmd_integrate(cfg, out_dir: Path) -> int:
    grid, alpha, chart = _field_context(cfg)
    f = _make_field(cfg, grid, chart)
    rng = _get(cfg, "integrate", {})
    a = _get(rng, "a")
    b = _get(rng, "b")
    value = falpha_integral(f, a=a, b=b)
    report = {
        "value_re": float(np.real(value)),
        "value_im": float(np.imag(value)),
        "a": grid.params[0] if a is None else a,
        "b": grid.params[-1] if b is None else b,
    }
    io.write_json(out_dir / "integrate.json", report)
    io.write_json(out_dir / "manifest.json", _manifest(cfg, {"alpha_space": alpha}))
    return 0


def _run_evolution(cfg, out_dir: Path, write_snapshots: bool) -> int:
    run_cfg = _get(cfg, "run", required=True)
    d_tau = float(_get(run_cfg, "d_tau", required=True))
    steps = _get(run_cfg, "steps", required=True)
    stride = _get(run_cfg, "snapshot_stride", max(1, steps // 10))
    boundary = _get(run_cfg, "boundary", "dirichlet")
    _require(boundary in ("dirichlet", "periodic"), "boundary must be dirichlet or periodic")
    _require(isinstance(steps, int) and steps >= 1, "steps must be a positive integer")
    _require(isinstance(stride, int) and stride >= 1, "snapshot_stride must be a positive integer")
    _require(d_tau > 0, "d_tau must be positive")

    grid = _build_curve(_get(cfg, "curve", required=True))
    alpha = _resolve_alpha(cfg, grid)
    chart = build_staircase(grid, alpha, p0=_get(cfg, "p0"))
    constants = _physics(cfg)
    ts, time_chart = _time_chart(cfg)
    psi0, pw_params = _initial_state(run_cfg, grid, chart, time_chart, constants, boundary)
    potential = _potential(run_cfg, grid, chart, constants)

    ev = CrankNicolsonEvolver(psi0, potential, d_tau, boundary=boundary,
                              xi_points=_get(run_cfg, "xi_points"))
    snapshots = [(0, ev.snapshot())]
    done = 0
    while done < steps:
        n = min(stride, steps - done)
        ev.step(n)
        done += n
        snapshots.append((done, ev.snapshot()))

    if write_snapshots:
        for idx, psi in snapshots:
            io.write_snapshot_csv(out_dir / f"snapshot_{idx:06d}.csv", psi)

    rows = []
    for j in range(1, len(snapshots) - 1):
        ia, pa = snapshots[j - 1]
        ib, pb = snapshots[j]
        ic, pc = snapshots[j + 1]
        if ib - ia != ic - ib:
            continue
        res = continuity_residual(pa, pb, pc).values
        l2 = math.sqrt(float(falpha_integral(pb.field.with_values(res.astype(float) ** 2))))
        rows.append((pb.tau, float(np.max(res)), l2, total_probability(pb)))
    io.write_continuity_csv(out_dir / "continuity.csv", rows)

    derived = {
        "alpha_space": alpha,
        "staircase_total": chart.total,
        "node_count": grid.node_count,
        "xi_points": len(ev.xi),
        "final_tau": ev.tau,
        "final_total_probability": total_probability(snapshots[-1][1]),
    }
    if ts is not None:
        derived["final_wall_time"] = snapshots[-1][1].wall_time()

    if pw_params is not None:
        beta_measured = fit_phase_rate([p for _, p in snapshots])
        beta_expected = pw_params.beta
        io.write_json(out_dir / "phase_check.json", {
            "beta_measured": beta_measured,
            "beta_expected": beta_expected,
            "relative_error": abs(beta_measured - beta_expected) / abs(beta_expected),
        })
    init_kind = _get(_get(run_cfg, "initial", {}), "kind")
    if init_kind == "harmonic_ground":
        drift = max(
            float(np.max(np.abs(np.abs(p.values) - np.abs(psi0.values))))
            for _, p in snapshots
        )
        io.write_json(out_dir / "stationary_report.json", {"max_modulus_drift": drift})

    io.write_json(out_dir / "manifest.json", _manifest(cfg, derived))
    return 0


def cmd_evolve(cfg, out_dir: Path) -> int:
    return _run_evolution(cfg, out_dir, write_snapshots=True)


def cmd_continuity(cfg, out_dir: Path) -> int:
    return _run_evolution(cfg, out_dir, write_snapshots=False)


_COMMANDS = {
    "dimension": cmd_dimension,
    "staircase": cmd_staircase,
    "derive": cmd_derive,
    "integrate": cmd_integrate,
    "evolve": cmd_evolve,
    "continuity": cmd_continuity,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fractalcurve",
        description="Staircase calculus and Schrodinger evolution on fractal curves.",
    )
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("config", help="path to the experiment JSON config")
    parser.add_argument("--output-dir", default=None,
                        help="override the config's output directory")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        cfg = load_config(args.config)
        out_dir = _output_dir(cfg, override=args.output_dir)
        return _COMMANDS[args.command](cfg, out_dir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FractalCurveError as exc:
        diag = {"error": type(exc).__name__, "message": str(exc)}
        slopes = getattr(exc, "slopes", None)
        if slopes is not None:
            diag["slopes"] = list(map(float, slopes))
        try:
            io.write_json(_output_dir(cfg, override=args.output_dir) / "error.json", diag)
        except Exception:
            pass
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
