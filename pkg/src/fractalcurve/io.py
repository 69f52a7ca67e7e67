"""CSV/JSON import and export.

All floats are written with 17 significant digits so that a write/read
cycle reproduces the binary doubles exactly; no file carries timestamps,
keeping repeated runs byte-identical.
"""

from __future__ import annotations

import json

import numpy as np

from .curves import CurveGrid, TimeSet
from .measure import Staircase

__all__ = [
    "fmt",
    "write_curve_csv",
    "read_curve_csv",
    "write_staircase_csv",
    "read_staircase_csv",
    "write_field_csv",
    "read_field_csv",
    "write_snapshot_csv",
    "read_snapshot_csv",
    "write_timeset_csv",
    "read_timeset_csv",
    "write_continuity_csv",
    "read_continuity_csv",
    "write_json",
]


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write_table(path, header: str, columns) -> None:
    rows = zip(*columns)
    with open(path, "w", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(fmt(x) for x in row) + "\n")


def _read_table(path, expected_header: str) -> dict:
    with open(path, "r") as fh:
        header = fh.readline().strip()
        if header != expected_header:
            raise ValueError(f"unexpected header {header!r} in {path}")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    names = expected_header.split(",")
    return {name: data[:, i] for i, name in enumerate(names)}


def write_curve_csv(path, grid: CurveGrid) -> None:
    _write_table(path, "v,x,y,z",
                 (grid.params, grid.points[:, 0], grid.points[:, 1], grid.points[:, 2]))


def read_curve_csv(path) -> dict:
    return _read_table(path, "v,x,y,z")


def write_staircase_csv(path, stair: Staircase) -> None:
    _write_table(path, "v,S", (stair.params, stair.values))


def read_staircase_csv(path) -> dict:
    return _read_table(path, "v,S")


def write_field_csv(path, field) -> None:
    v = field.grid.params
    s = field.chart.values
    re = np.real(field.values)
    im = np.imag(field.values) if field.is_complex else np.zeros_like(re)
    _write_table(path, "v,S,re,im", (v, s, re, im))


def read_field_csv(path) -> dict:
    return _read_table(path, "v,S,re,im")


def write_snapshot_csv(path, psi) -> None:
    v = psi.grid.params
    s = psi.space_chart.values
    re = np.real(psi.values)
    im = np.imag(psi.values)
    _write_table(path, "v,S,re,im,abs2", (v, s, re, im, re ** 2 + im ** 2))


def read_snapshot_csv(path) -> dict:
    return _read_table(path, "v,S,re,im,abs2")


def write_timeset_csv(path, ts: TimeSet) -> None:
    _write_table(path, "lo,hi", (ts.kept_intervals[:, 0], ts.kept_intervals[:, 1]))


def read_timeset_csv(path) -> dict:
    return _read_table(path, "lo,hi")


def write_continuity_csv(path, rows) -> None:
    """rows: iterable of (tau, residual_max, residual_l2, total_probability)."""
    cols = list(zip(*rows)) if rows else ([], [], [], [])
    _write_table(path, "tau,residual_max,residual_l2,total_probability", cols)


def read_continuity_csv(path) -> dict:
    return _read_table(path, "tau,residual_max,residual_l2,total_probability")


def write_json(path, obj) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
