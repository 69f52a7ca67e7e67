import math

import numpy as np
import pytest

import fractalcurve as fc

# closed-form similarity dimensions, used as independent oracles
KOCH_DIM = math.log(4.0) / math.log(3.0)
CANTOR_DIM = math.log(2.0) / math.log(3.0)


def fit_slope(h, err):
    """Least-squares convergence order of err vs h on log-log axes."""
    return float(np.polyfit(np.log(np.asarray(h)), np.log(np.asarray(err)), 1)[0])


def wrapped_gaussian(grid, chart, sigma_frac=1.0 / 12.0, k_periods=1, center_frac=0.5):
    """Periodically wrapped, normalized Gaussian packet (smooth at the seam)."""
    s = chart.values
    total = chart.values[-1] - chart.values[0]
    center = chart.values[0] + center_frac * total
    sigma = sigma_frac * total
    k0 = 2.0 * np.pi * k_periods / total
    vals = np.zeros(grid.node_count, dtype=complex)
    for j in (-1, 0, 1):
        vals += np.exp(-((s - center + j * total) ** 2) / (4.0 * sigma ** 2))
    vals *= np.exp(1j * k0 * s)
    psi = fc.WaveFunction(fc.FieldOnCurve(grid, vals, chart))
    return psi.normalized()


@pytest.fixture(scope="session")
def koch5():
    grid = fc.build_koch(5)
    return grid, fc.build_staircase(grid, KOCH_DIM)


@pytest.fixture(scope="session")
def unit_line():
    grid = fc.build_line((0.0, 0.0, 0.0), (1.0, 0.0, 0.0), 256, level=8)
    return grid, fc.build_staircase(grid, 1.0)
