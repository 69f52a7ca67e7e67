"""Staircase calculus and Schrodinger evolution on fractal curves in R^3."""

from .curves import (
    AffineMap,
    CurveGrid,
    GeneratorSpec,
    TimeSet,
    build_cantor_dust,
    build_cantor_time,
    build_generator_curve,
    build_koch,
    build_line,
    koch_generator,
)
from .measure import (
    DimensionEstimate,
    PreMeasureResult,
    Staircase,
    build_staircase,
    estimate_gamma_dimension,
    gamma_premeasure,
    j_of_point,
)
from .calculus import (
    FieldOnCurve,
    VectorFieldOnCurve,
    divergence,
    falpha_derivative,
    falpha_integral,
    gradient,
    laplacian,
    taylor_eval,
)
from .dynamics import (
    ConjugateField,
    CrankNicolsonEvolver,
    KernelStep,
    PhysicalConstants,
    PlaneWaveParams,
    PotentialOnCurve,
    WaveFunction,
    conjugate_map,
    conjugate_unmap,
    evolve,
    fit_phase_rate,
    gaussian_packet,
    hamiltonian_apply,
    kernel_moments,
    kernel_step,
    momentum_apply,
    plane_wave,
    schrodinger_residual,
    stationary_ground_state,
)
from .flow import (
    CurrentField,
    DensityField,
    continuity_residual,
    probability_current,
    probability_density,
    total_probability,
)
from . import errors

__version__ = "0.1.0"
