"""Bound-state energies of 1D wells from corrected semiclassical quantization."""
from .correction import (
    CorrectionScheme,
    LevelShift,
    compute_q,
    delta1_numeric,
    improved_delta,
    pade_delta,
    simplified_delta1,
)
from .oracle import OracleSpectrum, analytic_spectrum, fd_spectrum
from .potential import (
    PhysicalScale,
    ShapeClassSpec,
    WellDescriptor,
    closed_form_delta1,
    from_shape_class,
    make_builtin,
    make_well,
)
from .quadrature import (
    QuadratureConfig,
    TurningPoints,
    d2_wrt_eps,
    phase_integral,
    singular_integral,
    turning_points,
)
from .solver import LevelRecord, SpectrumReport, gamma, solve_level, spectrum

__all__ = [
    "CorrectionScheme", "LevelShift", "compute_q", "delta1_numeric", "improved_delta",
    "pade_delta", "simplified_delta1", "OracleSpectrum", "analytic_spectrum", "fd_spectrum",
    "PhysicalScale", "ShapeClassSpec", "WellDescriptor", "closed_form_delta1",
    "from_shape_class", "make_builtin", "make_well", "QuadratureConfig", "TurningPoints",
    "d2_wrt_eps", "phase_integral", "singular_integral", "turning_points", "LevelRecord",
    "SpectrumReport", "gamma", "solve_level", "spectrum",
]
