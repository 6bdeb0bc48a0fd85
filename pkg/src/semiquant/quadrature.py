"""Turning points and the endpoint-singular integrals of the quantization condition.

Both integrals between turning points use the substitution
``x = x_mid + x_half * cos(theta)``.  With simple turning points
``eps - V`` vanishes like ``sin(theta)**2`` at both ends, so the Jacobian
``x_half * sin(theta)`` leaves a smooth, even, pi-periodic integrand in theta
for either ``sqrt(eps - V)`` or ``1 / sqrt(eps - V)``.  The trapezoidal rule
is then spectrally accurate and node doubling reuses every previous node.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import (
    ConvergenceError,
    DegenerateTurningPointError,
    DivergentPhaseError,
    NoClassicalRegionError,
    StencilError,
)
from .potential import PhysicalScale, WellDescriptor


@dataclass(frozen=True)
class QuadratureConfig:
    """Numerical knobs.  ``root_tol=None`` means ``1e-12 * max(1, |eps|)``."""

    n_nodes: int = 64
    eps_stencil_factor: float = 1e-2
    tail_tol: float = 1e-14
    root_tol: float | None = None
    refine_limit: int = 12
    rel_tol: float = 1e-11

    def __post_init__(self):
        if self.n_nodes < 32:
            raise ValueError("n_nodes must be at least 32")
        for name in ("eps_stencil_factor", "tail_tol", "refine_limit", "rel_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.root_tol is not None and not self.root_tol > 0:
            raise ValueError("root_tol must be positive")
        if self.eps_stencil_factor > 0.25:
            raise ValueError("eps_stencil_factor must not exceed 0.25")

    def root_tolerance(self, eps: float) -> float:
        if self.root_tol is not None:
            return self.root_tol
        return 1e-12 * max(1.0, abs(eps))


DEFAULT_CONFIG = QuadratureConfig()


@dataclass(frozen=True)
class TurningPoints:
    x_minus: float
    x_plus: float
    at_infinity_minus: bool = False
    at_infinity_plus: bool = False

    @property
    def finite(self) -> bool:
        return not (self.at_infinity_minus or self.at_infinity_plus)

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.x_minus + self.x_plus)

    @property
    def half_width(self) -> float:
        return 0.5 * (self.x_plus - self.x_minus)


# --------------------------------------------------------------------------
# turning points


def _bisect_crossing(f: Callable[[float], float], inside: float, outside: float) -> float:
    """Bisect until the bracket stops shrinking; ``f(inside) < 0 <= f(outside)``."""
    a, b = inside, outside
    for _ in range(200):
        m = 0.5 * (a + b)
        if m == a or m == b:
            break
        if f(m) < 0:
            a = m
        else:
            b = m
    # side with the smaller residual
    return a if abs(f(a)) <= abs(f(b)) else b


def _outward_root(well: WellDescriptor, eps: float, direction: int) -> float:
    x0 = well.x_min
    V = lambda t: float(well.value(t)) - eps
    step = well.domain_hint * 1e-3 if well.domain_hint else 1e-3
    inside = x0
    for _ in range(400):
        trial = x0 + direction * step
        try:
            if V(trial) >= 0:
                return _bisect_crossing(V, inside, trial)
        except Exception as exc:  # escaped the tabulated domain of a shape well
            raise NoClassicalRegionError(
                f"no turning point found for eps = {eps!r}: {exc}") from exc
        inside = trial
        step *= 2.0
    raise NoClassicalRegionError(f"turning point for eps = {eps!r} not bracketed")


def turning_points(well: WellDescriptor, eps: float,
                   cfg: QuadratureConfig = DEFAULT_CONFIG) -> TurningPoints:
    """Classical turning points around the bottom of ``well`` at energy ``eps``."""
    if not eps > well.v_min:
        raise NoClassicalRegionError(
            f"eps = {eps!r} is not above the well bottom {well.v_min!r}")
    U = well.asymptote
    if U is not None:
        tol = cfg.root_tolerance(eps)
        if eps > U + tol:
            raise NoClassicalRegionError(
                f"eps = {eps!r} lies above the asymptote U = {U!r}; not a bound level")
        if eps >= U - tol:
            return TurningPoints(-math.inf, math.inf, True, True)
    x_minus = _outward_root(well, eps, -1)
    x_plus = _outward_root(well, eps, +1)
    return TurningPoints(x_minus, x_plus)


# --------------------------------------------------------------------------
# integrals


def _trapezoid_refine(integrand: Callable[[np.ndarray], np.ndarray], lo: float, hi: float,
                      cfg: QuadratureConfig, what: str) -> float:
    """Trapezoidal rule on [lo, hi] with node doubling until the relative change is small."""
    n = cfg.n_nodes
    t = np.linspace(lo, hi, n + 1)
    f = integrand(t)
    total = 0.5 * (f[0] + f[-1]) + float(np.sum(f[1:-1]))
    h = (hi - lo) / n
    estimate = total * h
    for _ in range(cfg.refine_limit):
        mids = lo + h * (np.arange(n) + 0.5)
        total += float(np.sum(integrand(mids)))
        n *= 2
        h *= 0.5
        previous, estimate = estimate, total * h
        if abs(estimate - previous) <= cfg.rel_tol * abs(estimate) or estimate == previous:
            return estimate
    raise ConvergenceError(f"{what} did not converge after {cfg.refine_limit} doublings",
                           last=estimate, previous=previous)


def _phase_integrand(well: WellDescriptor, eps: float, tp: TurningPoints):
    xm, xh = tp.midpoint, tp.half_width

    def g(theta):
        x = xm + xh * np.cos(theta)
        kinetic = np.maximum(eps - well.value(x), 0.0)
        return np.sqrt(kinetic) * (xh * np.sin(theta))

    return g


def action_integral(well: WellDescriptor, eps: float,
                    cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """``integral sqrt(eps - V) dx`` over the classical region (no 1/(pi beta))."""
    if eps <= well.v_min:
        if eps == well.v_min:
            return 0.0
        raise NoClassicalRegionError(f"eps = {eps!r} is below the well bottom")
    tp = turning_points(well, eps, cfg)
    if not tp.finite:
        return _action_at_asymptote(well, cfg)
    if tp.half_width == 0.0:
        return 0.0
    return _trapezoid_refine(_phase_integrand(well, eps, tp), 0.0, math.pi, cfg,
                             "phase integral")


def phase_integral(well: WellDescriptor, eps: float, scale: PhysicalScale,
                   cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """``(1 / (pi beta)) * integral sqrt(eps - V) dx`` between turning points.

    At ``eps == U`` the classical region is the whole line and the improper
    integral of ``sqrt(U - V)`` is returned instead.
    """
    return action_integral(well, eps, cfg) / (math.pi * scale.beta)


def _tail_edge(f: Callable[[float], float], x0: float, direction: int, start: float,
               threshold: float) -> float:
    x = start
    for _ in range(60):
        here = f(x0 + direction * x)
        if here < threshold:
            return x
        if x >= 1e3 * start and f(x0 + direction * 2 * x) > 0.25 * here:
            raise DivergentPhaseError(
                "sqrt(U - V) decays slower than 1/x**2; phase integral at U diverges")
        x *= 2.0
    raise DivergentPhaseError("sqrt(U - V) does not decay; phase integral at U diverges")


def _action_at_asymptote(well: WellDescriptor, cfg: QuadratureConfig) -> float:
    x0 = well.x_min

    def root_gap(x):
        return np.sqrt(np.maximum(well.depth_gap(x), 0.0))

    peak = float(root_gap(x0))
    if peak == 0.0:
        return 0.0
    scalar = lambda x: float(root_gap(x))
    start = well.domain_hint or 1.0
    threshold = cfg.tail_tol * peak
    left = _tail_edge(scalar, x0, -1, start, threshold)
    right = _tail_edge(scalar, x0, +1, start, threshold)

    def on(lo, hi):
        return _trapezoid_refine(root_gap, lo, hi, cfg, "phase integral at U")

    value = on(x0 - left, x0 + right)
    # one truncation-doubling check
    wider = on(x0 - 2 * left, x0 + 2 * right)
    if abs(wider - value) > 1e3 * cfg.rel_tol * abs(wider):
        raise ConvergenceError("phase integral at U is sensitive to tail truncation",
                               last=wider, previous=value)
    return wider


def singular_integral(well: WellDescriptor, eps: float,
                      cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """``integral (dV/dx)**2 / sqrt(eps - V) dx`` between finite turning points."""
    U = well.asymptote
    if not eps > well.v_min or (U is not None and not eps < U):
        raise NoClassicalRegionError(
            f"singular integral needs v_min < eps < U, got eps = {eps!r}")
    tp = turning_points(well, eps, cfg)
    if not tp.finite:
        raise NoClassicalRegionError(f"turning points at infinity for eps = {eps!r}")
    xm, xh = tp.midpoint, tp.half_width
    if xh == 0.0:
        return 0.0

    slope_plus = float(well.derivative(tp.x_plus))
    slope_minus = float(well.derivative(tp.x_minus))
    # A simple root has V' close to the inward secant slope; at a tangential
    # root V' collapses while the secant does not.
    d = 1e-4 * xh
    secant_plus = (eps - float(well.value(tp.x_plus - d))) / d
    secant_minus = (eps - float(well.value(tp.x_minus + d))) / d
    if not (slope_plus > 0.1 * secant_plus > 0 and -slope_minus > 0.1 * secant_minus > 0):
        raise DegenerateTurningPointError(
            f"dV/dx vanishes at a turning point for eps = {eps!r} "
            f"(slopes {slope_minus!r}, {slope_plus!r})")
    # finite limits of the theta-integrand at theta = 0 and theta = pi
    end_plus = slope_plus ** 1.5 * math.sqrt(2.0 * xh)
    end_minus = (-slope_minus) ** 1.5 * math.sqrt(2.0 * xh)

    def g(theta):
        x = xm + xh * np.cos(theta)
        kinetic = eps - well.value(x)
        slope = well.derivative(x)
        ok = (kinetic > 0) & (theta > 0) & (theta < math.pi)
        safe = np.where(ok, kinetic, 1.0)
        out = slope * slope * (xh * np.sin(theta)) / np.sqrt(safe)
        fallback = np.where(theta < 0.5 * math.pi, end_plus, end_minus)
        return np.where(ok, out, fallback)

    return _trapezoid_refine(g, 0.0, math.pi, cfg, "singular integral")


# --------------------------------------------------------------------------
# energy derivatives


class SecondDerivative(NamedTuple):
    value: float
    coarse: float
    fine: float
    step: float
    magnitude: float = 0.0

    def noise(self, rel: float) -> float:
        """Worst-case effect on ``value`` of relative errors ``rel`` in the samples."""
        # fine stencil weights sum to 64/12 over (h/2)**2, Richardson adds 16/15
        return rel * self.magnitude * (64.0 / 12.0) * 4.0 / self.step ** 2 * (16.0 / 15.0)


def stencil_step(eps: float, lower: float, upper: float | None,
                 cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """Step ``kappa * distance to the nearest edge of (lower, upper)``."""
    room = eps - lower if upper is None else min(eps - lower, upper - eps)
    if not room > 0:
        raise StencilError(f"eps = {eps!r} is not inside the admissible interval "
                           f"({lower!r}, {upper!r})")
    return cfg.eps_stencil_factor * room


def _five_point(f, x, h):
    return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) / (12 * h * h)


def d2_wrt_eps(f: Callable[[float], float], eps: float, cfg: QuadratureConfig = DEFAULT_CONFIG,
               *, lower: float = 0.0, upper: float | None = None) -> SecondDerivative:
    """Second derivative of ``f`` at ``eps`` from values only.

    Five-point central differences at steps h and h/2, combined by one
    Richardson step.  The stencil never leaves ``(lower, upper)``.
    """
    h = stencil_step(eps, lower, upper, cfg)
    cache: dict[float, float] = {}

    def cached(e):
        if e not in cache:
            cache[e] = f(e)
        return cache[e]

    coarse = _five_point(cached, eps, h)
    fine = _five_point(cached, eps, 0.5 * h)
    magnitude = max(abs(v) for v in cache.values())
    return SecondDerivative((16.0 * fine - coarse) / 15.0, coarse, fine, h, magnitude)


def d1_wrt_eps(f: Callable[[float], float], eps: float, h: float) -> float:
    """Fourth-order central first difference."""
    return (-f(eps + 2 * h) + 8 * f(eps + h) - 8 * f(eps - h) + f(eps - 2 * h)) / (12 * h)
