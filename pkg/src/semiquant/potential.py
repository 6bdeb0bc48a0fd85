"""Potential wells: the built-in catalog and the quadratic-slope shape class.

Every well is a :class:`WellDescriptor`, an immutable bundle of the potential,
its derivative, the location of the bottom, and (for wells that flatten out)
the common asymptotic value ``U``.  Catalog wells are normalised so that the
bottom sits at ``V(0) = 0``.

Wells of the shape class are written through an auxiliary function ``s(x)``::

    V = A**2 s**2 + B s + C,        ds/dx = a2 s**2 + a1 s + a0

and are built by integrating the auxiliary ODE numerically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ConfigError, EscapeError

ArrayFn = Callable[[np.ndarray], np.ndarray]

# U - V(+-X) below this fraction of U marks the edge of the interesting region.
DOMAIN_TAIL_FRACTION = 1e-12
# Relative flatness required to declare a common asymptote for shape-class wells.
ASYMPTOTE_FLATNESS = 1e-9


@dataclass(frozen=True)
class PhysicalScale:
    """Holds ``beta`` with ``beta**2 = hbar**2 / 2m``; the only physical constant used."""

    beta: float = 1.0

    def __post_init__(self):
        if not (self.beta > 0 and math.isfinite(self.beta)):
            raise ConfigError(f"beta must be positive and finite, got {self.beta!r}")


@dataclass(frozen=True)
class ShapeClassSpec:
    A: float
    B: float
    C: float
    a0: float
    a1: float
    a2: float
    s0: float = 0.0

    def __post_init__(self):
        if self.A == 0:
            raise ConfigError("shape class requires A != 0")

    def sigma(self, s):
        return (self.a2 * s + self.a1) * s + self.a0

    def potential_of(self, s):
        return (self.A * self.A * s + self.B) * s + self.C

    def slope_of(self, s):
        """dV/dx expressed through s via the chain rule."""
        return (2.0 * self.A * self.A * s + self.B) * self.sigma(s)

    def sigma_roots(self) -> list[float]:
        if self.a2 == 0:
            return [] if self.a1 == 0 else [-self.a0 / self.a1]
        disc = self.a1 * self.a1 - 4.0 * self.a2 * self.a0
        if disc < 0:
            return []
        r = math.sqrt(disc)
        return sorted([(-self.a1 - r) / (2 * self.a2), (-self.a1 + r) / (2 * self.a2)])


@dataclass(frozen=True, eq=False)
class WellDescriptor:
    """An evaluatable potential well.

    ``value`` and ``derivative`` accept scalars or numpy arrays.  ``asymptote``
    is ``None`` for confining wells; ``domain_hint`` is then ``None`` too.
    ``gap``, when given, evaluates ``U - V(x)`` without cancellation.
    """

    name: str
    params: Mapping[str, float]
    value: ArrayFn
    derivative: ArrayFn
    x_min: float
    v_min: float
    asymptote: float | None = None
    domain_hint: float | None = None
    gap: ArrayFn | None = None
    shape: ShapeClassSpec | None = field(default=None, repr=False)

    def __call__(self, x):
        return self.value(x)

    @property
    def confining(self) -> bool:
        return self.asymptote is None

    def depth_gap(self, x):
        """``U - V(x)``; only meaningful for wells with an asymptote."""
        if self.asymptote is None:
            raise ValueError(f"well {self.name!r} has no asymptote")
        if self.gap is not None:
            return self.gap(x)
        return self.asymptote - self.value(x)

    def label(self) -> str:
        if not self.params:
            return self.name
        inner = ",".join(f"{k}={v!r}" for k, v in sorted(self.params.items()))
        return f"{self.name}({inner})"


# --------------------------------------------------------------------------
# catalog

_CATALOG_PARAMS = {
    "harmonic": {},
    "quartic": {},
    "tanh2": {"U": None},
    "gauss": {"U": None, "w": 1.0},
}

# Closed-form shape-class representatives of catalog wells, for cross-checks.
def _tanh2_shape(U: float) -> ShapeClassSpec:
    return ShapeClassSpec(A=math.sqrt(U), B=0.0, C=0.0, a0=1.0, a1=0.0, a2=-1.0)


_HARMONIC_SHAPE = ShapeClassSpec(A=1.0, B=0.0, C=0.0, a0=1.0, a1=0.0, a2=0.0)


def catalog_names() -> list[str]:
    return sorted(_CATALOG_PARAMS)


def _resolve_params(name: str, params: Mapping[str, float]) -> dict[str, float]:
    try:
        defaults = _CATALOG_PARAMS[name]
    except KeyError:
        raise ConfigError(
            f"unknown well {name!r}; choose one of {', '.join(catalog_names())}"
        ) from None
    unknown = set(params) - set(defaults)
    if unknown:
        raise ConfigError(f"well {name!r} takes no parameter(s) {sorted(unknown)}")
    out = {}
    for key, default in defaults.items():
        value = params.get(key, default)
        if value is None:
            raise ConfigError(f"well {name!r} requires parameter {key!r}")
        value = float(value)
        if not (value > 0 and math.isfinite(value)):
            raise ConfigError(f"parameter {key!r} of well {name!r} must be positive, got {value!r}")
        out[key] = value
    return out


def make_builtin(name: str, **params: float) -> WellDescriptor:
    """Build a catalog well.

    Args:
        name: one of ``harmonic`` (x**2), ``quartic`` (x**4),
            ``tanh2`` (U tanh(x)**2) or ``gauss`` (U (1 - exp(-x**2/w**2))).
        **params: ``U`` for the asymptotic wells, ``w`` (default 1) for gauss.
    """
    p = _resolve_params(name, params)

    if name == "harmonic":
        return WellDescriptor(
            name, p,
            value=lambda x: np.square(x),
            derivative=lambda x: 2.0 * np.asarray(x, dtype=float),
            x_min=0.0, v_min=0.0, shape=_HARMONIC_SHAPE,
        )
    if name == "quartic":
        return WellDescriptor(
            name, p,
            value=lambda x: np.asarray(x, dtype=float) ** 4,
            derivative=lambda x: 4.0 * np.asarray(x, dtype=float) ** 3,
            x_min=0.0, v_min=0.0,
        )
    if name == "tanh2":
        U = p["U"]

        def gap(x):
            return U / np.cosh(x) ** 2

        return WellDescriptor(
            name, p,
            value=lambda x: U * np.tanh(x) ** 2,
            derivative=lambda x: 2.0 * U * np.tanh(x) / np.cosh(x) ** 2,
            x_min=0.0, v_min=0.0, asymptote=U,
            domain_hint=math.acosh(1.0 / math.sqrt(DOMAIN_TAIL_FRACTION)),
            gap=gap, shape=_tanh2_shape(U),
        )
    # gauss
    U, w = p["U"], p["w"]

    def gap(x):
        return U * np.exp(-np.square(x) / (w * w))

    return WellDescriptor(
        name, p,
        value=lambda x: U * -np.expm1(-np.square(x) / (w * w)),
        derivative=lambda x: (2.0 * U / (w * w)) * np.asarray(x, dtype=float)
        * np.exp(-np.square(x) / (w * w)),
        x_min=0.0, v_min=0.0, asymptote=U,
        domain_hint=w * math.sqrt(-math.log(DOMAIN_TAIL_FRACTION)),
        gap=gap,
    )


# --------------------------------------------------------------------------
# shape class


class _AuxiliaryTable:
    """RK4 table of s(x) on a symmetric uniform grid.

    Off-grid points are reached with one partial RK4 step from the nearest
    node below, so evaluation keeps the table's order of accuracy.
    """

    def __init__(self, spec: ShapeClassSpec, half_width: float, step: float):
        self.spec = spec
        self.step = step
        n = int(round(half_width / step))
        self.half_width = n * step
        right = self._integrate(spec.s0, step, n)
        left = self._integrate(spec.s0, -step, n)
        self.s = np.concatenate([left[:0:-1], right])
        self.x = (np.arange(-n, n + 1)) * step

    def _integrate(self, s0: float, h: float, n: int) -> np.ndarray:
        f = self.spec.sigma
        out = np.empty(n + 1)
        s = out[0] = s0
        for i in range(1, n + 1):
            k1 = f(s)
            k2 = f(s + 0.5 * h * k1)
            k3 = f(s + 0.5 * h * k2)
            k4 = f(s + h * k3)
            s = s + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not math.isfinite(s) or abs(s) > 1e12:
                raise EscapeError(
                    f"auxiliary function escapes to infinity near x = {i * h:.6g}"
                )
            out[i] = s
        return out

    def __call__(self, x, clamp: bool):
        x = np.asarray(x, dtype=float)
        outside = np.abs(x) > self.half_width
        if np.any(outside) and not clamp:
            raise EscapeError(
                f"x = {float(np.max(np.abs(x))):.6g} lies outside the integrated "
                f"domain |x| <= {self.half_width:.6g}"
            )
        xc = np.clip(x, -self.half_width, self.half_width)
        idx = np.clip(np.floor((xc + self.half_width) / self.step).astype(int),
                      0, len(self.x) - 1)
        s = self.s[idx]
        h = xc - self.x[idx]
        f = self.spec.sigma
        k1 = f(s)
        k2 = f(s + 0.5 * h * k1)
        k3 = f(s + 0.5 * h * k2)
        k4 = f(s + h * k3)
        return s + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _converged_table(spec: ShapeClassSpec, half_width: float) -> _AuxiliaryTable:
    step = 1.0 / 64
    table = _AuxiliaryTable(spec, half_width, step)
    for _ in range(8):
        finer = _AuxiliaryTable(spec, half_width, step / 2)
        v_coarse = spec.potential_of(table.s)
        v_fine = spec.potential_of(finer.s[::2])
        scale = max(float(np.max(np.abs(v_fine))), 1e-300)
        table, step = finer, step / 2
        if float(np.max(np.abs(v_coarse - v_fine))) < 1e-12 * scale:
            break
    return table


def from_shape_class(spec: ShapeClassSpec, half_width: float = 40.0) -> WellDescriptor:
    """Build a well from its shape-class coefficients by integrating ds/dx.

    The auxiliary ODE is tabulated on ``[-half_width, half_width]``.  A common
    asymptote ``U`` is declared when V is flat and symmetric at the table's
    outer half; beyond the table such wells are held at their limit, while
    confining ones raise :class:`EscapeError`.
    """
    table = _converged_table(spec, half_width)
    v_grid = spec.potential_of(table.s)

    X = table.half_width / 2
    vX, vmX, v2X = (float(spec.potential_of(table(t, clamp=False)))
                    for t in (X, -X, 2 * X))
    ref = max(abs(vX), 1e-300)
    asymptote = None
    if abs(vX - vmX) < ASYMPTOTE_FLATNESS * ref and abs(v2X - vX) < ASYMPTOTE_FLATNESS * ref:
        s_end = float(table.s[-1])
        roots = spec.sigma_roots()
        s_star = min(roots, key=lambda r: abs(r - s_end)) if roots else s_end
        asymptote = float(spec.potential_of(s_star))

    i = int(np.argmin(v_grid))
    lo = table.x[max(i - 1, 0)]
    hi = table.x[min(i + 1, len(table.x) - 1)]

    def value(x):
        return spec.potential_of(table(x, clamp=asymptote is not None))

    def derivative(x):
        return spec.slope_of(table(x, clamp=asymptote is not None))

    if hi > lo:
        res = minimize_scalar(lambda t: float(value(t)), bounds=(lo, hi),
                              method="bounded", options={"xatol": 1e-12})
        x_min = float(res.x)
    else:
        x_min = float(table.x[i])
    v_min = min(float(value(x_min)), float(v_grid[i]))

    domain_hint = None
    if asymptote is not None:
        depth = abs(asymptote - v_min)
        far = np.abs(asymptote - v_grid) >= DOMAIN_TAIL_FRACTION * max(depth, 1e-300)
        domain_hint = float(np.max(np.abs(table.x[far]))) if np.any(far) else table.step

    params = {"A": spec.A, "B": spec.B, "C": spec.C,
              "a0": spec.a0, "a1": spec.a1, "a2": spec.a2, "s0": spec.s0}
    return WellDescriptor(
        "shape", params, value=value, derivative=derivative,
        x_min=x_min, v_min=v_min, asymptote=asymptote,
        domain_hint=domain_hint, shape=spec,
    )


def closed_form_delta1(spec: ShapeClassSpec, scale: PhysicalScale) -> float:
    """First-order level shift of a shape-class well, ``beta * a2 / (8 A)``.

    It is independent of the energy and of C.
    """
    if spec.A == 0:
        raise ConfigError("closed-form first-order shift needs A != 0")
    return scale.beta * spec.a2 / (8.0 * spec.A)


def make_well(name: str, params: Mapping[str, float]) -> WellDescriptor:
    """Catalog lookup that also accepts ``shape`` with full coefficients."""
    if name == "shape":
        keys = {"A", "B", "C", "a0", "a1", "a2", "s0"}
        missing = keys - {"s0"} - set(params)
        extra = set(params) - keys - {"half_width"}
        if missing or extra:
            raise ConfigError(
                f"shape well needs parameters A, B, C, a0, a1, a2 (optional s0, half_width); "
                f"missing {sorted(missing)}, unknown {sorted(extra)}"
            )
        spec = ShapeClassSpec(**{k: float(params[k]) for k in keys if k in params})
        return from_shape_class(spec, float(params.get("half_width", 40.0)))
    return make_builtin(name, **params)
