"""Level shifts added to ``n + 1/2`` in the quantization condition.

Five schemes are offered:

* ``plain``: no shift (textbook WKB);
* ``first-order``: the leading series term ``delta1`` alone;
* ``pade``: the two-point resummation ``2 d / (1 + sqrt(1 + 16 d**2))``;
* ``improved``: ``2 d / (q + sqrt((2 - q)**2 + 16 d**2))`` with one well
  parameter ``q`` built from ``delta1`` and the phase integral at ``U``;
* ``improved-simplified``: the improved form at ``q = 1`` with ``delta1``
  replaced by its surrogate ``-1 / (8 Phi(U))``.

``q`` is the product ``-8 * delta1 * Phi(U)``.  It equals 1 for every
shape-class well with a common asymptote, which is what makes ``mu = 1 - q``
a distance-from-the-class indicator.  The quotient ``-8 Phi(U) / delta1`` is
kept behind ``q_form="quotient"`` only so the inconsistency can be observed.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import ConfigError, InapplicableSchemeError, NumericError, StencilError
from .potential import PhysicalScale, WellDescriptor
from .quadrature import (
    DEFAULT_CONFIG,
    QuadratureConfig,
    d2_wrt_eps,
    phase_integral,
    singular_integral,
)


class CorrectionScheme(str, enum.Enum):
    PLAIN = "plain"
    FIRST_ORDER = "first-order"
    PADE = "pade"
    IMPROVED = "improved"
    IMPROVED_SIMPLIFIED = "improved-simplified"

    @classmethod
    def parse(cls, text: str) -> "CorrectionScheme":
        key = text.strip().lower().replace("_", "-")
        aliases = {"firstorder": "first-order", "first": "first-order",
                   "simplified": "improved-simplified"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ConfigError(
                f"unknown scheme {text!r}; choose one of {', '.join(s.value for s in cls)}"
            ) from None

    @property
    def needs_asymptote(self) -> bool:
        return self in (CorrectionScheme.IMPROVED, CorrectionScheme.IMPROVED_SIMPLIFIED)

    def __str__(self):
        return self.value


Q_FORMS = ("product", "quotient")
# Largest tolerated worst-case quadrature noise in a numeric delta1.  The
# node-doubled trapezoid converges spectrally, so accepted integrals carry
# roundoff-level relative error rather than the refinement tolerance.
DELTA1_NOISE_TOL = 1e-4
SAMPLE_REL_ERROR = 64 * 2.220446049250313e-16


@dataclass(frozen=True)
class DeltaInputs:
    delta1: float
    phi_at_U: float | None = None
    q: float | None = None


def delta1_numeric(well: WellDescriptor, eps: float, scale: PhysicalScale,
                   cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """First-order shift ``(beta / 24 pi) d2/deps2 integral (V')**2 / sqrt(eps - V) dx``.

    The energy derivative acts on converged integral values; differentiating
    under the integral sign would produce a non-integrable kernel.
    """
    d2 = d2_wrt_eps(lambda e: singular_integral(well, e, cfg), eps, cfg,
                    lower=well.v_min, upper=well.asymptote)
    factor = scale.beta / (24.0 * math.pi)
    noise = factor * d2.noise(SAMPLE_REL_ERROR)
    if noise > DELTA1_NOISE_TOL:
        raise StencilError(
            f"delta1 unresolvable at eps={float(eps)!r}: energy step {d2.step:.3g} is too narrow, "
            f"quadrature noise could reach {noise:.3g}")
    return factor * d2.value


def pade_delta(delta1: float) -> float:
    return 2.0 * delta1 / (1.0 + math.sqrt(1.0 + 16.0 * delta1 * delta1))


def compute_q(delta1: float, phi_at_U: float, form: str = "product") -> float:
    if form == "product":
        return -8.0 * delta1 * phi_at_U
    if form == "quotient":
        if delta1 == 0:
            raise NumericError("quotient form of q is undefined for delta1 = 0")
        return -8.0 * phi_at_U / delta1
    raise ConfigError(f"unknown q form {form!r}; choose product or quotient")


def improved_delta(delta1: float, q: float) -> float:
    denom = q + math.sqrt((2.0 - q) ** 2 + 16.0 * delta1 * delta1)
    if denom == 0:
        raise NumericError(f"improved shift has a zero denominator (delta1={delta1!r}, q={q!r})")
    return 2.0 * delta1 / denom


def simplified_delta1(phi_at_U: float) -> float:
    """Surrogate for ``delta1`` from the phase integral at ``U`` alone (q set to 1)."""
    if phi_at_U == 0:
        raise NumericError("simplified delta1 needs a nonzero phase integral at U")
    return -1.0 / (8.0 * phi_at_U)


def apply_scheme(scheme: CorrectionScheme, inputs: DeltaInputs) -> float:
    """Shift for one scheme from precomputed inputs."""
    if scheme is CorrectionScheme.PLAIN:
        return 0.0
    if scheme is CorrectionScheme.FIRST_ORDER:
        return inputs.delta1
    if scheme is CorrectionScheme.PADE:
        return pade_delta(inputs.delta1)
    if inputs.phi_at_U is None or not math.isfinite(inputs.phi_at_U):
        raise InapplicableSchemeError(f"{scheme} scheme needs a finite phase integral at U")
    if scheme is CorrectionScheme.IMPROVED_SIMPLIFIED:
        return improved_delta(simplified_delta1(inputs.phi_at_U), 1.0)
    if inputs.q is None:
        raise ValueError("improved scheme needs q")
    return improved_delta(inputs.delta1, inputs.q)


@dataclass(frozen=True)
class ShiftValue:
    delta: float
    delta1: float | None
    q: float | None


class LevelShift:
    """Energy-dependent shift ``delta(eps)`` for one well and scheme.

    ``Phi(U)`` and the per-well ``q`` are computed once, at construction;
    ``q`` uses ``delta1`` at the reference energy ``(v_min + U) / 2`` unless
    ``per_level_q`` is set.
    """

    def __init__(self, well: WellDescriptor, scheme: CorrectionScheme, scale: PhysicalScale,
                 cfg: QuadratureConfig = DEFAULT_CONFIG, *, q_form: str = "product",
                 per_level_q: bool = False):
        if q_form not in Q_FORMS:
            raise ConfigError(f"unknown q form {q_form!r}; choose product or quotient")
        self.well = well
        self.scheme = CorrectionScheme(scheme)
        self.scale = scale
        self.cfg = cfg
        self.q_form = q_form
        self.per_level_q = per_level_q
        self.phi_at_U = None
        self.q = None
        self.eps_ref = None
        if self.scheme.needs_asymptote:
            if well.asymptote is None:
                raise InapplicableSchemeError(
                    f"well {well.name!r} has no asymptote; {self.scheme} scheme inapplicable")
            self.phi_at_U = phase_integral(well, well.asymptote, scale, cfg)
            self.eps_ref = 0.5 * (well.v_min + well.asymptote)
            if self.scheme is CorrectionScheme.IMPROVED:
                d1_ref = delta1_numeric(well, self.eps_ref, scale, cfg)
                self.q = compute_q(d1_ref, self.phi_at_U, q_form)
            else:
                self.q = 1.0

    @property
    def constant(self) -> bool:
        """True when the shift does not depend on the energy."""
        return self.scheme in (CorrectionScheme.PLAIN, CorrectionScheme.IMPROVED_SIMPLIFIED)

    @property
    def mu(self) -> float | None:
        return None if self.q is None else 1.0 - self.q

    def delta1(self, eps: float) -> float:
        return delta1_numeric(self.well, eps, self.scale, self.cfg)

    def __call__(self, eps: float) -> ShiftValue:
        s = self.scheme
        if s is CorrectionScheme.PLAIN:
            return ShiftValue(0.0, None, None)
        if s is CorrectionScheme.IMPROVED_SIMPLIFIED:
            d1 = simplified_delta1(self.phi_at_U)
            return ShiftValue(improved_delta(d1, 1.0), d1, 1.0)
        d1 = self.delta1(eps)
        q = self.q
        if s is CorrectionScheme.IMPROVED and self.per_level_q:
            q = compute_q(d1, self.phi_at_U, self.q_form)
        return ShiftValue(apply_scheme(s, DeltaInputs(d1, self.phi_at_U, q)), d1, q)
