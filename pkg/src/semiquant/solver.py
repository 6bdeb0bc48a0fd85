"""Root-finding for ``Phi(eps) - delta(eps) = n + 1/2`` and spectrum assembly."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .correction import CorrectionScheme, LevelShift
from .errors import ConvergenceError, NoSuchLevelError, StencilError
from .potential import PhysicalScale, WellDescriptor
from .quadrature import DEFAULT_CONFIG, QuadratureConfig, d1_wrt_eps, phase_integral, stencil_step

# Relative bracket width below which every probe re-evaluates the shift.
COARSE_WIDTH = 1e-3
EPS_TOL = 1e-10
RESIDUAL_TOL = 1e-8

NO_ROOT_BELOW_U = "no-root-below-U"
N_MAX_REACHED = "n_max reached"


@dataclass(frozen=True)
class LevelRecord:
    n: int
    eps: float
    delta: float
    delta1: float | None
    q: float | None
    mu: float | None
    gamma: float | None
    residual: float
    bracket: float


@dataclass(frozen=True)
class SpectrumReport:
    well: WellDescriptor
    scheme: CorrectionScheme
    scale: PhysicalScale
    levels: list[LevelRecord] = field(default_factory=list)
    termination: str = N_MAX_REACHED

    @property
    def count(self) -> int:
        return len(self.levels)

    @property
    def energies(self) -> list[float]:
        return [r.eps for r in self.levels]


def bottom_offset(well: WellDescriptor) -> float:
    if well.asymptote is not None:
        return 1e-9 * (well.asymptote - well.v_min)
    return 1e-9 * max(1.0, abs(well.v_min))


def _make_shift(well, scheme, scale, cfg, q_form, per_level_q, shift):
    if shift is not None:
        return shift
    return LevelShift(well, CorrectionScheme(scheme), scale, cfg,
                      q_form=q_form, per_level_q=per_level_q)


def solve_level(well: WellDescriptor, scheme: CorrectionScheme | str, n: int,
                scale: PhysicalScale, cfg: QuadratureConfig = DEFAULT_CONFIG, *,
                q_form: str = "product", per_level_q: bool = False,
                shift: LevelShift | None = None, tol: float = EPS_TOL) -> LevelRecord:
    """Energy of level ``n`` under ``scheme``.

    Bisection while the bracket is wider than ``COARSE_WIDTH`` (relative),
    then Illinois false-position steps down to ``tol``.  The shift is
    evaluated at every probe; the initial bracket ends, where the shift's
    energy stencil would be too narrow, borrow it from the bracket midpoint.

    Raises:
        NoSuchLevelError: the well holds fewer than ``n + 1`` states.
    """
    if n < 0:
        raise ValueError("level index must be non-negative")
    shift = _make_shift(well, scheme, scale, cfg, q_form, per_level_q, shift)
    try:
        return _solve(well, shift, n, scale, cfg, tol)
    except StencilError as exc:
        raise StencilError(f"level n={n} under {shift.scheme}: {exc}") from exc


def _solve(well, shift, n, scale, cfg, tol):
    target = n + 0.5
    h0 = bottom_offset(well)
    U = well.asymptote

    def phi(e):
        return phase_integral(well, e, scale, cfg)

    def F(e):
        return phi(e) - shift(e).delta - target

    lo = well.v_min + h0
    if U is not None:
        hi = U - h0
        d_mid = shift(0.5 * (lo + hi)).delta
        f_hi = phi(hi) - d_mid - target
        if f_hi < 0:
            raise NoSuchLevelError(
                f"level n={n} does not exist under {shift.scheme}: "
                f"well {well.label()} holds fewer states")
    else:
        span = max(1.0, abs(well.v_min))
        for _ in range(200):
            hi = well.v_min + span
            f_hi = F(hi)
            if f_hi >= 0:
                break
            lo = hi
            span *= 2.0
        else:
            raise ConvergenceError(f"no upper bracket found for level n={n}")
        d_mid = shift(0.5 * (lo + hi)).delta
    f_lo = phi(lo) - d_mid - target
    if not f_lo < 0:
        raise NoSuchLevelError(f"level n={n}: no sign change at the bottom of the well")

    # coarse bisection
    a, fa, b, fb = lo, f_lo, hi, f_hi
    while (b - a) > COARSE_WIDTH * max(abs(a), abs(b), h0):
        m = 0.5 * (a + b)
        fm = F(m)
        if fm < 0:
            a, fa = m, fm
        else:
            b, fb = m, fm

    # Illinois false position
    side = 0
    for _ in range(200):
        width = b - a
        if width <= tol * max(abs(a), abs(b), h0):
            break
        c = b - fb * (b - a) / (fb - fa) if fb != fa else 0.5 * (a + b)
        if not (a < c < b):
            c = 0.5 * (a + b)
        fc = F(c)
        if fc == 0:
            a = b = c
            fa = fb = 0.0
            break
        if fc < 0:
            a, fa = c, fc
            if side == -1:
                fb *= 0.5
            side = -1
        else:
            b, fb = c, fc
            if side == +1:
                fa *= 0.5
            side = +1
        # guarantee the bracket at least halves per iteration
        if b - a > 0.5 * width:
            m = 0.5 * (a + b)
            fm = F(m)
            if fm < 0:
                a, fa = m, fm
            else:
                b, fb = m, fm
    else:
        raise ConvergenceError(f"level n={n} root refinement did not converge",
                               last=b, previous=a)

    eps = a if abs(fa) <= abs(fb) else b
    value = shift(eps)
    residual = abs(phi(eps) - value.delta - target)
    if not residual < RESIDUAL_TOL:
        raise ConvergenceError(f"level n={n}: residual {residual:.3e} exceeds {RESIDUAL_TOL:g}")
    delta1 = value.delta1
    if delta1 is None or shift.scheme is CorrectionScheme.IMPROVED_SIMPLIFIED:
        delta1 = shift.delta1(eps)
    q = value.q if shift.scheme.needs_asymptote else None
    mu = None if q is None else 1.0 - q
    return LevelRecord(n=n, eps=eps, delta=value.delta, delta1=delta1, q=q, mu=mu,
                       gamma=None, residual=residual, bracket=b - a)


def gamma(well: WellDescriptor, scheme: CorrectionScheme | str, record: LevelRecord,
          scale: PhysicalScale, cfg: QuadratureConfig = DEFAULT_CONFIG, *,
          q_form: str = "product", per_level_q: bool = False,
          shift: LevelShift | None = None) -> float:
    """``d delta / d n`` at a solved level, continued in n through the energy.

    ``(d delta/d eps) / (d Phi/d eps - d delta/d eps)``, both energy slopes by
    central differences with the configured relative step.
    """
    shift = _make_shift(well, scheme, scale, cfg, q_form, per_level_q, shift)
    h = stencil_step(record.eps, well.v_min, well.asymptote, cfg)
    dphi = d1_wrt_eps(lambda e: phase_integral(well, e, scale, cfg), record.eps, h)
    if shift.constant:
        ddelta = 0.0
    else:
        ddelta = d1_wrt_eps(lambda e: shift(e).delta, record.eps, h)
    denom = dphi - ddelta
    if denom == 0 or not math.isfinite(denom):
        raise ConvergenceError(f"gamma undefined at level n={record.n}")
    return ddelta / denom


def spectrum(well: WellDescriptor, scheme: CorrectionScheme | str, n_max: int,
             scale: PhysicalScale, cfg: QuadratureConfig = DEFAULT_CONFIG, *,
             q_form: str = "product", per_level_q: bool = False,
             with_gamma: bool = True) -> SpectrumReport:
    """Levels ``0..n_max`` (inclusive), stopping early at the first missing one."""
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    scheme = CorrectionScheme(scheme)
    shift = LevelShift(well, scheme, scale, cfg, q_form=q_form, per_level_q=per_level_q)
    levels = []
    termination = N_MAX_REACHED
    for n in range(n_max + 1):
        try:
            rec = solve_level(well, scheme, n, scale, cfg, per_level_q=per_level_q, shift=shift)
        except NoSuchLevelError:
            termination = NO_ROOT_BELOW_U
            break
        if with_gamma:
            rec = replace(rec, gamma=gamma(well, scheme, rec, scale, cfg, shift=shift))
        levels.append(rec)
    return SpectrumReport(well, scheme, scale, levels, termination)
