"""Reference spectra independent of the quantization condition.

:func:`fd_spectrum` discretises ``-beta**2 psi'' + V psi = eps psi`` with the
three-point second difference on a uniform grid (Dirichlet ends) and finds
the lowest eigenvalues of the resulting symmetric tridiagonal matrix by
Sturm-sequence bisection.  Two grids (N and 2N - 1 points) give a
Richardson-extrapolated eigenvalue and an error estimate for it.

:func:`analytic_spectrum` holds the closed forms for the harmonic and
tanh-squared catalog wells.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import BoundaryError, ConfigError, NoSuchLevelError
from .potential import PhysicalScale, WellDescriptor

DEFAULT_N = 4001
BOUNDARY_RTOL = 1e-8
# Action (in units of beta) the box must extend past the outermost turning point.
CONFINING_TAIL_ACTION = 25.0


@dataclass(frozen=True)
class OracleSpectrum:
    eigenvalues: np.ndarray
    errors: np.ndarray
    L: float
    N: int
    coarse: np.ndarray
    fine: np.ndarray

    def __len__(self):
        return len(self.eigenvalues)


# --------------------------------------------------------------------------
# tridiagonal eigenvalues


try:  # optional acceleration of the Sturm loop
    from numba import njit as _njit
except ImportError:  # pragma: no cover - exercised only without numba
    def _njit(*args, **kwargs):
        return lambda f: f


@_njit(cache=True)
def _count(d, e2, x):
    tiny = 2.2250738585072014e-308
    q = d[0] - x
    count = 1 if q < 0 else 0
    for i in range(1, d.shape[0]):
        if q == 0.0:
            q = tiny
        q = d[i] - x - e2[i - 1] / q
        if q < 0:
            count += 1
    return count


def sturm_count(d, e2, x: float) -> int:
    """Number of eigenvalues below ``x`` of the symmetric tridiagonal matrix.

    ``d`` is the diagonal and ``e2`` the squared off-diagonal.  Counts the
    negative pivots of the LDL^T factorisation of ``T - x I``.
    """
    return int(_count(np.asarray(d, dtype=float), np.asarray(e2, dtype=float), float(x)))


def tridiagonal_eigvalsh(d: np.ndarray, e: np.ndarray, k: int,
                         upper: float | None = None, rtol: float = 4e-16) -> np.ndarray:
    """Lowest ``k`` eigenvalues by bisection on Sturm counts."""
    d = np.ascontiguousarray(d, dtype=float)
    e = np.asarray(e, dtype=float)
    e2 = np.ascontiguousarray(e * e)
    n = len(d)
    if not 0 < k <= n:
        raise ValueError(f"cannot take {k} eigenvalues of a {n}x{n} matrix")
    radius = np.zeros(n)
    radius[:-1] += np.abs(e)
    radius[1:] += np.abs(e)
    g_lo = float(np.min(d - radius))
    g_hi = float(np.max(d + radius))

    probes = {g_lo: 0, g_hi: n}
    if upper is not None and g_lo < upper < g_hi:
        probes[upper] = sturm_count(d, e2, upper)
        if probes[upper] < k:
            raise NoSuchLevelError(f"only {probes[upper]} eigenvalues lie below {upper!r}")
    out = np.empty(k)
    for j in range(k):
        a = max(x for x, c in probes.items() if c <= j)
        b = min(x for x, c in probes.items() if c >= j + 1)
        while b - a > rtol * max(abs(a), abs(b)) + 1e-300:
            m = 0.5 * (a + b)
            if m == a or m == b:
                break
            c = sturm_count(d, e2, m)
            probes[m] = c
            if c <= j:
                a = m
            else:
                b = m
        out[j] = 0.5 * (a + b)
    return out


# --------------------------------------------------------------------------
# finite differences


def _matrix(well: WellDescriptor, scale: PhysicalScale, L: float, N: int):
    x = well.x_min + np.linspace(-L, L, N)[1:-1]
    h = 2.0 * L / (N - 1)
    kin = scale.beta ** 2 / (h * h)
    d = 2.0 * kin + np.asarray(well.value(x), dtype=float)
    e = np.full(len(x) - 1, -kin)
    return d, e


def _lowest(well, scale, L, N, k, upper):
    d, e = _matrix(well, scale, L, N)
    return tridiagonal_eigvalsh(d, e, k, upper=upper)


def _count_below(well, scale, L, N, level):
    d, e = _matrix(well, scale, L, N)
    return sturm_count(d, e * e, level)


def _odd(n: float) -> int:
    n = int(math.ceil(n))
    return n if n % 2 == 1 else n + 1


def _default_half_width(well: WellDescriptor) -> float:
    if well.domain_hint is not None:
        return 1.5 * well.domain_hint
    return 10.0


def _confining_half_width(well: WellDescriptor, scale: PhysicalScale, m: int) -> float:
    """Box reaching ``CONFINING_TAIL_ACTION`` past the turning point of level m-1."""
    # rough top energy from a coarse box, grown until it is box-insensitive
    L = _default_half_width(well)
    for _ in range(30):
        top = float(_lowest(well, scale, L, 801, m, None)[-1])
        edge = min(float(well.value(well.x_min - L)), float(well.value(well.x_min + L)))
        if edge > top:
            break
        L *= 2.0
    x, action, step = 0.0, 0.0, L / 2000.0
    # outward from the bottom; accumulate action where V > top on both sides
    while action < CONFINING_TAIL_ACTION and x < 1e6:
        x += step
        worst = min(float(well.value(well.x_min - x)), float(well.value(well.x_min + x)))
        if worst > top:
            action += math.sqrt(worst - top) / scale.beta * step
    return max(x, L)


def _asymptotic_half_width(well: WellDescriptor, scale: PhysicalScale, h: float) -> float:
    """Grow the box until the weakest bound state decays well inside it."""
    U = well.asymptote
    L = _default_half_width(well)
    h_coarse = 4.0 * h
    for _ in range(20):
        N = _odd(2.0 * L / h_coarse + 1)
        count = _count_below(well, scale, L, N, U)
        if count:
            top = float(_lowest(well, scale, L, N, count, U)[-1])
            needed = 10.0 * scale.beta / math.sqrt(U - top)
            if L >= needed:
                return L
            L = max(needed, 1.5 * L)
        else:
            L *= 2.0
    raise BoundaryError(f"could not size the box for well {well.label()}")


def fd_spectrum(well: WellDescriptor, scale: PhysicalScale, L: float | None = None,
                N: int | None = None, m: int | None = None, *,
                check_boundary: bool = True) -> OracleSpectrum:
    """Finite-difference reference eigenvalues.

    Args:
        L: box half-width around the well bottom.  ``None`` sizes it
            automatically (for asymptotic wells from the decay length of the
            weakest bound state found on a coarse grid).
        N: grid points (odd, >= 501).  ``None`` keeps the spacing of a
            ``DEFAULT_N`` grid over the default box.
        m: number of eigenvalues.  ``None`` means every bound state below U
            (asymptotic wells only).
        check_boundary: repeat the coarse grid on a 1.5x box at equal spacing
            and fail if any eigenvalue moves by more than ``BOUNDARY_RTOL``.

    The reported eigenvalue is the Richardson extrapolation of the N and
    2N - 1 grids; its error estimate is ``|eps(N) - eps(2N-1)| / 3``.
    """
    U = well.asymptote
    if N is not None and (N < 501 or N % 2 == 0):
        raise ConfigError(f"oracle grid needs an odd N >= 501, got {N}")
    if m is None and U is None:
        raise ConfigError("confining wells need an explicit eigenvalue count m")
    if m is not None and m < 1:
        raise ConfigError("eigenvalue count m must be positive")
    h_default = 2.0 * _default_half_width(well) / (DEFAULT_N - 1)
    if L is None:
        if U is not None:
            L = _asymptotic_half_width(well, scale, h_default)
        else:
            L = _confining_half_width(well, scale, m)
    if N is None:
        N = max(_odd(2.0 * L / h_default + 1), DEFAULT_N)

    upper = U
    if U is not None:
        available = _count_below(well, scale, L, N, U)
        if m is None:
            m = available
            if m == 0:
                return OracleSpectrum(np.empty(0), np.empty(0), L, N, np.empty(0), np.empty(0))
        elif m > available:
            raise NoSuchLevelError(f"asked for {m} eigenvalues but only {available} lie below U")

    coarse = _lowest(well, scale, L, N, m, upper)
    fine = _lowest(well, scale, L, 2 * N - 1, m, upper)
    extrapolated = fine + (fine - coarse) / 3.0
    errors = np.abs(coarse - fine) / 3.0

    if check_boundary:
        N_wide = 3 * (N - 1) // 2 + 1
        L_wide = L * (N_wide - 1) / (N - 1)
        wide = _lowest(well, scale, L_wide, N_wide, m, upper)
        shift = np.abs(wide - coarse) / np.maximum(np.abs(coarse), 1e-300)
        if np.any(shift > BOUNDARY_RTOL):
            raise BoundaryError(
                f"box half-width L={L:g} too small: eigenvalues move by up to "
                f"{float(np.max(shift)):.2e} (relative) when L grows by 1.5x")

    keep = np.ones(m, dtype=bool)
    if U is not None:
        keep = extrapolated < U - errors
    return OracleSpectrum(extrapolated[keep], errors[keep], L, N, coarse[keep], fine[keep])


def analytic_spectrum(name: str, params: Mapping[str, float], scale: PhysicalScale,
                      n: int) -> float:
    """Exact level ``n`` of the ``harmonic`` or ``tanh2`` catalog well."""
    if n < 0:
        raise ValueError("level index must be non-negative")
    beta = scale.beta
    if name == "harmonic":
        return beta * (2 * n + 1)
    if name == "tanh2":
        U = float(params["U"])
        s = 0.5 * (-1.0 + math.sqrt(1.0 + 4.0 * U / beta ** 2))
        if not n < s:
            raise NoSuchLevelError(f"no such bound state: n={n} but the well holds {math.ceil(s)}")
        return U - beta ** 2 * (s - n) ** 2
    raise ConfigError(f"no analytic spectrum for well {name!r}")
