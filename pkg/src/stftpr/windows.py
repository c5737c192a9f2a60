"""Window construction and the time-frequency ratio.

The periodized Gaussian couples time width to frequency width through a
single scalar lambda; short-support cosine windows are matched to a
lambda by minimising the l2 distance to the corresponding Gaussian.
Units follow lambda = a*M/rate, so rate*lambda is the Gaussian width
parameter in samples squared.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .gabor import StftGrid, WindowFamily, WindowRole, WindowVec

__all__ = [
    "LambdaSource",
    "LambdaSpec",
    "periodized_gaussian",
    "grid_matched_lambda",
    "named_window",
    "fit_lambda",
    "window_for_lambda",
]

# Periodization terms are added until the next term's peak contribution
# drops below this fraction of the k=0 term.
_PERIODIZATION_REL = 1e-16
_PERIODIZATION_MAX_K = 100

_FIT_BRACKET = (1e-6, 1e6)
_FIT_REL_TOL = 1e-6

_MIN_SUPPORT = 3

_BLACKMAN_A = (0.42, 0.5, 0.08)


class LambdaSource(Enum):
    GIVEN = "given"
    FITTED_FROM_WINDOW = "fitted_from_window"
    FROM_GRID = "from_grid"


@dataclass(frozen=True)
class LambdaSpec:
    """Time-frequency ratio of a (possibly fitted) Gaussian window."""

    value: float
    source: LambdaSource = LambdaSource.GIVEN

    def __post_init__(self):
        if not (self.value > 0 and math.isfinite(self.value)):
            raise ValueError("lambda must be positive and finite")


def _as_lambda(lam: LambdaSpec | float) -> LambdaSpec:
    if isinstance(lam, LambdaSpec):
        return lam
    return LambdaSpec(float(lam))


def _gauss_taps(gamma: float, L: int) -> np.ndarray:
    """Periodized Gaussian sum_k exp(-pi (l - kL)^2 / gamma) on [0, L)."""
    # Smallest K whose term peaks below the truncation threshold anywhere
    # on the domain: exp(-pi (K L - (L-1))^2 / gamma) < rel.
    reach = math.sqrt(gamma * math.log(1.0 / _PERIODIZATION_REL) / math.pi)
    K = max(1, math.ceil((reach + L - 1) / L))
    if K > _PERIODIZATION_MAX_K:
        raise ValueError(
            f"periodization needs K={K} terms (> {_PERIODIZATION_MAX_K}) "
            f"to reach {_PERIODIZATION_REL:g}; lambda too large for L={L}")
    l = np.arange(L, dtype=np.float64)
    out = np.zeros(L)
    for k in range(-K, K + 1):
        out += np.exp(-np.pi * (l - k * L) ** 2 / gamma)
    return out


def periodized_gaussian(lam: LambdaSpec | float, L: int,
                        sample_rate: float) -> WindowVec:
    """Periodized Gaussian window with time-frequency ratio lambda.

    The periodization is truncated adaptively so the dropped tail is below
    1e-16 of the central term, making the sum exact in double precision.
    The result is even about index 0 modulo L and peaks at index 0.
    """
    lam = _as_lambda(lam)
    if L <= 0:
        raise ValueError("L must be positive")
    taps = _gauss_taps(sample_rate * lam.value, L)
    return WindowVec(taps, family=WindowFamily.GAUSSIAN,
                     fitted_lambda=lam.value, role=WindowRole.ANALYSIS)


def grid_matched_lambda(grid: StftGrid, sample_rate: float) -> LambdaSpec:
    """The lambda matching uncertainty to the lattice: a*M/rate."""
    return LambdaSpec(grid.a * grid.M / sample_rate, LambdaSource.FROM_GRID)


def _named_taps(family: WindowFamily, support: int) -> np.ndarray:
    """Periodic (DFT-even) window taps at offsets -(S//2) .. S-1-S//2."""
    o = np.arange(-(support // 2), support - support // 2, dtype=np.float64)
    if family is WindowFamily.HANN:
        taps = 0.5 + 0.5 * np.cos(2 * np.pi * o / support)
    elif family is WindowFamily.BLACKMAN:
        a0, a1, a2 = _BLACKMAN_A
        taps = (a0 + a1 * np.cos(2 * np.pi * o / support)
                + a2 * np.cos(4 * np.pi * o / support))
    elif family is WindowFamily.BARTLETT:
        taps = 1.0 - np.abs(o) / (support // 2)
    else:
        raise ValueError(f"no closed form for family {family}")
    # cosine-sum families peak at exactly 1 by construction; Bartlett does
    # too, but guard against rounding for odd supports
    peak = taps.max()
    if peak != 1.0:
        taps = taps / peak
    return np.clip(taps, 0.0, None)


def named_window(family: WindowFamily, support: int, L: int) -> WindowVec:
    """Short-support cosine/triangle window, periodic convention.

    Peak-normalised to 1 and centred at index 0 modulo L, i.e. split
    across the vector ends.
    """
    if support <= 0:
        raise ValueError("support must be positive")
    if support > L:
        raise ValueError(f"support {support} exceeds L={L}")
    taps = _named_taps(family, support)
    out = np.zeros(L)
    o = np.arange(-(support // 2), support - support // 2)
    out[o % L] = taps
    return WindowVec(out, family=family, fitted_lambda=None,
                     role=WindowRole.ANALYSIS, support=support)


def _fit_objective(taps: np.ndarray, L: int, sample_rate: float):
    def objective(log_lam: float) -> float:
        gauss = _gauss_taps(sample_rate * math.exp(log_lam), L)
        return float(np.linalg.norm(taps - gauss))
    return objective


def fit_lambda(window: WindowVec, sample_rate: float) -> LambdaSpec:
    """Lambda minimising ||g - g_lambda|| for a peak-normalised g.

    Golden-section search on log-lambda over [1e-6, 1e6] to relative
    tolerance 1e-6; deterministic. The norm distance is empirically
    unimodal in log-lambda for bell-shaped windows (the dense grid oracle
    in the tests guards this assumption).
    """
    taps = window.taps
    if np.count_nonzero(taps) == 1:
        raise ValueError("degenerate single-tap window: fit is unbounded "
                         "below as lambda -> 0")
    peak = np.max(np.abs(taps))
    if peak != 1.0:
        taps = taps / peak
    L = taps.size
    obj = _fit_objective(taps, L, sample_rate)

    lo, hi = (math.log(b) for b in _FIT_BRACKET)
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1, f2 = obj(x1), obj(x2)
    while (hi - lo) > math.log1p(_FIT_REL_TOL):
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = obj(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = obj(x2)
    best = math.exp((lo + hi) / 2.0)
    return LambdaSpec(best, LambdaSource.FITTED_FROM_WINDOW)


def _support_objective(family: WindowFamily, L: int, gauss: np.ndarray):
    def objective(support: int) -> float:
        taps = np.zeros(L)
        o = np.arange(-(support // 2), support - support // 2)
        taps[o % L] = _named_taps(family, support)
        return float(np.linalg.norm(taps - gauss))
    return objective


def window_for_lambda(family: WindowFamily, lam: LambdaSpec | float,
                      sample_rate: float, L: int) -> WindowVec:
    """Window of the given family best matching g_lambda.

    Gaussian family returns the periodized Gaussian itself. Named families
    search integer supports for the minimal ||g - g_lambda||: ternary
    search narrowed to a local scan of +-2 around the best candidate.
    Supports clamp at 3 (flagged via ``clamped``); a fit pushing against
    support L raises.
    """
    lam = _as_lambda(lam)
    if family is WindowFamily.GAUSSIAN:
        return periodized_gaussian(lam, L, sample_rate)
    if family is WindowFamily.CUSTOM:
        raise ValueError("custom windows have no lambda parametrisation")

    gauss = _gauss_taps(sample_rate * lam.value, L)
    obj = _support_objective(family, L, gauss)

    lo, hi = _MIN_SUPPORT, L
    while hi - lo > 4:
        m1 = lo + (hi - lo) // 3
        m2 = hi - (hi - lo) // 3
        if obj(m1) <= obj(m2):
            hi = m2
        else:
            lo = m1
    candidates = range(max(_MIN_SUPPORT, lo - 2), min(L, hi + 2) + 1)
    # ties broken toward the larger support: Bartlett's even/odd supports
    # coincide as tap vectors and would otherwise bias the search downward
    best = min(candidates, key=lambda s: (obj(s), -s))
    if best >= L - 1 and L > _MIN_SUPPORT:
        raise ValueError(
            f"lambda={lam.value:g} implies support > L={L} for {family.value}")
    clamped = best == _MIN_SUPPORT and obj(_MIN_SUPPORT) < obj(_MIN_SUPPORT + 1)
    win = named_window(family, best, L)
    win.fitted_lambda = lam.value
    win.clamped = clamped
    return win
