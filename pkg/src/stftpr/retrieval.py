"""Phase retrieval from STFT magnitudes.

Three estimators plus the baselines used by the sensitivity experiments:

* heap-integrated phase gradients (PGHI): integrates the phase-magnitude
  relations of the Gaussian STFT along a max-heap ordering of magnitudes,
* fast Griffin-Lim (FGLA): alternating projections between the consistent
  set and the magnitude set with a momentum term,
* single-pass spectrogram inversion (SPSI): per-frame peak picking with
  linear phase advance and region-of-influence phase locking,
* zero-phase synthesis and seeded phase-noise distortion.

All estimators are deterministic given their seeds.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .gabor import (ComplexStft, MagnitudeStft, SignalBuffer, StftGrid,
                    WindowVec, _analysis, _plan_for, _synthesis,
                    canonical_dual, istft)
from .windows import LambdaSpec, grid_matched_lambda, periodized_gaussian

__all__ = [
    "BelowTolerancePhase",
    "PghiConfig",
    "FglaConfig",
    "PrResult",
    "pghi",
    "fgla",
    "spsi",
    "distort_phase",
    "zero_phase_baseline",
]

# Floor applied to magnitudes before taking logs; the phase-magnitude
# relations are singular at zeros, and the floor only touches bins already
# below the integration tolerance.
_LOG_FLOOR_REL = 1e-10


class BelowTolerancePhase(Enum):
    RANDOM_UNIFORM = "random_uniform"
    ZERO = "zero"


@dataclass(frozen=True)
class PghiConfig:
    rel_tolerance: float = 1e-6
    rng_seed: int = 0
    below_tol_phase: BelowTolerancePhase = BelowTolerancePhase.RANDOM_UNIFORM

    def __post_init__(self):
        if not (0.0 < self.rel_tolerance < 1.0):
            raise ValueError("rel_tolerance must lie in (0, 1)")


@dataclass(frozen=True)
class FglaConfig:
    alpha: float = 0.99
    iterations: int = 100
    initial_phase: str = "zero"  # the only supported initialisation
    record_every: int = 0

    def __post_init__(self):
        if not (0.0 <= self.alpha < 1.0):
            raise ValueError("alpha must lie in [0, 1)")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.initial_phase != "zero":
            raise ValueError("only zero-phase initialisation is supported")
        if self.record_every < 0:
            raise ValueError("record_every must be >= 0")


@dataclass
class PrResult:
    reconstructed: SignalBuffer
    estimated_phase: np.ndarray
    iterations_run: int
    wall_time: float
    intermediate_snapshots: list[tuple[int, SignalBuffer]] | None = None


def _wrap(phase: np.ndarray) -> np.ndarray:
    """Wrap phases onto [-pi, pi)."""
    return np.mod(phase + np.pi, 2.0 * np.pi) - np.pi


def _default_window(mags: MagnitudeStft) -> WindowVec:
    lam = grid_matched_lambda(mags.grid, mags.sample_rate)
    return periodized_gaussian(lam, mags.grid.L, mags.sample_rate)


def _synthesize(mags: MagnitudeStft, phase: np.ndarray,
                window: WindowVec) -> SignalBuffer:
    dual = canonical_dual(window, mags.grid)
    coeffs = ComplexStft(mags.grid, mags.mags * np.exp(1j * phase),
                         mags.sample_rate)
    return istft(coeffs, dual)


def _phase_gradients(mags: MagnitudeStft, gamma: float):
    """tgrad (per frame step) and fgrad (per channel step) from log-mags.

    Centred finite differences, one-sided at the edges. The demodulation
    term -2*pi*n*a/M accounts for the window-relative phase convention.
    """
    grid = mags.grid
    m = mags.mags
    floor = _LOG_FLOOR_REL * m.max()
    logm = np.log(np.maximum(m, floor))
    dm = np.gradient(logm, axis=0)
    dn = np.gradient(logm, axis=1)
    aM = grid.a * grid.M
    tgrad = (aM / gamma) * dm
    n = np.arange(grid.frames)
    fgrad = -(gamma / aM) * dn - (2.0 * np.pi * grid.a / grid.M) * n[None, :]
    return tgrad, fgrad


def _heap_integrate(mags: np.ndarray, tgrad: np.ndarray, fgrad: np.ndarray,
                    rel_tolerance: float) -> tuple[np.ndarray, np.ndarray]:
    """Integrate phase gradients in descending magnitude order.

    Returns (phase, assigned_mask) over the (M_r, N) lattice. Bins below
    rel_tolerance * max magnitude are never integrated. Each heap pop
    spreads to unassigned 4-neighbours via trapezoidal steps; ties on
    magnitude break on the flat (n, m) index.
    """
    M_r, N = mags.shape
    size = M_r * N
    # transpose so flat index n*M_r + m orders ties by (n, m)
    mt = mags.T.ravel()
    tg = tgrad.T.ravel().tolist()
    fg = fgrad.T.ravel().tolist()
    phase = [0.0] * size
    # 0 = unknown, 1 = assigned, 2 = below tolerance
    state = np.zeros(size, dtype=np.int8)
    state[mt < rel_tolerance * mt.max()] = 2
    remaining = int(np.count_nonzero(state == 0))
    mlist = mt.tolist()
    st = state  # numpy for the seeding scans, scalar access below
    heap: list[tuple[float, int]] = []
    push, pop = heapq.heappush, heapq.heappop

    while remaining > 0:
        # seed a new component at the largest unassigned magnitude
        masked = np.where(st == 0, mt, -1.0)
        seed = int(np.argmax(masked))
        st[seed] = 1
        remaining -= 1
        push(heap, (-mlist[seed], seed))
        while heap:
            _, i = pop(heap)
            m, n = i % M_r, i // M_r
            ph = phase[i]
            if m + 1 < M_r:
                j = i + 1
                if st[j] == 0:
                    phase[j] = ph + 0.5 * (fg[i] + fg[j])
                    st[j] = 1
                    remaining -= 1
                    push(heap, (-mlist[j], j))
            if m > 0:
                j = i - 1
                if st[j] == 0:
                    phase[j] = ph - 0.5 * (fg[i] + fg[j])
                    st[j] = 1
                    remaining -= 1
                    push(heap, (-mlist[j], j))
            if n + 1 < N:
                j = i + M_r
                if st[j] == 0:
                    phase[j] = ph + 0.5 * (tg[i] + tg[j])
                    st[j] = 1
                    remaining -= 1
                    push(heap, (-mlist[j], j))
            if n > 0:
                j = i - M_r
                if st[j] == 0:
                    phase[j] = ph - 0.5 * (tg[i] + tg[j])
                    st[j] = 1
                    remaining -= 1
                    push(heap, (-mlist[j], j))

    phase_arr = np.asarray(phase).reshape(N, M_r).T
    below = (st == 2).reshape(N, M_r).T
    return phase_arr, below


def pghi(mags: MagnitudeStft, grid: StftGrid, lam: LambdaSpec | float,
         cfg: PghiConfig | None = None,
         window: WindowVec | None = None) -> PrResult:
    """Phase-gradient heap integration.

    Estimates the phase by scaling log-magnitude finite differences into
    phase derivatives (Gaussian phase-magnitude relations with width
    gamma = rate * lambda) and integrating them trapezoidally in
    max-heap magnitude order. Bins below the relative tolerance receive
    the configured fallback phase. Synthesis uses the canonical dual of
    ``window`` (grid-matched Gaussian when omitted).
    """
    cfg = cfg or PghiConfig()
    if grid is not mags.grid and grid != mags.grid:
        raise ValueError("grid does not match the magnitude grid")
    if window is None:
        lam_val = lam.value if isinstance(lam, LambdaSpec) else float(lam)
        window = periodized_gaussian(lam_val, grid.L, mags.sample_rate)
    else:
        lam_val = lam.value if isinstance(lam, LambdaSpec) else float(lam)

    if not np.any(mags.mags):
        zero = SignalBuffer(np.zeros(grid.L), mags.sample_rate)
        return PrResult(zero, np.zeros_like(mags.mags), 1, 0.0)

    dual = canonical_dual(window, grid)
    start = time.perf_counter()
    gamma = mags.sample_rate * lam_val
    tgrad, fgrad = _phase_gradients(mags, gamma)
    phase, below = _heap_integrate(mags.mags, tgrad, fgrad, cfg.rel_tolerance)
    if cfg.below_tol_phase is BelowTolerancePhase.RANDOM_UNIFORM:
        rng = np.random.default_rng(cfg.rng_seed)
        phase[below] = rng.uniform(-np.pi, np.pi, int(below.sum()))
    phase = _wrap(phase)
    coeffs = ComplexStft(grid, mags.mags * np.exp(1j * phase),
                         mags.sample_rate)
    rec = istft(coeffs, dual)
    wall = time.perf_counter() - start
    return PrResult(rec, phase, 1, wall)


def _impose_magnitude(coeffs: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Keep the phase of ``coeffs`` (phase 0 at exact zeros), substitute
    the target magnitudes."""
    mag = np.abs(coeffs)
    safe = np.where(mag > 0.0, mag, 1.0)
    unit = np.where(mag > 0.0, coeffs / safe, 1.0 + 0.0j)
    return target * unit


def fgla(mags: MagnitudeStft, grid: StftGrid, window: WindowVec,
         dual: WindowVec, cfg: FglaConfig | None = None) -> PrResult:
    """Fast Griffin-Lim: accelerated alternating projections.

    Starts from the target magnitudes with zero phase; each iteration
    projects onto the consistent set, re-imposes the target magnitudes,
    and extrapolates with momentum alpha. Returns the synthesis of the
    last projected-and-imposed iterate. Wall time covers the iteration
    loop only (snapshot synthesis excluded).
    """
    cfg = cfg or FglaConfig()
    target = mags.mags
    rate = mags.sample_rate
    plan_g = _plan_for(window, grid)
    plan_d = _plan_for(dual, grid)
    even = grid.M % 2 == 0
    nyq = grid.M // 2

    def project(C: np.ndarray) -> np.ndarray:
        Ch = C.copy()
        Ch[0] = Ch[0].real
        if even:
            Ch[nyq] = Ch[nyq].real
        rec = _synthesis(Ch, plan_d, grid)
        return _analysis(rec, plan_g, grid)

    p_prev = target.astype(np.complex128)
    t = p_prev
    snapshots: list[tuple[int, SignalBuffer]] = []
    wall = 0.0
    p = p_prev
    for k in range(1, cfg.iterations + 1):
        seg_start = time.perf_counter()
        p = _impose_magnitude(project(t), target)
        if not np.all(np.isfinite(p)):
            raise FloatingPointError(f"FGLA produced non-finite values at "
                                     f"iteration {k}")
        t = p + cfg.alpha * (p - p_prev)
        p_prev = p
        wall += time.perf_counter() - seg_start
        if cfg.record_every and k % cfg.record_every == 0:
            snap = istft(ComplexStft(grid, p, rate), dual)
            snapshots.append((k, snap))

    rec = istft(ComplexStft(grid, p, rate), dual)
    phase = _wrap(np.angle(p))
    return PrResult(rec, phase, cfg.iterations, wall, snapshots or None)


def spsi(mags: MagnitudeStft, grid: StftGrid,
         window: WindowVec | None = None) -> PrResult:
    """Single-pass spectrogram inversion.

    Frame 0 keeps zero phase. In every later frame, each strict local
    magnitude maximum is refined by quadratic interpolation, its phase
    advances linearly at the interpolated instantaneous frequency, and
    all bins out to the first strict local minimum (or spectrum edge) on
    either side lock to the peak's phase; a trough shared by two peaks
    takes the higher-m peak's phase. Frames without peaks keep phase 0.

    The recursion runs in the segment (frame-referenced) phase
    convention, where a steady sinusoid has a constant advance per frame
    and locked bins share one phase; the result is converted to the
    window-referenced convention of the transform core by subtracting
    the 2*pi*m*n*a/M channel ramp.
    """
    M_r, N = mags.mags.shape
    if M_r < 3:
        raise ValueError("cannot peak-pick with fewer than 3 stored channels")
    if window is None:
        window = _default_window(mags)
    dual = canonical_dual(window, grid)
    start = time.perf_counter()
    mm = mags.mags
    phase_seg = np.zeros((M_r, N))
    assigned = np.zeros((M_r, N), dtype=bool)
    two_pi_over_M = 2.0 * np.pi / grid.M
    for n in range(1, N):
        col = mm[:, n]
        interior = col[1:-1]
        peaks = np.flatnonzero((interior > col[:-2]) & (interior > col[2:])) + 1
        for m_star in peaks:
            left_v, mid_v, right_v = col[m_star - 1], col[m_star], col[m_star + 1]
            denom = left_v - 2.0 * mid_v + right_v
            offset = 0.5 * (left_v - right_v) / denom if denom != 0.0 else 0.0
            omega = two_pi_over_M * (m_star + offset)
            ph = phase_seg[m_star, n - 1] + grid.a * omega
            lo = m_star
            while lo > 0 and col[lo - 1] < col[lo]:
                lo -= 1
            hi = m_star
            while hi < M_r - 1 and col[hi + 1] < col[hi]:
                hi += 1
            phase_seg[lo:hi + 1, n] = ph
            assigned[lo:hi + 1, n] = True
    # bins never touched by peak locking keep their zero initialisation
    ramp = (two_pi_over_M * grid.a) * np.outer(np.arange(M_r), np.arange(N))
    phase = _wrap(np.where(assigned, phase_seg - ramp, phase_seg))
    coeffs = ComplexStft(grid, mm * np.exp(1j * phase), mags.sample_rate)
    rec = istft(coeffs, dual)
    wall = time.perf_counter() - start
    return PrResult(rec, phase, 1, wall)


def distort_phase(coeffs: ComplexStft, sigma: float,
                  rng_seed: int) -> ComplexStft:
    """Add white Gaussian noise to the phase of every stored bin.

    Magnitudes are unchanged by construction; the implied phases wrap
    onto [-pi, pi). sigma = 0 returns an identical copy. Deterministic
    per seed.
    """
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if sigma == 0.0:
        return ComplexStft(coeffs.grid, coeffs.coeffs.copy(),
                           coeffs.sample_rate)
    rng = np.random.default_rng(rng_seed)
    noise = rng.normal(0.0, sigma, coeffs.coeffs.shape)
    return ComplexStft(coeffs.grid, coeffs.coeffs * np.exp(1j * noise),
                       coeffs.sample_rate)


def zero_phase_baseline(mags: MagnitudeStft, grid: StftGrid,
                        window: WindowVec | None = None) -> PrResult:
    """Synthesis of the target magnitudes with phase identically zero."""
    if window is None:
        window = _default_window(mags)
    dual = canonical_dual(window, grid)
    start = time.perf_counter()
    phase = np.zeros_like(mags.mags)
    coeffs = ComplexStft(grid, mags.mags.astype(np.complex128),
                         mags.sample_rate)
    rec = istft(coeffs, dual)
    wall = time.perf_counter() - start
    return PrResult(rec, phase, 0, wall)
