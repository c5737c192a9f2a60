"""Invertible discrete STFT on a modular (a, M) lattice.

Analysis and synthesis follow the circular convention: all signal-domain
indices are taken modulo the signal length L, the hop a and channel count
M must divide L, and windows live on the full length-L circle centred at
index 0. Analysis folds the windowed segment into M bins before a
length-M FFT, which evaluates the modulated sum exactly even when the
window support exceeds M.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

__all__ = [
    "WindowFamily",
    "WindowRole",
    "NotAFrameError",
    "SignalBuffer",
    "StftGrid",
    "WindowVec",
    "ComplexStft",
    "MagnitudeStft",
    "stft",
    "istft",
    "canonical_dual",
    "project_consistent",
    "expand_full_spectrum",
    "magnitude_of",
]

# Taps below this fraction of the window peak are outside the effective
# support; dropping them perturbs transforms far below the 1e-10
# round-trip contract.
_SUPPORT_REL = 1e-20

# Frame-operator spectrum ratio below which (g, a, M) is rejected.
_FRAME_EIG_RATIO = 1e-12

_CG_TOL = 1e-13
_CG_MAXITER = 500

# Max deviation of the duality (Wexler-Raz) identity accepted for a
# conjugate-gradient dual; exact duals sit at the CG residual level.
_DUALITY_TOL = 1e-10


class WindowFamily(Enum):
    GAUSSIAN = "gaussian"
    HANN = "hann"
    BLACKMAN = "blackman"
    BARTLETT = "bartlett"
    CUSTOM = "custom"


class WindowRole(Enum):
    ANALYSIS = "analysis"
    SYNTHESIS_DUAL = "synthesis_dual"


class NotAFrameError(ValueError):
    """The (window, a, M) system does not generate an invertible STFT."""


@dataclass
class SignalBuffer:
    """A finite real time-domain signal with its sampling rate in Hz."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1 or self.samples.size == 0:
            raise ValueError("signal must be a non-empty 1-D array")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("signal contains non-finite samples")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")

    @property
    def length(self) -> int:
        return self.samples.size


@dataclass(frozen=True)
class StftGrid:
    """Transform lattice: hop a, channels M, signal length L.

    Requires a | L and M | L so that modular indexing and segment folding
    are exact.
    """

    a: int
    M: int
    L: int

    def __post_init__(self):
        if self.a <= 0 or self.M <= 0 or self.L <= 0:
            raise ValueError("grid parameters must be positive")
        if self.L % self.a != 0:
            raise ValueError(f"hop a={self.a} does not divide L={self.L}")
        if self.L % self.M != 0:
            raise ValueError(f"channels M={self.M} do not divide L={self.L}")

    @property
    def frames(self) -> int:
        return self.L // self.a

    @property
    def redundancy(self) -> float:
        return self.M / self.a

    @property
    def half_channels(self) -> int:
        return self.M // 2 + 1


@dataclass
class WindowVec:
    """A length-L analysis or synthesis window.

    ``fitted_lambda`` is the time-frequency ratio the window realises (or
    was fitted to); ``clamped`` flags a support search that hit its lower
    bound. Derived per-grid state (index plans, canonical duals) is cached
    on the instance; the cache is idempotent, so concurrent builds are
    harmless.
    """

    taps: np.ndarray
    family: WindowFamily = WindowFamily.CUSTOM
    fitted_lambda: float | None = None
    role: WindowRole = WindowRole.ANALYSIS
    clamped: bool = False
    support: int | None = None
    _plans: dict = field(default_factory=dict, repr=False, compare=False)
    _duals: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.taps = np.asarray(self.taps, dtype=np.float64)
        if self.taps.ndim != 1 or self.taps.size == 0:
            raise ValueError("window taps must be a non-empty 1-D array")
        if not np.all(np.isfinite(self.taps)):
            raise ValueError("window taps must be finite")
        if not np.any(self.taps):
            raise ValueError("window must not be identically zero")


@dataclass
class ComplexStft:
    """Half-spectrum STFT coefficients (M_r x N) of a real signal.

    The stored rows canonically represent the conjugate-symmetric full
    spectrum; imaginary parts of the DC row (and Nyquist row for even M)
    have no representable meaning and are dropped on expansion, matching
    irfft semantics.
    """

    grid: StftGrid
    coeffs: np.ndarray
    sample_rate: int

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        expect = (self.grid.half_channels, self.grid.frames)
        if self.coeffs.shape != expect:
            raise ValueError(f"coefficient shape {self.coeffs.shape} != {expect}")
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("coefficients contain non-finite entries")


@dataclass
class MagnitudeStft:
    """Magnitude-only STFT (M_r x N), entries >= 0."""

    grid: StftGrid
    mags: np.ndarray
    sample_rate: int

    def __post_init__(self):
        self.mags = np.asarray(self.mags, dtype=np.float64)
        expect = (self.grid.half_channels, self.grid.frames)
        if self.mags.shape != expect:
            raise ValueError(f"magnitude shape {self.mags.shape} != {expect}")
        if not np.all(np.isfinite(self.mags)) or np.any(self.mags < 0):
            raise ValueError("magnitudes must be finite and non-negative")


def magnitude_of(coeffs: ComplexStft) -> MagnitudeStft:
    return MagnitudeStft(coeffs.grid, np.abs(coeffs.coeffs), coeffs.sample_rate)


def _window_segment(taps: np.ndarray) -> tuple[int, np.ndarray]:
    """Contiguous circular segment (start offset, values) covering every
    tap above the effective-support threshold."""
    L = taps.size
    peak = np.max(np.abs(taps))
    idx = np.flatnonzero(np.abs(taps) > _SUPPORT_REL * peak)
    offs = np.where(idx > L // 2, idx - L, idx)
    lo = int(offs.min())
    hi = int(offs.max())
    seg = taps[np.arange(lo, hi + 1) % L]
    return lo, seg


class _Plan:
    """Precomputed gather/fold indexing for one (window, grid) pair."""

    __slots__ = ("lo", "seg", "idx", "fold", "flat_fold", "P")

    def __init__(self, taps: np.ndarray, grid: StftGrid):
        lo, seg = _window_segment(taps)
        N, a, M, L = grid.frames, grid.a, grid.M, grid.L
        base = np.arange(lo, lo + seg.size)
        idx = (np.arange(N)[:, None] * a + base[None, :]) % L
        self.lo = lo
        self.seg = seg
        self.P = seg.size
        self.idx = idx
        # M | L makes idx % M equal to (n*a + offset) % M, so folding the
        # windowed segment into M bins matches the Eq-style modulated sum.
        self.fold = idx % M
        self.flat_fold = (np.arange(N)[:, None] * M + self.fold).ravel()


def _plan_for(window: WindowVec, grid: StftGrid) -> _Plan:
    key = (grid.a, grid.M, grid.L)
    plan = window._plans.get(key)
    if plan is None:
        plan = _Plan(window.taps, grid)
        window._plans[key] = plan
    return plan


def _analysis(s: np.ndarray, plan: _Plan, grid: StftGrid) -> np.ndarray:
    """Half-spectrum analysis of a real length-L vector."""
    N, M = grid.frames, grid.M
    vals = s[plan.idx] * plan.seg
    folded = np.bincount(plan.flat_fold, weights=vals.ravel(),
                         minlength=N * M).reshape(N, M)
    return np.fft.rfft(folded, axis=1).T.copy()


def _synthesis(C: np.ndarray, plan: _Plan, grid: StftGrid) -> np.ndarray:
    """Real synthesis from half-spectrum coefficients (M_r x N)."""
    N, M, L = grid.frames, grid.M, grid.L
    # w[j, n] = sum_m S_full[m, n] e^{2pi i m j / M}; irfft performs the
    # conjugate-symmetric expansion implicitly.
    w = np.fft.irfft(C, n=M, axis=0) * M
    gathered = w.T[np.arange(N)[:, None], plan.fold]
    vals = gathered * plan.seg
    return np.bincount(plan.idx.ravel(), weights=vals.ravel(), minlength=L)


def expand_full_spectrum(coeffs: ComplexStft) -> np.ndarray:
    """Expand half-spectrum storage to the conjugate-symmetric M x N matrix.

    DC (and Nyquist, for even M) rows are forced real so the result is
    exactly Hermitian in m.
    """
    M = coeffs.grid.M
    M_r = coeffs.grid.half_channels
    half = coeffs.coeffs.copy()
    half[0] = half[0].real
    if M % 2 == 0:
        half[M // 2] = half[M // 2].real
    full = np.empty((M, coeffs.coeffs.shape[1]), dtype=np.complex128)
    full[:M_r] = half
    if M_r < M:
        full[M_r:] = np.conj(half[1:M - M_r + 1][::-1])
    return full


def stft(signal: SignalBuffer, window: WindowVec, grid: StftGrid) -> ComplexStft:
    """Half-spectrum STFT of a real signal.

    Evaluates S[m, n] = sum_l s[l] g[l - n a] e^{-2 pi i m l / M} for
    n in [0, N) and m in [0, M_r) via length-M FFTs of the M-folded
    windowed segments.
    """
    if window.taps.size != grid.L:
        raise ValueError(f"window length {window.taps.size} != L={grid.L}")
    if signal.length != grid.L:
        raise ValueError(f"signal length {signal.length} != L={grid.L}")
    plan = _plan_for(window, grid)
    return ComplexStft(grid, _analysis(signal.samples, plan, grid),
                       signal.sample_rate)


def istft(coeffs: ComplexStft, synthesis_window: WindowVec) -> SignalBuffer:
    """Inverse STFT: s~[l] = sum_n sum_m S[m, n] gd[l - n a] e^{2 pi i m l / M}.

    The half spectrum is expanded to its conjugate-symmetric full form
    before synthesis, which makes the synthesis sum exactly real (the
    imaginary residue of the equivalent complex evaluation is zero by
    construction; tests check it against a full complex oracle).
    """
    if synthesis_window.role is not WindowRole.SYNTHESIS_DUAL:
        raise ValueError("synthesis window must have the synthesis-dual role")
    grid = coeffs.grid
    if synthesis_window.taps.size != grid.L:
        raise ValueError(
            f"window length {synthesis_window.taps.size} != L={grid.L}")
    half = coeffs.coeffs.copy()
    half[0] = half[0].real
    if grid.M % 2 == 0:
        half[grid.M // 2] = half[grid.M // 2].real
    plan = _plan_for(synthesis_window, grid)
    out = _synthesis(half, plan, grid)
    return SignalBuffer(out, coeffs.sample_rate)


def _frame_diagonal(taps: np.ndarray, grid: StftGrid) -> np.ndarray:
    """a-periodic diagonal of the frame operator: d[l] = M sum_n g[l-na]^2."""
    g2 = taps ** 2
    per = grid.M * g2.reshape(grid.frames, grid.a).sum(axis=0)
    return np.tile(per, grid.frames)


def _wexler_raz_residual(g: np.ndarray, gd: np.ndarray, grid: StftGrid) -> float:
    """Max deviation of M sum_n g[l-na-jM] gd[l-na] from delta_{j0}."""
    a, M, L, N = grid.a, grid.M, grid.L, grid.frames
    q = L // M
    l = np.arange(a)
    hops = np.arange(N) * a
    shift = (l[None, :] - hops[:, None]) % L
    gd_part = gd[shift]
    worst = 0.0
    for j in range(q):
        wj = M * np.sum(gd_part * g[(shift - j * M) % L], axis=0)
        target = 1.0 if j == 0 else 0.0
        worst = max(worst, float(np.max(np.abs(wj - target))))
    return worst


def canonical_dual(window: WindowVec, grid: StftGrid) -> WindowVec:
    """Canonical dual window gd = S^{-1} g of the Gabor frame operator S.

    Uses the diagonal (painless) inverse when the effective window support
    fits inside M; otherwise solves S gd = g by conjugate gradients on
    applications of the frame operator and verifies the resulting duality
    identity. Raises NotAFrameError when the frame condition fails.
    """
    if window.taps.size != grid.L:
        raise ValueError(f"window length {window.taps.size} != L={grid.L}")
    key = (grid.a, grid.M, grid.L)
    cached = window._duals.get(key)
    if cached is not None:
        return cached

    g = window.taps
    d = _frame_diagonal(g, grid)
    # Diagonal entries are Rayleigh quotients of S, so min(d) bounds the
    # smallest eigenvalue from above and max(d) bounds the largest from
    # below: a collapsed ratio certifies frame failure in every case.
    if d.min() <= _FRAME_EIG_RATIO * d.max():
        raise NotAFrameError(
            f"not a frame at this (a={grid.a}, M={grid.M}): frame-operator "
            f"spectrum ratio <= {_FRAME_EIG_RATIO:g}")

    plan = _plan_for(window, grid)
    painless = grid.L == grid.M or plan.P <= grid.M
    if painless:
        dual_taps = g / d
    else:
        x = g / d
        r = g - _synthesis(_analysis(x, plan, grid), plan, grid)
        p = r.copy()
        rs = float(r @ r)
        gnorm = float(np.linalg.norm(g))
        converged = rs <= (_CG_TOL * gnorm) ** 2
        for _ in range(_CG_MAXITER):
            if converged:
                break
            Sp = _synthesis(_analysis(p, plan, grid), plan, grid)
            curv = float(p @ Sp)
            if curv <= 0:
                raise NotAFrameError(
                    f"not a frame at this (a={grid.a}, M={grid.M}): frame "
                    "operator lost positive definiteness")
            alpha = rs / curv
            x += alpha * p
            r -= alpha * Sp
            rs_new = float(r @ r)
            p = r + (rs_new / rs) * p
            rs = rs_new
            converged = rs <= (_CG_TOL * gnorm) ** 2
        if not converged:
            raise NotAFrameError(
                f"not a frame at this (a={grid.a}, M={grid.M}): dual solve "
                f"stalled at relative residual {np.sqrt(rs) / gnorm:.2e}")
        resid = _wexler_raz_residual(g, x, grid)
        if resid > _DUALITY_TOL:
            raise NotAFrameError(
                f"not a frame at this (a={grid.a}, M={grid.M}): duality "
                f"residual {resid:.2e}")
        dual_taps = x

    dual = WindowVec(dual_taps, family=window.family,
                     fitted_lambda=window.fitted_lambda,
                     role=WindowRole.SYNTHESIS_DUAL)
    window._duals[key] = dual
    return dual


def project_consistent(coeffs: ComplexStft, window: WindowVec,
                       dual: WindowVec) -> ComplexStft:
    """Project coefficients onto the consistent set: S_g(iSTFT_gd(C))."""
    rec = istft(coeffs, dual)
    return stft(rec, window, coeffs.grid)
