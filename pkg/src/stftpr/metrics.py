"""Reconstruction quality measures.

The spectrogram SNR is evaluated on a fixed reference analysis (2048
channels, hop 128, grid-matched Gaussian) regardless of the transform
under test, so that sweep cells stay comparable. Signals of arbitrary
length are zero-padded to the next multiple of the reference lattice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gabor import (ComplexStft, SignalBuffer, StftGrid, WindowVec,
                    project_consistent, stft)
from .windows import periodized_gaussian

__all__ = [
    "SnrMsConfig",
    "MetricReport",
    "snr_ms",
    "projection_error",
    "time_snr",
]

_PERFECT_DENOM = 1e-300

# reference windows keyed by (L, rate, M, a); construction is pure, so a
# racy double-build is harmless
_WINDOW_CACHE: dict = {}


@dataclass(frozen=True)
class SnrMsConfig:
    """Fixed parametrisation of the spectrogram-SNR analysis."""

    channels: int = 2048
    time_step: int = 128

    def __post_init__(self):
        if self.channels <= 0 or self.time_step <= 0:
            raise ValueError("metric grid parameters must be positive")


@dataclass
class MetricReport:
    snr_ms: float
    projection_error: float | None = None
    time_snr: float | None = None
    trim: int = 0
    odg: float | None = None  # reserved for external perceptual tools


def _half_spectrum_weights(M: int, M_r: int) -> np.ndarray:
    """Multiplicities of the stored channels in the full spectrum."""
    w = np.full(M_r, 2.0)
    w[0] = 1.0
    if M % 2 == 0:
        w[M // 2] = 1.0
    return w


def _full_norm_sq(coeffs: np.ndarray, M: int) -> float:
    w = _half_spectrum_weights(M, coeffs.shape[0])
    return float(np.sum(w[:, None] * np.abs(coeffs) ** 2))


def _reference_window(L: int, rate: int, cfg: SnrMsConfig) -> WindowVec:
    key = (L, rate, cfg.channels, cfg.time_step)
    win = _WINDOW_CACHE.get(key)
    if win is None:
        lam = cfg.time_step * cfg.channels / rate
        win = periodized_gaussian(lam, L, rate)
        _WINDOW_CACHE[key] = win
    return win


def _reference_analysis(sig: SignalBuffer, cfg: SnrMsConfig,
                        padded_len: int) -> np.ndarray:
    samples = sig.samples
    if samples.size < padded_len:
        samples = np.concatenate(
            [samples, np.zeros(padded_len - samples.size)])
    grid = StftGrid(cfg.time_step, cfg.channels, padded_len)
    win = _reference_window(padded_len, sig.sample_rate, cfg)
    return stft(SignalBuffer(samples, sig.sample_rate), win, grid).coeffs


def snr_ms(original: SignalBuffer, reconstructed: SignalBuffer,
           cfg: SnrMsConfig | None = None) -> float:
    """Spectrogram SNR in dB: 10 log10(||S||^2 / || |S_r| - |S| ||^2).

    Both signals are analysed on the fixed reference grid (zero-padded
    identically to the next admissible length). The numerator is computed
    on magnitudes, which equals the complex-coefficient norm. Returns
    +inf when the denominator vanishes, e.g. for a perfect reconstruction
    or a global sign flip.
    """
    cfg = cfg or SnrMsConfig()
    if original.length != reconstructed.length:
        raise ValueError("signals must have equal length")
    if original.sample_rate != reconstructed.sample_rate:
        raise ValueError("signals must share a sample rate")
    block = math.lcm(cfg.time_step, cfg.channels)
    padded = -(-original.length // block) * block
    S = _reference_analysis(original, cfg, padded)
    Sr = _reference_analysis(reconstructed, cfg, padded)
    w = _half_spectrum_weights(cfg.channels, S.shape[0])
    num = float(np.sum(w[:, None] * np.abs(S) ** 2))
    den = float(np.sum(w[:, None] * (np.abs(Sr) - np.abs(S)) ** 2))
    if den < _PERFECT_DENOM:
        return math.inf
    if num < _PERFECT_DENOM:
        # silent reference with a non-silent reconstruction
        return -math.inf
    return 10.0 * math.log10(num / den)


def projection_error(coeffs: ComplexStft, window: WindowVec,
                     dual: WindowVec) -> float:
    """Euclidean distance (over the full expanded spectrum) between the
    coefficients and their consistent projection."""
    projected = project_consistent(coeffs, window, dual)
    diff = coeffs.coeffs - projected.coeffs
    return math.sqrt(_full_norm_sq(diff, coeffs.grid.M))


def time_snr(original: SignalBuffer, reconstructed: SignalBuffer) -> float:
    """Plain time-domain SNR in dB."""
    if original.length != reconstructed.length:
        raise ValueError("signals must have equal length")
    err = original.samples - reconstructed.samples
    den = float(err @ err)
    if den < _PERFECT_DENOM:
        return math.inf
    return 10.0 * math.log10(float(original.samples @ original.samples) / den)
