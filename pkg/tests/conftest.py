"""Shared fixtures and independent oracle implementations.

The oracles stay deliberately naive (double loops / direct summation) so
they check the fast paths without sharing any code with them.
"""

import numpy as np
import pytest

from stftpr import SignalBuffer, StftGrid, expand_full_spectrum

RATE = 22050


def brute_force_stft(samples: np.ndarray, taps: np.ndarray, a: int,
                     M: int) -> np.ndarray:
    """Direct evaluation of the modulated windowed sum, full M channels."""
    L = samples.size
    N = L // a
    l = np.arange(L)
    S = np.zeros((M, N), dtype=np.complex128)
    for n in range(N):
        win = taps[(l - n * a) % L]
        prod = samples * win
        for m in range(M):
            S[m, n] = np.sum(prod * np.exp(-2j * np.pi * m * l / M))
    return S


def brute_force_istft(full: np.ndarray, taps: np.ndarray, a: int,
                      L: int) -> np.ndarray:
    """Direct double-loop synthesis; returns the complex sum."""
    M, N = full.shape
    l = np.arange(L)
    out = np.zeros(L, dtype=np.complex128)
    for n in range(N):
        win = taps[(l - n * a) % L]
        for m in range(M):
            out += full[m, n] * win * np.exp(2j * np.pi * m * l / M)
    return out


def brute_force_istft_from_half(coeffs, taps: np.ndarray) -> np.ndarray:
    full = expand_full_spectrum(coeffs)
    return brute_force_istft(full, taps, coeffs.grid.a, coeffs.grid.L)


def random_signal(L: int, seed: int, rate: int = RATE) -> SignalBuffer:
    rng = np.random.default_rng(seed)
    return SignalBuffer(rng.standard_normal(L), rate)


def rel_err(got: np.ndarray, want: np.ndarray) -> float:
    scale = np.abs(want).max()
    if scale == 0:
        return float(np.abs(got).max())
    return float(np.abs(got - want).max() / scale)


@pytest.fixture
def small_grid() -> StftGrid:
    return StftGrid(16, 64, 256)
