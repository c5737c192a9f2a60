"""WAV ingestion, emission, and sinc resampling for the harness."""

from __future__ import annotations

import os

import numpy as np
from scipy.io import wavfile

from ..gabor import SignalBuffer

__all__ = ["DataError", "read_wav", "write_wav", "resample_sinc",
           "ingest_wav"]

_TAPS = 64
_KAISER_BETA = 8.6


class DataError(ValueError):
    """Unreadable or unsupported input data."""


def read_wav(path: str) -> tuple[int, np.ndarray]:
    """Read a PCM16 or float32/float64 WAV as float64; first channel of
    multi-channel files."""
    try:
        rate, data = wavfile.read(path)
    except FileNotFoundError:
        raise
    except Exception as exc:  # scipy raises assorted ValueError subclasses
        raise DataError(f"unreadable WAV file {path!r}: {exc}") from exc
    if data.ndim == 2:
        data = data[:, 0]
    if data.size == 0:
        raise DataError(f"zero-length WAV file {path!r}")
    if data.dtype == np.int16:
        out = data.astype(np.float64) / 32768.0
    elif data.dtype in (np.float32, np.float64):
        out = data.astype(np.float64)
    else:
        raise DataError(f"unsupported WAV encoding {data.dtype} in {path!r} "
                        "(expected PCM16 or float32)")
    return int(rate), out


def write_wav(path: str, signal: SignalBuffer, encoding: str = "float32"):
    if encoding == "float32":
        wavfile.write(path, signal.sample_rate,
                      signal.samples.astype(np.float32))
    elif encoding == "pcm16":
        clipped = np.clip(signal.samples, -1.0, 1.0)
        wavfile.write(path, signal.sample_rate,
                      (clipped * 32767.0).astype(np.int16))
    else:
        raise ValueError(f"unknown WAV encoding {encoding!r}")


def resample_sinc(x: np.ndarray, rate_in: int, rate_out: int,
                  taps: int = _TAPS) -> np.ndarray:
    """Windowed-sinc resampling (Kaiser window, 64 taps by default).

    Same-rate input is returned unchanged (bit-identical).
    """
    if rate_in <= 0 or rate_out <= 0:
        raise ValueError("rates must be positive")
    if rate_in == rate_out:
        return x
    ratio = rate_out / rate_in
    n_out = int(round(x.size * ratio))
    # fractional input position of each output sample
    pos = np.arange(n_out) / ratio
    n0 = np.floor(pos).astype(np.intp)
    frac = pos - n0
    half = taps // 2
    offsets = np.arange(-half + 1, half + 1)
    # anti-aliasing cutoff at the narrower Nyquist
    bw = min(1.0, ratio)
    u = offsets[None, :] - frac[:, None]
    kernel = bw * np.sinc(bw * u)
    window = np.kaiser(2 * taps + 1, _KAISER_BETA)
    kernel *= np.interp(u, np.linspace(-half, half, 2 * taps + 1), window,
                        left=0.0, right=0.0)
    idx = np.clip(n0[:, None] + offsets[None, :], 0, x.size - 1)
    edge = (n0[:, None] + offsets[None, :] < 0) | \
           (n0[:, None] + offsets[None, :] >= x.size)
    gathered = np.where(edge, 0.0, x[idx])
    return np.sum(gathered * kernel, axis=1)


def ingest_wav(path: str, target_rate: int = 22050,
               target_length: int = 122880) -> SignalBuffer:
    """Load a WAV, resample to the target rate, and fit to target_length
    by truncation or zero padding."""
    if not os.path.exists(path):
        raise DataError(f"no such file: {path!r}")
    rate, data = read_wav(path)
    data = resample_sinc(data, rate, target_rate)
    if data.size >= target_length:
        data = data[:target_length]
    else:
        data = np.concatenate([data, np.zeros(target_length - data.size)])
    return SignalBuffer(data, target_rate)
