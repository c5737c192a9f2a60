"""Synthetic probe signals for the benchmark harness.

Four generators with distinct time-frequency character: a stationary
harmonic stack (needs frequency resolution), sine bursts of increasing
frequency, a pulse train (needs time resolution), and a speech-like
mixture of a wandering voiced harmonic stack with noise bursts. All are
deterministic per seed and peak-normalised to 1.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from ..gabor import SignalBuffer

__all__ = ["SignalKind", "synth_signal"]


class SignalKind(Enum):
    HARMONIC_TONE = "harmonic_tone"
    SINE_BURSTS = "sine_bursts"
    PULSE_TRAIN = "pulse_train"
    SPEECH_LIKE = "speech_like"


def _snap_to_bin(freq: float, L: int, rate: float) -> float:
    """Nearest domain-periodic frequency, so tones have exact DFT support
    and no wrap discontinuity."""
    k = max(1, round(freq * L / rate))
    return k * rate / L


def _harmonic_tone(params, L, rate, rng):
    f0 = _snap_to_bin(params.get("f0", 220.0), L, rate)
    count = int(params.get("harmonics", 10))
    nyquist = rate / 2.0
    if f0 * count >= nyquist:
        raise ValueError(f"harmonic {count} of f0={f0:.1f} Hz is at or above "
                         f"Nyquist ({nyquist:.0f} Hz)")
    t = np.arange(L) / rate
    out = np.zeros(L)
    phases = rng.uniform(-np.pi, np.pi, count)
    for h in range(1, count + 1):
        out += np.cos(2 * np.pi * f0 * h * t + phases[h - 1]) / h
    return out


def _sine_bursts(params, L, rate, rng):
    count = int(params.get("bursts", 8))
    f_lo = params.get("f_lo", 200.0)
    f_hi = params.get("f_hi", 4000.0)
    if f_hi >= rate / 2.0:
        raise ValueError("burst frequency at or above Nyquist")
    duty = params.get("duty", 0.6)
    freqs = np.geomspace(f_lo, f_hi, count)
    slot = L // count
    burst_len = max(8, int(slot * duty))
    t = np.arange(burst_len) / rate
    env = 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(burst_len) / burst_len)
    out = np.zeros(L)
    for i, f in enumerate(freqs):
        start = i * slot
        phase = rng.uniform(-np.pi, np.pi)
        out[start:start + burst_len] = env * np.cos(2 * np.pi * f * t + phase)
    return out


def _pulse_train(params, L, rate, rng):
    period = int(params.get("period", max(1, L // 64)))
    if period <= 0:
        raise ValueError("pulse period must be positive")
    out = np.zeros(L)
    out[::period] = 1.0
    return out


def _speech_like(params, L, rate, rng):
    """Voiced harmonic stack with wandering f0, syllabic gating, fricative
    noise bursts, and plosive onsets: a stand-in with speech-like
    time-frequency statistics (tonal + transient + broadband)."""
    samples = np.arange(L)
    t = samples / rate
    # f0 trajectory: slow random walk in 110..240 Hz with cycle-level
    # jitter, so no harmonic ridge stays coherent through long windows
    knots = max(8, L // 2048)
    walk = np.cumsum(rng.normal(0.0, 12.0, knots))
    walk = 170.0 + 45.0 * np.tanh(walk / 60.0)
    f0 = np.interp(samples, np.linspace(0, L - 1, knots), walk)
    fast_knots = max(16, L // 256)
    jitter = np.interp(samples, np.linspace(0, L - 1, fast_knots),
                       rng.normal(0.0, 1.0, fast_knots))
    vibrato = np.sin(2 * np.pi * rng.uniform(4.5, 6.5) * t
                     + rng.uniform(0, 2 * np.pi))
    f0 = f0 * (1.0 + 0.04 * jitter + 0.03 * vibrato)
    inst_phase = 2 * np.pi * np.cumsum(f0) / rate

    harmonics = int(params.get("harmonics", 16))
    voiced = np.zeros(L)
    for h in range(1, harmonics + 1):
        # formant-ish spectral tilt with two broad resonances
        fh = h * 170.0
        tilt = 1.0 / h
        resonance = (1.0 + 1.5 * np.exp(-0.5 * ((fh - 500.0) / 220.0) ** 2)
                     + 0.8 * np.exp(-0.5 * ((fh - 1600.0) / 400.0) ** 2))
        am = 1.0 + 0.35 * np.sin(2 * np.pi * rng.uniform(2.0, 5.0) * t
                                 + rng.uniform(0, 2 * np.pi))
        voiced += tilt * resonance * am * np.cos(h * inst_phase
                                                 + rng.uniform(0, 2 * np.pi))
    voiced /= max(np.abs(voiced).max(), 1e-12)

    # syllable-rate gating (~7.5 Hz) with near-silent stops between gates
    syllables = max(3, int(round(7.5 * L / rate)))
    env = np.zeros(L)
    centers = np.sort(rng.uniform(0.05, 0.95, syllables)) * L
    width = L / (syllables * 1.6)
    for c in centers:
        env += np.exp(-0.5 * ((samples - c) / (width / 2.3)) ** 2)
    env = env / max(env.max(), 1e-12)
    out = voiced * env

    # fricative bursts: wide-band noise filling the envelope gaps
    noise = rng.normal(0.0, 1.0, L)
    spec = np.fft.rfft(noise)
    freqs = np.fft.rfftfreq(L, 1.0 / rate)
    band = np.exp(-0.5 * ((freqs - 3500.0) / 2800.0) ** 2)
    fric = np.fft.irfft(spec * band, n=L)
    fric /= max(np.abs(fric).max(), 1e-12)
    gaps = np.clip(0.9 - env, 0.0, None)
    out = out + 1.1 * fric * gaps

    # low-level room tone across the whole take
    floor = np.fft.irfft(np.fft.rfft(rng.normal(0.0, 1.0, L))
                         * (freqs > 60.0), n=L)
    out = out + 0.035 * floor / max(np.abs(floor).max(), 1e-12)

    # plosive onsets and releases: short wideband clicks framing each
    # syllable
    click_band = np.exp(-0.5 * ((freqs - 2500.0) / 3200.0) ** 2)
    for c in centers:
        for edge in (c - 0.8 * width, c + 0.8 * width):
            start = int(edge)
            dur = int(rng.uniform(0.003, 0.008) * rate)
            if start < 0 or start + dur >= L:
                continue
            burst = rng.normal(0.0, 1.0, dur)
            shaped = np.fft.irfft(np.fft.rfft(burst, L) * click_band,
                                  n=L)[:dur]
            shaped /= max(np.abs(shaped).max(), 1e-12)
            out[start:start + dur] += 0.9 * shaped * np.hanning(dur)
    return out


_GENERATORS = {
    SignalKind.HARMONIC_TONE: _harmonic_tone,
    SignalKind.SINE_BURSTS: _sine_bursts,
    SignalKind.PULSE_TRAIN: _pulse_train,
    SignalKind.SPEECH_LIKE: _speech_like,
}


def synth_signal(kind: SignalKind | str, params: dict | None, L: int,
                 sample_rate: int, seed: int) -> SignalBuffer:
    """Deterministic synthetic probe signal, peak-normalised to 1."""
    if isinstance(kind, str):
        kind = SignalKind(kind)
    if L <= 0:
        raise ValueError("L must be positive")
    rng = np.random.default_rng(seed)
    out = _GENERATORS[kind](params or {}, L, sample_rate, rng)
    peak = np.abs(out).max()
    if peak > 0:
        out = out / peak
    return SignalBuffer(out, sample_rate)
