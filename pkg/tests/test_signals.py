"""Synthetic probe generator tests."""

import numpy as np
import pytest

from conftest import RATE
from stftpr.harness import SignalKind, synth_signal


class TestPulseTrain:
    def test_exact_pulse_count(self):
        L, period = 8192, 128
        sig = synth_signal(SignalKind.PULSE_TRAIN, {"period": period}, L,
                           RATE, seed=0)
        assert np.count_nonzero(sig.samples) == L // period

    def test_unit_peak(self):
        sig = synth_signal(SignalKind.PULSE_TRAIN, {"period": 64}, 4096,
                           RATE, seed=0)
        assert np.abs(sig.samples).max() == 1.0


class TestHarmonicTone:
    def test_dft_support_only_at_harmonics(self):
        L = 16384
        f0 = 220.0
        sig = synth_signal(SignalKind.HARMONIC_TONE,
                           {"f0": f0, "harmonics": 10}, L, RATE, seed=1)
        spec = np.abs(np.fft.rfft(sig.samples))
        k0 = round(f0 * L / RATE)
        allowed = {k0 * h for h in range(1, 11)}
        mask = np.ones(spec.size, dtype=bool)
        for k in allowed:
            mask[k] = False
        peak = spec.max()
        assert spec[mask].max() <= peak * 1e-6  # -120 dB

    def test_harmonic_above_nyquist_rejected(self):
        with pytest.raises(ValueError, match="Nyquist"):
            synth_signal(SignalKind.HARMONIC_TONE,
                         {"f0": 2000.0, "harmonics": 10}, 4096, RATE, seed=0)

    def test_stationary_deterministic(self):
        a = synth_signal(SignalKind.HARMONIC_TONE, None, 4096, RATE, seed=5)
        b = synth_signal(SignalKind.HARMONIC_TONE, None, 4096, RATE, seed=5)
        assert np.array_equal(a.samples, b.samples)


class TestSineBursts:
    def test_energy_confined_to_bursts(self):
        L = 16384
        sig = synth_signal(SignalKind.SINE_BURSTS, {"bursts": 8}, L, RATE,
                           seed=2)
        slot = L // 8
        burst_len = int(slot * 0.6)
        peak = np.abs(sig.samples).max()
        for i in range(8):
            gap = sig.samples[i * slot + burst_len:(i + 1) * slot]
            assert np.abs(gap).max() <= peak * 1e-6  # silence gaps

    def test_increasing_frequencies(self):
        L = 32768
        sig = synth_signal(SignalKind.SINE_BURSTS, {"bursts": 4}, L, RATE,
                           seed=3)
        slot = L // 4
        centroids = []
        for i in range(4):
            seg = sig.samples[i * slot:(i + 1) * slot]
            spec = np.abs(np.fft.rfft(seg)) ** 2
            freqs = np.fft.rfftfreq(slot, 1 / RATE)
            centroids.append(np.sum(freqs * spec) / np.sum(spec))
        assert all(b > a for a, b in zip(centroids, centroids[1:]))


class TestSpeechLike:
    def test_deterministic_per_seed(self):
        a = synth_signal(SignalKind.SPEECH_LIKE, None, 8192, RATE, seed=7)
        b = synth_signal(SignalKind.SPEECH_LIKE, None, 8192, RATE, seed=7)
        c = synth_signal(SignalKind.SPEECH_LIKE, None, 8192, RATE, seed=8)
        assert np.array_equal(a.samples, b.samples)
        assert not np.array_equal(a.samples, c.samples)

    def test_unit_peak_and_finite(self):
        sig = synth_signal(SignalKind.SPEECH_LIKE, None, 8192, RATE, seed=9)
        assert np.abs(sig.samples).max() == pytest.approx(1.0)
        assert np.all(np.isfinite(sig.samples))

    def test_has_broadband_and_tonal_content(self):
        sig = synth_signal(SignalKind.SPEECH_LIKE, None, 32768, RATE,
                           seed=10)
        spec = np.abs(np.fft.rfft(sig.samples)) ** 2
        freqs = np.fft.rfftfreq(32768, 1 / RATE)
        low = spec[(freqs > 80) & (freqs < 1000)].sum()
        high = spec[(freqs > 2500) & (freqs < 8000)].sum()
        assert low > 0 and high > 0
        assert 0.01 < high / low < 100

    def test_string_kind_accepted(self):
        sig = synth_signal("speech_like", None, 4096, RATE, seed=0)
        assert sig.length == 4096
