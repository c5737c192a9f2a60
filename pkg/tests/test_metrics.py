"""Metric tests: spectrogram SNR arithmetic and projection error."""

import math

import numpy as np
import pytest

from conftest import RATE, random_signal
from stftpr import (ComplexStft, SignalBuffer, SnrMsConfig, StftGrid,
                    canonical_dual, distort_phase, grid_matched_lambda,
                    istft, periodized_gaussian, projection_error, snr_ms,
                    stft, time_snr)
from stftpr.harness import SignalKind, synth_signal


class TestSnrMs:
    def test_identical_signals_are_perfect(self):
        s = random_signal(8192, seed=1)
        assert math.isinf(snr_ms(s, s))

    def test_global_sign_flip_is_perfect(self):
        s = random_signal(8192, seed=2)
        flipped = SignalBuffer(-s.samples, RATE)
        assert math.isinf(snr_ms(s, flipped))

    def test_sign_symmetry(self):
        s = random_signal(8192, seed=3)
        r = random_signal(8192, seed=4)
        flipped = SignalBuffer(-r.samples, RATE)
        assert snr_ms(s, r) == pytest.approx(snr_ms(s, flipped), rel=1e-12)

    def test_ten_db_construction(self):
        # bisect the additive-noise scale until the magnitude-difference
        # energy is exactly 10% of the reference energy, then check Eq.
        # arithmetic returns 10 dB
        from stftpr.metrics import (_half_spectrum_weights,
                                    _reference_analysis)
        cfg = SnrMsConfig()
        s = synth_signal(SignalKind.SPEECH_LIKE, None, 8192, RATE, seed=5)
        noise = random_signal(8192, seed=6).samples
        S = _reference_analysis(s, cfg, 8192)
        w = _half_spectrum_weights(cfg.channels, S.shape[0])
        num = float(np.sum(w[:, None] * np.abs(S) ** 2))

        def ratio(scale):
            r = SignalBuffer(s.samples + scale * noise, RATE)
            Sr = _reference_analysis(r, cfg, 8192)
            den = float(np.sum(w[:, None] * (np.abs(Sr) - np.abs(S)) ** 2))
            return den / num

        lo, hi = 0.0, 1.0
        while ratio(hi) < 0.1:
            hi *= 2
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if ratio(mid) < 0.1:
                lo = mid
            else:
                hi = mid
        scale = 0.5 * (lo + hi)
        rec = SignalBuffer(s.samples + scale * noise, RATE)
        assert snr_ms(s, rec) == pytest.approx(10.0, abs=1e-5)

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            snr_ms(random_signal(4096, seed=7), random_signal(2048, seed=8))

    def test_arbitrary_length_padding(self):
        # lengths that violate the metric lattice are padded internally
        s = random_signal(5000, seed=9)
        r = SignalBuffer(s.samples + 0.01 * random_signal(5000, seed=10).samples,
                         RATE)
        out = snr_ms(s, r)
        assert math.isfinite(out) and out > 0

    def test_monotone_in_phase_noise_with_destruction_floor(self):
        # SNR decreases as phase noise grows; sigma = 1 lands below 8 dB
        L = 12288
        sig = synth_signal(SignalKind.SPEECH_LIKE, None, L, RATE, seed=11)
        grid = StftGrid(48, 384, L)  # D = 8, lambda ~ 0.84
        win = periodized_gaussian(grid_matched_lambda(grid, RATE), L, RATE)
        dual = canonical_dual(win, grid)
        C = stft(sig, win, grid)
        scores = []
        for sigma in (0.1, 0.5, 1.0):
            rec = istft(distort_phase(C, sigma, rng_seed=13), dual)
            scores.append(snr_ms(sig, rec))
        assert scores[0] > scores[1] > scores[2]
        assert scores[2] < 8.0


class TestProjectionError:
    def _setup(self, L=2048, a=16, M=128):
        grid = StftGrid(a, M, L)
        win = periodized_gaussian(grid_matched_lambda(grid, RATE), L, RATE)
        dual = canonical_dual(win, grid)
        return grid, win, dual

    def test_consistent_input_is_zero(self):
        grid, win, dual = self._setup()
        C = stft(random_signal(2048, seed=14), win, grid)
        norm = np.linalg.norm(C.coeffs)
        assert projection_error(C, win, dual) <= 1e-10 * norm

    def test_zero_phase_spectrum_is_inconsistent(self):
        grid, win, dual = self._setup()
        C = stft(random_signal(2048, seed=15), win, grid)
        zp = ComplexStft(grid, np.abs(C.coeffs).astype(complex), RATE)
        err = projection_error(zp, win, dual)
        assert err > 1e-3 * np.linalg.norm(zp.coeffs)

    def test_critically_sampled_projection_is_identity(self):
        # D = 1 tight (rectangular) window: coefficients span the whole
        # space, so any input projects to itself
        from stftpr import WindowVec, WindowFamily
        L, M = 512, 16
        grid = StftGrid(M, M, L)
        taps = np.zeros(L)
        taps[(np.arange(-(M // 2), M - M // 2)) % L] = 1.0
        win = WindowVec(taps, family=WindowFamily.CUSTOM)
        dual = canonical_dual(win, grid)
        rng = np.random.default_rng(16)
        shape = (grid.half_channels, grid.frames)
        c = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        c[0] = c[0].real
        c[M // 2] = c[M // 2].real
        X = ComplexStft(grid, c, RATE)
        assert projection_error(X, win, dual) <= 1e-10 * np.linalg.norm(c)

    def test_invariant_to_global_unit_modulus_factor(self):
        # sign flips commute exactly with the real-signal projection;
        # arbitrary rotations only approximately, because the hermitian
        # completion pins DC/Nyquist rows to the real axis (the projection
        # is real-linear, not complex-linear). Keep those rows empty so
        # the rotation error reflects only second-order leakage.
        grid, win, dual = self._setup()
        C = stft(random_signal(2048, seed=17), win, grid)
        mags = np.abs(C.coeffs)
        mags[0] = 0.0
        mags[grid.M // 2] = 0.0
        zp = ComplexStft(grid, mags.astype(complex), RATE)
        flipped = ComplexStft(grid, -zp.coeffs, RATE)
        spun = ComplexStft(grid, zp.coeffs * np.exp(0.73j), RATE)
        a = projection_error(zp, win, dual)
        assert a == pytest.approx(projection_error(flipped, win, dual),
                                  rel=1e-12)
        assert a == pytest.approx(projection_error(spun, win, dual),
                                  rel=1e-3)


class TestTimeSnr:
    def test_perfect(self):
        s = random_signal(1024, seed=18)
        assert math.isinf(time_snr(s, s))

    def test_known_ratio(self):
        s = SignalBuffer(np.ones(1000), RATE)
        r = SignalBuffer(np.ones(1000) + 0.1, RATE)
        assert time_snr(s, r) == pytest.approx(20.0, abs=1e-9)
