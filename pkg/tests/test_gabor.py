"""Transform-core tests: oracle equivalence, duals, projection."""

import numpy as np
import pytest

from conftest import (RATE, brute_force_istft_from_half, brute_force_stft,
                      random_signal, rel_err)
from stftpr import (ComplexStft, NotAFrameError, SignalBuffer, StftGrid,
                    WindowFamily, WindowRole, WindowVec, canonical_dual,
                    expand_full_spectrum, grid_matched_lambda, istft,
                    magnitude_of, named_window, periodized_gaussian,
                    project_consistent, stft)


def matched_gaussian(grid: StftGrid) -> WindowVec:
    return periodized_gaussian(grid_matched_lambda(grid, RATE), grid.L, RATE)


def random_half_spectrum(grid: StftGrid, seed: int) -> ComplexStft:
    """Random coefficients that represent a real signal's spectrum
    (DC/Nyquist rows real)."""
    rng = np.random.default_rng(seed)
    shape = (grid.half_channels, grid.frames)
    c = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    c[0] = c[0].real
    if grid.M % 2 == 0:
        c[grid.M // 2] = c[grid.M // 2].real
    return ComplexStft(grid, c, RATE)


class TestStft:
    def test_zero_signal_gives_zero_coeffs(self, small_grid):
        g = matched_gaussian(small_grid)
        zero = SignalBuffer(np.zeros(small_grid.L) + 1e-300, RATE)
        zero.samples[:] = 0.0
        C = stft(zero, g, small_grid)
        assert np.all(C.coeffs == 0)

    def test_unit_impulse_magnitudes_are_window_values(self, small_grid):
        g = matched_gaussian(small_grid)
        s = np.zeros(small_grid.L)
        s[0] = 1.0
        C = stft(SignalBuffer(s, RATE), g, small_grid)
        for n in range(small_grid.frames):
            want = abs(g.taps[(-n * small_grid.a) % small_grid.L])
            assert np.allclose(np.abs(C.coeffs[:, n]), want, atol=1e-15)

    def test_matches_brute_force_sum(self, small_grid):
        g = matched_gaussian(small_grid)
        s = random_signal(small_grid.L, seed=11)
        C = stft(s, g, small_grid)
        full = brute_force_stft(s.samples, g.taps, small_grid.a, small_grid.M)
        assert rel_err(C.coeffs, full[:small_grid.half_channels]) < 1e-9

    def test_brute_force_on_named_window_and_odd_channels(self):
        grid = StftGrid(12, 48, 240)
        win = named_window(WindowFamily.HANN, 60, grid.L)
        s = random_signal(grid.L, seed=12)
        C = stft(s, win, grid)
        full = brute_force_stft(s.samples, win.taps, grid.a, grid.M)
        assert rel_err(C.coeffs, full[:grid.half_channels]) < 1e-9

    def test_dimension_mismatch_rejected(self, small_grid):
        g = matched_gaussian(small_grid)
        with pytest.raises(ValueError):
            stft(random_signal(128, seed=0), g, small_grid)
        with pytest.raises(ValueError):
            StftGrid(24, 64, 256)  # hop does not divide L
        with pytest.raises(ValueError):
            StftGrid(16, 96, 256)  # channels do not divide L


class TestIstft:
    def test_zero_coeffs_give_zero_signal(self, small_grid):
        g = matched_gaussian(small_grid)
        gd = canonical_dual(g, small_grid)
        C = ComplexStft(small_grid,
                        np.zeros((small_grid.half_channels,
                                  small_grid.frames), complex), RATE)
        out = istft(C, gd)
        assert np.all(out.samples == 0)

    def test_round_trip_with_canonical_dual(self, small_grid):
        g = matched_gaussian(small_grid)
        gd = canonical_dual(g, small_grid)
        s = random_signal(small_grid.L, seed=13)
        rec = istft(stft(s, g, small_grid), gd)
        assert np.linalg.norm(rec.samples - s.samples) \
            <= 1e-10 * np.linalg.norm(s.samples)

    def test_matches_brute_force_synthesis(self, small_grid):
        g = matched_gaussian(small_grid)
        dual = canonical_dual(g, small_grid)
        C = random_half_spectrum(small_grid, seed=14)
        got = istft(C, dual)
        want = brute_force_istft_from_half(C, dual.taps)
        # the hermitian-expanded synthesis sum is real up to rounding
        assert np.abs(want.imag).max() <= 1e-9 * np.abs(want.real).max()
        assert rel_err(got.samples, want.real) < 1e-9

    def test_requires_dual_role(self, small_grid):
        g = matched_gaussian(small_grid)
        C = random_half_spectrum(small_grid, seed=15)
        with pytest.raises(ValueError):
            istft(C, g)

    def test_rejects_non_finite(self, small_grid):
        bad = np.zeros((small_grid.half_channels, small_grid.frames),
                       complex)
        bad[0, 0] = np.nan
        with pytest.raises(ValueError):
            ComplexStft(small_grid, bad, RATE)


class TestCanonicalDual:
    def test_tight_window_dual_is_proportional(self):
        # critically sampled rectangular window: already tight
        L, M = 256, 16
        grid = StftGrid(M, M, L)
        taps = np.zeros(L)
        offs = np.arange(-(M // 2), M - M // 2)
        taps[offs % L] = 1.0
        win = WindowVec(taps, family=WindowFamily.CUSTOM)
        dual = canonical_dual(win, grid)
        ratio = dual.taps[offs % L] / taps[offs % L]
        assert np.allclose(ratio, ratio[0])
        assert dual.role is WindowRole.SYNTHESIS_DUAL

    @pytest.mark.parametrize("redundancy", [2, 8])
    def test_gaussian_round_trip_many_signals(self, redundancy):
        L = 1024
        M = 32 * redundancy
        grid = StftGrid(32, M, L)
        g = matched_gaussian(grid)
        gd = canonical_dual(g, grid)
        for seed in range(10):
            s = random_signal(L, seed=100 + seed)
            rec = istft(stft(s, g, grid), gd)
            assert np.linalg.norm(rec.samples - s.samples) \
                <= 1e-10 * np.linalg.norm(s.samples)

    def test_hann_dual_round_trip(self):
        L = 1024
        grid = StftGrid(64, 128, L)  # D = 2
        win = named_window(WindowFamily.HANN, 192, L)
        dual = canonical_dual(win, grid)
        for seed in range(10):
            s = random_signal(L, seed=200 + seed)
            rec = istft(stft(s, win, grid), dual)
            assert np.linalg.norm(rec.samples - s.samples) \
                <= 1e-10 * np.linalg.norm(s.samples)

    def test_not_a_frame_raises(self):
        # Hann of support M with hop M leaves periodic zeros in the
        # frame diagonal
        L, M = 256, 16
        grid = StftGrid(M, M, L)
        win = named_window(WindowFamily.HANN, M, L)
        with pytest.raises(NotAFrameError):
            canonical_dual(win, grid)

    def test_even_window_critical_sampling_rejected(self):
        # even-symmetric windows are singular at D=1 on even lattices
        L = 256
        grid = StftGrid(16, 16, L)
        g = matched_gaussian(grid)
        with pytest.raises(NotAFrameError):
            canonical_dual(g, grid)

    def test_dual_is_cached(self, small_grid):
        g = matched_gaussian(small_grid)
        assert canonical_dual(g, small_grid) is canonical_dual(g, small_grid)


class TestProjection:
    def test_consistent_input_unchanged(self, small_grid):
        g = matched_gaussian(small_grid)
        gd = canonical_dual(g, small_grid)
        C = stft(random_signal(small_grid.L, seed=21), g, small_grid)
        P = project_consistent(C, g, gd)
        assert rel_err(P.coeffs, C.coeffs) < 1e-10

    def test_zero_phase_input_moves(self, small_grid):
        g = matched_gaussian(small_grid)
        gd = canonical_dual(g, small_grid)
        C = stft(random_signal(small_grid.L, seed=22), g, small_grid)
        zero_phase = ComplexStft(small_grid,
                                 np.abs(C.coeffs).astype(complex), RATE)
        P = project_consistent(zero_phase, g, gd)
        change = np.linalg.norm(P.coeffs - zero_phase.coeffs)
        assert change > 1e-3 * np.linalg.norm(zero_phase.coeffs)

    def test_zero_input_stays_zero(self, small_grid):
        g = matched_gaussian(small_grid)
        gd = canonical_dual(g, small_grid)
        C = ComplexStft(small_grid,
                        np.zeros((small_grid.half_channels,
                                  small_grid.frames), complex), RATE)
        P = project_consistent(C, g, gd)
        assert np.all(P.coeffs == 0)

    def test_idempotent(self, small_grid):
        g = matched_gaussian(small_grid)
        gd = canonical_dual(g, small_grid)
        X = random_half_spectrum(small_grid, seed=23)
        P1 = project_consistent(X, g, gd)
        P2 = project_consistent(P1, g, gd)
        assert np.linalg.norm(P2.coeffs - P1.coeffs) \
            <= 1e-9 * np.linalg.norm(P1.coeffs)


class TestInvariants:
    @pytest.mark.parametrize("family", [WindowFamily.GAUSSIAN,
                                        WindowFamily.HANN,
                                        WindowFamily.BLACKMAN,
                                        WindowFamily.BARTLETT])
    @pytest.mark.parametrize("redundancy", [2, 4, 16])
    def test_round_trip_families_and_redundancies(self, family, redundancy):
        from stftpr import window_for_lambda, LambdaSpec
        L = 1024
        a = 16
        grid = StftGrid(a, a * redundancy, L)
        lam = grid_matched_lambda(grid, RATE)
        if family is WindowFamily.GAUSSIAN:
            win = periodized_gaussian(lam, L, RATE)
        else:
            win = window_for_lambda(family, lam, RATE, L)
        dual = canonical_dual(win, grid)
        for seed in range(3):
            s = random_signal(L, seed=300 + seed)
            rec = istft(stft(s, win, grid), dual)
            assert np.linalg.norm(rec.samples - s.samples) \
                <= 1e-10 * np.linalg.norm(s.samples)

    def test_half_spectrum_expansion_lossless(self, small_grid):
        g = matched_gaussian(small_grid)
        C = stft(random_signal(small_grid.L, seed=31), g, small_grid)
        full = expand_full_spectrum(C)
        # conjugate symmetric by construction
        M = small_grid.M
        for m in range(1, M):
            assert np.allclose(full[M - m], np.conj(full[m]))
        assert np.array_equal(full[:small_grid.half_channels], C.coeffs)

    def test_parseval_for_tight_window(self, small_grid):
        # painless window made tight through the canonical-dual machinery:
        # for g >= 0 painless, sqrt(g * dual) has a constant frame diagonal
        win = named_window(WindowFamily.HANN, 48, small_grid.L)
        dual = canonical_dual(win, small_grid)
        tight = WindowVec(np.sqrt(win.taps * dual.taps),
                          family=WindowFamily.CUSTOM)
        ratios = []
        for seed in range(10):
            s = random_signal(small_grid.L, seed=400 + seed)
            C = stft(s, tight, small_grid)
            mags = magnitude_of(C).mags
            w = np.full(small_grid.half_channels, 2.0)
            w[0] = 1.0
            if small_grid.M % 2 == 0:
                w[small_grid.M // 2] = 1.0
            energy = float(np.sum(w[:, None] * mags ** 2))
            ratios.append(energy / float(s.samples @ s.samples))
        ratios = np.array(ratios)
        assert np.all(np.abs(ratios - ratios[0]) <= 1e-9 * ratios[0])
