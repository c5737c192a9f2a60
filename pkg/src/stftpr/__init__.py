"""STFT phase retrieval toolkit.

Invertible discrete Gabor transforms with canonical dual windows, three
phase-retrieval algorithms (heap-integrated phase gradients, fast
Griffin-Lim, single-pass spectrogram inversion), spectrogram SNR
evaluation, and a benchmark harness for sweeping transform parameters.
"""

from .gabor import (ComplexStft, MagnitudeStft, NotAFrameError, SignalBuffer,
                    StftGrid, WindowFamily, WindowRole, WindowVec,
                    canonical_dual, expand_full_spectrum, istft,
                    magnitude_of, project_consistent, stft)
from .metrics import MetricReport, SnrMsConfig, projection_error, snr_ms, \
    time_snr
from .retrieval import (BelowTolerancePhase, FglaConfig, PghiConfig,
                        PrResult, distort_phase, fgla, pghi, spsi,
                        zero_phase_baseline)
from .windows import (LambdaSource, LambdaSpec, fit_lambda,
                      grid_matched_lambda, named_window, periodized_gaussian,
                      window_for_lambda)

__version__ = "0.1.0"

__all__ = [
    "BelowTolerancePhase",
    "ComplexStft",
    "FglaConfig",
    "LambdaSource",
    "LambdaSpec",
    "MagnitudeStft",
    "MetricReport",
    "NotAFrameError",
    "PghiConfig",
    "PrResult",
    "SignalBuffer",
    "SnrMsConfig",
    "StftGrid",
    "WindowFamily",
    "WindowRole",
    "WindowVec",
    "canonical_dual",
    "distort_phase",
    "expand_full_spectrum",
    "fgla",
    "fit_lambda",
    "grid_matched_lambda",
    "istft",
    "magnitude_of",
    "named_window",
    "periodized_gaussian",
    "pghi",
    "project_consistent",
    "projection_error",
    "snr_ms",
    "spsi",
    "stft",
    "time_snr",
    "window_for_lambda",
    "zero_phase_baseline",
]
