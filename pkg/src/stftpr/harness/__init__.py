"""Benchmark harness: corpus handling, sweeps, experiments, CLI."""

from .signals import SignalKind, synth_signal
from .sweep import (AlgoSpec, FilterSpec, OptimizeResult, OptimizeRow,
                    SweepResult, SweepSpec, fgla_timing_iterations,
                    lambda_grid, load_corpus, optimize_parameters,
                    parse_algo, realize_grid, run_filter_experiment,
                    run_noise_sensitivity, run_sweep)
from .wavio import DataError, ingest_wav, read_wav, resample_sinc, write_wav

__all__ = [
    "AlgoSpec",
    "DataError",
    "FilterSpec",
    "OptimizeResult",
    "OptimizeRow",
    "SignalKind",
    "fgla_timing_iterations",
    "SweepResult",
    "SweepSpec",
    "ingest_wav",
    "lambda_grid",
    "load_corpus",
    "optimize_parameters",
    "parse_algo",
    "read_wav",
    "realize_grid",
    "resample_sinc",
    "run_filter_experiment",
    "run_noise_sensitivity",
    "run_sweep",
    "synth_signal",
    "write_wav",
]
