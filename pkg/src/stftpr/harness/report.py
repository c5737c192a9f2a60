"""Delimited output and figure rendering for harness runs.

CSV rows are written in a canonical sorted order with deterministic float
formatting, so identical runs produce identical bytes. A JSON sidecar
records the full run specification next to every table, and each report
renders matplotlib summaries to PNG files in the same directory.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import os
from enum import Enum

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .sweep import OptimizeResult, SweepResult

__all__ = [
    "CSV_COLUMNS",
    "format_value",
    "write_rows_csv",
    "write_rows_json",
    "write_spec_sidecar",
    "write_optimize_table",
    "render_sweep_figure",
    "render_noise_figure",
    "render_filter_figure",
    "render_optimize_figure",
]

CSV_COLUMNS = ("algorithm", "window", "lambda_requested", "lambda_realized",
               "D", "a", "M", "signal_id", "snr_ms_db", "projection_error",
               "wall_time_s", "iterations", "seed", "error")

_ROW_FIELDS = ("algorithm", "window", "lambda_requested", "lambda_realized",
               "redundancy", "a", "M", "signal_id", "snr_ms_db",
               "projection_error", "wall_time_s", "iterations", "seed",
               "error")


def format_value(value) -> str:
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return f"{value:.10g}"
    return str(value)


def _row_values(row: SweepResult) -> list[str]:
    return [format_value(getattr(row, f)) for f in _ROW_FIELDS]


def write_rows_csv(rows: list[SweepResult], path: str):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow(_row_values(row))


def _jsonable(value):
    if isinstance(value, float) and not math.isfinite(value):
        return format_value(value)
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return _jsonable(dataclasses.asdict(value))
    return value


def write_rows_json(rows: list[SweepResult], path: str):
    payload = [dict(zip(CSV_COLUMNS, (_jsonable(getattr(r, f))
                                      for f in _ROW_FIELDS)))
               for r in rows]
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


def write_spec_sidecar(spec, path: str, extra: dict | None = None):
    payload = _jsonable(spec) if not isinstance(spec, dict) else _jsonable(spec)
    if extra:
        payload = {"spec": payload, **_jsonable(extra)}
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


def write_optimize_table(result: OptimizeResult, path: str):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("algorithm", "D", "lambda_lo", "lambda_hi", "M_lo",
                         "M_hi", "best_lambda", "best_snr_db",
                         "cells_passing", "selected", "below_threshold"))
        for row in result.rows:
            writer.writerow([
                row.algorithm, row.redundancy,
                format_value(row.lambda_lo) if row.lambda_lo is not None else "",
                format_value(row.lambda_hi) if row.lambda_hi is not None else "",
                row.m_lo if row.m_lo is not None else "",
                row.m_hi if row.m_hi is not None else "",
                format_value(row.best_lambda) if row.best_lambda is not None else "",
                format_value(row.best_snr_db),
                row.cells_passing, int(row.selected),
                int(row.below_threshold),
            ])


def _mean_series(rows: list[SweepResult]):
    """Mean SNR over signals per (algorithm, D, realised lambda)."""
    groups: dict = {}
    for row in rows:
        if row.error:
            continue
        key = (row.algorithm, row.redundancy)
        groups.setdefault(key, {}).setdefault(row.lambda_realized, []).append(
            row.snr_ms_db)
    series = {}
    for key, by_lam in groups.items():
        lams = sorted(by_lam)
        means = [np.mean([v for v in by_lam[lam] if math.isfinite(v)] or
                         [math.inf]) for lam in lams]
        series[key] = (lams, means)
    return series


def _finite_for_plot(values, cap=200.0):
    return [min(v, cap) if math.isfinite(v) else cap for v in values]


def render_sweep_figure(rows: list[SweepResult], path: str,
                        title: str = "PR performance"):
    series = _mean_series(rows)
    algos = sorted({a for a, _ in series})
    fig, axes = plt.subplots(1, max(len(algos), 1),
                             figsize=(4.2 * max(len(algos), 1), 3.4),
                             squeeze=False, sharey=True)
    for ax, algo in zip(axes[0], algos):
        for (a, D), (lams, means) in sorted(series.items()):
            if a != algo:
                continue
            ax.semilogx(lams, _finite_for_plot(means), marker="o",
                        label=f"D={D}")
        ax.set_title(algo)
        ax.set_xlabel("time-frequency ratio")
        ax.grid(True, which="both", alpha=0.3)
        ax.legend(fontsize=8)
    axes[0][0].set_ylabel("spectrogram SNR [dB]")
    fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_noise_figure(rows: list[SweepResult], path: str):
    render_sweep_figure(rows, path, title="Phase-noise sensitivity")


def render_filter_figure(rows: list[SweepResult], path: str):
    render_sweep_figure(rows, path, title="Filtered-spectrogram reconstruction")


def render_optimize_figure(result: OptimizeResult, path: str):
    fig, ax = plt.subplots(figsize=(5.2, 3.2))
    ys, labels = [], []
    for i, row in enumerate(result.rows):
        ys.append(i)
        labels.append(f"D={row.redundancy}" + (" *" if row.selected else ""))
        if row.lambda_lo is not None:
            ax.plot([row.lambda_lo, row.lambda_hi], [i, i], lw=6,
                    solid_capstyle="butt",
                    color="tab:green" if row.selected else "tab:blue")
        if row.best_lambda is not None:
            ax.plot([row.best_lambda], [i], "k|", ms=14)
    ax.set_xscale("log")
    ax.set_yticks(ys, labels)
    ax.set_xlabel("time-frequency ratio range above threshold")
    ax.set_title(f"passing ranges (threshold {result.threshold_db:g} dB)")
    ax.grid(True, axis="x", which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_spectrogram(mags: np.ndarray, sample_rate: int, hop: int,
                       path: str, title: str = "spectrogram"):
    fig, ax = plt.subplots(figsize=(6.0, 3.2))
    floor = mags.max() * 1e-6 if mags.max() > 0 else 1.0
    db = 20.0 * np.log10(np.maximum(mags, floor))
    extent = (0.0, mags.shape[1] * hop / sample_rate, 0.0,
              sample_rate / 2.0 / 1000.0)
    im = ax.imshow(db, origin="lower", aspect="auto", extent=extent,
                   cmap="magma")
    fig.colorbar(im, ax=ax, label="dB")
    ax.set_xlabel("time [s]")
    ax.set_ylabel("frequency [kHz]")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def emit_rows(rows, spec, out_dir: str, basename: str, fmt: str = "csv",
              plots: bool = True, renderer=render_sweep_figure,
              extra: dict | None = None) -> dict:
    """Write the table, the spec sidecar, and (optionally) the figure.
    Returns the paths written."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {}
    if fmt == "json":
        table = os.path.join(out_dir, f"{basename}.json")
        write_rows_json(rows, table)
    else:
        table = os.path.join(out_dir, f"{basename}.csv")
        write_rows_csv(rows, table)
    paths["table"] = table
    sidecar = os.path.join(out_dir, f"{basename}.spec.json")
    write_spec_sidecar(spec, sidecar, extra=extra)
    paths["spec"] = sidecar
    if plots:
        fig_path = os.path.join(out_dir, f"{basename}.png")
        renderer(rows, fig_path)
        paths["figure"] = fig_path
    return paths
