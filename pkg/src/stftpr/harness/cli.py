"""Command-line interface for the phase-retrieval benchmark harness.

Subcommands: synth, stft, reconstruct, sweep, noise-exp, filter-exp,
optimize. Report paths write a delimited table (CSV or JSON), a JSON
sidecar with the resolved run specification, and matplotlib figures next
to the table. Exit codes: 0 success, 1 usage error, 2 data error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

import numpy as np

from ..gabor import (NotAFrameError, SignalBuffer, WindowFamily,
                     canonical_dual, magnitude_of, stft)
from ..metrics import snr_ms, time_snr
from ..retrieval import FglaConfig, PghiConfig, fgla, pghi, spsi, \
    zero_phase_baseline
from ..windows import LambdaSpec, window_for_lambda
from . import report
from .signals import SignalKind, synth_signal
from .sweep import (AlgoSpec, FilterSpec, SweepSpec, derive_seed,
                    optimize_parameters, parse_algo, realize_grid,
                    run_filter_experiment, run_noise_sensitivity, run_sweep)
from .wavio import DataError, ingest_wav, write_wav

__all__ = ["main", "entry"]

_EXIT_OK = 0
_EXIT_USAGE = 1
_EXIT_DATA = 2
_EXIT_NUMERICAL = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parse_float_list(text: str) -> tuple[float, ...]:
    """Comma list ("0.5,5,50") or log range ("log:1e-2:1e3:9")."""
    text = text.strip()
    if text.startswith("log:"):
        parts = text.split(":")
        if len(parts) != 4:
            raise UsageError(f"bad log range {text!r}; use log:LO:HI:COUNT")
        lo, hi, count = float(parts[1]), float(parts[2]), int(parts[3])
        return tuple(float(v) for v in np.geomspace(lo, hi, count))
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise UsageError(f"bad numeric list {text!r}") from exc


def _parse_int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise UsageError(f"bad integer list {text!r}") from exc


def _parse_windows(text: str) -> tuple[WindowFamily, ...]:
    out = []
    for token in text.split(","):
        token = token.strip().lower()
        if not token:
            continue
        try:
            out.append(WindowFamily(token))
        except ValueError as exc:
            raise UsageError(f"unknown window family {token!r}") from exc
    if not out:
        raise UsageError("no window families given")
    return tuple(out)


def _parse_trim(text: str) -> bool:
    if text not in ("on", "off"):
        raise UsageError("--trim expects on or off")
    return text == "on"


def _load_config(path: str) -> dict:
    """Plain key = value lines mirroring the long flag names."""
    values: dict[str, str] = {}
    try:
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise UsageError(
                        f"{path}:{lineno}: expected 'key = value'")
                key, _, val = line.partition("=")
                values[key.strip().replace("-", "_")] = val.strip()
    except OSError as exc:
        raise UsageError(f"cannot read config {path!r}: {exc}") from exc
    return values


def _add_common(parser):
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default="stftpr_out",
                        help="output directory")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--length", type=int, default=122880,
                        help="working signal length L")
    parser.add_argument("--rate", type=int, default=22050,
                        help="sampling rate in Hz")
    parser.add_argument("--trim", default="on",
                        help="trim M samples per end before metrics: on|off")
    parser.add_argument("--no-plots", action="store_true")
    parser.add_argument("--no-timing", action="store_true",
                        help="record wall_time_s as 0 for byte-stable output")
    parser.add_argument("--config", default=None,
                        help="key = value file mirroring the flags")


def build_parser() -> _Parser:
    parser = _Parser(prog="stftpr",
                     description="STFT phase retrieval benchmark harness")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write synthetic fixture WAVs")
    p.add_argument("--kind", default="all",
                   help="harmonic_tone|sine_bursts|pulse_train|speech_like|all")
    p.add_argument("--count", type=int, default=4)
    _add_common(p)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("stft", help="analyse one WAV and dump coefficients")
    p.add_argument("input")
    p.add_argument("--lambda", dest="lambdas", default="5.94",
                   help="time-frequency ratio")
    p.add_argument("--redundancy", default="8")
    p.add_argument("--window", default="gaussian")
    _add_common(p)
    p.set_defaults(func=_cmd_stft)

    p = sub.add_parser("reconstruct",
                       help="phase-retrieve one WAV with one algorithm")
    p.add_argument("input")
    p.add_argument("--algo", default="pghi",
                   help="pghi|fgla[:N]|spsi|zero|noise:SIGMA")
    p.add_argument("--lambda", dest="lambdas", default="5.94")
    p.add_argument("--redundancy", default="8")
    p.add_argument("--window", default="gaussian")
    p.add_argument("--iterations", type=int, default=100)
    _add_common(p)
    p.set_defaults(func=_cmd_reconstruct)

    p = sub.add_parser("sweep", help="full parameter sweep")
    p.add_argument("--algo", default="pghi,fgla,spsi",
                   help="comma list: pghi,fgla[:N],spsi,zero,noise:SIGMA")
    p.add_argument("--lambda", dest="lambdas", default="log:1e-2:1e3:9")
    p.add_argument("--redundancy", default="2,8,32")
    p.add_argument("--window", default="gaussian")
    p.add_argument("--corpus", default="speech_like:8",
                   help="directory of WAVs or synthetic kind:count")
    p.add_argument("--iterations", type=int, default=100,
                   help="default FGLA iteration count")
    p.add_argument("--fgla-timing-preset", action="store_true",
                   help="double FGLA iterations per halved redundancy "
                        "(timing study schedule)")
    _add_common(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("noise-exp", help="phase-noise sensitivity experiment")
    p.add_argument("--sigma", default="0.1,0.5,1.0")
    p.add_argument("--lambda", dest="lambdas", default="log:1e-1:1e2:4")
    p.add_argument("--redundancy", default="2,8,32")
    p.add_argument("--window", default="gaussian")
    p.add_argument("--corpus", default="speech_like:8")
    _add_common(p)
    p.set_defaults(func=_cmd_noise)

    p = sub.add_parser("filter-exp",
                       help="inconsistent-spectrogram filter experiment")
    p.add_argument("--lambda", dest="lambdas", default="0.5,5,50")
    p.add_argument("--redundancy", default="8")
    p.add_argument("--window", default="gaussian")
    p.add_argument("--corpus", default="speech_like:8")
    p.add_argument("--iterations", type=int, default=100)
    p.add_argument("--filter-periods", type=float, default=5.0)
    p.add_argument("--filter-floor", type=float, default=0.1)
    p.add_argument("--identity-filter", action="store_true")
    _add_common(p)
    p.set_defaults(func=_cmd_filter)

    p = sub.add_parser("optimize", help="optimal STFT parameter search")
    p.add_argument("--algo", default="pghi")
    p.add_argument("--lambda-range", default="1e-2:1e3",
                   help="LO:HI bounds of the search grid")
    p.add_argument("--redundancy", default="2,4,8,16,32")
    p.add_argument("--window", default="gaussian")
    p.add_argument("--corpus", default="speech_like:8")
    p.add_argument("--snr-threshold-db", type=float, default=15.0)
    p.add_argument("--time-budget", type=float, default=None,
                   help="seconds before the search stops raising D")
    p.add_argument("--iterations", type=int, default=100)
    _add_common(p)
    p.set_defaults(func=_cmd_optimize)

    return parser


def _spec_dict(spec) -> dict:
    return dataclasses.asdict(spec)


def _cmd_synth(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    kinds = ([k for k in SignalKind] if args.kind == "all"
             else [SignalKind(args.kind)])
    written = []
    for kind in kinds:
        for i in range(args.count):
            sig = synth_signal(kind, None, args.length, args.rate,
                               derive_seed(args.seed, "corpus", kind.value, i))
            path = os.path.join(args.out, f"{kind.value}_{i:02d}.wav")
            write_wav(path, sig, encoding="float32")
            written.append(path)
    print(f"wrote {len(written)} fixture files to {args.out}")
    return _EXIT_OK


def _single_grid(args):
    lam = _parse_float_list(args.lambdas)[0]
    D = _parse_int_list(args.redundancy)[0]
    family = _parse_windows(args.window)[0]
    grid, lam_real = realize_grid(lam, D, args.length, args.rate)
    window = window_for_lambda(family, LambdaSpec(lam_real), args.rate,
                               grid.L)
    return grid, lam_real, window


def _cmd_stft(args) -> int:
    sig = ingest_wav(args.input, args.rate, args.length)
    grid, lam_real, window = _single_grid(args)
    coeffs = stft(sig, window, grid)
    mags = np.abs(coeffs.coeffs)
    os.makedirs(args.out, exist_ok=True)
    stem = os.path.splitext(os.path.basename(args.input))[0]
    npz_path = os.path.join(args.out, f"{stem}_stft.npz")
    np.savez(npz_path, magnitude=mags, phase=np.angle(coeffs.coeffs),
             a=grid.a, M=grid.M, L=grid.L, sample_rate=args.rate,
             lambda_realized=lam_real)
    print(f"a={grid.a} M={grid.M} L={grid.L} N={grid.frames} "
          f"D={grid.redundancy:g} lambda={lam_real:.4f}")
    print(f"coefficients: {npz_path}")
    if not args.no_plots:
        png = os.path.join(args.out, f"{stem}_spectrogram.png")
        report.render_spectrogram(mags, args.rate, grid.a, png, title=stem)
        print(f"figure: {png}")
    return _EXIT_OK


def _cmd_reconstruct(args) -> int:
    algo = parse_algo(args.algo, default_iterations=args.iterations)
    sig = ingest_wav(args.input, args.rate, args.length)
    grid, lam_real, window = _single_grid(args)
    dual = canonical_dual(window, grid)
    coeffs = stft(sig, window, grid)
    mags = magnitude_of(coeffs)
    seed = derive_seed(args.seed, algo.label, args.input)
    if algo.kind == "pghi":
        pr = pghi(mags, grid, lam_real, PghiConfig(rng_seed=seed), window)
    elif algo.kind == "fgla":
        pr = fgla(mags, grid, window, dual,
                  FglaConfig(iterations=algo.iterations))
    elif algo.kind == "spsi":
        pr = spsi(mags, grid, window)
    elif algo.kind == "zero_phase":
        pr = zero_phase_baseline(mags, grid, window)
    else:
        raise UsageError("reconstruct expects pghi, fgla, spsi or zero")
    rec = pr.reconstructed
    os.makedirs(args.out, exist_ok=True)
    stem = os.path.splitext(os.path.basename(args.input))[0]
    out_path = os.path.join(args.out, f"{stem}_{algo.label}.wav")
    write_wav(out_path, rec, encoding="float32")
    trim = grid.M if _parse_trim(args.trim) else 0
    if trim and sig.length - 2 * trim > 0:
        o = SignalBuffer(sig.samples[trim:sig.length - trim],
                         sig.sample_rate)
        r = SignalBuffer(rec.samples[trim:rec.length - trim],
                         rec.sample_rate)
    else:
        o, r = sig, rec
    print(f"algorithm={algo.label} lambda={lam_real:.4f} D={grid.redundancy:g} "
          f"a={grid.a} M={grid.M}")
    print(f"snr_ms={report.format_value(snr_ms(o, r))} dB  "
          f"time_snr={report.format_value(time_snr(o, r))} dB  "
          f"wall={pr.wall_time:.3f} s")
    print(f"wrote {out_path}")
    return _EXIT_OK


def _sweep_spec_from_args(args, algos) -> SweepSpec:
    return SweepSpec(algorithms=algos,
                     lambdas=_parse_float_list(args.lambdas),
                     redundancies=_parse_int_list(args.redundancy),
                     window_families=_parse_windows(args.window),
                     corpus=args.corpus, seed=args.seed,
                     signal_length=args.length, sample_rate=args.rate,
                     trim=_parse_trim(args.trim),
                     record_timing=not args.no_timing,
                     threads=args.threads)


def _cmd_sweep(args) -> int:
    algos = tuple(parse_algo(t, args.iterations)
                  for t in args.algo.split(",") if t.strip())
    spec = _sweep_spec_from_args(args, algos)
    if getattr(args, "fgla_timing_preset", False):
        spec.fgla_timing_preset = True
    rows = run_sweep(spec)
    paths = report.emit_rows(rows, _spec_dict(spec), args.out, "sweep",
                             fmt=args.format, plots=not args.no_plots)
    errors = sum(1 for r in rows if r.error)
    print(f"{len(rows)} rows ({errors} errors) -> {paths['table']}")
    return _EXIT_OK


def _cmd_noise(args) -> int:
    sigmas = _parse_float_list(args.sigma)
    rows = run_noise_sensitivity(
        sigmas, _parse_float_list(args.lambdas),
        _parse_int_list(args.redundancy), args.corpus, seed=args.seed,
        signal_length=args.length, sample_rate=args.rate,
        window_families=_parse_windows(args.window),
        trim=_parse_trim(args.trim), record_timing=not args.no_timing,
        threads=args.threads)
    spec = {"sigmas": list(sigmas), "lambdas": list(_parse_float_list(args.lambdas)),
            "redundancies": list(_parse_int_list(args.redundancy)),
            "corpus": args.corpus, "seed": args.seed,
            "signal_length": args.length, "sample_rate": args.rate}
    paths = report.emit_rows(rows, spec, args.out, "noise_exp",
                             fmt=args.format, plots=not args.no_plots,
                             renderer=report.render_noise_figure)
    print(f"{len(rows)} rows -> {paths['table']}")
    return _EXIT_OK


def _cmd_filter(args) -> int:
    algos = (AlgoSpec("fgla", iterations=args.iterations),)
    spec = _sweep_spec_from_args(args, algos)
    filt = FilterSpec(periods=args.filter_periods, floor=args.filter_floor,
                      identity=args.identity_filter)
    rows = run_filter_experiment(spec, filt)
    extra = {"filter": dataclasses.asdict(filt)}
    paths = report.emit_rows(rows, _spec_dict(spec), args.out, "filter_exp",
                             fmt=args.format, plots=not args.no_plots,
                             renderer=report.render_filter_figure,
                             extra=extra)
    print(f"{len(rows)} rows -> {paths['table']}")
    return _EXIT_OK


def _cmd_optimize(args) -> int:
    algo = parse_algo(args.algo, args.iterations)
    lo, _, hi = args.lambda_range.partition(":")
    if not hi:
        raise UsageError("--lambda-range expects LO:HI")
    family = _parse_windows(args.window)[0]
    result = optimize_parameters(
        algo, args.corpus, lambda_range=(float(lo), float(hi)),
        d_range=_parse_int_list(args.redundancy),
        snr_threshold_db=args.snr_threshold_db,
        time_budget_s=args.time_budget, seed=args.seed,
        signal_length=args.length, sample_rate=args.rate,
        window_family=family, record_timing=not args.no_timing)
    os.makedirs(args.out, exist_ok=True)
    table = os.path.join(args.out, "optimize.csv")
    report.write_optimize_table(result, table)
    report.write_rows_csv(result.evaluated,
                          os.path.join(args.out, "optimize_cells.csv"))
    report.write_spec_sidecar(
        {"algorithm": algo.label, "lambda_range": [float(lo), float(hi)],
         "redundancies": list(_parse_int_list(args.redundancy)),
         "threshold_db": args.snr_threshold_db, "corpus": args.corpus,
         "seed": args.seed, "grid_lambdas": list(result.grid_lambdas)},
        os.path.join(args.out, "optimize.spec.json"))
    if not args.no_plots:
        report.render_optimize_figure(
            result, os.path.join(args.out, "optimize.png"))
    for row in result.rows:
        mark = " <- selected" if row.selected else ""
        if row.below_threshold:
            print(f"D={row.redundancy}: below threshold "
                  f"(best {row.best_snr_db:.2f} dB at "
                  f"lambda={row.best_lambda:g}){mark}")
        else:
            print(f"D={row.redundancy}: lambda {row.lambda_lo:.4g} .. "
                  f"{row.lambda_hi:.4g} (M {row.m_lo} .. {row.m_hi}), "
                  f"best {row.best_snr_db:.2f} dB{mark}")
    print(f"wrote {table}")
    return _EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        # apply config-file defaults before parsing flags
        if "--config" in argv:
            cfg_path = argv[argv.index("--config") + 1]
            config = _load_config(cfg_path)
            known = {a.dest for a in parser._actions}
            for p in parser._subparsers._group_actions[0].choices.values():
                known |= {a.dest for a in p._actions}
            bad = set(config) - known
            if bad:
                raise UsageError(f"unknown config keys: {sorted(bad)}")
            for p in parser._subparsers._group_actions[0].choices.values():
                dests = {a.dest: a for a in p._actions}
                usable = {}
                for key, val in config.items():
                    if key in dests:
                        action = dests[key]
                        if isinstance(action, (argparse._StoreTrueAction,)):
                            usable[key] = val.lower() in ("1", "true", "on",
                                                          "yes")
                        elif action.type is not None:
                            usable[key] = action.type(val)
                        else:
                            usable[key] = val
                p.set_defaults(**usable)
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return _EXIT_USAGE
    except (DataError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return _EXIT_DATA
    except (NotAFrameError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return _EXIT_NUMERICAL


def entry():  # console-script hook
    sys.exit(main())


if __name__ == "__main__":
    entry()
