"""Command-line front end: signal generation, reconstruction, calibration sweeps.

Exit codes: 0 success, 2 configuration error, 3 empty support,
4 linear-algebra failure (underdetermined or singular system).
"""

from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from .hw_datapath import reconstruct_hardware, write_trace_csv
from .hw_primitives import log_lut_entries
from .montecarlo import (
    Metrics,
    compute_metrics,
    run_threshold_xcheck,
    run_variance_calibration,
)
from .recon_core import (
    AmpMode,
    EmptySupportError,
    SingularSystemError,
    ThresholdConfig,
    UnderdeterminedError,
    reconstruct,
    write_detection_csv,
    write_spectrum_csv,
)
from .signal_model import (
    SparseSpec,
    random_pattern,
    read_signal_csv,
    sample,
    synthesize,
    write_signal_csv,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_EMPTY_SUPPORT = 3
EXIT_LINALG = 4


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _parse_tones(text: str, n: int, seed: int | None) -> list[tuple[float, int]]:
    """Parse the tone grammar: 'A@k[,A@k...]' or 'random:K:lo:hi'."""
    text = text.strip()
    if text.startswith("random:"):
        parts = text.split(":")
        if len(parts) != 4:
            raise ValueError(f"expected random:K:lo:hi, got '{text}'")
        k, lo, hi = int(parts[1]), float(parts[2]), float(parts[3])
        if seed is None:
            raise ValueError("random tones require --seed")
        rng = np.random.default_rng(int(seed))
        bins = rng.permutation(n)[:k]
        amps = rng.uniform(lo, hi, size=k)
        return [(float(a), int(b)) for a, b in zip(amps, bins)]
    tones = []
    for item in text.split(","):
        amp_text, _, bin_text = item.partition("@")
        if not bin_text:
            raise ValueError(f"expected A@k, got '{item}'")
        tones.append((float(amp_text), int(bin_text)))
    return tones


def _spec_from_args(args) -> SparseSpec:
    tones_text = args.tones if args.tones else f"random:{args.k}:1:1"
    return SparseSpec(n=args.n, components=_parse_tones(tones_text, args.n, args.seed))


def _write_metrics_csv(path, metrics: Metrics) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["support_exact", "precision", "recall", "rel_mse_time",
             "threshold", "variance", "n_detected"]
        )
        writer.writerow(
            [str(metrics.support_exact).lower(), _fmt(metrics.precision),
             _fmt(metrics.recall), _fmt(metrics.rel_mse_time),
             _fmt(metrics.threshold), _fmt(metrics.variance), metrics.n_detected]
        )


def cmd_gen(args) -> int:
    spec = _spec_from_args(args)
    write_signal_csv(args.out, synthesize(spec))
    print(f"wrote {args.out}: n={spec.n}, tones={spec.k}")
    return EXIT_OK


def cmd_recon(args) -> int:
    x = read_signal_csv(args.infile)
    n = x.size
    full_dft = np.fft.fft(x)
    peak = float(np.abs(full_dft).max())
    true_support = (
        np.flatnonzero(np.abs(full_dft) > 1e-6 * peak) if peak > 0.0
        else np.zeros(0, dtype=np.int64)
    )
    cfg = ThresholdConfig(p=args.p, variant=args.variant, amp_mode=args.amp_mode)
    # full-signal power equals the sum of squared amplitudes for distinct tones
    ssa = float(np.mean(np.abs(x) ** 2)) if cfg.amp_mode is AmpMode.ORACLE else None
    meas = sample(x, random_pattern(n, args.na, args.seed))
    if args.path == "hardware":
        result, trace = reconstruct_hardware(meas, cfg, ssa)
        write_trace_csv(f"{args.out}.trace.csv", trace)
    else:
        result = reconstruct(meas, cfg, ssa)
    write_spectrum_csv(f"{args.out}.spectrum.csv", result.spectrum)
    write_detection_csv(f"{args.out}.detection.csv", result.detection)
    metrics = compute_metrics(result, x, true_support)
    _write_metrics_csv(f"{args.out}.metrics.csv", metrics)
    print(
        f"support_exact={str(metrics.support_exact).lower()} "
        f"precision={_fmt(metrics.precision)} recall={_fmt(metrics.recall)} "
        f"rel_mse_time={_fmt(metrics.rel_mse_time)} "
        f"threshold={_fmt(metrics.threshold)} variance={_fmt(metrics.variance)} "
        f"n_detected={metrics.n_detected}"
    )
    if result.empty_support:
        print("no bins above threshold", file=sys.stderr)
        return EXIT_EMPTY_SUPPORT
    return EXIT_OK


def cmd_calibrate(args) -> int:
    if args.trials < 100:
        raise ValueError(f"calibration needs at least 100 trials, got {args.trials}")
    spec = _spec_from_args(args)
    cfg = ThresholdConfig(p=args.p, variant=args.variant)
    report = run_variance_calibration(spec, args.na, cfg, args.trials, args.seed)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["kind", "trial", "seed", "threshold", "model_variance",
             "noise_power_mean", "noise_mag_max", "all_below"]
        )
        for row in report.trials:
            writer.writerow(
                ["trial", row.trial, row.seed, _fmt(report.threshold),
                 _fmt(report.model_variance), _fmt(row.noise_power_mean),
                 _fmt(row.noise_mag_max), int(row.all_below)]
            )
        writer.writerow(
            ["summary", len(report.trials), "", _fmt(report.threshold),
             _fmt(report.model_variance), _fmt(report.empirical_variance),
             _fmt(max(r.noise_mag_max for r in report.trials)),
             _fmt(report.p_hat)]
        )
    print(
        f"empirical_variance={_fmt(report.empirical_variance)} "
        f"model_variance={_fmt(report.model_variance)} "
        f"p_hat={_fmt(report.p_hat)} threshold={_fmt(report.threshold)}"
    )
    return EXIT_OK


def cmd_xcheck(args) -> int:
    spec = _spec_from_args(args)
    cfg = ThresholdConfig(p=args.p, variant=args.variant)
    report = run_threshold_xcheck(spec, args.na, cfg, args.trials, args.seed)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["kind", "trial", "seed", "threshold_ref", "threshold_fixed",
             "rel_err", "support_match"]
        )
        for row in report.trials:
            writer.writerow(
                ["trial", row.trial, row.seed, _fmt(row.threshold_ref),
                 _fmt(row.threshold_fixed), _fmt(row.rel_err),
                 int(row.support_match)]
            )
        first = report.trials[0]
        writer.writerow(
            ["summary", len(report.trials), "", _fmt(first.threshold_ref),
             _fmt(first.threshold_fixed), _fmt(report.max_rel_err),
             _fmt(report.agreement_rate)]
        )
    print(
        f"max_rel_err={_fmt(report.max_rel_err)} "
        f"agreement_rate={_fmt(report.agreement_rate)}"
    )
    return EXIT_OK


def cmd_dump_lut(args) -> int:
    entries = log_lut_entries()
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "value"])
        for i, v in enumerate(entries):
            writer.writerow([i, int(v)])
    print(f"wrote {args.out}: {entries.size} entries")
    return EXIT_OK


def _add_tone_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--tones", help="'A@k[,A@k...]' or 'random:K:lo:hi'")
    group.add_argument("--k", type=int, help="K unit tones at random distinct bins")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="csrecon",
        description="Sparse spectral reconstruction from randomly subsampled signals.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="synthesize a multitone signal CSV")
    p_gen.add_argument("--n", type=int, required=True)
    _add_tone_flags(p_gen)
    p_gen.add_argument("--seed", type=int, help="required for random tones")
    p_gen.add_argument("--out", required=True)
    p_gen.set_defaults(func=cmd_gen)

    p_recon = sub.add_parser("recon", help="reconstruct a signal from a random subset")
    p_recon.add_argument("--in", dest="infile", required=True)
    p_recon.add_argument("--na", type=int, required=True, help="available sample count")
    p_recon.add_argument("--p", type=float, required=True, help="detection confidence")
    p_recon.add_argument("--seed", type=int, required=True)
    p_recon.add_argument("--variant", choices=["paper", "ref10"], default="ref10")
    p_recon.add_argument("--amp-mode", choices=["oracle", "estimate"], default="oracle")
    p_recon.add_argument("--path", choices=["reference", "hardware"], default="reference")
    p_recon.add_argument("--out", required=True, help="output file prefix")
    p_recon.set_defaults(func=cmd_recon)

    p_cal = sub.add_parser("calibrate", help="Monte-Carlo noise model calibration")
    p_cal.add_argument("--n", type=int, required=True)
    p_cal.add_argument("--na", type=int, required=True)
    _add_tone_flags(p_cal)
    p_cal.add_argument("--p", type=float, required=True)
    p_cal.add_argument("--variant", choices=["paper", "ref10"], default="ref10")
    p_cal.add_argument("--trials", type=int, required=True)
    p_cal.add_argument("--seed", type=int, required=True)
    p_cal.add_argument("--out", required=True)
    p_cal.set_defaults(func=cmd_calibrate)

    p_x = sub.add_parser("xcheck", help="reference vs fixed-point threshold check")
    p_x.add_argument("--n", type=int, required=True)
    p_x.add_argument("--na", type=int, required=True)
    _add_tone_flags(p_x)
    p_x.add_argument("--p", type=float, required=True)
    p_x.add_argument("--variant", choices=["paper", "ref10"], default="ref10")
    p_x.add_argument("--trials", type=int, required=True)
    p_x.add_argument("--seed", type=int, required=True)
    p_x.add_argument("--out", required=True)
    p_x.set_defaults(func=cmd_xcheck)

    p_lut = sub.add_parser("dump-lut", help="dump the log table as index,value CSV")
    p_lut.add_argument("--out", required=True)
    p_lut.set_defaults(func=cmd_dump_lut)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UnderdeterminedError, SingularSystemError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LINALG
    except EmptySupportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY_SUPPORT
    except (ValueError, OverflowError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
