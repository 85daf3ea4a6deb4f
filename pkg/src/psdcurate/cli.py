"""Command-line entry point: ``psdcurate {score,filter,eval,synth,spectrum}``.

Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.
"""
from __future__ import annotations

import argparse
import logging
import sys
import time
from collections import Counter
from pathlib import Path

from . import __version__
from .curation import filter_table, materialize
from .dataset_io import (
    load_dataset,
    read_score_table,
    write_jsonl,
    write_manifest,
    write_score_table,
    write_spectrum_csv,
)
from .evaluation import (
    ORACLE,
    RANDOM_EXPECTATION,
    RANDOM_SAMPLE,
    emit_curves,
    remaining_quality_curve,
    summary_row,
    summary_text,
)
from .models import METRICS, ValidationError
from .spectral import SpectralConfig, score_dataset, score_trajectory
from .synthgen import SynthConfig, generate_dataset

log = logging.getLogger("psdcurate")

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _rho(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0 <= value < 1:
        raise argparse.ArgumentTypeError(f"rho must lie in [0, 1), got {value}")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _metric(text: str) -> str:
    name = text.replace("-", "_")
    if name not in METRICS:
        raise argparse.ArgumentTypeError(f"metric must be one of psd-w, path-length, mean-jerk; got {text!r}")
    return name


def _add_spectral_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--detrend", choices=["none", "mean", "linear"], default="none")
    p.add_argument("--exclude-dc", action="store_true", help="zero the k=0 bin before summing")
    p.add_argument("--length-normalize", choices=["none", "per-sample"], default="none")
    p.add_argument("--transform", choices=["fft", "direct"], default="fft",
                   help="fft (default) or the O(T^2) direct sum")


def _spectral_config(args) -> SpectralConfig:
    return SpectralConfig(
        detrend=args.detrend,
        include_dc=not args.exclude_dc,
        length_normalize=args.length_normalize.replace("-", "_"),
        transform=args.transform,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="psdcurate", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="score every demonstration of a dataset")
    p.add_argument("--input", required=True, type=Path)
    p.add_argument("--format", choices=["jsonl", "csv-dir"], default="jsonl")
    _add_spectral_flags(p)
    p.add_argument("--output", required=True, type=Path)
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("filter", help="discard the worst fraction rho of a scored dataset")
    p.add_argument("--scores", required=True, type=Path)
    p.add_argument("--metric", type=_metric, default="psd_w")
    p.add_argument("--rho", required=True, type=_rho)
    p.add_argument("--manifest", required=True, type=Path)
    p.add_argument("--dataset", type=Path)
    p.add_argument("--format", choices=["jsonl", "csv-dir"], default="jsonl", help="format of --dataset")
    p.add_argument("--out-dataset", type=Path)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("eval", help="remaining-quality curves and a summary row")
    p.add_argument("--scores", required=True, type=Path)
    p.add_argument("--curves", required=True, type=Path)
    p.add_argument("--summary-rho", type=_rho, default=0.5)
    p.add_argument("--sample-random", type=int, metavar="SEED")
    p.add_argument("--dataset-name", help="dataset column of the summary (default: scores file stem)")
    p.add_argument("--task", default="-")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="generate a labeled synthetic dataset")
    p.add_argument("--n-per-label", type=int, default=100)
    p.add_argument("--base-length", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("spectrum", help="export one demonstration's power spectrum")
    p.add_argument("--input", required=True, type=Path)
    p.add_argument("--format", choices=["jsonl", "csv-dir"], default="jsonl")
    p.add_argument("--id", required=True, dest="traj_id")
    _add_spectral_flags(p)
    p.add_argument("--output", required=True, type=Path)
    p.set_defaults(func=cmd_spectrum)
    return parser


def _load(path: Path, fmt: str):
    try:
        return load_dataset(path, fmt)
    except FileNotFoundError as exc:
        raise UsageError(str(exc)) from None


def _load_scores(path: Path):
    try:
        return read_score_table(path)
    except FileNotFoundError as exc:
        raise UsageError(str(exc)) from None


def cmd_score(args) -> int:
    config = _spectral_config(args)
    ds = _load(args.input, args.format)
    t0 = time.perf_counter()
    table = score_dataset(ds, config, jobs=args.jobs)
    elapsed = time.perf_counter() - t0
    write_score_table(table, args.output, config=config)
    print(f"scored N={len(table)} in {elapsed:.3f}s (jobs={args.jobs}) fingerprint={table.config_fingerprint}",
          file=sys.stderr)
    return EXIT_OK


def cmd_filter(args) -> int:
    if (args.dataset is None) != (args.out_dataset is None):
        raise UsageError("--dataset and --out-dataset must be given together")
    table = _load_scores(args.scores)
    manifest = filter_table(table, args.metric, args.rho)
    ds = _load(args.dataset, args.format) if args.dataset is not None else None
    write_manifest(manifest, args.manifest, scored_ids=table.ids)
    if ds is not None:
        materialize(ds, manifest, args.out_dataset)
    print(f"retained {len(manifest.retained)} of {len(table)} (discarded {len(manifest.discarded)}, "
          f"threshold {manifest.threshold_W:.6g})", file=sys.stderr)
    return EXIT_OK


def cmd_eval(args) -> int:
    table = _load_scores(args.scores)
    table.labels()
    policies = [*METRICS, ORACLE, RANDOM_EXPECTATION]
    curves = [remaining_quality_curve(table, p) for p in policies]
    if args.sample_random is not None:
        curves.append(remaining_quality_curve(table, RANDOM_SAMPLE, seed=args.sample_random))
    emit_curves(curves, args.curves)
    rows = [summary_row(table, args.summary_rho, dataset=args.dataset_name or args.scores.stem, task=args.task)]
    if args.sample_random is not None:
        sampled = summary_row(table, args.summary_rho, dataset=rows[0]["dataset"], task=args.task,
                              seed=args.sample_random)
        sampled["task"] = f"{args.task} (random seed {args.sample_random})"
        rows.append(sampled)
    sys.stdout.write(summary_text(rows))
    return EXIT_OK


def cmd_synth(args) -> int:
    try:
        config = SynthConfig(n_per_label=args.n_per_label, base_length=args.base_length, seed=args.seed)
    except ValidationError as exc:
        raise UsageError(str(exc)) from None
    ds = generate_dataset(config, name=args.out.stem)
    write_jsonl(ds, args.out)
    hist = Counter(t.label for t in ds)
    print("labels: " + ", ".join(f"{k}:{hist[k]}" for k in sorted(hist)), file=sys.stderr)
    return EXIT_OK


def cmd_spectrum(args) -> int:
    ds = _load(args.input, args.format)
    try:
        traj = ds.by_id(args.traj_id)
    except KeyError:
        raise UsageError(f"no trajectory with id {args.traj_id!r} in {args.input}") from None
    result = score_trajectory(traj, _spectral_config(args))
    write_spectrum_csv(result, args.output)
    print(f"{traj.id}: T={result.T} W={result.W:.17g}", file=sys.stderr)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ValidationError) as exc:
        print(f"psdcurate {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        log.debug("unhandled failure", exc_info=True)
        print(f"psdcurate {args.command}: failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
