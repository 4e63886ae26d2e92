"""Command-line workflow: synthesis, logits, evaluation, calibrator fits, sweeps.

Every subcommand operates on files and is deterministic given its flags and
seed. Exit codes: 0 success, 1 runtime/compute failure, 2 usage or
validation error. CALIBKIT_THREADS caps internal parallelism (sweeps).
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from calibkit import calibrators, metrics, report, synth, tensorio
from calibkit.errors import ComputeError, RangeError, UsageError
from calibkit.head import (
    LogitMatrix,
    PROVENANCE_COSINE,
    cosine_logits,
    predict,
    softmax,
)
from calibkit.tensorio import LabelVector, MatrixFile, TemperatureRecord

COSINE_LOGIT_BOUND = 100.0


def _require_file(path: str, what: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"{what} file not found: {path}")
    return p


def _ensure_parent(path: str | Path) -> Path:
    p = Path(path)
    if p.parent and not p.parent.exists():
        p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _load_logits(path: str) -> LogitMatrix:
    matrix = tensorio.read_matrix(_require_file(path, "logits"))
    provenance = (matrix.meta or {}).get("provenance", "external")
    values = matrix.values.astype(np.float64)
    if provenance == PROVENANCE_COSINE:
        if values.min() < -COSINE_LOGIT_BOUND or values.max() > COSINE_LOGIT_BOUND:
            raise RangeError(
                f"{path}: cosine-head logits must lie in "
                f"[-{COSINE_LOGIT_BOUND:.0f}, {COSINE_LOGIT_BOUND:.0f}]"
            )
    return LogitMatrix(values=values, provenance=provenance)


def _load_labels(path: str) -> LabelVector:
    return tensorio.read_labels(_require_file(path, "labels"))


def _thread_cap() -> int:
    raw = os.environ.get("CALIBKIT_THREADS", "1")
    try:
        cap = int(raw)
    except ValueError as exc:
        raise UsageError(f"CALIBKIT_THREADS must be an integer, got {raw!r}") from exc
    if cap < 1:
        raise UsageError(f"CALIBKIT_THREADS must be >= 1, got {cap}")
    return cap


def _split_indices(n: int, split_fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.Generator(np.random.Philox(key=seed))
    perm = rng.permutation(n)
    k = int(n * split_fraction)
    return perm[:k], perm[k:]


def _subset(logits: LogitMatrix, labels: LabelVector, idx: np.ndarray):
    return (
        LogitMatrix(values=logits.values[idx], provenance=logits.provenance),
        LabelVector(labels=labels.labels[idx], num_classes=labels.num_classes),
    )


def _split_for_fit(args, parser_name: str):
    logits = _load_logits(args.logits)
    labels = _load_labels(args.labels)
    if not 0.0 < args.split <= 1.0:
        raise UsageError(f"--split must be in (0, 1], got {args.split}")
    cal_idx, eval_idx = _split_indices(logits.n, args.split, args.seed)
    if len(cal_idx) == 0:
        raise UsageError(
            f"--split {args.split} leaves an empty calibration half for n={logits.n}"
        )
    if len(eval_idx) == 0:
        print(
            f"warning: {parser_name} with --split {args.split} leaves no evaluation half; "
            "no held-out ECE is reported",
            file=sys.stderr,
        )
    return logits, labels, cal_idx, eval_idx


def _eval_ece(logits: LogitMatrix, labels: LabelVector, num_bins: int) -> float:
    preds = predict(softmax(logits), labels)
    return metrics.ece(metrics.reliability_table(preds, num_bins))


def cmd_synth(args) -> int:
    if args.planted_t <= 0 or not math.isfinite(args.planted_t):
        raise UsageError(f"--planted-t must be > 0, got {args.planted_t}")
    if args.logit_scale <= 0 or not math.isfinite(args.logit_scale):
        raise UsageError(f"--logit-scale must be > 0, got {args.logit_scale}")
    try:
        spec = synth.SynthSpec(
            n=args.n,
            c=args.c,
            planted_temperature=args.planted_t,
            logit_scale=args.logit_scale,
            seed=args.seed,
        )
    except RangeError as exc:
        raise UsageError(str(exc)) from exc
    logits, labels = synth.generate(spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    logits_path = out / "logits.calibmx"
    labels_path = out / "labels.json"
    tensorio.write_matrix(MatrixFile(values=logits.values.astype(np.float32)), logits_path)
    tensorio.write_labels(labels, labels_path)
    print(f"wrote {logits_path}")
    print(f"wrote {labels_path}")
    return 0


def cmd_logits(args) -> int:
    images = tensorio.read_matrix(_require_file(args.images, "image embeddings"))
    classes = tensorio.read_matrix(_require_file(args.classes, "class embeddings"))
    logits = cosine_logits(images.values, classes.values)
    out = _ensure_parent(args.out)
    tensorio.write_matrix(
        MatrixFile(
            values=logits.values.astype(np.float32),
            meta={"provenance": PROVENANCE_COSINE},
        ),
        out,
    )
    print(f"wrote {out} ({logits.n}x{logits.num_classes})")
    return 0


def cmd_eval(args) -> int:
    logits = _load_logits(args.logits)
    labels = _load_labels(args.labels)
    applied = None
    if args.temperature_record:
        record = tensorio.read_temperature_record(
            _require_file(args.temperature_record, "temperature record")
        )
        logits = calibrators.apply_temperature(logits, record.temperature)
        applied = record.temperature
    eval_report = metrics.evaluate(softmax(logits), labels, args.num_bins)
    prefix = str(args.out_prefix)
    report_path = _ensure_parent(prefix + "report.json")
    tensorio._write_json(eval_report.to_dict(), report_path)
    report.render_reliability_svg(
        eval_report, _ensure_parent(prefix + "reliability.svg"), title=args.title
    )
    report.render_histogram_svg(
        eval_report, _ensure_parent(prefix + "histogram.svg"), title=args.title
    )
    if applied is not None:
        print(f"temperature_applied = {applied:.6f}")
    print(f"n = {eval_report.n}")
    print(f"accuracy = {eval_report.accuracy:.6f}")
    print(f"ece = {eval_report.ece:.6f}")
    print(f"nll = {eval_report.nll:.6f}")
    return 0


def cmd_fit_ts(args) -> int:
    logits, labels, cal_idx, eval_idx = _split_for_fit(args, "fit-ts")
    cal_logits, cal_labels = _subset(logits, labels, cal_idx)
    fit = calibrators.fit_temperature(cal_logits, cal_labels)
    record = TemperatureRecord(
        temperature=fit.temperature,
        architecture=args.arch,
        pretrain_dataset=args.pretrain,
        auxiliary_dataset=args.dataset_name,
        prompt_template=args.prompt,
        fit_nll=fit.nll_at_fit,
        created_at=tensorio.default_created_at(),
    )
    tensorio.write_temperature_record(record, _ensure_parent(args.out))
    print(f"temperature = {fit.temperature:.6f}")
    print(f"fit_nll = {fit.nll_at_fit:.6f}")
    if len(eval_idx) > 0:
        eval_logits, eval_labels = _subset(logits, labels, eval_idx)
        ece_before = _eval_ece(eval_logits, eval_labels, args.num_bins)
        ece_after = _eval_ece(
            calibrators.apply_temperature(eval_logits, fit.temperature),
            eval_labels,
            args.num_bins,
        )
        print(f"eval_ece_uncalibrated = {ece_before:.6f}")
        print(f"eval_ece_calibrated = {ece_after:.6f}")
    return 0


def cmd_fit_zsts(args) -> int:
    logits = _load_logits(args.aux_logits)
    labels = _load_labels(args.aux_labels)
    record = calibrators.fit_zero_shot_temperature(
        logits,
        labels,
        architecture=args.arch,
        pretrain_dataset=args.pretrain,
        auxiliary_dataset=args.aux_dataset,
        prompt_template=args.prompt,
        created_at=tensorio.default_created_at(),
    )
    tensorio.write_temperature_record(record, _ensure_parent(args.out))
    print(f"temperature = {record.temperature:.6f}")
    print(f"fit_nll = {record.fit_nll:.6f}")
    return 0


def cmd_sweep(args) -> int:
    if args.t_min <= 0 or not math.isfinite(args.t_min):
        raise UsageError(f"--t-min must be > 0, got {args.t_min}")
    if args.t_max <= args.t_min or not math.isfinite(args.t_max):
        raise UsageError(f"--t-max must be > --t-min, got {args.t_max}")
    if args.points < 2:
        raise UsageError(f"--points must be >= 2, got {args.points}")
    logits = _load_logits(args.logits)
    labels = _load_labels(args.labels)
    grid = np.logspace(math.log10(args.t_min), math.log10(args.t_max), args.points)
    trace = calibrators.temperature_sweep(
        logits, labels, grid, num_bins=args.num_bins, max_workers=_thread_cap()
    )
    report.render_sweep_csv(trace, _ensure_parent(args.out))
    best = min(trace, key=lambda row: row[1])
    print(f"wrote {args.out}")
    print(f"sweep_min_temperature = {best[0]:.6f}")
    print(f"sweep_min_ece = {best[1]:.6f}")
    return 0


def _cmd_fit_confidence(args, kind: str) -> int:
    logits, labels, cal_idx, eval_idx = _split_for_fit(args, f"fit-{kind}")
    cal_logits, cal_labels = _subset(logits, labels, cal_idx)
    cal_preds = predict(softmax(cal_logits), cal_labels)
    if kind == "binning":
        calibrator = calibrators.fit_histogram_binning(cal_preds, args.num_bins)
    else:
        calibrator = calibrators.fit_isotonic(cal_preds)
    calibrators.write_calibrator(calibrator, _ensure_parent(args.out))
    print(f"wrote {args.out}")
    if len(eval_idx) > 0:
        eval_logits, eval_labels = _subset(logits, labels, eval_idx)
        eval_preds = predict(softmax(eval_logits), eval_labels)
        ece_before = metrics.ece(metrics.reliability_table(eval_preds, args.num_bins))
        recal = calibrators.apply_confidence_calibrator(calibrator, eval_preds)
        ece_after = metrics.ece(metrics.reliability_table(recal, args.num_bins))
        print(f"eval_ece_uncalibrated = {ece_before:.6f}")
        print(f"eval_ece_calibrated = {ece_after:.6f}")
    return 0


def cmd_fit_binning(args) -> int:
    return _cmd_fit_confidence(args, "binning")


def cmd_fit_isotonic(args) -> int:
    return _cmd_fit_confidence(args, "isotonic")


def _add_split_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--split", type=float, default=0.5, help="calibration fraction (default 0.5)")
    p.add_argument("--seed", type=int, default=0, help="seed for the calibration/evaluation split")
    p.add_argument("--num-bins", type=int, default=10, help="reliability bins (default 10)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="calibkit",
        description="Calibration toolkit for zero-shot classifiers: "
        "cosine logits, ECE, reliability diagrams, temperature scaling.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic logits/labels dataset")
    p.add_argument("--n", type=int, required=True, help="sample count")
    p.add_argument("--c", type=int, required=True, help="class count")
    p.add_argument("--planted-t", type=float, default=1.0, help="planted temperature T*")
    p.add_argument("--logit-scale", type=float, default=synth.DEFAULT_LOGIT_SCALE)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("logits", help="cosine-similarity logits from embedding files")
    p.add_argument("--images", required=True, help="NxD image embedding matrix")
    p.add_argument("--classes", required=True, help="CxD class-text embedding matrix")
    p.add_argument("--out", required=True, help="output logits matrix")
    p.set_defaults(func=cmd_logits)

    p = sub.add_parser("eval", help="calibration report, reliability and histogram SVGs")
    p.add_argument("--logits", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--temperature-record", default=None, help="divide logits by this record's T")
    p.add_argument("--num-bins", type=int, default=10)
    p.add_argument("--title", default="", help="title drawn on the SVGs")
    p.add_argument("--out-prefix", required=True, help="prefix for report.json and the SVGs")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("fit-ts", help="supervised temperature scaling with a held-out half")
    p.add_argument("--logits", required=True)
    p.add_argument("--labels", required=True)
    _add_split_flags(p)
    p.add_argument("--arch", default="unspecified", help="architecture tag for the record")
    p.add_argument("--pretrain", default="unspecified", help="pre-training dataset tag")
    p.add_argument("--dataset-name", default="", help="calibration dataset tag")
    p.add_argument("--prompt", default="", help="prompt template tag")
    p.add_argument("--out", required=True, help="output temperature record")
    p.set_defaults(func=cmd_fit_ts)

    p = sub.add_parser(
        "fit-zsts",
        help="zero-shot-enabled temperature scaling: fit once on an auxiliary dataset",
    )
    p.add_argument("--aux-logits", required=True)
    p.add_argument("--aux-labels", required=True)
    p.add_argument("--arch", required=True, help="architecture (one record per arch/pretrain pair)")
    p.add_argument("--pretrain", required=True, help="pre-training dataset")
    p.add_argument("--aux-dataset", default="imagenet1k", help="auxiliary dataset tag")
    p.add_argument("--prompt", default="a photo of {}", help="auxiliary prompt template")
    p.add_argument("--out", required=True, help="output temperature record")
    p.set_defaults(func=cmd_fit_zsts)

    p = sub.add_parser("sweep", help="temperature vs ECE/NLL curve on a log-spaced grid")
    p.add_argument("--logits", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--t-min", type=float, default=0.05)
    p.add_argument("--t-max", type=float, default=20.0)
    p.add_argument("--points", type=int, default=50)
    p.add_argument("--num-bins", type=int, default=10)
    p.add_argument("--out", required=True, help="output CSV")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fit-binning", help="histogram-binning confidence calibrator")
    p.add_argument("--logits", required=True)
    p.add_argument("--labels", required=True)
    _add_split_flags(p)
    p.add_argument("--out", required=True, help="output calibrator JSON")
    p.set_defaults(func=cmd_fit_binning)

    p = sub.add_parser("fit-isotonic", help="isotonic-regression confidence calibrator")
    p.add_argument("--logits", required=True)
    p.add_argument("--labels", required=True)
    _add_split_flags(p)
    p.add_argument("--out", required=True, help="output calibrator JSON")
    p.set_defaults(func=cmd_fit_isotonic)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ComputeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
