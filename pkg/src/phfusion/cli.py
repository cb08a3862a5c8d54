"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal invariant
violation (including any unexpected exception).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import modelio
from .config import PipelineConfig
from .errors import DataError, InvariantViolation, NotADirectory
from .features import FEATURE_KINDS, FeatureKind
from .image_core import load_image
from .pipeline import (
    classify,
    evaluate,
    image_features,
    ingest_dataset,
    list_images,
    train_codebook,
    train_pipeline,
)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3

log = logging.getLogger("phfusion")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _positive(s: str) -> int:
    v = int(s)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s}")
    return v


def _nonneg(s: str) -> int:
    v = int(s)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {s}")
    return v


def _c_grid(s: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(x) for x in s.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad C grid {s!r}") from None
    if not vals or min(vals) <= 0:
        raise argparse.ArgumentTypeError("C values must be positive")
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="phfusion",
                description="Pyramid word/colour/gradient features with weighted late fusion.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    cb = sub.add_parser("build-codebook", help="cluster dense SIFT into a visual vocabulary")
    cb.add_argument("--data", required=True, type=Path,
                    help="image directory, or dataset root with one sub-directory per class")
    cb.add_argument("--out", required=True, type=Path)
    cb.add_argument("--words", type=_positive, default=200)
    cb.add_argument("--step", type=_positive, default=8)
    cb.add_argument("--patch", type=_positive, default=16)
    cb.add_argument("--levels", type=_nonneg, default=2,
                    help="pyramid depth the images must support")
    cb.add_argument("--train-per-class", type=_positive, default=None,
                    help="pool only the training part of a seeded split")
    cb.add_argument("--seed", type=int, default=0)

    tr = sub.add_parser("train", help="train the three feature classifiers and fusion weights")
    tr.add_argument("--data", required=True, type=Path)
    tr.add_argument("--train-per-class", type=_positive, default=60)
    tr.add_argument("--levels", type=_nonneg, default=2)
    tr.add_argument("--words", type=_positive, default=200)
    tr.add_argument("--step", type=_positive, default=8)
    tr.add_argument("--patch", type=_positive, default=16)
    tr.add_argument("--kernel", choices=("linear", "rbf"), default="linear")
    tr.add_argument("--c-grid", type=_c_grid, default=None,
                    help="comma-separated C values searched by cross-validation")
    tr.add_argument("--cv-folds", type=_positive, default=5)
    tr.add_argument("--codebook", type=Path, default=None,
                    help="reuse a vocabulary written by build-codebook")
    tr.add_argument("--out", required=True, type=Path)
    tr.add_argument("--seed", type=int, default=0)

    ev = sub.add_parser("evaluate", help="confusion matrix and accuracies on the held-out split")
    ev.add_argument("--model", required=True, type=Path)
    ev.add_argument("--data", required=True, type=Path)
    ev.add_argument("--report", type=Path, default=None)
    ev.add_argument("--confusion", type=Path, default=None)
    ev.add_argument("--train-per-class", type=_positive, default=None,
                    help="override the split recorded in the model")
    ev.add_argument("--seed", type=int, default=None,
                    help="override the split seed recorded in the model")

    cl = sub.add_parser("classify", help="label one image")
    cl.add_argument("--model", required=True, type=Path)
    cl.add_argument("--image", required=True, type=Path)
    cl.add_argument("--explain", action="store_true",
                    help="print per-feature distributions and fusion weights")

    ex = sub.add_parser("extract", help="write one feature vector as CSV")
    ex.add_argument("--image", required=True, type=Path)
    ex.add_argument("--feature", required=True, choices=[k.value for k in FEATURE_KINDS])
    ex.add_argument("--model", required=True, type=Path,
                    help="model or codebook file supplying the vocabulary and parameters")
    ex.add_argument("--out", required=True, type=Path)

    sy = sub.add_parser("make-synthetic", help="write the seeded shape/colour/texture dataset")
    sy.add_argument("--out", required=True, type=Path)
    sy.add_argument("--per-class", type=_positive, default=50)
    sy.add_argument("--classes", type=_positive, default=4)
    sy.add_argument("--seed", type=int, default=0)
    return p


def _write_text(path: Path, text: str) -> None:
    try:
        path.write_text(text)
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc}") from exc


def _codebook_paths(args) -> list[Path]:
    root = args.data
    if not root.is_dir():
        raise NotADirectory(f"not a directory: {root}")
    if args.train_per_class is not None:
        split = ingest_dataset(root, args.train_per_class, args.seed)
        return [p for p, _ in split.items("train")]
    paths = list_images(root)
    for d in sorted(p for p in root.iterdir() if p.is_dir()):
        paths += list_images(d)
    if not paths:
        raise DataError(f"no PNG or JPEG images under {root}")
    return paths


def cmd_build_codebook(args) -> int:
    cfg = PipelineConfig(levels=args.levels, words=args.words, step=args.step,
                         patch=args.patch, seed=args.seed)
    cb = train_codebook(_codebook_paths(args), cfg)
    modelio.save_codebook(cb, args.out, cfg)
    print(f"codebook: {cb.size} words x {cb.dim} dims, inertia {cb.inertia:.6g} -> {args.out}")
    return EXIT_OK


def cmd_train(args) -> int:
    kw = dict(levels=args.levels, words=args.words, step=args.step, patch=args.patch,
              kernel=args.kernel, cv_folds=args.cv_folds, seed=args.seed,
              train_per_class=args.train_per_class)
    if args.c_grid is not None:
        kw["c_grid"] = args.c_grid
    codebook = None
    if args.codebook is not None:
        codebook, cb_cfg = modelio.load_codebook(args.codebook)
        if (cb_cfg.step, cb_cfg.patch) != (args.step, args.patch):
            raise DataError(f"codebook was built with step={cb_cfg.step} patch={cb_cfg.patch}; "
                            f"training asks for step={args.step} patch={args.patch}")
        kw["words"] = codebook.size
    cfg = PipelineConfig(**kw)
    split = ingest_dataset(args.data, args.train_per_class, args.seed)
    bundle = train_pipeline(split, cfg, codebook)
    dims = bundle.input_dims()
    modelio.save_model(bundle, args.out)
    w = bundle.weights
    print(f"trained {len(bundle.class_labels)} classes on {split.n_train} images; "
          f"dims phow={dims[0]} phoc={dims[1]} phog={dims[2]}; "
          f"weights phow={w.a_phow:.4f} phoc={w.a_phoc:.4f} phog={w.a_phog:.4f} -> {args.out}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    bundle = modelio.load_model(args.model)
    tpc = args.train_per_class or bundle.config.train_per_class
    if tpc <= 0:
        raise DataError("model does not record its split; pass --train-per-class")
    seed = bundle.config.seed if args.seed is None else args.seed
    split = ingest_dataset(args.data, tpc, seed)
    result = evaluate(bundle, split)
    cm = result.fused
    if abs(cm.accuracy * cm.total - cm.correct) > 1e-9 * max(cm.total, 1):
        raise InvariantViolation("accuracy does not equal trace / total")
    if args.report is not None:
        _write_text(args.report, json.dumps(result.to_report(), indent=2) + "\n")
    if args.confusion is not None:
        _write_text(args.confusion, cm.to_csv())
    width = max(len(r["algorithm"]) for r in result.table_rows())
    for row in result.table_rows():
        print(f"{row['algorithm']:<{width}}  {row['correct']:>5d}/{row['total']:<5d}"
              f"  {100 * row['accuracy']:8.3f}%")
    return EXIT_OK


def _fmt_dist(labels, dist) -> str:
    return "  ".join(f"{c}={p:.4f}" for c, p in zip(labels, dist))


def cmd_classify(args) -> int:
    bundle = modelio.load_model(args.model)
    res = classify(bundle, args.image)
    if abs(float(np.sum(res.fused)) - 1.0) > 1e-9:
        raise InvariantViolation(f"fused distribution sums to {np.sum(res.fused)!r}")
    print(res.label)
    if args.explain:
        labels = bundle.class_labels
        for k in FEATURE_KINDS:
            print(f"{k.value} (weight {bundle.weights[k]:.4f}): "
                  f"{_fmt_dist(labels, res.per_feature[k])}")
        print(f"fused: {_fmt_dist(labels, res.fused)}")
    return EXIT_OK


def cmd_extract(args) -> int:
    codebook, cfg = modelio.load_codebook(args.model)
    if cfg.words != codebook.size:
        cfg = cfg.with_(words=codebook.size)
    feats = image_features(load_image(args.image), codebook, cfg)
    vec = feats[FeatureKind(args.feature)].values
    _write_text(args.out, "".join(f"{v!r}\n" for v in vec.tolist()))
    print(f"{args.feature}: {vec.size} values -> {args.out}")
    return EXIT_OK


def cmd_make_synthetic(args) -> int:
    from .synthetic import SyntheticSpec, write_dataset

    try:
        spec = SyntheticSpec(n_classes=args.classes, per_class=args.per_class)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    names = write_dataset(args.out, spec, args.seed)
    print(f"wrote {len(names)} classes x {spec.per_class} images -> {args.out}")
    return EXIT_OK


COMMANDS = {
    "build-codebook": cmd_build_codebook,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "classify": cmd_classify,
    "extract": cmd_extract,
    "make-synthetic": cmd_make_synthetic,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"phfusion: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"phfusion: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except InvariantViolation as exc:
        print(f"phfusion: invariant violation: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001 - anything unforeseen is an internal fault
        log.debug("unhandled exception", exc_info=True)
        print(f"phfusion: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
