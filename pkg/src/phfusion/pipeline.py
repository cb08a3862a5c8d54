"""Dataset ingestion, end-to-end training, evaluation and classification."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .codebook import Codebook, build_codebook
from .config import PipelineConfig
from .errors import (
    ClassMismatch,
    DataError,
    InvariantViolation,
    NoPatchesFit,
    NotADirectory,
    SingleClassInput,
    TooFewClasses,
    TooFewImages,
)
from .features import (
    FEATURE_KINDS,
    FeatureKind,
    FeatureVector,
    build_phoc,
    build_phog,
    extract_descriptors,
    feature_dim,
    phow_from_words,
)
from .fusion import FusionWeights, count_correct, decide, fuse
from .image_core import RgbImage, load_image
from .pyramid import check_fits, level_weight
from .svm import KernelKind, KernelSpec, MulticlassSvm, cross_validate, median_gamma, ovr_train

log = logging.getLogger(__name__)

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")
BASELINE = "bow"


@dataclass(frozen=True)
class DatasetSplit:
    classes: tuple[str, ...]
    train: dict[str, tuple[Path, ...]]
    test: dict[str, tuple[Path, ...]]

    def items(self, part: str) -> list[tuple[Path, str]]:
        """(path, label) pairs of ``part`` ("train" or "test"), class-major."""
        src = self.train if part == "train" else self.test
        return [(p, c) for c in self.classes for p in src.get(c, ())]

    @property
    def n_train(self) -> int:
        return sum(len(v) for v in self.train.values())

    @property
    def n_test(self) -> int:
        return sum(len(v) for v in self.test.values())


def list_images(directory: Path) -> list[Path]:
    return sorted(p for p in directory.iterdir()
                  if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES)


def ingest_dataset(root, train_per_class: int, seed: int = 0) -> DatasetSplit:
    """One sub-directory per class; each class is shuffled with its own
    seeded generator and its first ``train_per_class`` files go to training.
    """
    root = Path(root)
    if not root.is_dir():
        raise NotADirectory(f"dataset root is not a directory: {root}")
    classes = tuple(sorted(p.name for p in root.iterdir() if p.is_dir()))
    if len(classes) < 2:
        raise TooFewClasses(f"{root} has {len(classes)} class directories; need >= 2")
    children = np.random.SeedSequence(seed).spawn(len(classes))
    train, test = {}, {}
    for c, ss in zip(classes, children):
        files = list_images(root / c)
        if len(files) < train_per_class + 1:
            raise TooFewImages(c, len(files), train_per_class + 1)
        order = np.random.Generator(np.random.PCG64(ss)).permutation(len(files))
        shuffled = [files[i] for i in order]
        train[c] = tuple(shuffled[:train_per_class])
        test[c] = tuple(shuffled[train_per_class:])
    return DatasetSplit(classes, train, test)


def _load(path) -> RgbImage:
    return load_image(path)


def _reraise_with_path(path, exc: DataError):
    msg = str(exc)
    if str(path) in msg:
        raise exc
    try:
        new = type(exc)(f"{path}: {msg}")
    except TypeError:
        raise exc from None
    raise new from exc


# ---------------------------------------------------------------- features

def image_features(img: RgbImage, codebook: Codebook, cfg: PipelineConfig
                   ) -> dict[FeatureKind, FeatureVector]:
    check_fits(img.width, img.height, cfg.levels)
    desc, centers = extract_descriptors(img, cfg.sampling)
    words = codebook.assign_many(desc) if len(desc) else np.zeros(0, dtype=np.int64)
    return {
        FeatureKind.PHOW: phow_from_words(words, centers, img.width, img.height,
                                          codebook.size, cfg.pyramid),
        FeatureKind.PHOC: build_phoc(img, cfg.pyramid, cfg.color),
        FeatureKind.PHOG: build_phog(img, cfg.pyramid, cfg.orientation,
                                     cfg.canny_low, cfg.canny_high),
    }


def bow_from_phow(phow: np.ndarray, V: int, L: int) -> np.ndarray:
    """Unweighted level-0 word histogram (the plain bag-of-words baseline)."""
    return np.asarray(phow)[..., :V] / level_weight(0, L)


def _features_for(paths: Sequence[Path], codebook: Codebook, cfg: PipelineConfig):
    out = {k: [] for k in FEATURE_KINDS}
    for p in paths:
        try:
            feats = image_features(_load(p), codebook, cfg)
        except DataError as exc:
            _reraise_with_path(p, exc)
        for k in FEATURE_KINDS:
            out[k].append(feats[k].values)
    return {k: np.stack(v) for k, v in out.items()}


def pooled_descriptors(paths: Sequence[Path], cfg: PipelineConfig):
    """Dense SIFT for every image: (pooled descriptors, per-image (desc, centers, w, h))."""
    per_image = []
    for p in paths:
        try:
            img = _load(p)
            check_fits(img.width, img.height, cfg.levels)
            desc, centers = extract_descriptors(img, cfg.sampling)
        except DataError as exc:
            _reraise_with_path(p, exc)
        if len(desc) == 0:
            raise NoPatchesFit(f"{p}: no {cfg.patch}x{cfg.patch} patch fits "
                               f"a {img.width}x{img.height} image")
        per_image.append((desc, centers, img.width, img.height))
    pooled = np.concatenate([d for d, _, _, _ in per_image])
    return pooled, per_image


def train_codebook(paths: Sequence[Path], cfg: PipelineConfig) -> Codebook:
    pooled, _ = pooled_descriptors(paths, cfg)
    return build_codebook(pooled, cfg.words, cfg.stage_seeds()["codebook"],
                          cfg.kmeans_max_iter, cfg.kmeans_tol, cfg.max_descriptors)


# ---------------------------------------------------------------- training

@dataclass
class ModelBundle:
    config: PipelineConfig
    codebook: Codebook
    classifiers: dict[FeatureKind, MulticlassSvm]
    weights: FusionWeights
    class_labels: tuple[str, ...]
    baseline: MulticlassSvm | None = None
    cv_scores: dict = field(default_factory=dict, compare=False)

    def input_dims(self) -> tuple[int, int, int]:
        return tuple(self.classifiers[k].dim for k in FEATURE_KINDS)

    def expected_dims(self) -> tuple[int, int, int]:
        c = self.config
        return tuple(feature_dim(k, c.levels, self.codebook.size, c.color, c.orientation)
                     for k in FEATURE_KINDS)

    def check_consistent(self) -> None:
        """Raise InvariantViolation if config, codebook and classifiers disagree."""
        if self.input_dims() != self.expected_dims():
            raise InvariantViolation(f"classifier input dims {self.input_dims()} do not match "
                                     f"the configuration {self.expected_dims()}")
        if self.config.words != self.codebook.size:
            raise InvariantViolation(f"config words={self.config.words} but codebook has "
                                     f"{self.codebook.size}")
        for k in FEATURE_KINDS:
            if self.classifiers[k].class_labels != self.class_labels:
                raise InvariantViolation(f"{k.value} classifier labels differ from the bundle's")


def _kernel_for(X: np.ndarray, cfg: PipelineConfig) -> KernelSpec:
    if cfg.kernel == KernelKind.LINEAR.value:
        return KernelSpec(KernelKind.LINEAR)
    gamma = cfg.gamma if cfg.gamma > 0 else median_gamma(X)
    return KernelSpec(KernelKind.RBF, gamma)


def _fit_classifier(X, labels, cfg: PipelineConfig, kind: str, seeds):
    kern = _kernel_for(X, cfg)
    grid = [(kern, C) for C in cfg.c_grid]
    if len(grid) > 1:
        cv = cross_validate(X, labels, grid, cfg.cv_folds, seeds["cv"],
                            cfg.smo_tol, cfg.smo_max_passes)
        best_kernel, best_C, scores = cv.kernel, cv.C, cv.scores
    else:
        best_kernel, best_C, scores = kern, grid[0][1], ()
    log.info("%s: kernel=%s C=%g", kind, best_kernel.kind.value, best_C)
    model = ovr_train(X, labels, best_kernel, best_C, seeds["svm"], kind,
                      cfg.smo_tol, cfg.smo_max_passes)
    return model, [(k.kind.value, C, acc) for k, C, acc in scores]


def train_pipeline(split: DatasetSplit, config: PipelineConfig = PipelineConfig(),
                   codebook: Codebook | None = None) -> ModelBundle:
    """Codebook, per-feature classifiers and fusion weights from the training split."""
    cfg = config
    items = split.items("train")
    labels = [c for _, c in items]
    if len(set(labels)) < 2:
        raise SingleClassInput(f"training split has classes {sorted(set(labels))}; need >= 2")
    paths = [p for p, _ in items]
    seeds = cfg.stage_seeds()

    log.info("extracting dense SIFT from %d training images", len(paths))
    pooled, per_image = pooled_descriptors(paths, cfg)
    if codebook is None:
        codebook = build_codebook(pooled, cfg.words, seeds["codebook"],
                                  cfg.kmeans_max_iter, cfg.kmeans_tol, cfg.max_descriptors)
    elif codebook.size != cfg.words:
        cfg = cfg.with_(words=codebook.size)
    del pooled

    feats = {k: [] for k in FEATURE_KINDS}
    for p, (desc, centers, w, h) in zip(paths, per_image):
        try:
            img = _load(p)
            words = codebook.assign_many(desc)
            feats[FeatureKind.PHOW].append(
                phow_from_words(words, centers, w, h, codebook.size, cfg.pyramid).values)
            feats[FeatureKind.PHOC].append(build_phoc(img, cfg.pyramid, cfg.color).values)
            feats[FeatureKind.PHOG].append(
                build_phog(img, cfg.pyramid, cfg.orientation, cfg.canny_low,
                           cfg.canny_high).values)
        except DataError as exc:
            _reraise_with_path(p, exc)
    X = {k: np.stack(v) for k, v in feats.items()}

    classifiers, cv_scores = {}, {}
    for k in FEATURE_KINDS:
        classifiers[k], cv_scores[k.value] = _fit_classifier(X[k], labels, cfg, k.value, seeds)

    baseline = None
    if cfg.bow_baseline:
        Xb = bow_from_phow(X[FeatureKind.PHOW], codebook.size, cfg.levels)
        baseline, cv_scores[BASELINE] = _fit_classifier(Xb, labels, cfg, BASELINE, seeds)

    counts = count_correct(classifiers, X, labels)
    weights = FusionWeights.from_counts(counts[FeatureKind.PHOW], counts[FeatureKind.PHOC],
                                        counts[FeatureKind.PHOG])
    log.info("fusion weights phow=%.4f phoc=%.4f phog=%.4f", *weights.as_tuple())
    bundle = ModelBundle(cfg, codebook, classifiers, weights,
                         classifiers[FeatureKind.PHOW].class_labels, baseline, cv_scores)
    bundle.check_consistent()
    return bundle


# ---------------------------------------------------------------- inference

@dataclass(frozen=True)
class Classification:
    label: str
    fused: np.ndarray
    per_feature: dict[FeatureKind, np.ndarray]


def _predict_all(bundle: ModelBundle, X: dict[FeatureKind, np.ndarray]):
    per = {k: bundle.classifiers[k].predict_proba(X[k]) for k in FEATURE_KINDS}
    fused = fuse(per[FeatureKind.PHOW], per[FeatureKind.PHOC], per[FeatureKind.PHOG],
                 bundle.weights)
    return fused, per


def classify(bundle: ModelBundle, path) -> Classification:
    """Fused label and all per-feature class distributions for one image."""
    path = Path(path)
    try:
        feats = image_features(_load(path), bundle.codebook, bundle.config)
    except DataError as exc:
        _reraise_with_path(path, exc)
    X = {k: feats[k].values[None, :] for k in FEATURE_KINDS}
    fused, per = _predict_all(bundle, X)
    return Classification(decide(fused[0], bundle.class_labels), fused[0],
                          {k: v[0] for k, v in per.items()})


@dataclass(frozen=True)
class ConfusionMatrix:
    """Rows are true classes, columns predicted classes."""

    classes: tuple[str, ...]
    counts: np.ndarray

    @classmethod
    def from_labels(cls, classes, true, pred) -> "ConfusionMatrix":
        index = {c: i for i, c in enumerate(classes)}
        m = np.zeros((len(classes), len(classes)), dtype=np.int64)
        for t, p in zip(true, pred):
            m[index[t], index[p]] += 1
        return cls(tuple(classes), m)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def correct(self) -> int:
        return int(np.trace(self.counts))

    @property
    def accuracy(self) -> float:
        return self.correct / self.total if self.total else 0.0

    def per_class_accuracy(self) -> dict[str, float]:
        rows = self.counts.sum(axis=1)
        return {c: (float(self.counts[i, i] / rows[i]) if rows[i] else 0.0)
                for i, c in enumerate(self.classes)}

    def to_csv(self) -> str:
        lines = [",".join(["true\\predicted", *self.classes])]
        for c, row in zip(self.classes, self.counts):
            lines.append(",".join([c, *(str(int(v)) for v in row)]))
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class EvaluationResult:
    fused: ConfusionMatrix
    per_feature: dict[str, ConfusionMatrix]
    weights: FusionWeights
    ignored_classes: tuple[str, ...] = ()

    @property
    def accuracy(self) -> float:
        return self.fused.accuracy

    def feature_accuracy(self, name: str) -> float:
        return self.per_feature[name].accuracy

    def table_rows(self) -> list[dict]:
        """Rows in the layout: algorithm, correctly classified, average accuracy."""
        names = [(BASELINE, "BOW (PHOW level 0)"), ("phow", "PHOW"), ("phoc", "PHOC"),
                 ("phog", "PHOG")]
        rows = []
        for key, title in names:
            if key in self.per_feature:
                cm = self.per_feature[key]
                rows.append({"algorithm": title, "correct": cm.correct, "total": cm.total,
                             "accuracy": cm.accuracy})
        rows.append({"algorithm": "PHOW&PHOG&PHOC", "correct": self.fused.correct,
                     "total": self.fused.total, "accuracy": self.fused.accuracy})
        return rows

    def to_report(self) -> dict:
        return {
            "format": "phfusion-report/1",
            "classes": list(self.fused.classes),
            "n_test": self.fused.total,
            "weights": dict(zip(("phow", "phoc", "phog"), self.weights.as_tuple())),
            "fused": {
                "correct": self.fused.correct,
                "accuracy": self.fused.accuracy,
                "per_class_accuracy": self.fused.per_class_accuracy(),
                "confusion": self.fused.counts.tolist(),
            },
            "per_feature": {
                name: {"correct": cm.correct, "accuracy": cm.accuracy,
                       "per_class_accuracy": cm.per_class_accuracy(),
                       "confusion": cm.counts.tolist()}
                for name, cm in self.per_feature.items()
            },
            "table": self.table_rows(),
            "ignored_classes": list(self.ignored_classes),
        }


def evaluate(bundle: ModelBundle, split: DatasetSplit) -> EvaluationResult:
    """Classify every test image; fused and per-feature confusion matrices."""
    missing = [c for c in bundle.class_labels if c not in split.classes]
    if missing:
        raise ClassMismatch(f"model classes absent from the dataset: {missing}")
    known = set(bundle.class_labels)
    items = [(p, c) for p, c in split.items("test") if c in known]
    ignored = tuple(c for c in split.classes if c not in known)
    paths = [p for p, _ in items]
    true = [c for _, c in items]
    X = _features_for(paths, bundle.codebook, bundle.config)
    fused, per = _predict_all(bundle, X)
    labels = bundle.class_labels
    fused_pred = [decide(row, labels) for row in fused]
    per_cm = {
        k.value: ConfusionMatrix.from_labels(labels, true, [labels[i] for i in np.argmax(per[k], axis=1)])
        for k in FEATURE_KINDS
    }
    if bundle.baseline is not None:
        Xb = bow_from_phow(X[FeatureKind.PHOW], bundle.codebook.size, bundle.config.levels)
        pred = bundle.baseline.predict(Xb)
        per_cm = {BASELINE: ConfusionMatrix.from_labels(labels, true, pred), **per_cm}
    return EvaluationResult(ConfusionMatrix.from_labels(labels, true, fused_pred), per_cm,
                            bundle.weights, ignored)
