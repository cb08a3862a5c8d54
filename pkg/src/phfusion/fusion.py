"""Late fusion of the per-feature classifiers.

Each feature's classifier votes on every training image; the number of
correct votes, normalised, becomes that feature's weight. Test-time class
probabilities are the weighted sum of the per-feature distributions, and the
predicted class is the arg-max.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import EmptyTrainingSet, LengthMismatch
from .features import FeatureKind, FeatureVector
from .svm import MulticlassSvm


@dataclass(frozen=True)
class FusionWeights:
    a_phow: float
    a_phoc: float
    a_phog: float

    def __post_init__(self):
        vals = self.as_tuple()
        if min(vals) < 0:
            raise ValueError(f"fusion weights must be non-negative, got {vals}")
        if abs(sum(vals) - 1.0) > 1e-9:
            raise ValueError(f"fusion weights must sum to 1, got {sum(vals)!r}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.a_phow, self.a_phoc, self.a_phog)

    def __getitem__(self, kind) -> float:
        return {
            FeatureKind.PHOW: self.a_phow,
            FeatureKind.PHOC: self.a_phoc,
            FeatureKind.PHOG: self.a_phog,
        }[FeatureKind(kind)]

    @classmethod
    def uniform(cls) -> "FusionWeights":
        return cls(1 / 3, 1 / 3, 1 / 3)

    @classmethod
    def from_counts(cls, phow: int, phoc: int, phog: int) -> "FusionWeights":
        """Normalise correct-vote counters; all-zero counters give uniform weights."""
        total = phow + phoc + phog
        if total == 0:
            return cls.uniform()
        return cls(phow / total, phoc / total, phog / total)


def _stack(rows) -> np.ndarray:
    return np.stack([r.values if isinstance(r, FeatureVector) else np.asarray(r, dtype=np.float64)
                     for r in rows])


def count_correct(classifiers: Mapping[FeatureKind, MulticlassSvm],
                  features: Mapping[FeatureKind, np.ndarray],
                  labels: Sequence[str]) -> dict[FeatureKind, int]:
    """Number of samples each feature's classifier labels correctly."""
    labels = np.asarray([str(s) for s in labels])
    out = {}
    for kind in (FeatureKind.PHOW, FeatureKind.PHOC, FeatureKind.PHOG):
        model = classifiers[kind]
        pred = np.asarray(model.class_labels)[model.predict_index(features[kind])]
        out[kind] = int(np.sum(pred == labels))
    return out


def learn_weights(classifiers, training_set) -> FusionWeights:
    """Weights from correct-recognition counts over the training set.

    ``classifiers`` is a (phow, phoc, phog) triple or a mapping keyed by
    :class:`FeatureKind`. ``training_set`` is a sequence of
    ``((phow, phoc, phog), label)`` pairs whose vectors are arrays or
    :class:`FeatureVector`.
    """
    training_set = list(training_set)
    if not training_set:
        raise EmptyTrainingSet("feature-weight learning needs at least one image")
    if not isinstance(classifiers, Mapping):
        classifiers = dict(zip((FeatureKind.PHOW, FeatureKind.PHOC, FeatureKind.PHOG),
                               classifiers))
    triples = [t for t, _ in training_set]
    labels = [lab for _, lab in training_set]
    features = {
        kind: _stack([t[k] for t in triples])
        for k, kind in enumerate((FeatureKind.PHOW, FeatureKind.PHOC, FeatureKind.PHOG))
    }
    counts = count_correct(classifiers, features, labels)
    return FusionWeights.from_counts(counts[FeatureKind.PHOW], counts[FeatureKind.PHOC],
                                     counts[FeatureKind.PHOG])


def fuse(d_phow, d_phoc, d_phog, w: FusionWeights) -> np.ndarray:
    """Weighted sum a_phoc*D(phoc) + a_phog*D(phog) + a_phow*D(phow).

    Accepts single distributions or (n, N) batches.
    """
    d_phow = np.asarray(d_phow, dtype=np.float64)
    d_phoc = np.asarray(d_phoc, dtype=np.float64)
    d_phog = np.asarray(d_phog, dtype=np.float64)
    if not (d_phow.shape == d_phoc.shape == d_phog.shape):
        raise LengthMismatch(
            f"distribution shapes differ: {d_phow.shape}, {d_phoc.shape}, {d_phog.shape}"
        )
    return w.a_phoc * d_phoc + w.a_phog * d_phog + w.a_phow * d_phow


def decide(fused, class_labels: Sequence[str]) -> str:
    """Label of the largest fused probability; ties go to the lowest index."""
    fused = np.asarray(fused, dtype=np.float64)
    if fused.size == 0:
        raise ValueError("empty distribution")
    if fused.shape[-1] != len(class_labels):
        raise LengthMismatch(f"{fused.shape[-1]} scores for {len(class_labels)} classes")
    return class_labels[int(np.argmax(fused))]
