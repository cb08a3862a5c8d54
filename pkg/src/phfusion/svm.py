"""Soft-margin SVMs trained with simplified SMO, one-vs-rest multiclass
wrapper with softmax probabilities, and stratified k-fold model selection.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from . import kernels
from .errors import DimensionMismatch, SingleClassInput, TooFewSamplesPerClass

DEFAULT_C_GRID = (0.1, 1.0, 10.0, 100.0)


class KernelKind(str, Enum):
    LINEAR = "linear"
    RBF = "rbf"


@dataclass(frozen=True)
class KernelSpec:
    kind: KernelKind = KernelKind.LINEAR
    gamma: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", KernelKind(self.kind))
        if self.kind is KernelKind.RBF and not self.gamma > 0:
            raise ValueError(f"RBF gamma must be > 0, got {self.gamma}")

    def matrix(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        A = np.atleast_2d(np.asarray(A, dtype=np.float64))
        B = np.atleast_2d(np.asarray(B, dtype=np.float64))
        if self.kind is KernelKind.LINEAR:
            return A @ B.T
        d2 = (np.einsum("ij,ij->i", A, A)[:, None]
              + np.einsum("ij,ij->i", B, B)[None, :]
              - 2.0 * (A @ B.T))
        return np.exp(-self.gamma * np.maximum(d2, 0.0))


def median_gamma(X) -> float:
    """1 / median of the non-zero pairwise squared distances (1.0 if none)."""
    X = np.asarray(X, dtype=np.float64)
    sq = np.einsum("ij,ij->i", X, X)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
    d2 = d2[np.triu_indices(len(X), 1)]
    d2 = d2[d2 > 1e-12]
    return 1.0 / float(np.median(d2)) if d2.size else 1.0


@dataclass(frozen=True)
class SmoParams:
    tol: float = 1e-3
    max_passes: int = 10
    max_iter: int = 20_000
    eps: float = 1e-10


@dataclass(frozen=True)
class BinarySvm:
    support_vectors: np.ndarray
    alphas: np.ndarray  # alpha_i * y_i for each support vector
    bias: float
    kernel: KernelSpec
    C: float

    @property
    def dim(self) -> int:
        return self.support_vectors.shape[1]

    def decision(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.dim:
            raise DimensionMismatch(f"expected dimension {self.dim}, got {X.shape[1]}")
        if len(self.alphas) == 0:
            return np.full(X.shape[0], self.bias)
        return self.kernel.matrix(X, self.support_vectors) @ self.alphas + self.bias


def decision(svm: BinarySvm, x) -> float:
    return float(svm.decision(x)[0])


def _check_xy(X, y):
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64).ravel()
    if X.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"{X.shape[0]} samples but {y.shape[0]} labels")
    if X.shape[0] < 2:
        raise SingleClassInput("need at least two training samples")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("binary labels must be -1 or +1")
    if not (np.any(y > 0) and np.any(y < 0)):
        raise SingleClassInput("binary training needs both +1 and -1 labels")
    return np.ascontiguousarray(X), np.ascontiguousarray(y)


def solve_dual(K, y, C: float, params: SmoParams = SmoParams(), seed: int = 0):
    """Run SMO on a precomputed kernel matrix.

    Returns ``(alpha, bias, sweeps)`` where ``alpha`` holds the raw dual
    variables for every training point.
    """
    K = np.ascontiguousarray(K, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    return kernels.smo_solve(K, y, float(C), float(params.tol), int(params.max_passes),
                             int(params.max_iter), int(seed), float(params.eps))


def dual_objective(alpha, y, K) -> float:
    ay = np.asarray(alpha) * np.asarray(y)
    return float(np.sum(alpha) - 0.5 * ay @ K @ ay)


def smo_train(X, y, kernel: KernelSpec = KernelSpec(), C: float = 1.0,
              tol: float = 1e-3, max_passes: int = 10, seed: int = 0,
              max_iter: int = SmoParams.max_iter) -> BinarySvm:
    X, y = _check_xy(X, y)
    K = kernel.matrix(X, X)
    alpha, b, _ = solve_dual(K, y, C, SmoParams(tol, max_passes, max_iter), seed)
    sv = alpha != 0.0
    return BinarySvm(X[sv].copy(), alpha[sv] * y[sv], float(b), kernel, float(C))


def softmax(scores) -> np.ndarray:
    s = np.asarray(scores, dtype=np.float64)
    z = np.exp(s - s.max(axis=-1, keepdims=True))
    return z / z.sum(axis=-1, keepdims=True)


@dataclass(frozen=True)
class MulticlassSvm:
    class_labels: tuple[str, ...]
    binaries: tuple[BinarySvm, ...]
    feature_kind: str = ""

    def __post_init__(self):
        if len(self.class_labels) < 2 or len(self.binaries) != len(self.class_labels):
            raise ValueError("need one binary SVM per class and at least two classes")

    @property
    def dim(self) -> int:
        return self.binaries[0].dim

    def decision_scores(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return np.stack([b.decision(X) for b in self.binaries], axis=1)

    def predict_proba(self, X) -> np.ndarray:
        return softmax(self.decision_scores(X))

    def predict_index(self, X) -> np.ndarray:
        return np.argmax(self.decision_scores(X), axis=1)

    def predict(self, X) -> list[str]:
        return [self.class_labels[i] for i in self.predict_index(X)]


def predict_proba(model: MulticlassSvm, x) -> np.ndarray:
    """Class distribution for one sample (softmax over OvR scores)."""
    return model.predict_proba(x)[0]


def ovr_train(X, labels: Sequence[str], kernel: KernelSpec = KernelSpec(),
              C: float = 1.0, seed: int = 0, feature_kind: str = "",
              tol: float = 1e-3, max_passes: int = 10) -> MulticlassSvm:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    labels = np.asarray([str(s) for s in labels])
    classes = tuple(sorted(set(labels.tolist())))
    if len(classes) < 2:
        raise SingleClassInput(f"one-vs-rest training needs >= 2 classes, got {classes}")
    if X.shape[0] != labels.shape[0]:
        raise DimensionMismatch(f"{X.shape[0]} samples but {labels.shape[0]} labels")
    K = kernel.matrix(X, X)
    params = SmoParams(tol, max_passes)
    binaries = []
    for c in classes:
        y = np.where(labels == c, 1.0, -1.0)
        alpha, b, _ = solve_dual(K, y, C, params, seed)
        sv = alpha != 0.0
        binaries.append(BinarySvm(X[sv].copy(), alpha[sv] * y[sv], float(b), kernel, float(C)))
    return MulticlassSvm(classes, tuple(binaries), feature_kind)


# ---------------------------------------------------------------- model selection

def stratified_folds(labels: Sequence[str], k: int, seed: int = 0) -> np.ndarray:
    """Fold id per sample; each class is shuffled and dealt round-robin."""
    labels = np.asarray([str(s) for s in labels])
    if k < 2:
        raise ValueError(f"need k >= 2 folds, got {k}")
    rng = np.random.Generator(np.random.PCG64(seed))
    folds = np.empty(len(labels), dtype=np.int64)
    for c in sorted(set(labels.tolist())):
        idx = np.flatnonzero(labels == c)
        if len(idx) < k:
            raise TooFewSamplesPerClass(
                f"class {c!r} has {len(idx)} samples, fewer than k={k} folds"
            )
        folds[rng.permutation(idx)] = np.arange(len(idx)) % k
    return folds


@dataclass(frozen=True)
class CvResult:
    kernel: KernelSpec
    C: float
    scores: tuple = field(default=())  # ((KernelSpec, C, mean_accuracy), ...)


def _grid_key(entry):
    kernel, C, acc = entry
    return (-acc, C, 0 if kernel.kind is KernelKind.LINEAR else 1)


def cross_validate(X, labels: Sequence[str], param_grid, k: int = 5,
                   seed: int = 0, tol: float = 1e-3, max_passes: int = 10) -> CvResult:
    """Pick the (kernel, C) with best mean k-fold accuracy.

    Ties go to the smaller C, then linear before RBF.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    labels = np.asarray([str(s) for s in labels])
    if len(set(labels.tolist())) < 2:
        raise SingleClassInput("cross-validation needs >= 2 classes")
    grid = [(kern, float(C)) for kern, C in param_grid]
    if not grid:
        raise ValueError("empty parameter grid")
    folds = stratified_folds(labels, k, seed)
    entries = []
    for kern, C in grid:
        accs = []
        for f in range(k):
            tr, te = folds != f, folds == f
            model = ovr_train(X[tr], labels[tr], kern, C, seed, tol=tol, max_passes=max_passes)
            pred = np.asarray(model.class_labels)[model.predict_index(X[te])]
            accs.append(float(np.mean(pred == labels[te])))
        entries.append((kern, C, float(np.mean(accs))))
    best = min(entries, key=_grid_key)
    return CvResult(best[0], best[1], tuple(entries))
