"""Visual vocabulary: K-means++ seeding, Lloyd refinement, nearest-word lookup.

All randomness comes from numpy's PCG64 generator seeded through
``SeedSequence``, so identical inputs and seeds give bit-identical centres.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import NotEnoughDistinctPoints

DEFAULT_MAX_POINTS = 200_000


@dataclass(frozen=True)
class Codebook:
    centers: np.ndarray
    rng_seed: int | None = None
    inertia: float = float("nan")
    n_updates: int = 0
    history: tuple = field(default=(), compare=False)

    @property
    def size(self) -> int:
        return self.centers.shape[0]

    @property
    def dim(self) -> int:
        return self.centers.shape[1]

    def assign(self, descriptor) -> int:
        return int(self.assign_many(np.atleast_2d(descriptor))[0])

    def assign_many(self, descriptors) -> np.ndarray:
        labels, _ = kernels.nearest_center(
            np.ascontiguousarray(descriptors, dtype=np.float64),
            np.ascontiguousarray(self.centers, dtype=np.float64),
        )
        return labels


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    return np.ascontiguousarray(pts)


def _generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def _check_distinct(pts: np.ndarray, V: int) -> None:
    if V < 1:
        raise ValueError(f"V must be >= 1, got {V}")
    n_distinct = np.unique(pts, axis=0).shape[0] if len(pts) else 0
    if n_distinct < V:
        raise NotEnoughDistinctPoints(
            f"need {V} distinct points, found {n_distinct} among {len(pts)}"
        )


def _sqdist_to(pts: np.ndarray, c: np.ndarray) -> np.ndarray:
    diff = pts - c
    return np.einsum("ij,ij->i", diff, diff)


def kmeanspp_probabilities(points, chosen) -> np.ndarray:
    """Sampling distribution D(x)^2 / sum D^2 given already chosen point indices."""
    pts = _as_points(points)
    d2 = np.full(len(pts), np.inf)
    for idx in chosen:
        d2 = np.minimum(d2, _sqdist_to(pts, pts[idx]))
    return d2 / d2.sum()


def kmeanspp_init(points, V: int, seed=0) -> np.ndarray:
    """Pick ``V`` distinct seed centres by D^2 sampling.

    The first centre is uniform over the points; each further centre is
    drawn with probability proportional to the squared distance to the
    nearest centre chosen so far.
    """
    pts = _as_points(points)
    _check_distinct(pts, V)
    rng = _generator(seed)
    n = len(pts)
    chosen = [int(rng.integers(n))]
    d2 = _sqdist_to(pts, pts[chosen[0]])
    for _ in range(1, V):
        cum = np.cumsum(d2)
        u = rng.random() * cum[-1]
        idx = min(int(np.searchsorted(cum, u, side="right")), n - 1)
        while d2[idx] == 0.0:
            idx -= 1
        chosen.append(idx)
        d2 = np.minimum(d2, _sqdist_to(pts, pts[idx]))
    return pts[chosen].copy()


def random_init(points, V: int, seed=0) -> np.ndarray:
    """Uniformly random distinct points as initial centres (plain K-means)."""
    pts = _as_points(points)
    _check_distinct(pts, V)
    rng = _generator(seed)
    uniq = np.unique(pts, axis=0)
    return uniq[np.sort(rng.choice(len(uniq), size=V, replace=False))].copy()


def _update_centers(pts, labels, d2, centers):
    V = centers.shape[0]
    sums = np.zeros_like(centers)
    np.add.at(sums, labels, pts)
    counts = np.bincount(labels, minlength=V)
    new = centers.copy()
    full = counts > 0
    new[full] = sums[full] / counts[full, None]
    empty = np.flatnonzero(~full)
    if empty.size:
        d2 = d2.copy()
        for c in empty:
            far = int(np.argmax(d2))
            new[c] = pts[far]
            d2[far] = -1.0
    return new


def lloyd(points, init_centers, max_iter: int = 100, tol: float = 1e-4,
          rng_seed=None) -> Codebook:
    """Alternate assignment and mean updates until the relative inertia
    change drops below ``tol``, the centres stop moving, or ``max_iter``
    updates have run. Emptied clusters are re-seeded at the point farthest
    from its current centre.
    """
    pts = _as_points(points)
    centers = np.array(init_centers, dtype=np.float64).reshape(-1, pts.shape[1])
    labels, d2 = kernels.nearest_center(pts, centers)
    inertia = float(d2.sum())
    history = [inertia]
    updates = 0
    for _ in range(max_iter):
        new = _update_centers(pts, labels, d2, centers)
        if np.array_equal(new, centers):
            break
        centers = new
        updates += 1
        labels, d2 = kernels.nearest_center(pts, centers)
        new_inertia = float(d2.sum())
        history.append(new_inertia)
        rel = (inertia - new_inertia) / inertia if inertia > 0 else 0.0
        inertia = new_inertia
        if rel < tol:
            break
    return Codebook(centers, rng_seed, inertia, updates, tuple(history))


def build_codebook(descriptors, V: int, seed: int = 0, max_iter: int = 100,
                   tol: float = 1e-4, max_points: int = DEFAULT_MAX_POINTS) -> Codebook:
    """Subsample (at most ``max_points``), seed with K-means++, refine with Lloyd."""
    pts = _as_points(descriptors)
    sub_seq, init_seq = np.random.SeedSequence(seed).spawn(2)
    if len(pts) > max_points:
        sub_rng = _generator(sub_seq)
        keep = np.sort(sub_rng.choice(len(pts), size=max_points, replace=False))
        pts = pts[keep]
    init = kmeanspp_init(pts, V, _generator(init_seq))
    return lloyd(pts, init, max_iter=max_iter, tol=tol, rng_seed=seed)
