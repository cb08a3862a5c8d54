"""Dense patch grid and 128-d SIFT descriptors (no orientation alignment)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import PatchOutOfBounds
from .image_core import GradientField

CLIP = 0.2


@dataclass(frozen=True)
class DenseSamplingParams:
    step: int = 8
    patch: int = 16

    def __post_init__(self):
        if self.step < 1:
            raise ValueError(f"step must be >= 1, got {self.step}")
        if self.patch < 4 or self.patch % 4:
            raise ValueError(f"patch must be >= 4 and divisible by 4, got {self.patch}")


@dataclass(frozen=True)
class SiftDescriptor:
    values: np.ndarray
    anchor: tuple[int, int]
    center: tuple[int, int]


def dense_grid(width: int, height: int, params: DenseSamplingParams) -> list[tuple[int, int]]:
    """Top-left patch anchors (x, y) in row-major order."""
    xs = range(0, width - params.patch + 1, params.step)
    ys = range(0, height - params.patch + 1, params.step)
    return [(x, y) for y in ys for x in xs]


def patch_center(anchor, patch: int) -> tuple[int, int]:
    return anchor[0] + patch // 2, anchor[1] + patch // 2


def normalize_descriptors(raw: np.ndarray, clip: float = CLIP) -> np.ndarray:
    """L2-normalise, clip at ``clip``, re-normalise. All-zero rows stay zero.

    Operates row-wise on an (n, 128) array.
    """
    raw = np.atleast_2d(np.asarray(raw, dtype=np.float64))
    out = np.zeros_like(raw)
    norms = np.linalg.norm(raw, axis=1)
    nz = norms > 0
    v = raw[nz] / norms[nz, None]
    v = np.minimum(v, clip)
    out[nz] = v / np.linalg.norm(v, axis=1)[:, None]
    return out


def _check_bounds(grad: GradientField, xs, ys, patch):
    h, w = grad.magnitude.shape
    bad = (xs < 0) | (ys < 0) | (xs + patch > w) | (ys + patch > h)
    if np.any(bad):
        k = int(np.argmax(bad))
        raise PatchOutOfBounds(
            f"patch {patch}x{patch} at ({int(xs[k])}, {int(ys[k])}) "
            f"does not fit a {w}x{h} gradient field"
        )


def raw_histograms(grad: GradientField, anchors, patch: int) -> np.ndarray:
    """Unnormalised 4x4x8 histograms, one row per anchor."""
    anchors = np.asarray(anchors, dtype=np.int64).reshape(-1, 2)
    xs = np.ascontiguousarray(anchors[:, 0])
    ys = np.ascontiguousarray(anchors[:, 1])
    _check_bounds(grad, xs, ys, patch)
    return kernels.sift_histograms(
        np.ascontiguousarray(grad.magnitude, dtype=np.float64),
        np.ascontiguousarray(grad.orientation, dtype=np.float64),
        xs, ys, patch,
    )


def sift_descriptor(grad: GradientField, anchor, patch: int = 16) -> SiftDescriptor:
    vals = normalize_descriptors(raw_histograms(grad, [anchor], patch))[0]
    return SiftDescriptor(vals, tuple(anchor), patch_center(anchor, patch))


def dense_sift(grad: GradientField, params: DenseSamplingParams):
    """All descriptors on the dense grid.

    Returns ``(descriptors, centers)`` as (n, 128) float and (n, 2) int
    arrays; both empty when no patch fits.
    """
    h, w = grad.magnitude.shape
    anchors = dense_grid(w, h, params)
    if not anchors:
        return np.zeros((0, 128)), np.zeros((0, 2), dtype=np.int64)
    desc = normalize_descriptors(raw_histograms(grad, anchors, params.patch))
    centers = np.asarray(anchors, dtype=np.int64) + params.patch // 2
    return desc, centers
