"""The three pyramid descriptors: PHOW (visual words), PHOC (HSV colour),
PHOG (edge orientations).

Every builder concatenates levels 0..L, cells row-major inside a level, and
scales level ``l`` by :func:`phfusion.pyramid.level_weight`.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .codebook import Codebook
from .dense_sift import DenseSamplingParams, dense_sift
from .errors import NoPatchesFit
from .image_core import (
    EdgeMap,
    GradientField,
    RgbImage,
    canny_edges,
    rgb_to_hsv_array,
    sobel_gradients,
    to_grayscale,
)
from .pyramid import (
    CellRect,
    PyramidParams,
    cell_index,
    check_fits,
    level_offsets,
    level_weight,
    pixel_cell_map,
    pyramid_dim,
)


class FeatureKind(str, Enum):
    PHOW = "phow"
    PHOC = "phoc"
    PHOG = "phog"


FEATURE_KINDS = (FeatureKind.PHOW, FeatureKind.PHOC, FeatureKind.PHOG)


class OrientationRange(str, Enum):
    FULL_360 = "full360"
    HALF_180 = "half180"

    @property
    def degrees(self) -> float:
        return 360.0 if self is OrientationRange.FULL_360 else 180.0


@dataclass(frozen=True)
class ColorQuantParams:
    h_bins: int = 8
    s_bins: int = 3
    v_bins: int = 3

    def __post_init__(self):
        if min(self.h_bins, self.s_bins, self.v_bins) < 1:
            raise ValueError("HSV bin counts must all be >= 1")

    @property
    def n_bins(self) -> int:
        return self.h_bins * self.s_bins * self.v_bins


@dataclass(frozen=True)
class OrientationParams:
    k_bins: int = 20
    range: OrientationRange = OrientationRange.FULL_360

    def __post_init__(self):
        if self.k_bins < 2:
            raise ValueError(f"k_bins must be >= 2, got {self.k_bins}")
        object.__setattr__(self, "range", OrientationRange(self.range))


@dataclass(frozen=True)
class FeatureVector:
    kind: FeatureKind
    values: np.ndarray
    level_offsets: tuple[int, ...]

    def __len__(self):
        return self.values.shape[0]

    def level_block(self, l: int) -> np.ndarray:
        offs = self.level_offsets + (len(self),)
        return self.values[offs[l]:offs[l + 1]]


# ---------------------------------------------------------------- PHOC

def _sub_bin(value, width, bins):
    return np.minimum(np.floor(np.asarray(value) / width).astype(np.int64), bins - 1)


def hsv_bin_index(h, s, v, params: ColorQuantParams = ColorQuantParams()):
    """Joint HSV bin: h_bin * (s_bins * v_bins) + s_bin * v_bins + v_bin.

    Works on scalars or arrays; values at the top of a range clamp into the
    last bin.
    """
    hb = _sub_bin(h, 360.0 / params.h_bins, params.h_bins)
    sb = _sub_bin(s, 1.0 / params.s_bins, params.s_bins)
    vb = _sub_bin(v, 1.0 / params.v_bins, params.v_bins)
    idx = hb * (params.s_bins * params.v_bins) + sb * params.v_bins + vb
    return int(idx) if np.ndim(idx) == 0 else idx


def build_phoc(img: RgbImage, pyr: PyramidParams = PyramidParams(),
               q: ColorQuantParams = ColorQuantParams()) -> FeatureVector:
    w, h = img.width, img.height
    check_fits(w, h, pyr.L)
    hh, ss, vv = rgb_to_hsv_array(img.pixels)
    bins = hsv_bin_index(hh, ss, vv, q)
    n_pixels = w * h
    nb = q.n_bins
    blocks = []
    for l in pyr.levels:
        cells = pixel_cell_map(w, h, l)
        counts = np.bincount((cells * nb + bins).ravel(), minlength=4 ** l * nb)
        blocks.append(counts * (level_weight(l, pyr.L) / n_pixels))
    return FeatureVector(FeatureKind.PHOC, np.concatenate(blocks),
                         level_offsets(nb, pyr.L))


# ---------------------------------------------------------------- PHOG

def orientation_bins(theta, params: OrientationParams) -> np.ndarray:
    span = params.range.degrees
    t = np.asarray(theta, dtype=np.float64)
    if params.range is OrientationRange.HALF_180:
        t = np.mod(t, 180.0)
    b = np.floor(t / (span / params.k_bins)).astype(np.int64)
    return np.where(b >= params.k_bins, 0, b)


def orientation_histogram(grad: GradientField, edges: EdgeMap, cell: CellRect,
                          params: OrientationParams = OrientationParams()) -> np.ndarray:
    """Magnitude-weighted orientation histogram of the edge pixels in ``cell``."""
    sl = (slice(cell.y0, cell.y1), slice(cell.x0, cell.x1))
    sel = edges.mask[sl]
    b = orientation_bins(grad.orientation[sl][sel], params)
    return np.bincount(b, weights=grad.magnitude[sl][sel], minlength=params.k_bins)


def build_phog(img: RgbImage, pyr: PyramidParams = PyramidParams(),
               params: OrientationParams = OrientationParams(),
               canny_low: float = 0.1, canny_high: float = 0.2) -> FeatureVector:
    w, h = img.width, img.height
    check_fits(w, h, pyr.L)
    gray = to_grayscale(img)
    edges = canny_edges(gray, canny_low, canny_high)
    grad = sobel_gradients(gray)
    k = params.k_bins
    ys, xs = np.nonzero(edges.mask)
    b = orientation_bins(grad.orientation[ys, xs], params)
    m = grad.magnitude[ys, xs]
    blocks = []
    for l in pyr.levels:
        cells = cell_index(xs, ys, w, h, l)
        block = np.bincount(cells * k + b, weights=m, minlength=4 ** l * k)
        total = block.sum()
        if total > 0:
            block = block * (level_weight(l, pyr.L) / total)
        blocks.append(block)
    return FeatureVector(FeatureKind.PHOG, np.concatenate(blocks),
                         level_offsets(k, pyr.L))


# ---------------------------------------------------------------- PHOW

def extract_descriptors(img: RgbImage, samp: DenseSamplingParams = DenseSamplingParams()):
    """Dense SIFT descriptors and patch centres for an image."""
    grad = sobel_gradients(to_grayscale(img))
    return dense_sift(grad, samp)


def phow_from_words(words, centers, width: int, height: int, V: int,
                    pyr: PyramidParams = PyramidParams()) -> FeatureVector:
    """Pyramid word histogram from pre-assigned words and patch centres."""
    words = np.asarray(words, dtype=np.int64)
    centers = np.asarray(centers, dtype=np.int64).reshape(-1, 2)
    n = words.shape[0]
    if n == 0:
        raise NoPatchesFit(f"no patches in a {width}x{height} image")
    blocks = []
    for l in pyr.levels:
        cells = cell_index(centers[:, 0], centers[:, 1], width, height, l)
        counts = np.bincount(cells * V + words, minlength=4 ** l * V)
        blocks.append(counts * (level_weight(l, pyr.L) / n))
    return FeatureVector(FeatureKind.PHOW, np.concatenate(blocks), level_offsets(V, pyr.L))


def build_phow(img: RgbImage, codebook: Codebook, pyr: PyramidParams = PyramidParams(),
               samp: DenseSamplingParams = DenseSamplingParams()) -> FeatureVector:
    w, h = img.width, img.height
    check_fits(w, h, pyr.L)
    desc, centers = extract_descriptors(img, samp)
    if len(desc) == 0:
        raise NoPatchesFit(
            f"no {samp.patch}x{samp.patch} patch fits a {w}x{h} image"
        )
    words = codebook.assign_many(desc)
    return phow_from_words(words, centers, w, h, codebook.size, pyr)


def feature_dim(kind: FeatureKind, L: int, V: int = 200,
                q: ColorQuantParams = ColorQuantParams(),
                o: OrientationParams = OrientationParams()) -> int:
    per_cell = {FeatureKind.PHOW: V, FeatureKind.PHOC: q.n_bins,
                FeatureKind.PHOG: o.k_bins}[FeatureKind(kind)]
    return pyramid_dim(per_cell, L)
