"""Quad-tree spatial pyramid geometry and per-level weights."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ImageTooSmallForLevel, LevelOutOfRange


@dataclass(frozen=True)
class PyramidParams:
    L: int = 2

    def __post_init__(self):
        if self.L < 0:
            raise LevelOutOfRange(f"highest level must be >= 0, got {self.L}")

    @property
    def levels(self):
        return range(self.L + 1)


@dataclass(frozen=True)
class CellRect:
    """Half-open pixel rectangle [x0, x1) x [y0, y1) at pyramid level ``level``."""

    x0: int
    y0: int
    x1: int
    y1: int
    level: int

    @property
    def area(self) -> int:
        return (self.x1 - self.x0) * (self.y1 - self.y0)


def cell_boundaries(extent: int, l: int) -> np.ndarray:
    """Cell edges along one axis: floor(c * extent / 2**l) for c = 0..2**l."""
    n = 1 << l
    return np.array([(c * extent) // n for c in range(n + 1)], dtype=np.int64)


def check_fits(width: int, height: int, L: int) -> None:
    n = 1 << L
    if width < n or height < n:
        raise ImageTooSmallForLevel(
            f"{width}x{height} image cannot be tiled at level {L} "
            f"(needs at least {n}x{n})"
        )


def cell_rects(width: int, height: int, l: int) -> list[CellRect]:
    if l < 0:
        raise LevelOutOfRange(f"level must be >= 0, got {l}")
    check_fits(width, height, l)
    xs = cell_boundaries(width, l)
    ys = cell_boundaries(height, l)
    n = 1 << l
    return [
        CellRect(int(xs[cx]), int(ys[cy]), int(xs[cx + 1]), int(ys[cy + 1]), l)
        for cy in range(n)
        for cx in range(n)
    ]


def cell_index(xs, ys, width: int, height: int, l: int) -> np.ndarray:
    """Row-major cell index at level ``l`` for each pixel coordinate pair."""
    n = 1 << l
    bx = cell_boundaries(width, l)
    by = cell_boundaries(height, l)
    cx = np.searchsorted(bx, np.asarray(xs), side="right") - 1
    cy = np.searchsorted(by, np.asarray(ys), side="right") - 1
    return np.clip(cy, 0, n - 1) * n + np.clip(cx, 0, n - 1)


def pixel_cell_map(width: int, height: int, l: int) -> np.ndarray:
    """(height, width) array holding each pixel's row-major cell index."""
    ys, xs = np.mgrid[0:height, 0:width]
    return cell_index(xs, ys, width, height, l)


def level_weight(l: int, L: int) -> float:
    """1/2**L at level 0 and 1/2**(L-l+1) above it."""
    if not (0 <= l <= L):
        raise LevelOutOfRange(f"need 0 <= l <= L, got l={l}, L={L}")
    if l == 0:
        return 1.0 / (1 << L)
    return 1.0 / (1 << (L - l + 1))


def pyramid_dim(per_cell_dim: int, L: int) -> int:
    if per_cell_dim < 1:
        raise ValueError(f"per_cell_dim must be >= 1, got {per_cell_dim}")
    if L < 0:
        raise LevelOutOfRange(f"highest level must be >= 0, got {L}")
    return per_cell_dim * sum(4 ** l for l in range(L + 1))


def level_offsets(per_cell_dim: int, L: int) -> tuple[int, ...]:
    """Start index of each level's block in a concatenated pyramid vector."""
    offs, acc = [], 0
    for l in range(L + 1):
        offs.append(acc)
        acc += per_cell_dim * 4 ** l
    return tuple(offs)
