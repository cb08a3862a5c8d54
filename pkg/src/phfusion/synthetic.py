"""Seeded generator for a small shape / colour / texture dataset.

Each class owns a hue, a silhouette and a background texture. Images are
jittered in position, scale, hue and brightness and carry pixel noise. With
probability ``swap_rate`` one of the three cues of an image is borrowed from
another class, so no single cue is perfectly reliable on its own.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

SHAPES = ("disc", "square", "triangle", "cross")
TEXTURES = ("smooth", "hstripes", "checker", "dstripes")
HUES = (0.0, 120.0, 240.0, 55.0)


@dataclass(frozen=True)
class SyntheticSpec:
    n_classes: int = 4
    per_class: int = 50
    size: int = 64
    noise: float = 8.0
    swap_rate: float = 0.10

    def __post_init__(self):
        if not 2 <= self.n_classes <= len(SHAPES):
            raise ValueError(f"n_classes must lie in [2, {len(SHAPES)}]")
        if self.size < 32:
            raise ValueError("size must be >= 32")


def _hsv_to_rgb(h, s, v):
    c = v * s
    hp = (h % 360.0) / 60.0
    x = c * (1 - abs(hp % 2 - 1))
    r, g, b = [(c, x, 0), (x, c, 0), (0, c, x), (0, x, c), (x, 0, c), (c, 0, x)][int(hp) % 6]
    m = v - c
    return np.array([r + m, g + m, b + m]) * 255.0


def _shape_mask(shape: str, size: int, cx, cy, r) -> np.ndarray:
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    dx, dy = xx - cx, yy - cy
    if shape == "disc":
        return dx * dx + dy * dy <= r * r
    if shape == "square":
        return (np.abs(dx) <= r * 0.85) & (np.abs(dy) <= r * 0.85)
    if shape == "triangle":
        # apex at cy - r, base at cy + 0.6r
        return (dy <= r * 0.6) & (dy >= -r) & (np.abs(dx) <= (dy + r) * 0.6)
    if shape == "cross":
        arm = r * 0.32
        return ((np.abs(dx) <= arm) & (np.abs(dy) <= r)) | ((np.abs(dy) <= arm) & (np.abs(dx) <= r))
    raise ValueError(shape)


def _texture(texture: str, size: int, period: float, phase: float) -> np.ndarray:
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    if texture == "smooth":
        return np.zeros((size, size))
    if texture == "hstripes":
        return np.where(((yy + phase) // period) % 2 == 0, 1.0, -1.0)
    if texture == "checker":
        return np.where((((xx + phase) // period) + ((yy + phase) // period)) % 2 == 0, 1.0, -1.0)
    if texture == "dstripes":
        return np.where(((xx + yy + phase) // (period * 1.4)) % 2 == 0, 1.0, -1.0)
    raise ValueError(texture)


def render(cls: int, rng: np.random.Generator, spec: SyntheticSpec = SyntheticSpec()) -> np.ndarray:
    """One HxWx3 uint8 image of class ``cls``."""
    size = spec.size
    cues = [cls, cls, cls]  # hue, shape, texture
    if rng.random() < spec.swap_rate:
        which = int(rng.integers(3))
        other = int(rng.integers(spec.n_classes - 1))
        cues[which] = other + (other >= cls)
    hue = HUES[cues[0]] + rng.uniform(-12, 12)
    shape = SHAPES[cues[1]]
    texture = TEXTURES[cues[2]]

    period = rng.uniform(3.5, 5.0)
    tex = _texture(texture, size, period, rng.uniform(0, 2 * period))
    bg_level = rng.uniform(110, 150)
    img = np.repeat((bg_level + 45.0 * tex)[:, :, None], 3, axis=2)

    r = size * rng.uniform(0.24, 0.32)
    cx = size / 2 + rng.uniform(-0.12, 0.12) * size
    cy = size / 2 + rng.uniform(-0.12, 0.12) * size
    mask = _shape_mask(shape, size, cx, cy, r)
    fg = _hsv_to_rgb(hue, rng.uniform(0.75, 1.0), rng.uniform(0.75, 1.0))
    img[mask] = fg

    img += rng.normal(0.0, spec.noise, img.shape)
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def write_dataset(root, spec: SyntheticSpec = SyntheticSpec(), seed: int = 0) -> list[str]:
    """Write ``root/class_k/img_###.png``; returns the class directory names."""
    root = Path(root)
    names = [f"class_{k}" for k in range(spec.n_classes)]
    children = np.random.SeedSequence(seed).spawn(spec.n_classes)
    for k, name in enumerate(names):
        d = root / name
        d.mkdir(parents=True, exist_ok=True)
        rng = np.random.default_rng(children[k])
        for i in range(spec.per_class):
            Image.fromarray(render(k, rng, spec)).save(d / f"img_{i:03d}.png")
    return names
