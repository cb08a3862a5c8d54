"""Image decoding and pixel-level primitives: luminance, HSV, Sobel, Canny."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from . import kernels
from .errors import (
    CorruptImage,
    ImageFileNotFound,
    ImageTooSmall,
    InvalidThresholds,
    UnsupportedFormat,
)

SUPPORTED_FORMATS = ("PNG", "JPEG")

# Sobel as smoothing [1, 2, 1] across the derivative axis, then the
# difference [-1, 0, 1] / 8 along it. The separable form yields exact zeros
# on flat regions, which the full 3x3 sum does not guarantee.
_SMOOTH_ROWS = np.array([[1.0], [2.0], [1.0]])
_SMOOTH_COLS = _SMOOTH_ROWS.T.copy()
_DIFF_X = np.array([[-1.0, 0.0, 1.0]]) / 8.0
_DIFF_Y = _DIFF_X.T.copy()


def _gaussian_kernel(sigma=1.0, size=5):
    r = size // 2
    ax = np.arange(-r, r + 1, dtype=np.float64)
    g = np.exp(-(ax ** 2) / (2.0 * sigma * sigma))
    k = np.outer(g, g)
    return k / k.sum()


_GAUSS_5 = _gaussian_kernel(1.0, 5)


@dataclass(frozen=True)
class RgbImage:
    """8-bit RGB pixels, shape (height, width, 3), row-major."""

    pixels: np.ndarray

    def __post_init__(self):
        px = self.pixels
        if px.ndim != 3 or px.shape[2] != 3 or px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError(f"RgbImage needs shape (h, w, 3), got {px.shape}")
        if px.dtype != np.uint8:
            raise ValueError(f"RgbImage needs uint8 pixels, got {px.dtype}")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class GrayImage:
    """Luminance in [0, 1], shape (height, width)."""

    values: np.ndarray

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class GradientField:
    """Per-pixel derivatives, magnitude and orientation in degrees [0, 360).

    ``gx`` grows to the right, ``gy`` grows downward (image row order), so a
    gradient pointing down the image has orientation 90.
    """

    gx: np.ndarray
    gy: np.ndarray
    magnitude: np.ndarray
    orientation: np.ndarray


@dataclass(frozen=True)
class EdgeMap:
    mask: np.ndarray

    @property
    def width(self) -> int:
        return self.mask.shape[1]

    @property
    def height(self) -> int:
        return self.mask.shape[0]


def load_image(path) -> RgbImage:
    """Decode a PNG or JPEG file. Grayscale and palette images become RGB."""
    path = Path(path)
    if not path.is_file():
        raise ImageFileNotFound(path)
    try:
        with Image.open(path) as im:
            fmt = im.format
            if fmt not in SUPPORTED_FORMATS:
                raise UnsupportedFormat(path, f"detected {fmt}")
            im.load()
            if im.mode in ("I;16", "I;16B", "I;16L", "I"):
                # 16-bit grayscale PNG: scale to 8 bits before expansion
                arr = np.asarray(im, dtype=np.float64)
                arr = np.clip(np.round(arr / 257.0), 0, 255).astype(np.uint8)
                rgb = np.repeat(arr[:, :, None], 3, axis=2)
            else:
                if im.mode in ("RGBA", "LA", "PA") or (
                    im.mode == "P" and "transparency" in im.info
                ):
                    im = im.convert("RGBA").convert("RGB")
                else:
                    im = im.convert("RGB")
                rgb = np.asarray(im, dtype=np.uint8)
    except UnidentifiedImageError as exc:
        raise UnsupportedFormat(path, "not a recognised image") from exc
    except (OSError, SyntaxError, ValueError) as exc:
        raise CorruptImage(path, str(exc)) from exc
    return RgbImage(np.ascontiguousarray(rgb))


def to_grayscale(img: RgbImage) -> GrayImage:
    px = img.pixels.astype(np.float64)
    lum = (0.299 * px[:, :, 0] + 0.587 * px[:, :, 1] + 0.114 * px[:, :, 2]) / 255.0
    return GrayImage(np.clip(lum, 0.0, 1.0))


def rgb_to_hsv(r, g, b):
    """Hexcone RGB -> HSV for one 8-bit pixel; hue in degrees."""
    h, s, v = rgb_to_hsv_array(np.array([[[r, g, b]]], dtype=np.uint8))
    return float(h[0, 0]), float(s[0, 0]), float(v[0, 0])


def rgb_to_hsv_array(pixels: np.ndarray):
    """Vectorised hexcone conversion of an (h, w, 3) uint8 array.

    Returns hue in [0, 360), saturation and value in [0, 1]; hue is 0 for
    achromatic pixels.
    """
    px = pixels.astype(np.float64) / 255.0
    r, g, b = px[..., 0], px[..., 1], px[..., 2]
    mx = px.max(axis=-1)
    mn = px.min(axis=-1)
    delta = mx - mn
    v = mx
    s = np.divide(delta, mx, out=np.zeros_like(mx), where=mx > 0)
    safe = np.where(delta > 0, delta, 1.0)
    hr = ((g - b) / safe) % 6.0
    hg = (b - r) / safe + 2.0
    hb = (r - g) / safe + 4.0
    h = np.where(mx == r, hr, np.where(mx == g, hg, hb)) * 60.0
    h = np.where(delta > 0, h, 0.0)
    h = np.where(h >= 360.0, h - 360.0, h)
    return h, s, v


def _wrap_degrees(theta):
    t = np.mod(theta, 360.0)
    # np.mod of tiny negatives rounds to exactly 360.0
    return np.where(t >= 360.0, 0.0, t)


def gradient_field(gx: np.ndarray, gy: np.ndarray) -> GradientField:
    mag = np.sqrt(gx * gx + gy * gy)
    ori = _wrap_degrees(np.degrees(np.arctan2(gy, gx)))
    return GradientField(gx, gy, mag, ori)


def sobel_gradients(img: GrayImage) -> GradientField:
    """3x3 Sobel derivatives with replicate padding.

    The kernels are scaled by 1/8 so that ``gx`` approximates dI/dx in
    intensity units per pixel.
    """
    if img.width < 3 or img.height < 3:
        raise ImageTooSmall(
            f"sobel needs at least 3x3 pixels, got {img.width}x{img.height}"
        )
    vals = np.ascontiguousarray(img.values, dtype=np.float64)
    gx = kernels.correlate_replicate(kernels.correlate_replicate(vals, _SMOOTH_ROWS), _DIFF_X)
    gy = kernels.correlate_replicate(kernels.correlate_replicate(vals, _SMOOTH_COLS), _DIFF_Y)
    return gradient_field(gx, gy)


def gaussian_smooth(img: GrayImage) -> GrayImage:
    vals = np.ascontiguousarray(img.values, dtype=np.float64)
    return GrayImage(kernels.correlate_replicate(vals, _GAUSS_5))


def non_max_suppression(grad: GradientField) -> np.ndarray:
    """Magnitudes of pixels that are local maxima across the edge, else 0."""
    return kernels.nonmax_suppress(
        np.ascontiguousarray(grad.magnitude),
        np.ascontiguousarray(grad.gx),
        np.ascontiguousarray(grad.gy),
    )


def canny_edges(img: GrayImage, low: float = 0.1, high: float = 0.2) -> EdgeMap:
    """Canny detector: 5x5 Gaussian (sigma 1), Sobel, NMS, hysteresis.

    ``low`` and ``high`` are fractions of the maximum gradient magnitude of
    the smoothed image.
    """
    if not (0.0 <= low < high <= 1.0):
        raise InvalidThresholds(f"need 0 <= low < high <= 1, got low={low}, high={high}")
    if img.width < 3 or img.height < 3:
        raise ImageTooSmall(
            f"canny needs at least 3x3 pixels, got {img.width}x{img.height}"
        )
    grad = sobel_gradients(gaussian_smooth(img))
    max_m = float(grad.magnitude.max())
    if max_m <= 0.0:
        return EdgeMap(np.zeros((img.height, img.width), dtype=bool))
    nms = non_max_suppression(grad)
    mask = kernels.hysteresis(nms, low * max_m, high * max_m)
    return EdgeMap(np.asarray(mask, dtype=bool))
