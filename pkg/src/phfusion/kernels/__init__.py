"""Hot inner loops, dispatched to the numba or numpy implementation.

Both modules expose the same functions with the same argument order:

``correlate_replicate(img, kernel)``
    2-D correlation with replicate (edge) padding.
``nonmax_suppress(mag, gx, gy)``
    Canny non-maximum suppression; returns surviving magnitudes, 0 elsewhere.
``hysteresis(nms, low, high)``
    8-connected hysteresis thresholding on absolute thresholds.
``sift_histograms(mag, ori, xs, ys, patch)``
    Raw 4x4x8 orientation histograms for every patch anchor.
``nearest_center(points, centers)``
    Nearest centre index (lowest index on ties) and squared distance.
``smo_solve(K, y, C, tol, max_passes, max_iter, seed, eps)``
    Simplified SMO on a precomputed kernel matrix.
"""
from .._backend import BACKEND
from . import _numpy

if BACKEND == "numba":
    from . import _numba as _impl
else:
    _impl = _numpy

correlate_replicate = _impl.correlate_replicate
nonmax_suppress = _impl.nonmax_suppress
hysteresis = _impl.hysteresis
sift_histograms = _impl.sift_histograms
nearest_center = _impl.nearest_center
smo_solve = _impl.smo_solve

__all__ = [
    "BACKEND",
    "correlate_replicate",
    "nonmax_suppress",
    "hysteresis",
    "sift_histograms",
    "nearest_center",
    "smo_solve",
]
