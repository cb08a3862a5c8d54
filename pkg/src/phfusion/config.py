"""Full parameter record for a trained model."""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace

import numpy as np

from .dense_sift import DenseSamplingParams
from .features import ColorQuantParams, OrientationParams, OrientationRange
from .pyramid import PyramidParams
from .svm import DEFAULT_C_GRID, KernelKind, SmoParams


@dataclass(frozen=True)
class PipelineConfig:
    levels: int = 2
    words: int = 200
    step: int = 8
    patch: int = 16
    h_bins: int = 8
    s_bins: int = 3
    v_bins: int = 3
    k_bins: int = 20
    orientation_range: str = OrientationRange.FULL_360.value
    canny_low: float = 0.1
    canny_high: float = 0.2
    kernel: str = KernelKind.LINEAR.value
    gamma: float = 0.0  # 0 = pick 1/median squared distance per feature
    c_grid: tuple = DEFAULT_C_GRID
    cv_folds: int = 5
    seed: int = 0
    max_descriptors: int = 200_000
    kmeans_max_iter: int = 100
    kmeans_tol: float = 1e-4
    smo_tol: float = 1e-3
    smo_max_passes: int = 10
    bow_baseline: bool = True
    train_per_class: int = 0  # split provenance; 0 = not recorded

    def __post_init__(self):
        object.__setattr__(self, "c_grid", tuple(float(c) for c in self.c_grid))
        object.__setattr__(self, "orientation_range",
                           OrientationRange(self.orientation_range).value)
        object.__setattr__(self, "kernel", KernelKind(self.kernel).value)
        if not self.c_grid:
            raise ValueError("c_grid must not be empty")

    @property
    def pyramid(self) -> PyramidParams:
        return PyramidParams(self.levels)

    @property
    def sampling(self) -> DenseSamplingParams:
        return DenseSamplingParams(self.step, self.patch)

    @property
    def color(self) -> ColorQuantParams:
        return ColorQuantParams(self.h_bins, self.s_bins, self.v_bins)

    @property
    def orientation(self) -> OrientationParams:
        return OrientationParams(self.k_bins, OrientationRange(self.orientation_range))

    @property
    def smo(self) -> SmoParams:
        return SmoParams(self.smo_tol, self.smo_max_passes)

    def stage_seeds(self) -> dict[str, int]:
        """Independent 32-bit seeds for each randomised training stage."""
        names = ("codebook", "cv", "svm")
        children = np.random.SeedSequence(self.seed).spawn(len(names))
        return {n: int(c.generate_state(1)[0]) for n, c in zip(names, children)}

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in known})

    def with_(self, **kw) -> "PipelineConfig":
        return replace(self, **kw)
