"""Deterministic synthetic phantoms and feature tables.

All randomness comes from :class:`~radiomarker.rng.SplitMix64`, so the
same spec gives the same arrays on every platform. Phantom intensities
are rounded to float32 so they survive a round trip through an ``f32``
volume file unchanged.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .features.extract import FeatureColumn
from .rng import SplitMix64, derive_seed
from .table import FeatureTable
from .volume_io import MaskVolume, Volume3D


@dataclass(frozen=True)
class PhantomSpec:
    """One ellipsoidal lesion in smoothed white noise.

    ``radius`` and ``offset`` hold the box-smoothing radius (voxels) and
    intensity offset (HU) for class 0 and class 1; ``class_label``
    picks one pair.
    """

    seed: int = 0
    class_label: int = 0
    dims: tuple[int, int, int] = (48, 48, 48)
    spacing: tuple[float, float, float] = (1.0, 1.0, 1.0)
    semi_axes: tuple[float, float, float] = (14.0, 11.0, 9.0)
    radius: tuple[int, int] = (1, 2)
    offset: tuple[float, float] = (40.0, 40.0)
    noise_sd: float = 100.0

    def __post_init__(self):
        if self.class_label not in (0, 1):
            raise ValueError("class_label must be 0 or 1")
        if len(self.dims) != 3 or min(self.dims) < 1:
            raise ValueError("dims must be three positive integers")
        if any(s <= 0 for s in self.spacing) or any(a <= 0 for a in self.semi_axes):
            raise ValueError("spacing and semi-axes must be positive")
        if any(int(r) != r or r < 0 for r in self.radius):
            raise ValueError("smoothing radius must be a non-negative integer")
        for n, sp, a in zip(self.dims, self.spacing, self.semi_axes):
            if a > (n - 1) / 2 * sp:
                raise ValueError(f"ellipsoid semi-axis {a} mm exceeds the grid half-extent "
                                 f"{(n - 1) / 2 * sp} mm")


def box_smooth(x: np.ndarray, radius: int) -> np.ndarray:
    """Mean over the ``(2r+1)^3`` cube around each voxel, periodic boundaries."""
    out = x
    for axis in range(3):
        acc = np.zeros_like(out)
        for d in range(-radius, radius + 1):
            acc += np.roll(out, d, axis=axis)
        out = acc / (2 * radius + 1)
    return out


def ellipsoid_mask(dims, spacing, semi_axes) -> np.ndarray:
    grids = np.meshgrid(*[(np.arange(n) - (n - 1) / 2) * sp / a
                          for n, sp, a in zip(dims, spacing, semi_axes)], indexing="ij")
    return sum(g * g for g in grids) <= 1.0


def gen_phantom(spec: PhantomSpec) -> tuple[Volume3D, MaskVolume]:
    nx, ny, nz = spec.dims
    rng = SplitMix64(spec.seed)
    noise = rng.normal(nx * ny * nz).reshape(nz, ny, nx).transpose(2, 1, 0)
    field = box_smooth(noise, int(spec.radius[spec.class_label])) * spec.noise_sd
    vox = (field + spec.offset[spec.class_label]).astype(np.float32).astype(np.float64)
    mask = ellipsoid_mask(spec.dims, spec.spacing, spec.semi_axes)
    return Volume3D(vox, spec.spacing), MaskVolume(mask)


def phantom_cohort(n_cases: int, seed: int = 0, class_fractions=(2, 1),
                   **spec_kwargs) -> list[tuple[str, PhantomSpec]]:
    """Case ids and specs of a labelled phantom cohort."""
    if n_cases < 1:
        raise ValueError("need at least one case")
    labels = _labels(n_cases, class_fractions, seed, min_count=0)
    return [(f"case{i:03d}", PhantomSpec(derive_seed(seed, "phantom", i), int(labels[i]),
                                         **spec_kwargs))
            for i in range(n_cases)]


def _class_counts(n_cases: int, class_fractions, min_count: int = 2) -> tuple[int, int]:
    f = np.asarray(class_fractions, dtype=np.float64)
    if f.shape != (2,) or np.any(f <= 0) or not np.all(np.isfinite(f)):
        raise ValueError("class_fractions must be two positive numbers")
    n1 = int(round(n_cases * f[1] / f.sum()))
    n0 = n_cases - n1
    if min(n0, n1) < min_count:
        raise ValueError(f"class counts {n0}/{n1}: both must be at least {min_count}")
    return n0, n1


def _labels(n_cases: int, class_fractions, seed: int, min_count: int = 2) -> np.ndarray:
    n0, n1 = _class_counts(n_cases, class_fractions, min_count)
    y = np.r_[np.zeros(n0, dtype=np.int64), np.ones(n1, dtype=np.int64)]
    return y[SplitMix64(derive_seed(seed, "labels")).permutation(n_cases)]


def gen_tabular(seed: int, n_cases: int = 42, n_features: int = 200, n_informative: int = 5,
                effect_size: float = 1.5, class_fractions=(28, 14),
                feature_types=None) -> FeatureTable:
    """Standard-normal features; the first ``n_informative`` columns are
    shifted by ``effect_size`` in the positive class.

    ``class_fractions`` gives the relative sizes of class 0 and class 1.
    ``feature_types`` optionally tags each column; the default tag is
    ``FirstOrder``. Columns are named ``synthetic_<type>_fNNNN``.
    """
    if not 0 <= n_informative <= n_features:
        raise ValueError("n_informative must lie in [0, n_features]")
    y = _labels(n_cases, class_fractions, seed)
    X = SplitMix64(derive_seed(seed, "features")).normal(n_cases * n_features)
    X = X.reshape(n_cases, n_features)
    X[y == 1, :n_informative] += effect_size
    if feature_types is None:
        feature_types = ["FirstOrder"] * n_features
    if len(feature_types) != n_features:
        raise ValueError("one feature type per column required")
    cols = [FeatureColumn("synthetic", ft, f"f{j:04d}") for j, ft in enumerate(feature_types)]
    return FeatureTable([f"case{i:03d}" for i in range(n_cases)], y, cols, X)
