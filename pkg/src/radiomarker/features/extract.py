"""Full per-case feature vector: 14 shape + 17 image types x 93 = 1595 values."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..filters import IMAGE_TYPES, derive_all
from ..volume_io import EmptyMaskError, MaskVolume, Volume3D, VolumeFormatError, crop
from .firstorder import FIRSTORDER_NAMES, first_order_features
from .matrices import build_texture_matrices, discretize
from .shape import SHAPE_NAMES, shape_features
from .texture import TEXTURE_NAMES, texture_features

FEATURE_TYPES = ("Shape", "FirstOrder", "GLCM", "GLDM", "GLRLM", "GLSZM", "NGTDM")
FILTER_MARGIN = 3


@dataclass(frozen=True)
class FeatureColumn:
    image_type: str
    feature_type: str
    feature: str

    @property
    def name(self) -> str:
        return f"{self.image_type}_{self.feature_type}_{self.feature}"

    @classmethod
    def parse(cls, name: str) -> "FeatureColumn":
        image_type, feature_type, feature = name.split("_", 2)
        return cls(image_type, feature_type, feature)


def _per_image_columns(image_type: str) -> list[FeatureColumn]:
    cols = [FeatureColumn(image_type, "FirstOrder", n) for n in FIRSTORDER_NAMES]
    for family, names in TEXTURE_NAMES.items():
        cols += [FeatureColumn(image_type, family, n) for n in names]
    return cols


def canonical_columns() -> list[FeatureColumn]:
    """Column descriptors in canonical order (image type major, feature type minor)."""
    cols = [FeatureColumn("original", "Shape", n) for n in SHAPE_NAMES]
    for image_type in IMAGE_TYPES:
        cols += _per_image_columns(image_type)
    return cols


@dataclass(frozen=True, eq=False)
class FeatureVector:
    case_id: str
    columns: tuple[FeatureColumn, ...]
    values: np.ndarray

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.columns]

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names, self.values.tolist()))


def image_features(image: Volume3D, mask: MaskVolume, bin_width: float) -> list[float]:
    """The 93 first-order and texture values of one image type."""
    d = discretize(image, mask, bin_width)
    x = image.voxels[mask.voxels]
    levels = d.levels[d.levels > 0]
    voxel_volume = float(np.prod(image.spacing))
    fo = first_order_features(x, levels, voxel_volume)
    tex = texture_features(build_texture_matrices(d))
    out = [fo[n] for n in FIRSTORDER_NAMES]
    for family, names in TEXTURE_NAMES.items():
        out += [tex[family][n] for n in names]
    return out


def extract_case(v: Volume3D, mask: MaskVolume, bin_width: float = 25.0, case_id: str = "") -> FeatureVector:
    if not bin_width > 0:
        raise ValueError(f"bin width must be positive, got {bin_width}")
    if v.dims != mask.dims:
        raise VolumeFormatError(f"mask dims {mask.dims} differ from volume dims {v.dims}")
    if not mask.voxels.any():
        raise EmptyMaskError(f"case {case_id!r}: empty VOI")
    v, mask = crop(v, mask, FILTER_MARGIN)
    shape = shape_features(mask.voxels, v.spacing)
    values = [shape[n] for n in SHAPE_NAMES]
    values += image_features(v, mask, bin_width)
    for derived in derive_all(v, mask):
        values += image_features(derived.volume, mask, bin_width)
    arr = np.asarray(values, dtype=np.float64)
    return FeatureVector(case_id, tuple(canonical_columns()), arr)


def count_by_image_family(columns) -> dict[str, int]:
    """Column counts per image family.

    The three LBP maps and the eight wavelet bands are reported as one
    family each.
    """
    counts: dict[str, int] = {}
    for c in columns:
        family = c.image_type.split("-")[0]
        counts[family] = counts.get(family, 0) + 1
    return counts
