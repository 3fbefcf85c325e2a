from .extract import (
    FEATURE_TYPES,
    FeatureColumn,
    FeatureVector,
    canonical_columns,
    count_by_image_family,
    extract_case,
    image_features,
)
from .firstorder import FIRSTORDER_NAMES, first_order_features
from .matrices import DiscretizedVoi, TextureMatrices, build_texture_matrices, discretize
from .shape import SHAPE_NAMES, shape_features
from .texture import TEXTURE_NAMES, texture_features

__all__ = [
    "FEATURE_TYPES", "FIRSTORDER_NAMES", "SHAPE_NAMES", "TEXTURE_NAMES",
    "DiscretizedVoi", "FeatureColumn", "FeatureVector", "TextureMatrices",
    "build_texture_matrices", "canonical_columns", "count_by_image_family", "discretize",
    "extract_case", "first_order_features", "image_features", "shape_features",
    "texture_features",
]
