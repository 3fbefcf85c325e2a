"""Derived image types: scalar intensity maps, gradient, LBP3D and Haar wavelets.

All filters return images with the dims and spacing of their source.
:func:`derive_all` produces the 16 derived images that, together with the
original, make up the 17 image types of a feature vector.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .volume_io import EmptyMaskError, MaskVolume, Volume3D

SCALAR_KINDS = ("exponential", "logarithm", "square", "squareroot")
LBP_TAGS = ("lbp3d-m1", "lbp3d-m2", "lbp3d-k")
WAVELET_BANDS = tuple("".join(b) for b in itertools.product("LH", repeat=3))
WAVELET_TAGS = tuple(f"wavelet-{b}" for b in WAVELET_BANDS)
DERIVED_TAGS = (
    "exponential", "gradient", *LBP_TAGS, "logarithm", "square", "squareroot", *WAVELET_TAGS,
)
IMAGE_TYPES = ("original", *DERIVED_TAGS)

_SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class DerivedImage:
    image_type: str
    volume: Volume3D


def _like(v: Volume3D, data: np.ndarray) -> Volume3D:
    return Volume3D(data, v.spacing)


def masked_max_abs(v: Volume3D, mask: MaskVolume) -> float:
    if v.dims != mask.dims:
        raise ValueError(f"mask dims {mask.dims} differ from volume dims {v.dims}")
    if not mask.voxels.any():
        raise EmptyMaskError("intensity transform needs a non-empty mask")
    return float(np.max(np.abs(v.voxels[mask.voxels])))


def intensity_transform(v: Volume3D, mask: MaskVolume, kind: str) -> DerivedImage:
    """Range-preserving monotone intensity maps scaled by ``M = max|x|`` in the mask.

    ==============  ===================================
    square          ``x**2 / M``
    squareroot      ``sign(x) * sqrt(|x| * M)``
    logarithm       ``sign(x) * M * log1p(|x|) / log1p(M)``
    exponential     ``exp(x * log(M) / M)``
    ==============  ===================================

    ``M == 0`` (any kind) and ``M == 1`` (exponential, logarithm) return
    the input unchanged.
    """
    if kind not in SCALAR_KINDS:
        raise ValueError(f"unknown intensity transform {kind!r}")
    M = masked_max_abs(v, mask)
    x = v.voxels
    if M == 0.0 or (M == 1.0 and kind in ("exponential", "logarithm")):
        return DerivedImage(kind, v)
    if kind == "square":
        out = x * x / M
    elif kind == "squareroot":
        out = np.sign(x) * np.sqrt(np.abs(x) * M)
    elif kind == "logarithm":
        out = np.sign(x) * M * np.log1p(np.abs(x)) / np.log1p(M)
    else:
        # overflow outside the VOI is clipped; masked voxels stay <= M
        with np.errstate(over="ignore"):
            out = np.exp(np.minimum(x * (np.log(M) / M), 700.0))
    return DerivedImage(kind, _like(v, out))


def gradient_magnitude(v: Volume3D) -> DerivedImage:
    x = v.voxels
    total = np.zeros_like(x)
    for axis in range(3):
        if x.shape[axis] < 2:
            continue
        g = np.gradient(x, v.spacing[axis], axis=axis, edge_order=1)
        total += g * g
    return DerivedImage("gradient", _like(v, np.sqrt(total)))


def _haar(x: np.ndarray, axis: int) -> tuple[np.ndarray, np.ndarray]:
    nxt = np.roll(x, -1, axis=axis)
    return (x + nxt) / _SQRT2, (x - nxt) / _SQRT2


def wavelet_decompose(v: Volume3D) -> list[DerivedImage]:
    """Single-level undecimated Haar transform with periodic boundaries.

    Band letter ``i`` names the filter applied along axis ``i``.
    """
    bands = {"": v.voxels}
    for axis in range(3):
        nxt = {}
        for name, data in bands.items():
            lo, hi = _haar(data, axis)
            nxt[name + "L"] = lo
            nxt[name + "H"] = hi
        bands = nxt
    return [DerivedImage(f"wavelet-{b}", _like(v, bands[b])) for b in WAVELET_BANDS]


def shell_offsets(radius: int) -> list[tuple[int, int, int]]:
    """Offsets at Chebyshev distance exactly ``radius`` (26 for 1, 98 for 2)."""
    r = range(-radius, radius + 1)
    return [o for o in itertools.product(r, r, r) if max(map(abs, o)) == radius]


def _shifted(padded: np.ndarray, pad: int, shape, offset) -> np.ndarray:
    dx, dy, dz = offset
    nx, ny, nz = shape
    return padded[pad + dx:pad + dx + nx, pad + dy:pad + dy + ny, pad + dz:pad + dz + nz]


def lbp3d(v: Volume3D) -> list[DerivedImage]:
    """Rotation-invariant neighbour-count LBP maps with edge clamping.

    ``m1``/``m2`` count neighbours on the radius-1/radius-2 Chebyshev shell
    whose value is >= the centre; ``k`` is the excess kurtosis of the 27
    values of the closed radius-1 neighbourhood (0 where they are all equal).
    """
    x = v.voxels
    pad = 2
    padded = np.pad(x, pad, mode="edge")
    m1 = np.zeros(x.shape)
    for off in shell_offsets(1):
        m1 += _shifted(padded, pad, x.shape, off) >= x
    m2 = np.zeros(x.shape)
    for off in shell_offsets(2):
        m2 += _shifted(padded, pad, x.shape, off) >= x

    hood = [_shifted(padded, pad, x.shape, off) for off in itertools.product((-1, 0, 1), repeat=3)]
    mean = sum(hood) / 27.0
    m2c = sum((h - mean) ** 2 for h in hood) / 27.0
    m4c = sum((h - mean) ** 4 for h in hood) / 27.0
    flat = np.maximum.reduce(hood) == np.minimum.reduce(hood)
    with np.errstate(divide="ignore", invalid="ignore"):
        k = np.where(flat, 0.0, m4c / np.where(flat, 1.0, m2c) ** 2 - 3.0)
    return [
        DerivedImage("lbp3d-m1", _like(v, m1)),
        DerivedImage("lbp3d-m2", _like(v, m2)),
        DerivedImage("lbp3d-k", _like(v, k)),
    ]


def derive_all(v: Volume3D, mask: MaskVolume) -> list[DerivedImage]:
    """The 16 derived images, in canonical tag order (the original is not included)."""
    if v.dims != mask.dims:
        raise ValueError(f"mask dims {mask.dims} differ from volume dims {v.dims}")
    if not mask.voxels.any():
        raise EmptyMaskError("derive_all needs a non-empty mask")
    out = {d.image_type: d for d in lbp3d(v) + wavelet_decompose(v)}
    out["gradient"] = gradient_magnitude(v)
    for kind in SCALAR_KINDS:
        out[kind] = intensity_transform(v, mask, kind)
    return [out[tag] for tag in DERIVED_TAGS]
