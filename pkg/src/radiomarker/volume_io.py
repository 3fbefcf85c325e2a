"""Volumes, masks and their two-file on-disk format.

A volume is stored as ``<name>.hdr`` (text, one ``key: value`` per line)
next to ``<name>.raw`` (little-endian, row-major, x fastest)::

    dims: 64 64 40
    spacing: 0.78 0.78 1.25
    dtype: i16
    byteorder: little

In memory voxels are ``float64`` arrays of shape ``(nx, ny, nz)`` indexed
``[x, y, z]``.
"""
from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)

DTYPES = {"f32": "<f4", "f64": "<f8", "i16": "<i2", "u8": "u1"}


class VolumeFormatError(ValueError):
    """Malformed header, payload or voxel content."""


class EmptyMaskError(ValueError):
    """A mask with no foreground voxel was passed where a VOI is required."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Volume3D:
    voxels: np.ndarray
    spacing: tuple[float, float, float] = (1.0, 1.0, 1.0)

    def __post_init__(self):
        v = np.asarray(self.voxels, dtype=np.float64)
        if v.ndim != 3 or min(v.shape) < 1:
            raise VolumeFormatError(f"voxels must be a non-empty 3D array, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise VolumeFormatError("non-finite voxel value")
        sp = tuple(float(s) for s in self.spacing)
        if len(sp) != 3 or not all(s > 0 and np.isfinite(s) for s in sp):
            raise VolumeFormatError(f"spacing must be three positive numbers, got {self.spacing}")
        object.__setattr__(self, "voxels", _readonly(v))
        object.__setattr__(self, "spacing", sp)

    @property
    def dims(self) -> tuple[int, int, int]:
        return tuple(int(d) for d in self.voxels.shape)


@dataclass(frozen=True, eq=False)
class MaskVolume:
    voxels: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.voxels)
        if m.ndim != 3:
            raise VolumeFormatError(f"mask must be 3D, got shape {m.shape}")
        if m.dtype != bool:
            if not np.all((m == 0) | (m == 1)):
                raise VolumeFormatError("mask values must be 0 or 1")
            m = m.astype(bool)
        object.__setattr__(self, "voxels", _readonly(m))

    @property
    def dims(self) -> tuple[int, int, int]:
        return tuple(int(d) for d in self.voxels.shape)

    @property
    def count(self) -> int:
        return int(self.voxels.sum())


def _paths(path) -> tuple[Path, Path]:
    p = Path(path)
    if p.suffix in (".hdr", ".raw"):
        p = p.with_suffix("")
    return p.with_name(p.name + ".hdr"), p.with_name(p.name + ".raw")


def read_header(path) -> dict:
    hdr, _ = _paths(path)
    if not hdr.exists():
        raise FileNotFoundError(hdr)
    fields = {}
    for lineno, line in enumerate(hdr.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        key, sep, value = line.partition(":")
        if not sep:
            raise VolumeFormatError(f"{hdr}:{lineno}: expected 'key: value'")
        fields[key.strip()] = value.split()
    try:
        dims = tuple(int(d) for d in fields["dims"])
        spacing = tuple(float(s) for s in fields["spacing"])
        dtype = fields["dtype"][0]
    except KeyError as exc:
        raise VolumeFormatError(f"{hdr}: missing header key {exc}") from None
    except ValueError as exc:
        raise VolumeFormatError(f"{hdr}: {exc}") from None
    if len(dims) != 3 or min(dims) <= 0:
        raise VolumeFormatError(f"{hdr}: dims must be three positive integers")
    if len(spacing) != 3 or not all(s > 0 for s in spacing):
        raise VolumeFormatError(f"{hdr}: spacing must be three positive numbers")
    if dtype not in DTYPES:
        raise VolumeFormatError(f"{hdr}: unsupported dtype {dtype!r}")
    byteorder = fields.get("byteorder", ["little"])[0]
    if byteorder != "little":
        raise VolumeFormatError(f"{hdr}: byteorder must be little")
    return {"dims": dims, "spacing": spacing, "dtype": dtype}


def _read_payload(path, header) -> np.ndarray:
    _, raw = _paths(path)
    if not raw.exists():
        raise FileNotFoundError(raw)
    data = np.fromfile(raw, dtype=DTYPES[header["dtype"]])
    nx, ny, nz = header["dims"]
    expected = nx * ny * nz
    width = np.dtype(DTYPES[header["dtype"]]).itemsize
    if raw.stat().st_size != expected * width:
        raise VolumeFormatError(
            f"{raw}: payload holds {raw.stat().st_size} bytes, expected {expected} x {width}"
        )
    return data.reshape(nz, ny, nx).transpose(2, 1, 0)


def load_volume(path) -> Volume3D:
    header = read_header(path)
    data = _read_payload(path, header).astype(np.float64)
    if not np.all(np.isfinite(data)):
        raise VolumeFormatError(f"{path}: non-finite voxel value")
    return Volume3D(data, header["spacing"])


def load_mask(path, ref: Volume3D | None = None) -> MaskVolume:
    header = read_header(path)
    data = _read_payload(path, header)
    if ref is not None and tuple(header["dims"]) != ref.dims:
        raise VolumeFormatError(f"{path}: mask dims {header['dims']} differ from volume dims {ref.dims}")
    if not np.all((data == 0) | (data == 1)):
        raise VolumeFormatError(f"{path}: mask values must be 0 or 1")
    mask = MaskVolume(data.astype(bool))
    if mask.count == 0:
        log.warning("%s: mask has no foreground voxel", path)
    return mask


def _write(path, array: np.ndarray, spacing, dtype: str) -> None:
    if dtype not in DTYPES:
        raise VolumeFormatError(f"unsupported dtype {dtype!r}")
    hdr, raw = _paths(path)
    os.makedirs(hdr.parent, exist_ok=True)
    nx, ny, nz = array.shape
    out = np.ascontiguousarray(array.transpose(2, 1, 0)).astype(DTYPES[dtype])
    out.tofile(raw)
    sx, sy, sz = (repr(float(s)) for s in spacing)
    hdr.write_text(
        f"dims: {nx} {ny} {nz}\nspacing: {sx} {sy} {sz}\ndtype: {dtype}\nbyteorder: little\n",
        encoding="utf-8",
    )


def save_volume(volume: Volume3D, path, dtype: str = "f32") -> None:
    """Write ``volume`` as a header/payload pair.

    ``dtype='f64'`` is the only lossless choice for arbitrary doubles; the
    narrower types truncate silently, as any raw writer would.
    """
    _write(path, volume.voxels, volume.spacing, dtype)


def save_mask(mask: MaskVolume, path, spacing=(1.0, 1.0, 1.0)) -> None:
    _write(path, mask.voxels.astype(np.uint8), spacing, "u8")


def bounding_box(mask: MaskVolume, margin: int = 0) -> tuple[tuple[int, int], ...]:
    """Tightest inclusive index box around the foreground, grown by ``margin``.

    Returns ``((x0, x1), (y0, y1), (z0, z1))`` with inclusive ends, clamped
    to the grid.
    """
    if margin < 0:
        raise ValueError("margin must be >= 0")
    m = mask.voxels
    if not m.any():
        raise EmptyMaskError("bounding box of an empty mask")
    box = []
    for axis in range(3):
        other = tuple(a for a in range(3) if a != axis)
        hit = np.flatnonzero(m.any(axis=other))
        lo = max(int(hit[0]) - margin, 0)
        hi = min(int(hit[-1]) + margin, m.shape[axis] - 1)
        box.append((lo, hi))
    return tuple(box)


def crop(volume: Volume3D, mask: MaskVolume, margin: int = 0) -> tuple[Volume3D, MaskVolume]:
    """Restrict a volume/mask pair to the mask's bounding box."""
    if volume.dims != mask.dims:
        raise VolumeFormatError(f"mask dims {mask.dims} differ from volume dims {volume.dims}")
    (x0, x1), (y0, y1), (z0, z1) = bounding_box(mask, margin)
    sl = (slice(x0, x1 + 1), slice(y0, y1 + 1), slice(z0, z1 + 1))
    return Volume3D(volume.voxels[sl], volume.spacing), MaskVolume(mask.voxels[sl])
