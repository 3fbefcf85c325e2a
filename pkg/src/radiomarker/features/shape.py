"""Shape descriptors of a binary VOI on an anisotropic grid.

Surface area counts exposed voxel faces; there is no surface mesh, so
MeshVolume equals VoxelVolume. Diameters are centre-to-centre distances
between surface voxels (voxels with at least one exposed face).
"""
from __future__ import annotations

import numpy as np
from scipy.spatial import ConvexHull, QhullError
from scipy.spatial.distance import pdist

SHAPE_NAMES = (
    "VoxelVolume", "MeshVolume", "SurfaceArea", "SurfaceVolumeRatio", "Sphericity",
    "Maximum3DDiameter", "Maximum2DDiameterSlice", "Maximum2DDiameterColumn",
    "Maximum2DDiameterRow", "MajorAxisLength", "MinorAxisLength", "LeastAxisLength",
    "Elongation", "Flatness",
)


def _max_distance(points: np.ndarray) -> float:
    if len(points) < 2:
        return 0.0
    if len(points) > 64:
        try:
            points = points[ConvexHull(points).vertices]
        except (QhullError, ValueError):
            pass
    return float(pdist(points).max())


def _max_in_planes(points: np.ndarray, index: np.ndarray, axis: int) -> float:
    best = 0.0
    keep = [a for a in range(3) if a != axis]
    order = np.argsort(index[:, axis], kind="stable")
    pts = points[order][:, keep]
    planes = index[order, axis]
    cuts = np.flatnonzero(np.diff(planes)) + 1
    for group in np.split(pts, cuts):
        best = max(best, _max_distance(group))
    return best


def shape_features(mask: np.ndarray, spacing) -> dict[str, float]:
    m = np.asarray(mask, dtype=bool)
    if not m.any():
        raise ValueError("shape features need a non-empty mask")
    sx, sy, sz = (float(s) for s in spacing)
    n = int(m.sum())
    volume = n * sx * sy * sz

    padded = np.pad(m, 1)
    face_area = (sy * sz, sx * sz, sx * sy)
    area = 0.0
    exposed = np.zeros(m.shape, dtype=bool)
    inner = (slice(1, -1),) * 3
    for axis in range(3):
        area += np.count_nonzero(np.diff(padded, axis=axis)) * face_area[axis]
        for step in (-1, 1):
            nb = np.roll(padded, step, axis=axis)[inner]
            exposed |= m & ~nb

    index = np.argwhere(exposed)
    points = index * np.array([sx, sy, sz])
    d3 = _max_distance(points)
    d_slice = _max_in_planes(points, index, 2)
    d_column = _max_in_planes(points, index, 1)
    d_row = _max_in_planes(points, index, 0)

    coords = np.argwhere(m) * np.array([sx, sy, sz])
    centred = coords - coords.mean(axis=0)
    cov = centred.T @ centred / n
    lam = np.clip(np.sort(np.linalg.eigvalsh(cov))[::-1], 0.0, None)
    if lam[0] > 0:
        elongation = float(np.sqrt(lam[1] / lam[0]))
        flatness = float(np.sqrt(lam[2] / lam[0]))
    else:
        elongation = flatness = 1.0

    values = (
        volume,
        volume,
        area,
        area / volume,
        float((36.0 * np.pi * volume**2) ** (1.0 / 3.0) / area),
        d3,
        d_slice,
        d_column,
        d_row,
        4.0 * float(np.sqrt(lam[0])),
        4.0 * float(np.sqrt(lam[1])),
        4.0 * float(np.sqrt(lam[2])),
        elongation,
        flatness,
    )
    return dict(zip(SHAPE_NAMES, values))
