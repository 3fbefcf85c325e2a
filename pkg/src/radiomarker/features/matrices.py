"""Gray-level discretization and the five texture matrices.

All matrices are built on the tight bounding box of the VOI with 26-voxel
connectivity. GLCM and GLRLM use the 13 unique 3D directions at distance 1;
the GLCM is made symmetric per direction, summed over directions and then
normalised once.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from ..volume_io import EmptyMaskError, MaskVolume, Volume3D, bounding_box

NEIGHBOURS = tuple(o for o in itertools.product((-1, 0, 1), repeat=3) if o != (0, 0, 0))
# one representative per +/- pair: first non-zero component positive
DIRECTIONS = tuple(o for o in NEIGHBOURS if next(c for c in o if c) > 0)


@dataclass(frozen=True, eq=False)
class DiscretizedVoi:
    """Integer gray levels on the VOI's bounding box; 0 marks voxels outside the mask."""

    levels: np.ndarray
    Ng: int
    bin_width: float
    minimum: float

    @property
    def values(self) -> np.ndarray:
        return self.levels[self.levels > 0]


def discretize(v: Volume3D, mask: MaskVolume, bin_width: float = 25.0) -> DiscretizedVoi:
    if not bin_width > 0:
        raise ValueError(f"bin width must be positive, got {bin_width}")
    if v.dims != mask.dims:
        raise ValueError(f"mask dims {mask.dims} differ from volume dims {v.dims}")
    if not mask.voxels.any():
        raise EmptyMaskError("cannot discretize an empty VOI")
    (x0, x1), (y0, y1), (z0, z1) = bounding_box(mask)
    sl = (slice(x0, x1 + 1), slice(y0, y1 + 1), slice(z0, z1 + 1))
    m = mask.voxels[sl]
    x = v.voxels[sl]
    lo = float(x[m].min())
    levels = np.zeros(m.shape, dtype=np.int64)
    levels[m] = np.floor((x[m] - lo) / bin_width).astype(np.int64) + 1
    return DiscretizedVoi(levels, int(levels.max()), float(bin_width), lo)


@dataclass(frozen=True, eq=False)
class TextureMatrices:
    """Raw texture matrices of one discretized VOI.

    ``glcm`` is normalised (all zeros when the VOI has no neighbouring
    pair); ``glcm_pairs`` keeps the unnormalised pair count. ``gldm``
    column ``j`` counts voxels with ``j`` dependent neighbours. ``ngtdm_n``
    and ``ngtdm_s`` are indexed by level - 1 and only cover voxels that have
    at least one neighbour inside the VOI.
    """

    Ng: int
    n_voxels: int
    glcm: np.ndarray
    glcm_pairs: float
    glrlm: np.ndarray
    glszm: np.ndarray
    gldm: np.ndarray
    ngtdm_n: np.ndarray
    ngtdm_s: np.ndarray


def _padded(levels: np.ndarray) -> tuple[np.ndarray, np.ndarray, tuple[int, ...]]:
    lev = np.pad(levels, 1)
    strides = (lev.shape[1] * lev.shape[2], lev.shape[2], 1)
    return lev.ravel(), np.flatnonzero(lev.ravel() > 0), strides


def _offset(direction, strides) -> int:
    return int(sum(d * s for d, s in zip(direction, strides)))


def _count2d(rows, cols, n_rows, n_cols) -> np.ndarray:
    flat = np.bincount(rows * n_cols + cols, minlength=n_rows * n_cols)
    return flat.reshape(n_rows, n_cols).astype(float)


def build_texture_matrices(d: DiscretizedVoi) -> TextureMatrices:
    Ng = d.Ng
    lev, idx, strides = _padded(d.levels)
    li = lev[idx]
    N = idx.size

    glcm = np.zeros((Ng, Ng))
    runs = []
    for direction in DIRECTIONS:
        off = _offset(direction, strides)
        nb = lev[idx + off]
        ok = nb > 0
        glcm += _count2d(li[ok] - 1, nb[ok] - 1, Ng, Ng)

        # run starts: predecessor outside the VOI or at another level
        start = lev[idx - off] != li
        cur = idx[start]
        run_level = li[start]
        length = np.ones(cur.size, dtype=np.int64)
        alive = np.arange(cur.size)
        while alive.size:
            cur = cur + off
            same = lev[cur] == run_level[alive]
            alive = alive[same]
            cur = cur[same]
            length[alive] += 1
        runs.append(np.stack([run_level, length]))
    glcm = glcm + glcm.T
    pairs = float(glcm.sum())
    if pairs > 0:
        glcm = glcm / pairs

    all_runs = np.concatenate(runs, axis=1)
    glrlm = _count2d(all_runs[0] - 1, all_runs[1] - 1, Ng, int(all_runs[1].max()))

    # zones: 26-connected components of equal level
    pos = np.full(lev.size, -1, dtype=np.int64)
    pos[idx] = np.arange(N)
    rows, cols = [], []
    for direction in DIRECTIONS:
        nb = idx + _offset(direction, strides)
        same = lev[nb] == li
        rows.append(np.flatnonzero(same))
        cols.append(pos[nb[same]])
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    graph = coo_matrix((np.ones(rows.size), (rows, cols)), shape=(N, N))
    _, label = connected_components(graph, directed=False)
    sizes = np.bincount(label)
    zone_level = np.zeros(sizes.size, dtype=np.int64)
    zone_level[label] = li
    glszm = _count2d(zone_level - 1, sizes - 1, Ng, int(sizes.max()))

    # dependence counts and neighbourhood means over the 26-neighbourhood
    dep = np.zeros(N, dtype=np.int64)
    nsum = np.zeros(N)
    ncount = np.zeros(N, dtype=np.int64)
    for o in NEIGHBOURS:
        nb = lev[idx + _offset(o, strides)]
        inside = nb > 0
        dep += inside & (nb == li)
        nsum += np.where(inside, nb, 0)
        ncount += inside
    gldm = _count2d(li - 1, dep, Ng, int(dep.max()) + 1)

    has = ncount > 0
    diff = np.abs(li[has] - nsum[has] / ncount[has])
    ngtdm_n = np.bincount(li[has] - 1, minlength=Ng).astype(float)
    ngtdm_s = np.bincount(li[has] - 1, weights=diff, minlength=Ng)

    return TextureMatrices(Ng, N, glcm, pairs, glrlm, glszm, gldm, ngtdm_n, ngtdm_s)
