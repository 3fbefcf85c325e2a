"""Texture statistics of the GLCM, GLDM, GLRLM, GLSZM and NGTDM families.

Definitions follow Haralick (GLCM), Sun & Wee (GLDM), Galloway (GLRLM),
Thibault (GLSZM) and Amadasun & King (NGTDM) as commonly implemented in
radiomics toolkits, with these totality rules:

* ``0 * log2(0) = 0``;
* a GLCM whose pairs all sit on one gray level has Correlation, Imc1,
  Imc2 and MCC equal to 1;
* a VOI without any neighbouring pair gives every GLCM feature 0;
* NGTDM ratios whose denominator is 0 are 0.

Gray levels are ``i = 1..Ng``. GLDM dependence sizes are ``j = 1 + k``
where ``k`` is the number of dependent neighbours.
"""
from __future__ import annotations

import numpy as np

from .matrices import TextureMatrices

GLCM_NAMES = (
    "Autocorrelation", "ClusterProminence", "ClusterShade", "ClusterTendency", "Contrast",
    "Correlation", "DifferenceAverage", "DifferenceEntropy", "DifferenceVariance", "Id", "Idm",
    "Idmn", "Idn", "Imc1", "Imc2", "InverseVariance", "JointAverage", "JointEnergy",
    "JointEntropy", "MCC", "MaximumProbability", "SumAverage", "SumEntropy", "SumSquares",
)
GLDM_NAMES = (
    "SmallDependenceEmphasis", "LargeDependenceEmphasis", "GrayLevelNonUniformity",
    "DependenceNonUniformity", "DependenceNonUniformityNormalized", "GrayLevelVariance",
    "DependenceVariance", "DependenceEntropy", "LowGrayLevelEmphasis", "HighGrayLevelEmphasis",
    "SmallDependenceLowGrayLevelEmphasis", "SmallDependenceHighGrayLevelEmphasis",
    "LargeDependenceLowGrayLevelEmphasis", "LargeDependenceHighGrayLevelEmphasis",
)
GLRLM_NAMES = (
    "ShortRunEmphasis", "LongRunEmphasis", "GrayLevelNonUniformity",
    "GrayLevelNonUniformityNormalized", "RunLengthNonUniformity",
    "RunLengthNonUniformityNormalized", "RunPercentage", "GrayLevelVariance", "RunVariance",
    "RunEntropy", "LowGrayLevelRunEmphasis", "HighGrayLevelRunEmphasis",
    "ShortRunLowGrayLevelEmphasis", "ShortRunHighGrayLevelEmphasis",
    "LongRunLowGrayLevelEmphasis", "LongRunHighGrayLevelEmphasis",
)
GLSZM_NAMES = (
    "SmallAreaEmphasis", "LargeAreaEmphasis", "GrayLevelNonUniformity",
    "GrayLevelNonUniformityNormalized", "SizeZoneNonUniformity",
    "SizeZoneNonUniformityNormalized", "ZonePercentage", "GrayLevelVariance", "ZoneVariance",
    "ZoneEntropy", "LowGrayLevelZoneEmphasis", "HighGrayLevelZoneEmphasis",
    "SmallAreaLowGrayLevelEmphasis", "SmallAreaHighGrayLevelEmphasis",
    "LargeAreaLowGrayLevelEmphasis", "LargeAreaHighGrayLevelEmphasis",
)
NGTDM_NAMES = ("Coarseness", "Contrast", "Busyness", "Complexity", "Strength")

TEXTURE_NAMES = {
    "GLCM": GLCM_NAMES,
    "GLDM": GLDM_NAMES,
    "GLRLM": GLRLM_NAMES,
    "GLSZM": GLSZM_NAMES,
    "NGTDM": NGTDM_NAMES,
}


def _entropy(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p))) + 0.0


def glcm_features(p: np.ndarray) -> dict[str, float]:
    """Features of a normalised, symmetric co-occurrence matrix."""
    Ng = p.shape[0]
    if p.sum() == 0:
        return dict.fromkeys(GLCM_NAMES, 0.0)
    lv = np.arange(1, Ng + 1, dtype=float)
    i, j = np.meshgrid(lv, lv, indexing="ij")
    px = p.sum(axis=1)
    py = p.sum(axis=0)
    mux = float(lv @ px)
    muy = float(lv @ py)
    sigx = np.sqrt(float(((lv - mux) ** 2) @ px))
    sigy = np.sqrt(float(((lv - muy) ** 2) @ py))

    kplus = (i + j).astype(int).ravel()
    p_plus = np.bincount(kplus, weights=p.ravel(), minlength=2 * Ng + 1)[2:]
    ks_plus = np.arange(2, 2 * Ng + 1)
    kminus = np.abs(i - j).astype(int).ravel()
    p_minus = np.bincount(kminus, weights=p.ravel(), minlength=Ng)
    ks_minus = np.arange(Ng)

    f = {}
    f["Autocorrelation"] = float(np.sum(p * i * j))
    c = i + j - mux - muy
    f["ClusterProminence"] = float(np.sum(c**4 * p))
    f["ClusterShade"] = float(np.sum(c**3 * p))
    f["ClusterTendency"] = float(np.sum(c**2 * p))
    f["Contrast"] = float(np.sum((i - j) ** 2 * p))
    diff_avg = float(ks_minus @ p_minus)
    f["DifferenceAverage"] = diff_avg
    f["DifferenceEntropy"] = _entropy(p_minus)
    f["DifferenceVariance"] = float(((ks_minus - diff_avg) ** 2) @ p_minus)
    absd = np.abs(i - j)
    f["Id"] = float(np.sum(p / (1 + absd)))
    f["Idm"] = float(np.sum(p / (1 + absd**2)))
    f["Idmn"] = float(np.sum(p / (1 + absd**2 / Ng**2)))
    f["Idn"] = float(np.sum(p / (1 + absd / Ng)))
    f["InverseVariance"] = float(np.sum(p_minus[1:] / ks_minus[1:] ** 2))
    f["JointAverage"] = mux
    f["JointEnergy"] = float(np.sum(p**2))
    hxy = _entropy(p)
    f["JointEntropy"] = hxy
    f["MaximumProbability"] = float(p.max())
    f["SumAverage"] = float(ks_plus @ p_plus)
    f["SumEntropy"] = _entropy(p_plus)
    f["SumSquares"] = float(((lv - mux) ** 2) @ px)

    occupied = px > 0
    if np.count_nonzero(occupied) == 1:
        f["Correlation"] = f["Imc1"] = f["Imc2"] = f["MCC"] = 1.0
    else:
        f["Correlation"] = float((np.sum(p * i * j) - mux * muy) / (sigx * sigy))
        hx = _entropy(px)
        hy = _entropy(py)
        pxpy = np.outer(px, py)
        nz = p > 0
        hxy1 = float(-np.sum(p[nz] * np.log2(pxpy[nz])))
        q = pxpy[pxpy > 0]
        hxy2 = float(-np.sum(q * np.log2(q)))
        f["Imc1"] = (hxy - hxy1) / max(hx, hy)
        f["Imc2"] = float(np.sqrt(max(0.0, 1.0 - np.exp(-2.0 * (hxy2 - hxy)))))
        # Q = D^-1 P D^-1 P is similar to S^2 with S = D^-1/2 P D^-1/2
        sub = p[np.ix_(occupied, occupied)]
        root = 1.0 / np.sqrt(px[occupied])
        s = sub * root[:, None] * root[None, :]
        ev = np.sort(np.linalg.eigvalsh((s + s.T) / 2) ** 2)[::-1]
        f["MCC"] = float(np.sqrt(max(ev[1], 0.0)))
    return {name: f[name] for name in GLCM_NAMES}


def _size_zone_features(P: np.ndarray, n_voxels: float, names) -> dict[str, float]:
    """Shared statistics of run-length and size-zone style matrices.

    ``P[i-1, j-1]`` counts items (runs or zones) of level ``i`` and size
    ``j``; ``n_voxels`` is the percentage denominator.
    """
    Ng, Ns = P.shape
    i = np.arange(1, Ng + 1, dtype=float)[:, None]
    j = np.arange(1, Ns + 1, dtype=float)[None, :]
    Nz = P.sum()
    p = P / Nz
    per_level = P.sum(axis=1)
    per_size = P.sum(axis=0)
    mu_i = float(np.sum(p * i))
    mu_j = float(np.sum(p * j))
    values = (
        np.sum(P / j**2) / Nz,
        np.sum(P * j**2) / Nz,
        np.sum(per_level**2) / Nz,
        np.sum(per_level**2) / Nz**2,
        np.sum(per_size**2) / Nz,
        np.sum(per_size**2) / Nz**2,
        Nz / n_voxels,
        np.sum(p * (i - mu_i) ** 2),
        np.sum(p * (j - mu_j) ** 2),
        _entropy(p),
        np.sum(P / i**2) / Nz,
        np.sum(P * i**2) / Nz,
        np.sum(P / (i**2 * j**2)) / Nz,
        np.sum(P * i**2 / j**2) / Nz,
        np.sum(P * j**2 / i**2) / Nz,
        np.sum(P * i**2 * j**2) / Nz,
    )
    return {name: float(v) for name, v in zip(names, values)}


def glrlm_features(P: np.ndarray) -> dict[str, float]:
    j = np.arange(1, P.shape[1] + 1)
    return _size_zone_features(P, float(np.sum(P * j)), GLRLM_NAMES)


def glszm_features(P: np.ndarray, n_voxels: int) -> dict[str, float]:
    return _size_zone_features(P, float(n_voxels), GLSZM_NAMES)


def gldm_features(P: np.ndarray) -> dict[str, float]:
    Ng, Nd = P.shape
    i = np.arange(1, Ng + 1, dtype=float)[:, None]
    j = np.arange(1, Nd + 1, dtype=float)[None, :]
    Nz = P.sum()
    p = P / Nz
    per_level = P.sum(axis=1)
    per_dep = P.sum(axis=0)
    mu_i = float(np.sum(p * i))
    mu_j = float(np.sum(p * j))
    values = (
        np.sum(P / j**2) / Nz,
        np.sum(P * j**2) / Nz,
        np.sum(per_level**2) / Nz,
        np.sum(per_dep**2) / Nz,
        np.sum(per_dep**2) / Nz**2,
        np.sum(p * (i - mu_i) ** 2),
        np.sum(p * (j - mu_j) ** 2),
        _entropy(p),
        np.sum(P / i**2) / Nz,
        np.sum(P * i**2) / Nz,
        np.sum(P / (i**2 * j**2)) / Nz,
        np.sum(P * i**2 / j**2) / Nz,
        np.sum(P * j**2 / i**2) / Nz,
        np.sum(P * i**2 * j**2) / Nz,
    )
    return {name: float(v) for name, v in zip(GLDM_NAMES, values)}


def ngtdm_features(n: np.ndarray, s: np.ndarray) -> dict[str, float]:
    Nvp = n.sum()
    if Nvp == 0:
        return dict.fromkeys(NGTDM_NAMES, 0.0)
    present = n > 0
    lv = np.arange(1, n.size + 1, dtype=float)[present]
    p = n[present] / Nvp
    si = s[present]
    Ngp = lv.size
    ps = float(p @ si)
    s_total = float(si.sum())
    di = lv[:, None] - lv[None, :]
    pp = p[:, None] + p[None, :]

    coarseness = 1.0 / ps if ps > 0 else 0.0
    if Ngp > 1:
        contrast = float(np.sum(p[:, None] * p[None, :] * di**2)) / (Ngp * (Ngp - 1)) * s_total / Nvp
    else:
        contrast = 0.0
    denom = float(np.sum(np.abs((lv * p)[:, None] - (lv * p)[None, :])))
    busyness = ps / denom if denom > 0 else 0.0
    psi = p * si
    complexity = float(np.sum(np.abs(di) * (psi[:, None] + psi[None, :]) / pp)) / Nvp
    strength = float(np.sum(pp * di**2)) / s_total if s_total > 0 else 0.0
    return dict(zip(NGTDM_NAMES, (coarseness, contrast, busyness, complexity, strength)))


def texture_features(m: TextureMatrices) -> dict[str, dict[str, float]]:
    """All 75 texture values, grouped by family in canonical order."""
    return {
        "GLCM": glcm_features(m.glcm),
        "GLDM": gldm_features(m.gldm),
        "GLRLM": glrlm_features(m.glrlm),
        "GLSZM": glszm_features(m.glszm, m.n_voxels),
        "NGTDM": ngtdm_features(m.ngtdm_n, m.ngtdm_s),
    }
