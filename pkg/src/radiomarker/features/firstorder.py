from __future__ import annotations

import numpy as np

FIRSTORDER_NAMES = (
    "Energy", "TotalEnergy", "Entropy", "Minimum", "10Percentile", "90Percentile", "Maximum",
    "Mean", "Median", "InterquartileRange", "Range", "MeanAbsoluteDeviation",
    "RobustMeanAbsoluteDeviation", "RootMeanSquared", "Skewness", "Kurtosis", "Variance",
    "Uniformity",
)


def first_order_features(x: np.ndarray, levels: np.ndarray, voxel_volume: float) -> dict[str, float]:
    """Intensity statistics of the masked voxel values ``x``.

    ``levels`` are the discretized gray levels of the same voxels and feed
    Entropy and Uniformity. Kurtosis is the plain (non-excess) fourth
    standardized moment; both Skewness and Kurtosis are 0 for constant data.
    RobustMeanAbsoluteDeviation is 0 when no value lies between the 10th
    and 90th percentiles (possible for two or three voxels).
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    mean = float(x.mean())
    dev = x - mean
    constant = x.max() == x.min()
    var = 0.0 if constant else float(np.mean(dev**2))
    p10, p25, p50, p75, p90 = np.percentile(x, [10, 25, 50, 75, 90])
    robust = x[(x >= p10) & (x <= p90)]
    energy = float(np.sum(x * x))
    counts = np.bincount(levels)
    prob = counts[counts > 0] / n
    if not constant:
        skew = float(np.mean(dev**3)) / var**1.5
        kurt = float(np.mean(dev**4)) / var**2
    else:
        skew = kurt = 0.0
    values = (
        energy,
        energy * voxel_volume,
        float(-np.sum(prob * np.log2(prob))) + 0.0,
        float(x.min()),
        float(p10),
        float(p90),
        float(x.max()),
        mean,
        float(p50),
        float(p75 - p25),
        float(x.max() - x.min()),
        float(np.mean(np.abs(dev))),
        float(np.mean(np.abs(robust - robust.mean()))) if robust.size else 0.0,
        float(np.sqrt(energy / n)),
        skew,
        kurt,
        var,
        float(np.sum(prob**2)),
    )
    return dict(zip(FIRSTORDER_NAMES, values))
