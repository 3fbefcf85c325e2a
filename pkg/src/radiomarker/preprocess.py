"""Fold-local z-scoring and SMOTE oversampling."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .rng import SplitMix64

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Scaler:
    mu: np.ndarray
    sigma: np.ndarray


def fit_scaler(train: np.ndarray) -> Scaler:
    """Per-column mean and population standard deviation.

    Constant columns get ``sigma = 1`` so they scale to zeros.
    """
    X = np.asarray(train, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError("need a 2D matrix with at least one row")
    mu = X.mean(axis=0)
    sigma = X.std(axis=0)
    constant = np.ptp(X, axis=0) == 0
    sigma[constant] = 1.0
    mu[constant] = X[0, constant]
    return Scaler(mu, sigma)


def apply_scaler(scaler: Scaler, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.shape[-1] != scaler.mu.size:
        raise ValueError(f"scaler fitted on {scaler.mu.size} features, got {X.shape[-1]}")
    return (X - scaler.mu) / scaler.sigma


@dataclass(frozen=True)
class SmoteParams:
    k: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("SMOTE needs k >= 1")


class SmoteResult(NamedTuple):
    X: np.ndarray
    y: np.ndarray
    origin: np.ndarray
    beta: np.ndarray


def minority_neighbours(Xm: np.ndarray, k: int) -> np.ndarray:
    """Indices of the ``k`` nearest other rows (Euclidean, ties by index)."""
    sq = np.sum(Xm * Xm, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * Xm @ Xm.T
    np.fill_diagonal(d2, np.inf)
    return np.argsort(d2, axis=1, kind="stable")[:, :k]


def smote(train: np.ndarray, labels: np.ndarray, params: SmoteParams = SmoteParams(),
          beta: float | None = None) -> SmoteResult:
    """Balance two classes by interpolating minority rows towards minority neighbours.

    References are taken in a seeded shuffled order of the minority rows,
    cycling until the classes are balanced. Each synthetic row is
    ``x_r + beta * (x_i - x_r)`` with ``x_i`` drawn uniformly from the
    ``k`` nearest minority neighbours of ``x_r`` and ``beta`` uniform on
    (0, 1). Passing ``beta`` fixes it (used by the tests).

    Returns the original rows followed by the synthetic ones. ``origin``
    holds ``(r, i)`` input row indices for every synthetic row.
    """
    X = np.asarray(train, dtype=np.float64)
    y = np.asarray(labels)
    classes, counts = np.unique(y, return_counts=True)
    if classes.size != 2:
        raise ValueError("SMOTE needs exactly two classes")
    empty = (X[:0].copy(), y[:0].copy(), np.zeros((0, 2), dtype=np.int64), np.zeros(0))
    if counts[0] == counts[1]:
        return SmoteResult(X.copy(), y.copy(), *empty[2:])
    minority = classes[np.argmin(counts)]
    rows = np.flatnonzero(y == minority)
    m = rows.size
    n_new = int(counts.max() - counts.min())
    rng = SplitMix64(params.seed)

    order = rng.permutation(m)
    ref = order[np.arange(n_new) % m]
    if m == 1:
        log.warning("SMOTE: single minority row, duplicating it %d times", n_new)
        nbr = ref.copy()
        b = np.zeros(n_new)
    else:
        k = params.k
        if k > m - 1:
            log.info("SMOTE: k=%d clamped to %d minority neighbours", k, m - 1)
            k = m - 1
        nn = minority_neighbours(X[rows], k)
        nbr = nn[ref, rng.integers(k, n_new)]
        b = np.full(n_new, float(beta)) if beta is not None else rng.open_uniform(n_new)
    xr = X[rows[ref]]
    xi = X[rows[nbr]]
    synth = xr + b[:, None] * (xi - xr)
    origin = np.stack([rows[ref], rows[nbr]], axis=1)
    return SmoteResult(
        np.vstack([X, synth]),
        np.concatenate([y, np.full(n_new, minority, dtype=y.dtype)]),
        origin,
        b,
    )
