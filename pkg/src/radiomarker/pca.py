"""Principal component analysis on the centred cross-product matrix.

Eigenvalues are those of ``Xc.T @ Xc`` (no ``1/(n-1)`` factor); the
eigenvectors are the same as for the sample covariance. When there are
more features than rows the ``n x n`` Gram matrix ``Xc @ Xc.T`` is
diagonalised instead and the loadings are recovered as
``Xc.T @ u / sqrt(lambda)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

MAX_COMPONENTS = 9


@njit(cache=True)
def _jacobi(A, tol, max_sweeps):
    n = A.shape[0]
    A = A.copy()
    V = np.eye(n)
    norm = np.sqrt(np.sum(A * A))
    sweeps = 0
    for sweeps in range(max_sweeps + 1):
        off = 0.0
        for p in range(n):
            for q in range(n):
                if p != q:
                    off += A[p, q] * A[p, q]
        if np.sqrt(off) <= tol * norm or sweeps == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # rotate rows/columns p and q in one pass, keeping symmetry
                for k in range(n):
                    if k != p and k != q:
                        akp = A[k, p]
                        akq = A[k, q]
                        A[k, p] = c * akp - s * akq
                        A[k, q] = s * akp + c * akq
                        A[p, k] = A[k, p]
                        A[q, k] = A[k, q]
                A[p, p] -= t * apq
                A[q, q] += t * apq
                A[p, q] = 0.0
                A[q, p] = 0.0
                for k in range(n):
                    vkp = V[k, p]
                    vkq = V[k, q]
                    V[k, p] = c * vkp - s * vkq
                    V[k, q] = s * vkp + c * vkq
    w = np.empty(n)
    for i in range(n):
        w[i] = A[i, i]
    return w, V, sweeps


def jacobi_eigh(A: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100):
    """Cyclic Jacobi eigen-decomposition of a symmetric matrix.

    Sweeps stop once the off-diagonal Frobenius norm falls below
    ``tol * ||A||_F``. Returns eigenvalues in descending order and the
    matching eigenvectors as columns.
    """
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("need a square matrix")
    w, V, _ = _jacobi(0.5 * (A + A.T), tol, max_sweeps)
    order = np.argsort(-w, kind="stable")
    return w[order], V[:, order]


def _fix_signs(components: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(components), axis=0)
    signs = np.sign(components[idx, np.arange(components.shape[1])])
    signs[signs == 0] = 1.0
    return components * signs


def _complete_basis(Q: np.ndarray, p: int, n_missing: int) -> np.ndarray:
    """Extend orthonormal columns ``Q`` with deterministic unit vectors."""
    cols = [Q[:, i] for i in range(Q.shape[1])]
    for e in range(p):
        if n_missing == 0:
            break
        v = np.zeros(p)
        v[e] = 1.0
        for _ in range(2):
            for c in cols:
                v -= (c @ v) * c
        nv = np.linalg.norm(v)
        if nv > 0.5:
            cols.append(v / nv)
            n_missing -= 1
    return np.stack(cols, axis=1) if cols else np.zeros((p, 0))


@dataclass(frozen=True, eq=False)
class PcaModel:
    train_mean: np.ndarray
    components: np.ndarray
    eigenvalues: np.ndarray

    @property
    def k(self) -> int:
        return self.components.shape[1]

    def truncate(self, k: int) -> "PcaModel":
        if not 1 <= k <= self.k:
            raise ValueError(f"cannot keep {k} of {self.k} components")
        return PcaModel(self.train_mean, self.components[:, :k], self.eigenvalues[:k])


def fit_pca(X: np.ndarray, k: int, method: str = "auto") -> PcaModel:
    """Top-``k`` principal axes of ``X``.

    ``method`` is ``"gram"``, ``"covariance"`` or ``"auto"`` (Gram when
    there are more columns than rows).
    """
    X = np.asarray(X, dtype=np.float64)
    n, p = X.shape
    if n < 2:
        raise ValueError("PCA needs at least two rows")
    if not 1 <= k <= min(n, p, MAX_COMPONENTS):
        raise ValueError(f"k must lie in [1, {min(n, p, MAX_COMPONENTS)}], got {k}")
    if not np.all(np.isfinite(X)):
        raise ValueError("PCA input contains non-finite values")
    if method == "auto":
        method = "gram" if p > n else "covariance"
    mean = X.mean(axis=0)
    Xc = X - mean

    if method == "covariance":
        w, V = jacobi_eigh(Xc.T @ Xc)
        w = np.maximum(w[:k], 0.0)
        comps = V[:, :k]
    elif method == "gram":
        w, U = jacobi_eigh(Xc @ Xc.T)
        w = np.maximum(w[:k], 0.0)
        cutoff = max(w[0], 0.0) * 1e-12 if w.size else 0.0
        good = w > cutoff
        comps = Xc.T @ U[:, :k][:, good] / np.sqrt(w[good])
        if not good.all():
            comps = _complete_basis(comps, p, int((~good).sum()))
            w = np.where(good, w, 0.0)
    else:
        raise ValueError(f"unknown PCA method {method!r}")
    return PcaModel(mean, _fix_signs(comps), w)


def pca_transform(model: PcaModel, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.shape[-1] != model.train_mean.size:
        raise ValueError(f"PCA fitted on {model.train_mean.size} features, got {X.shape[-1]}")
    return (X - model.train_mean) @ model.components


def pca_reconstruct(model: PcaModel, scores: np.ndarray) -> np.ndarray:
    return scores @ model.components.T + model.train_mean
