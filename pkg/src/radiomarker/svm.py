"""Soft-margin SVM trained by SMO with first-order working-set selection.

The dual ``min 1/2 a'Qa - e'a`` s.t. ``0 <= a <= C``, ``y'a = 0`` with
``Q_ij = y_i y_j K_ij`` is solved on a full Gram matrix. Each step picks
the maximal violating pair (lowest index on ties) and moves it
analytically. Training stops when the pair gap falls below
``0.999 * tol`` so that, after the bias is placed inside the feasible
interval, every KKT residual is at most ``tol``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from numba import njit

log = logging.getLogger(__name__)

KERNELS = ("linear", "rbf")
_TAU = 1e-12
# kernel-matrix entries an SMO run may read in gradient updates
DEFAULT_BUDGET = 1_000_000_000


@njit(cache=True)
def _in_up(y, a, C):
    return (y > 0 and a < C) or (y < 0 and a > 0)


@njit(cache=True)
def _in_low(y, a, C):
    return (y > 0 and a > 0) or (y < 0 and a < C)


@njit(cache=True)
def _pair_gap(F, y, alpha, C):
    # F = -y * grad; i maximises F over I_up, j minimises it over I_low
    m = -np.inf
    M = np.inf
    i = -1
    j = -1
    for t in range(y.size):
        if F[t] > m and _in_up(y[t], alpha[t], C):
            m = F[t]
            i = t
        if F[t] < M and _in_low(y[t], alpha[t], C):
            M = F[t]
            j = t
    return i, j, m, M


@njit(cache=True)
def _neg_y_grad(K, y, alpha, F):
    n = y.size
    F[:] = y
    for s in range(n):
        if alpha[s] != 0.0:
            c = y[s] * alpha[s]
            for t in range(n):
                F[t] -= c * K[s, t]


@njit(cache=True)
def _bias(F, y, alpha, C, m, M):
    total = 0.0
    count = 0
    for t in range(y.size):
        if 0.0 < alpha[t] < C:
            total += F[t]
            count += 1
    if count > 0:
        b = total / count
        # keep b inside [M, m] so residuals stay bounded by the gap
        lo = min(m, M)
        hi = max(m, M)
        return min(max(b, lo), hi)
    return 0.5 * (m + M)


@njit(cache=True)
def _smo(K, y, C, tol, budget):
    return _smo_from(K, y, C, tol, budget, np.zeros(y.size))


@njit(cache=True)
def _smo_from(K, y, C, tol, budget, alpha):
    # alpha must be feasible: inside [0, C] with y'alpha = 0.
    # budget caps the kernel entries read by gradient updates.
    n = y.size
    F = np.empty(n)
    _neg_y_grad(K, y, alpha, F)
    i, j, m, M = _pair_gap(F, y, alpha, C)
    active = np.arange(n)
    n_act = n
    shrink_every = min(n, 1000)
    countdown = shrink_every
    it = 0
    reads = 0
    converged = False
    stop = 0.999 * tol
    while True:
        if i < 0 or j < 0 or m - M <= stop:
            # confirm on the full, freshly computed gradient before stopping
            _neg_y_grad(K, y, alpha, F)
            i, j, m, M = _pair_gap(F, y, alpha, C)
            n_act = n
            for t in range(n):
                active[t] = t
            if i < 0 or j < 0 or m - M <= stop:
                converged = True
                break
        if reads >= budget:
            break
        countdown -= 1
        if countdown == 0:
            # drop bounded variables that cannot be selected at the moment;
            # their gradient entries go stale until the next full check
            countdown = shrink_every
            kept = 0
            for q in range(n_act):
                t = active[q]
                up = _in_up(y[t], alpha[t], C)
                low = _in_low(y[t], alpha[t], C)
                if (up and not low and F[t] < M) or (low and not up and F[t] > m):
                    continue
                active[kept] = t
                kept += 1
            n_act = kept
        it += 1
        reads += n_act
        a = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if a <= 0.0:
            a = _TAU
        step = (m - M) / a
        bi = C - alpha[i] if y[i] > 0 else alpha[i]
        bj = alpha[j] if y[j] > 0 else C - alpha[j]
        hit_i = False
        hit_j = False
        if bi <= step:
            step = bi
            hit_i = True
        if bj <= step:
            step = bj
            hit_j = True
            hit_i = hit_i and bi == bj
        if hit_i:
            alpha[i] = C if y[i] > 0 else 0.0
        else:
            alpha[i] += y[i] * step
        if hit_j:
            alpha[j] = 0.0 if y[j] > 0 else C
        else:
            alpha[j] -= y[j] * step
        # gradient update fused with the next pair selection
        Ki = K[i]
        Kj = K[j]
        m = -np.inf
        M = np.inf
        i = -1
        j = -1
        for q in range(n_act):
            t = active[q]
            f = F[t] - step * (Ki[t] - Kj[t])
            F[t] = f
            if f > m and _in_up(y[t], alpha[t], C):
                m = f
                i = t
            if f < M and _in_low(y[t], alpha[t], C):
                M = f
                j = t
    if not converged:
        _neg_y_grad(K, y, alpha, F)
        i, j, m, M = _pair_gap(F, y, alpha, C)
    if i < 0 or j < 0:
        m = M = 0.0
    b = _bias(F, y, alpha, C, m, M)
    return alpha, b, it, converged


@njit(cache=True)
def _rescale(alpha, C_old, C_new):
    # warm start for a larger C: bounded multipliers stay at the bound
    out = np.empty_like(alpha)
    r = C_new / C_old
    for t in range(alpha.size):
        out[t] = C_new if alpha[t] >= C_old else min(alpha[t] * r, C_new)
    return out


@njit(cache=True)
def _kkt_violation(K, y, alpha, b, C):
    worst = 0.0
    for t in range(y.size):
        f = b
        for s in range(y.size):
            if alpha[s] != 0.0:
                f += alpha[s] * y[s] * K[t, s]
        yf = y[t] * f
        if alpha[t] <= 0.0:
            v = 1.0 - yf
        elif alpha[t] >= C:
            v = yf - 1.0
        else:
            v = abs(yf - 1.0)
        if v > worst:
            worst = v
    return worst


@njit(cache=True)
def _grid_decisions(S, y, s_test, ks, Cs, gammas, linear, tol, budget):
    # Scores of one test row for every (k, gamma, C); kernels on the first
    # k score columns are built incrementally as k grows.
    n = S.shape[0]
    out = np.empty((ks.size, gammas.size, Cs.size))
    lin = np.zeros((n, n))
    lin_t = np.zeros(n)
    d2 = np.zeros((n, n))
    d2_t = np.zeros(n)
    K = np.empty((n, n))
    kt = np.empty(n)
    worst = 0.0
    degraded = 0
    used = 0
    for a in range(ks.size):
        while used < ks[a]:
            for r in range(n):
                u = S[r, used]
                if linear:
                    lin_t[r] += u * s_test[used]
                    for s in range(n):
                        lin[r, s] += u * S[s, used]
                else:
                    d2_t[r] += (u - s_test[used]) ** 2
                    for s in range(n):
                        d2[r, s] += (u - S[s, used]) ** 2
            used += 1
        for g in range(gammas.size):
            if linear:
                K[:, :] = lin
                kt[:] = lin_t
            else:
                for r in range(n):
                    kt[r] = np.exp(-gammas[g] * d2_t[r])
                    for s in range(n):
                        K[r, s] = np.exp(-gammas[g] * d2[r, s])
            alpha = np.zeros(n)
            for c in range(Cs.size):
                if c > 0:
                    alpha = _rescale(alpha, Cs[c - 1], Cs[c])
                alpha, b, it, conv = _smo_from(K, y, Cs[c], tol, budget, alpha)
                if not conv:
                    degraded += 1
                v = _kkt_violation(K, y, alpha, b, Cs[c])
                if v > worst:
                    worst = v
                f = b
                for r in range(n):
                    if alpha[r] != 0.0:
                        f += alpha[r] * y[r] * kt[r]
                out[a, g, c] = f
    return out, worst, degraded


@dataclass(frozen=True)
class HyperGrid:
    """Search space of one run; ``kernel`` is fixed per run."""

    kernel: str = "linear"
    C_values: tuple[float, ...] = tuple(10.0 ** e for e in range(-5, 3))
    gamma_values: tuple[float, ...] = tuple(10.0 ** e for e in range(-3, 2))
    pca_k: tuple[int, ...] = tuple(range(2, 10))
    smote_k: tuple[int, ...] = (3, 5)

    def __post_init__(self):
        if self.kernel not in KERNELS:
            raise ValueError(f"unknown kernel {self.kernel!r}")
        for name in ("C_values", "gamma_values", "pca_k", "smote_k"):
            vals = tuple(sorted(set(getattr(self, name))))
            if not vals:
                raise ValueError(f"grid {name} is empty")
            if any(not v > 0 for v in vals):
                raise ValueError(f"grid {name} must be strictly positive")
            object.__setattr__(self, name, vals)
        if any(int(k) != k or k > 9 for k in self.pca_k):
            raise ValueError("pca_k values must be integers in 1..9")
        if any(int(k) != k for k in self.smote_k):
            raise ValueError("smote_k values must be integers")
        object.__setattr__(self, "pca_k", tuple(int(k) for k in self.pca_k))
        object.__setattr__(self, "smote_k", tuple(int(k) for k in self.smote_k))

    @property
    def gammas(self) -> tuple[float, ...]:
        """Gamma values actually searched (a single placeholder for linear)."""
        return self.gamma_values if self.kernel == "rbf" else (0.0,)

    @property
    def size(self) -> int:
        return len(self.C_values) * len(self.gammas) * len(self.pca_k) * len(self.smote_k)

    def to_dict(self) -> dict:
        return {"kernel": self.kernel, "C_values": list(self.C_values),
                "gamma_values": list(self.gamma_values) if self.kernel == "rbf" else [],
                "pca_k": list(self.pca_k), "smote_k": list(self.smote_k)}


def grid_decisions(S: np.ndarray, y: np.ndarray, s_test: np.ndarray, ks, C_values, gammas,
                   kernel: str, tol: float = 1e-3, budget: int = DEFAULT_BUDGET):
    """Held-out scores for every (pca k, gamma, C) on one training fold.

    ``S`` holds training PCA scores (columns in component order) and
    ``s_test`` the held-out row's scores. Returns ``(scores, worst_kkt,
    n_degraded)`` with ``scores`` shaped ``(len(ks), len(gammas), len(C_values))``.
    ``C_values`` must be ascending; each C is warm-started from the
    previous solution exactly as in :func:`train_svm_path`.
    """
    y = _check_labels(y)
    ks = np.asarray(ks, dtype=np.int64)
    if np.any(np.diff(ks) <= 0) or ks[-1] > S.shape[1]:
        raise ValueError("ks must be increasing and at most the number of score columns")
    out, worst, degraded = _grid_decisions(
        np.ascontiguousarray(S, dtype=np.float64), y, np.asarray(s_test, dtype=np.float64), ks,
        np.asarray(C_values, dtype=np.float64), np.asarray(gammas, dtype=np.float64),
        kernel == "linear", float(tol), int(budget))
    return out, float(worst), int(degraded)


def kernel_matrix(A: np.ndarray, B: np.ndarray, kernel: str, gamma: float = 1.0) -> np.ndarray:
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    if kernel == "linear":
        return A @ B.T
    if kernel == "rbf":
        d2 = np.sum(A * A, axis=1)[:, None] + np.sum(B * B, axis=1)[None, :] - 2.0 * A @ B.T
        return np.exp(-gamma * np.maximum(d2, 0.0))
    raise ValueError(f"unknown kernel {kernel!r}")


@dataclass(frozen=True, eq=False)
class SvmModel:
    kernel: str
    C: float
    gamma: float
    support_vectors: np.ndarray
    dual_coef: np.ndarray
    bias: float
    converged: bool = True
    n_iter: int = 0
    kkt_violation: float = 0.0

    @property
    def n_features(self) -> int:
        return self.support_vectors.shape[1]

    def weights(self) -> np.ndarray:
        """Primal weight vector; linear kernel only."""
        if self.kernel != "linear":
            raise ValueError("primal weights exist only for the linear kernel")
        return self.dual_coef @ self.support_vectors

    def to_dict(self) -> dict:
        return {
            "kernel": self.kernel,
            "C": self.C,
            "gamma": self.gamma,
            "support_vectors": self.support_vectors.tolist(),
            "dual_coef": self.dual_coef.tolist(),
            "bias": self.bias,
            "converged": self.converged,
            "n_iter": self.n_iter,
            "kkt_violation": self.kkt_violation,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SvmModel":
        sv = np.asarray(d["support_vectors"], dtype=np.float64).reshape(len(d["dual_coef"]), -1)
        return cls(d["kernel"], float(d["C"]), float(d["gamma"]), sv,
                   np.asarray(d["dual_coef"], dtype=np.float64), float(d["bias"]),
                   bool(d.get("converged", True)), int(d.get("n_iter", 0)),
                   float(d.get("kkt_violation", 0.0)))


def _check_labels(y) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    if not np.all((y == 1) | (y == -1)):
        raise ValueError("SVM labels must be +1 or -1")
    if not ((y > 0).any() and (y < 0).any()):
        raise ValueError("SVM training needs both classes")
    return y


def train_svm(X, y, kernel: str = "linear", C: float = 1.0, gamma: float = 1.0,
              tol: float = 1e-3, budget: int = DEFAULT_BUDGET) -> SvmModel:
    """Fit a binary SVM; ``y`` holds +1/-1 labels.

    A fit that runs out of iterations is returned as-is with
    ``converged=False`` and a warning is logged.
    """
    X = np.asarray(X, dtype=np.float64)
    y = _check_labels(y)
    if X.ndim != 2 or X.shape[0] != y.size:
        raise ValueError("X must be (n_samples, n_features) matching y")
    if not np.all(np.isfinite(X)):
        raise ValueError("SVM input contains non-finite values")
    if not C > 0:
        raise ValueError("C must be positive")
    if kernel not in KERNELS:
        raise ValueError(f"unknown kernel {kernel!r}")
    if kernel == "rbf" and not gamma > 0:
        raise ValueError("gamma must be positive for the RBF kernel")
    K = kernel_matrix(X, X, kernel, gamma)
    alpha, b, n_iter, converged = _smo(K, y, float(C), float(tol), int(budget))
    return _package(X, y, K, alpha, b, kernel, C, gamma, n_iter, converged, tol)


def _package(X, y, K, alpha, b, kernel, C, gamma, n_iter, converged, tol) -> SvmModel:
    if not converged:
        log.warning("SMO stopped after %d iterations without reaching tol=%g", n_iter, tol)
    viol = float(_kkt_violation(K, y, alpha, b, float(C)))
    sv = alpha > 0
    return SvmModel(kernel, float(C), float(gamma) if kernel == "rbf" else 0.0, X[sv].copy(),
                    alpha[sv] * y[sv], float(b), bool(converged), int(n_iter), viol)


def train_svm_path(X, y, kernel: str, C_values, gamma: float = 1.0, tol: float = 1e-3,
                   budget: int = DEFAULT_BUDGET) -> list[SvmModel]:
    """Fit one model per C in ascending order, warm-starting each from the last.

    The multipliers of the previous solution are scaled by the ratio of
    the C values, which keeps them feasible. On non-separable data this
    cuts the iteration count for large C by orders of magnitude.
    """
    X = np.asarray(X, dtype=np.float64)
    y = _check_labels(y)
    Cs = np.asarray(C_values, dtype=np.float64)
    if Cs.size == 0 or np.any(Cs <= 0) or np.any(np.diff(Cs) <= 0):
        raise ValueError("C values must be positive and strictly ascending")
    if kernel not in KERNELS:
        raise ValueError(f"unknown kernel {kernel!r}")
    if kernel == "rbf" and not gamma > 0:
        raise ValueError("gamma must be positive for the RBF kernel")
    if not np.all(np.isfinite(X)):
        raise ValueError("SVM input contains non-finite values")
    K = kernel_matrix(X, X, kernel, gamma)
    models = []
    alpha = np.zeros(y.size)
    for c, C in enumerate(Cs):
        if c > 0:
            alpha = _rescale(alpha, Cs[c - 1], C)
        alpha, b, n_iter, converged = _smo_from(K, y, float(C), float(tol), int(budget), alpha)
        models.append(_package(X, y, K, alpha, b, kernel, C, gamma, n_iter, converged, tol))
    return models


def decision_function(model: SvmModel, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.n_features:
        raise ValueError(f"model expects {model.n_features} features, got {X.shape[1]}")
    if model.dual_coef.size == 0:
        return np.full(X.shape[0], model.bias)
    return kernel_matrix(X, model.support_vectors, model.kernel, model.gamma) @ model.dual_coef + model.bias


def predict(model: SvmModel, X) -> np.ndarray:
    """Class labels +1/-1; a score of exactly 0 maps to +1."""
    return np.where(decision_function(model, X) >= 0, 1, -1)


def dual_objective(model_alpha: np.ndarray, K: np.ndarray, y: np.ndarray) -> float:
    a = model_alpha * y
    return float(np.sum(model_alpha) - 0.5 * a @ K @ a)
