"""Nested leave-one-out evaluation of the prune -> scale -> SMOTE -> PCA -> SVM pipeline.

Outer loop: each case is held out once; the remaining cases choose a
hyperparameter configuration by an inner leave-one-out loop and the
chosen configuration is refit on all of them to score the held-out case.

Inner scores for one configuration are pooled over inner folds into a
single AUC, which is maximised. Ties go to fewer PCA components, then
smaller C, smaller gamma and smaller SMOTE k.

The inner fold that leaves out case ``j`` inside outer fold ``i`` trains
on exactly the same cases as the inner fold leaving out ``i`` inside
outer fold ``j``. Those two folds share one fit, which scores both
held-out cases. Every fitted statistic still sees only its training
fold, and an audit hook is called for every stage of every fit with the
held-out ids and the training ids so that this can be checked.
"""
from __future__ import annotations

import csv
import hashlib
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .features.extract import FEATURE_TYPES, FeatureColumn
from .pca import PcaModel, fit_pca, pca_transform
from .preprocess import Scaler, SmoteParams, apply_scaler, fit_scaler, smote
from .rng import derive_seed
from .svm import HyperGrid, SvmModel, decision_function, grid_decisions, train_svm_path
from .table import DegenerateTableError, FeatureTable, degenerate_columns

log = logging.getLogger(__name__)

THREADS_ENV = "RADIOMARKER_THREADS"
STAGES = ("prune", "scale", "smote", "pca", "svm")

Audit = Callable[[str, tuple, tuple, str], None]


class LeakageError(RuntimeError):
    pass


def default_threads() -> int:
    env = os.environ.get(THREADS_ENV, "").strip()
    if env:
        try:
            n = int(env)
        except ValueError:
            n = 0
        if n < 1:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {env!r}")
        return n
    return os.cpu_count() or 1


def no_leak_audit(stage: str, held_out: tuple, train_ids: tuple, fingerprint: str) -> None:
    """Default audit: a held-out id must never reach a fitted stage."""
    leaked = set(held_out) & set(train_ids)
    if leaked:
        raise LeakageError(f"stage {stage} saw held-out case(s) {sorted(leaked)} ({fingerprint})")


def fingerprint(ids: Sequence[str], X: np.ndarray) -> str:
    h = hashlib.blake2b(digest_size=8)
    h.update("\x1f".join(ids).encode("utf-8"))
    h.update(np.ascontiguousarray(X, dtype=np.float64).tobytes())
    return h.hexdigest()


def _pm(y01: np.ndarray) -> np.ndarray:
    return np.where(np.asarray(y01) == 1, 1.0, -1.0)


# ---------------------------------------------------------------- metrics


@dataclass(frozen=True, eq=False)
class RocResult:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray
    auc: float
    auc_se: float


def _check_binary(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    s = np.asarray(scores, dtype=np.float64).reshape(-1)
    y = np.asarray(labels).reshape(-1)
    if s.size != y.size:
        raise ValueError("scores and labels differ in length")
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("labels must be 0/1")
    return s, y.astype(np.int64)


def hanley_mcneil_se(auc: float, n_pos: int, n_neg: int) -> float:
    q1 = auc / (2.0 - auc)
    q2 = 2.0 * auc * auc / (1.0 + auc)
    var = (auc * (1 - auc) + (n_pos - 1) * (q1 - auc ** 2) + (n_neg - 1) * (q2 - auc ** 2)) / (n_pos * n_neg)
    return float(np.sqrt(max(var, 0.0)))


def roc_and_auc(scores, labels) -> RocResult:
    """Empirical ROC swept from the highest score down, tied scores grouped.

    The first point is ``(0, 0)`` at threshold ``+inf``. The trapezoid
    area equals the Mann-Whitney statistic with ties counted as one half.
    """
    s, y = _check_binary(scores, labels)
    P = int(y.sum())
    N = y.size - P
    if P == 0 or N == 0:
        raise ValueError("ROC needs both classes")
    order = np.argsort(-s, kind="stable")
    s, y = s[order], y[order]
    last = np.r_[np.flatnonzero(np.diff(s) != 0), s.size - 1]
    tp = np.cumsum(y)[last]
    fp = (last + 1) - tp
    fpr = np.r_[0.0, fp / N]
    tpr = np.r_[0.0, tp / P]
    thr = np.r_[np.inf, s[last]]
    auc = float(np.sum((fpr[1:] - fpr[:-1]) * (tpr[1:] + tpr[:-1])) / 2.0)
    return RocResult(fpr, tpr, thr, auc, hanley_mcneil_se(auc, P, N))


def _ratio(a: int, b: int) -> float | None:
    return a / b if b else None


def confusion_metrics(scores, labels, threshold: float = 0.0) -> dict:
    """Counts and rates with positive = label 1 and predicted positive when score >= threshold.

    Ratios with a zero denominator are ``None``.
    """
    s, y = _check_binary(scores, labels)
    if s.size == 0:
        raise ValueError("no cases")
    pred = s >= threshold
    tp = int(np.sum(pred & (y == 1)))
    fp = int(np.sum(pred & (y == 0)))
    fn = int(np.sum(~pred & (y == 1)))
    tn = int(np.sum(~pred & (y == 0)))
    return confusion_from_counts(tp, fp, fn, tn)


def confusion_from_counts(tp: int, fp: int, fn: int, tn: int) -> dict:
    n = tp + fp + fn + tn
    return {
        "TP": tp, "FP": fp, "FN": fn, "TN": tn,
        "acc": _ratio(tp + tn, n),
        "ppv": _ratio(tp, tp + fp),
        "npv": _ratio(tn, tn + fn),
        "sensitivity": _ratio(tp, tp + fn),
        "specificity": _ratio(tn, tn + fp),
    }


def _pair_counts(scores: np.ndarray, y: np.ndarray) -> np.ndarray:
    # 2 * (concordant pairs) + tied pairs, per column of scores
    pos = scores[y == 1]
    neg = scores[y == 0]
    diff = pos[:, None, ...] - neg[None, :, ...]
    return 2 * np.sum(diff > 0, axis=(0, 1)) + np.sum(diff == 0, axis=(0, 1))


# ---------------------------------------------------------------- pipeline model


@dataclass(frozen=True, eq=False)
class PipelineModel:
    columns: tuple[str, ...]
    scaler: Scaler
    smote: SmoteParams
    pca: PcaModel
    svm: SvmModel
    hyper: dict
    train_ids: tuple[str, ...]
    fingerprint: str

    def decision(self, X) -> np.ndarray:
        """Scores for rows whose columns follow ``self.columns``."""
        Z = apply_scaler(self.scaler, X)
        Z = np.where(np.isfinite(Z), Z, 0.0)
        return decision_function(self.svm, pca_transform(self.pca, Z))

    def score_table(self, t: FeatureTable) -> np.ndarray:
        index = {n: i for i, n in enumerate(t.names)}
        missing = [c for c in self.columns if c not in index]
        if missing:
            raise ValueError(f"table lacks {len(missing)} model columns, e.g. {missing[0]}")
        return self.decision(t.values[:, [index[c] for c in self.columns]])

    def to_dict(self) -> dict:
        return {
            "columns": list(self.columns),
            "scaler": {"mu": self.scaler.mu.tolist(), "sigma": self.scaler.sigma.tolist()},
            "smote": {"k": self.smote.k, "seed": self.smote.seed},
            "pca": {"train_mean": self.pca.train_mean.tolist(),
                    "components": self.pca.components.tolist(),
                    "eigenvalues": self.pca.eigenvalues.tolist()},
            "svm": self.svm.to_dict(),
            "hyper": dict(self.hyper),
            "train_ids": list(self.train_ids),
            "fingerprint": self.fingerprint,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineModel":
        p = d["pca"]
        n_cols = len(d["columns"])
        return cls(
            tuple(d["columns"]),
            Scaler(np.asarray(d["scaler"]["mu"], dtype=np.float64),
                   np.asarray(d["scaler"]["sigma"], dtype=np.float64)),
            SmoteParams(int(d["smote"]["k"]), int(d["smote"]["seed"])),
            PcaModel(np.asarray(p["train_mean"], dtype=np.float64),
                     np.asarray(p["components"], dtype=np.float64).reshape(n_cols, -1),
                     np.asarray(p["eigenvalues"], dtype=np.float64)),
            SvmModel.from_dict(d["svm"]),
            dict(d["hyper"]),
            tuple(d["train_ids"]),
            d["fingerprint"],
        )

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=1)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "PipelineModel":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class _Prepared:
    keep: np.ndarray
    scaler: Scaler
    Z: np.ndarray
    y: np.ndarray
    ids: tuple
    fp: str


def _prepare(X, y, ids, held_out, audit: Audit) -> _Prepared | None:
    fp = fingerprint(ids, X)
    if np.unique(y).size < 2:
        return None
    audit("prune", held_out, ids, fp)
    bad = {j for j, _ in degenerate_columns(X)}
    keep = np.array([j for j in range(X.shape[1]) if j not in bad], dtype=np.int64)
    if keep.size == 0:
        return None
    audit("scale", held_out, ids, fp)
    scaler = fit_scaler(X[:, keep])
    return _Prepared(keep, scaler, apply_scaler(scaler, X[:, keep]), y, ids, fp)


def _augment(prep: _Prepared, k: int, seed: int, held_out, audit: Audit):
    audit("smote", held_out, prep.ids, prep.fp)
    return smote(prep.Z, prep.y, SmoteParams(k, seed))


def _kmax(n_rows: int, n_cols: int, grid: HyperGrid) -> int:
    return min(max(grid.pca_k), n_rows, n_cols)


def fit_pipeline(X, y, ids, names: Sequence[str], hyper: dict, C_path: Sequence[float],
                 seed: int, held_out: tuple = (), audit: Audit = no_leak_audit,
                 kernel: str = "linear") -> PipelineModel:
    """Fit all stages on one training set.

    The SVM is trained along ``C_path`` (ascending, ending at
    ``hyper["C"]``) with warm starts, the same way candidate
    configurations are scored during selection.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    ids = tuple(ids)
    prep = _prepare(X, y, ids, held_out, audit)
    if prep is None:
        raise ValueError("training set lacks a class or usable columns")
    sm = _augment(prep, hyper["smote_k"], seed, held_out, audit)
    audit("pca", held_out, ids, prep.fp)
    k = min(hyper["pca_k"], sm.X.shape[0], prep.keep.size)
    pca = fit_pca(sm.X, k)
    audit("svm", held_out, ids, prep.fp)
    S = pca_transform(pca, sm.X)
    path = [c for c in C_path if c <= hyper["C"]]
    model = train_svm_path(S, _pm(sm.y), kernel, path, hyper["gamma"] or 1.0)[-1]
    return PipelineModel(tuple(names[j] for j in prep.keep), prep.scaler,
                         SmoteParams(hyper["smote_k"], seed), pca, model,
                         dict(hyper, pca_k=k), ids, prep.fp)


@dataclass
class _FoldScores:
    scores: np.ndarray      # (n_test, n_smote, n_k, n_gamma, n_C)
    worst_kkt: float
    degraded: int
    n_fits: int


def _fold_scores(X, y, ids, train, test, grid: HyperGrid, seed: int, audit: Audit):
    """Scores of the ``test`` rows for every configuration, fit on ``train``."""
    held = tuple(ids[t] for t in test)
    tr_ids = tuple(ids[t] for t in train)
    prep = _prepare(X[train], y[train], tr_ids, held, audit)
    if prep is None:
        log.info("fold without %s skipped: training set lacks a class", held)
        return None
    Zt = apply_scaler(prep.scaler, X[np.ix_(test, prep.keep)])
    Zt = np.where(np.isfinite(Zt), Zt, 0.0)
    ks_all = np.array(grid.pca_k)
    out = np.full((len(test), len(grid.smote_k), ks_all.size, len(grid.gammas), len(grid.C_values)),
                  np.nan)
    worst, degraded, n_fits = 0.0, 0, 0
    for s_i, k_smote in enumerate(grid.smote_k):
        sm = _augment(prep, k_smote, seed, held, audit)
        kmax = _kmax(sm.X.shape[0], prep.keep.size, grid)
        valid = ks_all <= kmax
        if not valid.any():
            continue
        audit("pca", held, tr_ids, prep.fp)
        pca = fit_pca(sm.X, kmax)
        S = pca_transform(pca, sm.X)
        St = pca_transform(pca, Zt)
        audit("svm", held, tr_ids, prep.fp)
        yy = _pm(sm.y)
        for r in range(len(test)):
            sc, w, d = grid_decisions(S, yy, St[r], ks_all[valid], grid.C_values, grid.gammas,
                                      grid.kernel)
            out[r, s_i, valid] = sc
            worst = max(worst, w)
            degraded += d
            n_fits += sc.size
    return _FoldScores(out, worst, degraded, n_fits)


def _fold_seed(seed: int, held_ids) -> int:
    return derive_seed(seed, "fold", *sorted(held_ids))


def _config_list(grid: HyperGrid) -> list[dict]:
    out = []
    for s in grid.smote_k:
        for k in grid.pca_k:
            for g in grid.gammas:
                for C in grid.C_values:
                    out.append({"pca_k": k, "C": C, "gamma": g if grid.kernel == "rbf" else None,
                                "smote_k": s})
    return out


def _select(pooled: np.ndarray, y: np.ndarray, grid: HyperGrid) -> tuple[dict, float]:
    """Best configuration by pooled AUC; ``pooled`` is (n_cases, n_configs)."""
    configs = _config_list(grid)
    flat = pooled.reshape(pooled.shape[0], -1)
    usable = ~np.isnan(flat).any(axis=0)
    P = int(np.sum(y == 1))
    N = y.size - P
    counts = np.where(usable, _pair_counts(np.where(np.isnan(flat), 0.0, flat), y), -1)

    def key(c):
        h = configs[c]
        return (-counts[c], h["pca_k"], h["C"], h["gamma"] or 0.0, h["smote_k"])

    best = min(range(len(configs)), key=key)
    if counts[best] < 0:
        raise ValueError("no configuration could be scored")
    if P == 0 or N == 0:
        # no AUC without both classes: every configuration ties
        return configs[best], float("nan")
    return configs[best], counts[best] / (2.0 * P * N)


# ---------------------------------------------------------------- reports


@dataclass
class FoldResult:
    case_id: str
    label: int
    score: float
    hyper: dict
    inner_auc: float
    n_inner: int


@dataclass(eq=False)
class EvalReport:
    kernel: str
    seed: int
    subset: str | None
    grid: dict
    folds: list[FoldResult]
    roc: RocResult
    confusion: dict
    n_fits: int
    n_degraded: int
    max_kkt_violation: float
    columns: int
    outer_models: list[PipelineModel] = field(default_factory=list, repr=False)

    @property
    def auc(self) -> float:
        return self.roc.auc

    @property
    def auc_se(self) -> float:
        return self.roc.auc_se

    def to_dict(self) -> dict:
        return {
            "kernel": self.kernel,
            "seed": self.seed,
            "subset": self.subset,
            "n_cases": len(self.folds),
            "n_columns": self.columns,
            "grid": self.grid,
            "auc": self.roc.auc,
            "auc_se": self.roc.auc_se,
            "confusion": self.confusion,
            "solver": {"n_fits": self.n_fits, "n_degraded": self.n_degraded,
                       "max_kkt_violation": self.max_kkt_violation},
            "roc": [{"fpr": float(f), "tpr": float(t),
                     "threshold": None if not np.isfinite(h) else float(h)}
                    for f, t, h in zip(self.roc.fpr, self.roc.tpr, self.roc.thresholds)],
            "folds": [{"case_id": f.case_id, "label": f.label, "score": f.score,
                       "inner_auc": f.inner_auc if np.isfinite(f.inner_auc) else None,
                       "n_inner": f.n_inner, **f.hyper}
                      for f in self.folds],
        }

    def write_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=1)
            fh.write("\n")

    def write_roc_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["fpr", "tpr", "threshold"])
            for f, t, h in zip(self.roc.fpr, self.roc.tpr, self.roc.thresholds):
                w.writerow([repr(float(f)), repr(float(t)), repr(float(h))])

    def write_hyper_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["case_id", "label", "score", "pca_k", "C", "gamma", "smote_k", "inner_auc"])
            for f in self.folds:
                h = f.hyper
                w.writerow([f.case_id, f.label, repr(f.score), h["pca_k"], repr(h["C"]),
                            "" if h["gamma"] is None else repr(h["gamma"]), h["smote_k"],
                            repr(f.inner_auc)])

    def write_confusion_csv(self, path) -> None:
        c = self.confusion
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["", "predicted_positive", "predicted_negative"])
            w.writerow(["actual_positive", c["TP"], c["FN"]])
            w.writerow(["actual_negative", c["FP"], c["TN"]])


# ---------------------------------------------------------------- nested LOOCV

_WORK: dict = {}


def _init_worker(X, y, ids, grid, seed, audit):
    _WORK.update(X=X, y=y, ids=ids, grid=grid, seed=seed, audit=audit)


def _pair_job(pair):
    i, j = pair
    w = _WORK
    n = w["y"].size
    train = np.array([t for t in range(n) if t != i and t != j])
    seed = _fold_seed(w["seed"], (w["ids"][i], w["ids"][j]))
    return _fold_scores(w["X"], w["y"], w["ids"], train, [i, j], w["grid"], seed, w["audit"])


def _refit_job(args):
    i, hyper = args
    w = _WORK
    ids, y = w["ids"], w["y"]
    train = np.array([t for t in range(y.size) if t != i])
    held = (ids[i],) if i >= 0 else ()
    seed = _fold_seed(w["seed"], held) if held else derive_seed(w["seed"], "final")
    grid = w["grid"]
    return fit_pipeline(w["X"][train], y[train], tuple(ids[t] for t in train), w["names"], hyper,
                        grid.C_values, seed, held, w["audit"], grid.kernel)


def _single_job(i):
    w = _WORK
    n = w["y"].size
    train = np.array([t for t in range(n) if t != i])
    seed = _fold_seed(w["seed"], (w["ids"][i],))
    return _fold_scores(w["X"], w["y"], w["ids"], train, [i], w["grid"], seed, w["audit"])


def _run(jobs, fn, threads: int, init_args):
    if threads <= 1 or len(jobs) < 2:
        _init_worker(*init_args)
        return [fn(j) for j in jobs]
    chunk = max(1, len(jobs) // (threads * 4))
    with ProcessPoolExecutor(max_workers=threads, initializer=_init_worker,
                             initargs=init_args) as ex:
        return list(ex.map(fn, jobs, chunksize=chunk))


def _check_grid_table(t: FeatureTable, grid: HyperGrid) -> None:
    t.require_labels()
    counts = np.bincount(t.labels, minlength=2)
    if counts.min() < 2:
        raise ValueError("nested LOOCV needs at least two cases per class")
    if grid.size == 0:
        raise ValueError("empty hyperparameter grid")
    if len(degenerate_columns(t.values)) == t.n_features:
        raise DegenerateTableError("every column is constant or non-finite")


def nested_loocv(t: FeatureTable, grid: HyperGrid = HyperGrid(), seed: int = 0,
                 threads: int | None = None, audit: Audit = no_leak_audit,
                 subset: str | None = None) -> EvalReport:
    """Outer-LOOCV scores with inner-LOOCV hyperparameter selection.

    Rows are processed in case-id order and all seeds derive from case
    ids, so the result does not depend on the input row order or on the
    number of worker processes. ``audit`` must be picklable when
    ``threads > 1``.
    """
    _check_grid_table(t, grid)
    t = t.canonical()
    X, y, ids = t.values, t.labels, t.case_ids
    n = y.size
    threads = default_threads() if threads is None else max(1, int(threads))
    init = (X, y, ids, grid, seed, audit)

    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    pair_res = _run(pairs, _pair_job, threads, init)

    shape = (len(grid.smote_k), len(grid.pca_k), len(grid.gammas), len(grid.C_values))
    inner = np.full((n, n) + shape, np.nan)   # inner[i, j]: score of j with i held out
    present = np.zeros((n, n), dtype=bool)
    n_fits, degraded, worst = 0, 0, 0.0
    for (i, j), r in zip(pairs, pair_res):
        if r is None:
            continue
        inner[i, j] = r.scores[1]
        inner[j, i] = r.scores[0]
        present[i, j] = present[j, i] = True
        n_fits += r.n_fits
        degraded += r.degraded
        worst = max(worst, r.worst_kkt)

    chosen = []
    for i in range(n):
        rows = np.flatnonzero(present[i])
        if rows.size == 0:
            raise ValueError(f"no inner fold of {ids[i]} could be trained")
        yi = y[rows]
        if np.unique(yi).size < 2:
            log.warning("inner scores of %s cover one class; simplest configuration used", ids[i])
        hyper, inner_auc = _select(inner[i, rows], yi, grid)
        chosen.append((hyper, inner_auc, rows.size))

    models = _run_refit([(i, h) for i, (h, _, _) in enumerate(chosen)], threads, init, t.names)

    folds = []
    scores = np.empty(n)
    for i, (m, (hyper, inner_auc, n_inner)) in enumerate(zip(models, chosen)):
        scores[i] = float(m.score_table(t.select_rows([i]))[0])
        folds.append(FoldResult(ids[i], int(y[i]), float(scores[i]), dict(hyper, pca_k=m.hyper["pca_k"]),
                                float(inner_auc), int(n_inner)))
        n_fits += 1
        degraded += int(not m.svm.converged)
        worst = max(worst, m.svm.kkt_violation)
    if degraded:
        log.warning("%d SVM fits stopped before convergence", degraded)
    return EvalReport(grid.kernel, seed, subset, grid.to_dict(), folds, roc_and_auc(scores, y),
                      confusion_metrics(scores, y), n_fits, degraded, float(worst),
                      t.n_features, models)


def _init_refit_worker(X, y, ids, grid, seed, audit, names):
    _init_worker(X, y, ids, grid, seed, audit)
    _WORK["names"] = names


def _run_refit(jobs, threads, init, names):
    if threads <= 1 or len(jobs) < 2:
        _init_refit_worker(*init, names)
        return [_refit_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=threads, initializer=_init_refit_worker,
                             initargs=(*init, names)) as ex:
        return list(ex.map(_refit_job, jobs))


def select_and_fit(t: FeatureTable, grid: HyperGrid = HyperGrid(), seed: int = 0,
                   threads: int | None = None, audit: Audit = no_leak_audit) -> PipelineModel:
    """Deployable model: one LOOCV over all cases picks the configuration,
    which is then fit on every case."""
    _check_grid_table(t, grid)
    t = t.canonical()
    X, y, ids = t.values, t.labels, t.case_ids
    threads = default_threads() if threads is None else max(1, int(threads))
    init = (X, y, ids, grid, seed, audit)
    res = _run(list(range(y.size)), _single_job, threads, init)
    rows = np.array([i for i, r in enumerate(res) if r is not None])
    pooled = np.stack([res[i].scores[0] for i in rows])
    hyper, _ = _select(pooled, y[rows], grid)
    _init_refit_worker(*init, t.names)
    return _refit_job((-1, hyper))


def evaluate_feature_subset(t: FeatureTable, feature_type: str, grid: HyperGrid = HyperGrid(),
                            seed: int = 0, **kwargs) -> EvalReport:
    """Nested LOOCV restricted to the columns of one feature type."""
    return nested_loocv(t.feature_type(feature_type), grid, seed, subset=feature_type, **kwargs)


def feature_type_weights(models: Sequence[PipelineModel]) -> dict[str, float]:
    """Average absolute standardized-feature weight per feature type.

    For each linear model the weight of feature ``i`` is
    ``|sum_k w_k V_ik|`` with ``w`` the SVM weight in PC space and ``V``
    the PCA loadings. Weights are averaged over models (a feature pruned
    in a fold counts as 0 there), then within each feature type, and
    finally normalised to sum to one.
    """
    if not models:
        raise ValueError("no models given")
    names: dict[str, int] = {}
    for m in models:
        if m.svm.kernel != "linear":
            raise ValueError("feature-type weights need linear-kernel models")
        for c in m.columns:
            names.setdefault(c, len(names))
    total = np.zeros(len(names))
    for m in models:
        a = np.abs(m.pca.components @ m.svm.weights())
        total[[names[c] for c in m.columns]] += a
    total /= len(models)
    by_type: dict[str, list[float]] = {}
    for c, i in names.items():
        by_type.setdefault(FeatureColumn.parse(c).feature_type, []).append(total[i])
    means = {k: float(np.mean(v)) for k, v in by_type.items()}
    s = sum(means.values())
    if s == 0:
        raise ValueError("all feature weights are zero")
    order = [f for f in FEATURE_TYPES if f in means] + sorted(set(means) - set(FEATURE_TYPES))
    return {k: means[k] / s for k in order}
