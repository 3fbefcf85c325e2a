"""Cases x features table, degenerate-column pruning and correlation analyses.

The table CSV layout is ``case_id,label,<feature names...>`` with one row
per case. Labels are 1 for the positive (suboptimal debulking) class and
0 otherwise; an empty label cell is read as unknown (-1), which is fine
for extraction but rejected by modelling code.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numba import njit

from .features.extract import FeatureColumn

log = logging.getLogger(__name__)

UNKNOWN_LABEL = -1


class DegenerateTableError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FeatureTable:
    case_ids: tuple[str, ...]
    labels: np.ndarray
    columns: tuple[FeatureColumn, ...]
    values: np.ndarray

    def __post_init__(self):
        ids = tuple(str(c) for c in self.case_ids)
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate case ids")
        labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        values = np.asarray(self.values, dtype=np.float64).reshape(len(ids), len(self.columns))
        if labels.size != len(ids):
            raise ValueError("one label per case required")
        if not np.all((labels == 0) | (labels == 1) | (labels == UNKNOWN_LABEL)):
            raise ValueError("labels must be 0, 1 or unknown")
        object.__setattr__(self, "case_ids", ids)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "values", values)

    @property
    def n_cases(self) -> int:
        return len(self.case_ids)

    @property
    def n_features(self) -> int:
        return len(self.columns)

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.columns]

    def require_labels(self) -> None:
        if np.any(self.labels == UNKNOWN_LABEL):
            raise ValueError("table has cases without labels")
        if np.unique(self.labels).size != 2:
            raise ValueError("both classes must be present")

    def select_columns(self, keep) -> "FeatureTable":
        keep = np.asarray(keep)
        if keep.dtype == bool:
            keep = np.flatnonzero(keep)
        return FeatureTable(self.case_ids, self.labels, [self.columns[i] for i in keep],
                            self.values[:, keep])

    def select_rows(self, rows) -> "FeatureTable":
        rows = np.asarray(rows, dtype=np.int64)
        return FeatureTable([self.case_ids[i] for i in rows], self.labels[rows], self.columns,
                            self.values[rows])

    def feature_type(self, tag: str) -> "FeatureTable":
        keep = [i for i, c in enumerate(self.columns) if c.feature_type == tag]
        if not keep:
            known = sorted({c.feature_type for c in self.columns})
            raise ValueError(f"no columns of feature type {tag!r}; known: {known}")
        return self.select_columns(keep)

    def canonical(self) -> "FeatureTable":
        """Rows sorted by case id."""
        return self.select_rows(np.argsort(np.array(self.case_ids, dtype=object), kind="stable"))


def _fmt(x: float) -> str:
    return repr(float(x))


def write_table_csv(t: FeatureTable, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["case_id", "label", *t.names])
        for cid, lab, row in zip(t.case_ids, t.labels, t.values):
            w.writerow([cid, "" if lab == UNKNOWN_LABEL else int(lab), *map(_fmt, row)])


def read_table_csv(path) -> FeatureTable:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][:2] != ["case_id", "label"]:
        raise ValueError(f"{path}: header must start with case_id,label")
    columns = [FeatureColumn.parse(n) for n in rows[0][2:]]
    ids, labels, values = [], [], []
    for k, r in enumerate(rows[1:], start=2):
        if not r:
            continue
        if len(r) != len(columns) + 2:
            raise ValueError(f"{path}:{k}: expected {len(columns) + 2} fields, got {len(r)}")
        ids.append(r[0])
        labels.append(int(r[1]) if r[1].strip() else UNKNOWN_LABEL)
        values.append([float(v) for v in r[2:]])
    vals = np.array(values, dtype=np.float64).reshape(len(ids), len(columns))
    return FeatureTable(ids, labels, columns, vals)


def degenerate_columns(X: np.ndarray) -> list[tuple[int, str]]:
    """Indices and reasons of columns with non-finite values or zero variance."""
    bad = []
    finite = np.isfinite(X).all(axis=0)
    for j in range(X.shape[1]):
        if not finite[j]:
            bad.append((j, "non-finite"))
        elif np.ptp(X[:, j]) == 0:
            bad.append((j, "zero variance"))
    return bad


def prune_degenerate(t: FeatureTable) -> tuple[FeatureTable, list[tuple[str, str]]]:
    if t.n_cases < 2:
        raise DegenerateTableError("pruning needs at least two cases")
    bad = degenerate_columns(t.values)
    if len(bad) == t.n_features:
        raise DegenerateTableError("every column is degenerate")
    drop = {j for j, _ in bad}
    removed = [(t.columns[j].name, reason) for j, reason in bad]
    return t.select_columns([j for j in range(t.n_features) if j not in drop]), removed


def pearson_matrix(X) -> np.ndarray:
    """Pearson coefficients between the columns of ``X`` (or a table)."""
    if isinstance(X, FeatureTable):
        X = X.values
    X = np.asarray(X, dtype=np.float64)
    Xc = X - X.mean(axis=0)
    norm = np.sqrt(np.sum(Xc * Xc, axis=0))
    if np.any(norm == 0) or not np.all(np.isfinite(norm)):
        raise DegenerateTableError("zero-variance or non-finite column; prune first")
    Z = Xc / norm
    R = np.clip(Z.T @ Z, -1.0, 1.0)
    R = 0.5 * (R + R.T)
    np.fill_diagonal(R, 1.0)
    return R


@njit(cache=True)
def _row_min(D, active, i):
    best = np.inf
    arg = -1
    for j in range(i + 1, D.shape[0]):
        if active[j] and D[i, j] < best:
            best = D[i, j]
            arg = j
    return best, arg


@njit(cache=True)
def _upgma_order(D):
    p = D.shape[0]
    D = D.copy()
    active = np.ones(p, dtype=np.bool_)
    size = np.ones(p)
    nxt = -np.ones(p, dtype=np.int64)
    tail = np.arange(p)
    rmin = np.empty(p)
    rarg = np.empty(p, dtype=np.int64)
    for i in range(p):
        rmin[i], rarg[i] = _row_min(D, active, i)
    for _ in range(p - 1):
        a = -1
        best = np.inf
        for i in range(p):
            if active[i] and rarg[i] >= 0 and rmin[i] < best:
                best = rmin[i]
                a = i
        b = rarg[a]
        # merged cluster lives in slot a; its leaves are a's followed by b's
        for c in range(p):
            if active[c] and c != a and c != b:
                d = (size[a] * D[a, c] + size[b] * D[b, c]) / (size[a] + size[b])
                D[a, c] = d
                D[c, a] = d
        nxt[tail[a]] = b
        tail[a] = tail[b]
        size[a] += size[b]
        active[b] = False
        rmin[a], rarg[a] = _row_min(D, active, a)
        for i in range(a):
            if not active[i]:
                continue
            if rarg[i] == a or rarg[i] == b:
                rmin[i], rarg[i] = _row_min(D, active, i)
            elif D[i, a] < rmin[i] or (D[i, a] == rmin[i] and a < rarg[i]):
                rmin[i] = D[i, a]
                rarg[i] = a
        for i in range(a + 1, p):
            if active[i] and rarg[i] == b:
                rmin[i], rarg[i] = _row_min(D, active, i)
    order = np.empty(p, dtype=np.int64)
    node = 0
    for k in range(p):
        order[k] = node
        node = nxt[node]
    return order


def cluster_order(matrix) -> np.ndarray:
    """Leaf order of an average-linkage dendrogram on ``1 - |r|``.

    The closest pair of clusters is merged first; equal distances go to
    the pair with the lowest column indices. A cluster is identified by
    its lowest column and lists its lower-index child first.
    """
    R = np.asarray(matrix, dtype=np.float64)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise ValueError("need a square correlation matrix")
    if R.shape[0] < 2:
        return np.arange(R.shape[0])
    D = 1.0 - np.abs(R)
    np.fill_diagonal(D, 0.0)
    return _upgma_order(D)


def five_numbers(x: np.ndarray) -> dict[str, float]:
    q = np.percentile(x, [0, 25, 50, 75, 100])
    return dict(zip(("min", "q1", "median", "q3", "max"), map(float, q)))


def image_family(image_type: str) -> str:
    return image_type.split("-", 1)[0]


def _group_stats(A: np.ndarray, keys: list[str], notes: list[str], what: str) -> dict:
    out = {}
    for key in sorted(set(keys)):
        idx = np.array([i for i, k in enumerate(keys) if k == key])
        if idx.size < 2:
            notes.append(f"{what} {key!r} has fewer than two columns; omitted")
            continue
        sub = A[np.ix_(idx, idx)]
        vals = sub[np.triu_indices(idx.size, 1)]
        out[key] = {"n_columns": int(idx.size), "n_pairs": int(vals.size), **five_numbers(vals)}
    return out


@dataclass(eq=False)
class CorrelationReport:
    matrix: np.ndarray
    cluster_order: np.ndarray
    subgroup_stats: dict
    histogram_edges: np.ndarray
    histogram_counts: np.ndarray
    fraction_le_half: float
    notes: list[str] = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "n_features": int(self.matrix.shape[0]),
            "n_pairs": int(self.histogram_counts.sum()),
            "fraction_le_half": self.fraction_le_half,
            "histogram": {"edges": self.histogram_edges.tolist(),
                          "counts": self.histogram_counts.tolist()},
            "subgroup_stats": self.subgroup_stats,
            "grouping": "within-group pairs only",
            "notes": list(self.notes),
        }


def correlation_summary(matrix, columns, bins: int = 20) -> dict:
    """Subgroup five-number summaries, histogram and share of ``|r| <= 0.5``.

    Each unordered off-diagonal pair is counted once. Subgroups use only
    pairs whose two columns share the feature type (or image family).
    """
    A = np.abs(np.asarray(matrix, dtype=np.float64))
    p = A.shape[0]
    if p < 2:
        raise DegenerateTableError("need at least two columns")
    pairs = A[np.triu_indices(p, 1)]
    counts, edges = np.histogram(pairs, bins=bins, range=(0.0, 1.0))
    notes: list[str] = []
    stats = {
        "feature_type": _group_stats(A, [c.feature_type for c in columns], notes, "feature type"),
        "image_type": _group_stats(A, [image_family(c.image_type) for c in columns], notes,
                                   "image type"),
    }
    return {
        "subgroup_stats": stats,
        "histogram_edges": edges,
        "histogram_counts": counts,
        "fraction_le_half": float(np.count_nonzero(pairs <= 0.5) / pairs.size),
        "notes": notes,
    }


def correlation_report(t: FeatureTable) -> CorrelationReport:
    R = pearson_matrix(t.values)
    s = correlation_summary(R, t.columns)
    return CorrelationReport(R, cluster_order(R), s["subgroup_stats"], s["histogram_edges"],
                             s["histogram_counts"], s["fraction_le_half"], s["notes"])
