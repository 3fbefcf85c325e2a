import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from radiomarker.features.extract import FeatureColumn
from radiomarker.table import (DegenerateTableError, FeatureTable, UNKNOWN_LABEL, cluster_order,
                               correlation_report, correlation_summary, pearson_matrix,
                               prune_degenerate, read_table_csv, write_table_csv)


def _table(X, types=None, images=None, labels=None):
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    types = types or ["FirstOrder"] * p
    images = images or ["original"] * p
    cols = [FeatureColumn(im, ft, f"f{j}") for j, (im, ft) in enumerate(zip(images, types))]
    labels = labels if labels is not None else [i % 2 for i in range(n)]
    return FeatureTable([f"c{i}" for i in range(n)], labels, cols, X)


def test_table_validation():
    with pytest.raises(ValueError, match="duplicate"):
        FeatureTable(["a", "a"], [0, 1], [FeatureColumn("o", "Shape", "x")], [[1], [2]])
    with pytest.raises(ValueError):
        FeatureTable(["a", "b"], [0, 2], [FeatureColumn("o", "Shape", "x")], [[1], [2]])
    t = FeatureTable(["a", "b"], [0, UNKNOWN_LABEL], [FeatureColumn("o", "Shape", "x")], [[1], [2]])
    with pytest.raises(ValueError):
        t.require_labels()


def test_csv_round_trip(tmp_path, rng):
    t = _table(rng.normal(size=(4, 3)) * 1e5, labels=[1, 0, UNKNOWN_LABEL, 0])
    write_table_csv(t, tmp_path / "t.csv")
    u = read_table_csv(tmp_path / "t.csv")
    assert u.case_ids == t.case_ids and u.names == t.names
    np.testing.assert_array_equal(u.values, t.values)
    np.testing.assert_array_equal(u.labels, t.labels)
    assert (tmp_path / "t.csv").read_text().splitlines()[0] == "case_id,label,original_FirstOrder_f0," \
        "original_FirstOrder_f1,original_FirstOrder_f2"


def test_select_and_canonical():
    t = FeatureTable(["b", "a", "c"], [1, 0, 1],
                     [FeatureColumn("o", "Shape", "x"), FeatureColumn("o", "GLCM", "y")],
                     [[1, 2], [3, 4], [5, 6]])
    c = t.canonical()
    assert c.case_ids == ("a", "b", "c")
    np.testing.assert_array_equal(c.values[:, 0], [3, 1, 5])
    assert t.feature_type("GLCM").names == ["o_GLCM_y"]
    with pytest.raises(ValueError, match="known"):
        t.feature_type("NGTDM")


def test_prune():
    X = np.array([[1.0, 5.0, 2.0], [2.0, 5.0, np.inf], [3.0, 5.0, 1.0]])
    t, removed = prune_degenerate(_table(X))
    assert t.names == ["original_FirstOrder_f0"]
    assert removed == [("original_FirstOrder_f1", "zero variance"),
                       ("original_FirstOrder_f2", "non-finite")]
    clean = _table([[1.0, 2.0], [2.0, 0.0]])
    same, removed = prune_degenerate(clean)
    assert removed == [] and same.names == clean.names
    with pytest.raises(DegenerateTableError):
        prune_degenerate(_table([[1.0], [1.0]]))
    with pytest.raises(DegenerateTableError):
        prune_degenerate(_table([[1.0, 2.0]]))


def test_pearson_examples():
    x = np.array([1.0, 2.0, 3.0])
    R = pearson_matrix(np.c_[x, [1.0, 2.0, 4.0], -x])
    assert R[0, 0] == 1.0
    assert R[0, 1] == pytest.approx(0.98198, abs=5e-6)
    assert R[0, 1] == pytest.approx(np.corrcoef(x, [1, 2, 4])[0, 1], rel=1e-14)
    assert R[0, 2] == pytest.approx(-1.0, abs=1e-15)
    assert np.array_equal(R, R.T)
    with pytest.raises(DegenerateTableError):
        pearson_matrix(np.c_[x, np.ones(3)])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_pearson_affine_invariance(seed):
    g = np.random.default_rng(seed)
    X = g.normal(size=(8, 5))
    a = g.uniform(0.1, 10, size=5)
    b = g.normal(size=5) * 100
    np.testing.assert_allclose(pearson_matrix(X * a + b), pearson_matrix(X), atol=1e-10)


def test_cluster_order_examples():
    assert cluster_order(np.eye(2)).tolist() == [0, 1]
    assert cluster_order(np.eye(5)).tolist() == [0, 1, 2, 3, 4]
    R = np.eye(3)
    R[0, 2] = R[2, 0] = 0.99
    order = cluster_order(R).tolist()
    assert abs(order.index(0) - order.index(2)) == 1


def _naive_upgma(D):
    """Average linkage by recomputing every cluster distance from leaf pairs."""
    clusters = [[i] for i in range(D.shape[0])]
    while len(clusters) > 1:
        best = None
        for a, b in itertools.combinations(range(len(clusters)), 2):
            d = np.mean([D[i, j] for i in clusters[a] for j in clusters[b]])
            key = (d, min(clusters[a]), min(clusters[b]))
            if best is None or key < best[0]:
                best = (key, a, b)
        _, a, b = best
        lo, hi = sorted((clusters[a], clusters[b]), key=min)
        merged = lo + hi
        clusters = [c for k, c in enumerate(clusters) if k not in (a, b)] + [merged]
    return clusters[0]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 9))
def test_cluster_order_matches_naive(seed, p):
    g = np.random.default_rng(seed)
    X = g.normal(size=(12, p))
    X[:, p // 2:] += X[:, :1] * g.uniform(0, 3)
    R = pearson_matrix(X)
    D = 1 - np.abs(R)
    np.fill_diagonal(D, 0)
    assert cluster_order(R).tolist() == _naive_upgma(D)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_cluster_order_case_permutation(seed):
    g = np.random.default_rng(seed)
    X = g.normal(size=(15, 7))
    X[:, 3] += 2 * X[:, 0]
    a = cluster_order(pearson_matrix(X))
    b = cluster_order(pearson_matrix(X[g.permutation(15)]))
    assert sorted(a.tolist()) == list(range(7))
    # row order only perturbs coefficients at rounding level
    assert a.tolist() == b.tolist()


def _cols(p, types=None):
    types = types or ["GLCM"] * p
    return [FeatureColumn("original", t, f"f{j}") for j, t in enumerate(types)]


def test_fraction_examples():
    assert correlation_summary(np.eye(4), _cols(4))["fraction_le_half"] == 1.0
    assert correlation_summary(np.ones((4, 4)), _cols(4))["fraction_le_half"] == 0.0
    R = np.eye(3)
    R[0, 1] = R[1, 0] = 0.2
    R[0, 2] = R[2, 0] = 0.6
    R[1, 2] = R[2, 1] = -0.4
    s = correlation_summary(R, _cols(3))
    assert s["fraction_le_half"] == pytest.approx(2 / 3)
    assert s["histogram_counts"].sum() == 3
    assert len(s["histogram_edges"]) == 21


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 10))
def test_fraction_brute_force(seed, p):
    g = np.random.default_rng(seed)
    R = pearson_matrix(g.normal(size=(6, p)))
    hits = total = 0
    for i in range(p):
        for j in range(i + 1, p):
            total += 1
            hits += abs(R[i, j]) <= 0.5
    assert correlation_summary(R, _cols(p))["fraction_le_half"] == hits / total


def test_subgroups():
    R = np.eye(4)
    R[0, 1] = R[1, 0] = 0.9
    R[2, 3] = R[3, 2] = 0.3
    R[0, 2] = R[2, 0] = 0.7
    cols = [FeatureColumn("original", "GLCM", "a"), FeatureColumn("wavelet-LLL", "GLCM", "b"),
            FeatureColumn("wavelet-HHH", "NGTDM", "c"), FeatureColumn("original", "Shape", "d")]
    s = correlation_summary(R, cols)
    ft = s["subgroup_stats"]["feature_type"]
    assert set(ft) == {"GLCM"}
    assert ft["GLCM"]["median"] == pytest.approx(0.9) and ft["GLCM"]["n_pairs"] == 1
    im = s["subgroup_stats"]["image_type"]
    assert im["wavelet"]["max"] == pytest.approx(0.0)
    assert im["original"]["n_pairs"] == 1
    assert any("NGTDM" in n for n in s["notes"])


def test_correlation_report_duplicate_column(rng):
    x = rng.normal(size=10)
    t = _table(np.c_[x, x, rng.normal(size=10)])
    rep = correlation_report(t)
    assert rep.matrix[0, 1] == pytest.approx(1.0)
    assert rep.fraction_le_half < 1.0
    assert rep.summary()["n_pairs"] == 3
