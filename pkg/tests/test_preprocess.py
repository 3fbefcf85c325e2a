import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from radiomarker.preprocess import (SmoteParams, apply_scaler, fit_scaler, minority_neighbours,
                                    smote)


def _segment_distance(p, a, b):
    d = b - a
    denom = d @ d
    t = 0.0 if denom == 0 else np.clip((p - a) @ d / denom, 0.0, 1.0)
    return float(np.linalg.norm(p - (a + t * d)))


def test_scaler_example():
    X = np.array([[1.0, 4.0], [2.0, 4.0], [3.0, 4.0]])
    s = fit_scaler(X)
    assert s.mu[0] == 2.0 and s.sigma[0] == pytest.approx(np.sqrt(2 / 3))
    Z = apply_scaler(s, X)
    np.testing.assert_allclose(Z[:, 0], [-1.2247, 0, 1.2247], atol=5e-5)
    np.testing.assert_array_equal(Z[:, 1], 0.0)
    with pytest.raises(ValueError):
        apply_scaler(s, np.zeros((2, 3)))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_scaler_refit_is_identity(seed):
    g = np.random.default_rng(seed)
    X = g.normal(size=(g.integers(2, 30), 6)) * g.uniform(0.1, 100, size=6) + g.normal(size=6)
    X[:, 2] = 3.0
    Z = apply_scaler(fit_scaler(X), X)
    assert np.all(np.abs(Z.mean(axis=0)) < 1e-12)
    again = fit_scaler(Z)
    np.testing.assert_allclose(again.mu, 0.0, atol=1e-12)
    varying = np.ptp(X, axis=0) > 0
    np.testing.assert_allclose(again.sigma[varying], 1.0, rtol=1e-12)


def _two_class(g, n0=28, n1=14, p=5):
    X = g.normal(size=(n0 + n1, p))
    y = np.r_[np.zeros(n0, int), np.ones(n1, int)]
    return X, y


def test_smote_balance_28_14():
    X, y = _two_class(np.random.default_rng(0))
    out = smote(X, y, SmoteParams(5, seed=1))
    assert out.X.shape == (56, 5)
    assert np.bincount(out.y).tolist() == [28, 28]
    np.testing.assert_array_equal(out.X[:42], X)
    assert out.origin.shape == (14, 2)
    assert np.all((out.beta > 0) & (out.beta < 1))


def test_smote_beta_zero():
    X, y = _two_class(np.random.default_rng(1))
    out = smote(X, y, SmoteParams(3, seed=2), beta=0.0)
    np.testing.assert_array_equal(out.X[42:], X[out.origin[:, 0]])


def test_smote_two_point_minority():
    g = np.random.default_rng(2)
    a, b = g.normal(size=3), g.normal(size=3)
    X = np.vstack([g.normal(size=(6, 3)), a, b])
    y = np.r_[np.zeros(6, int), 1, 1]
    out = smote(X, y, SmoteParams(1, seed=3))
    assert np.bincount(out.y).tolist() == [6, 6]
    for row in out.X[8:]:
        assert _segment_distance(row, a, b) < 1e-9


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 12), st.integers(13, 30), st.sampled_from([1, 3, 5]))
def test_smote_geometry(seed, n_min, n_maj, k):
    g = np.random.default_rng(seed)
    X = g.normal(size=(n_min + n_maj, 4))
    y = np.r_[np.ones(n_min, int), np.zeros(n_maj, int)]
    out = smote(X, y, SmoteParams(k, seed))
    assert np.bincount(out.y).tolist() == [n_maj, n_maj]
    nn = minority_neighbours(X[:n_min], min(k, n_min - 1))
    for row, (r, i) in zip(out.X[n_min + n_maj:], out.origin):
        assert y[r] == 1 and y[i] == 1 and r != i
        assert i in nn[r]
        assert _segment_distance(row, X[r], X[i]) < 1e-9


def test_smote_seed_behaviour():
    X, y = _two_class(np.random.default_rng(4))
    a = smote(X, y, SmoteParams(5, seed=10))
    b = smote(X, y, SmoteParams(5, seed=10))
    c = smote(X, y, SmoteParams(5, seed=11))
    np.testing.assert_array_equal(a.X, b.X)
    np.testing.assert_array_equal(a.X[:42], c.X[:42])
    assert not np.array_equal(a.X[42:], c.X[42:])


def test_smote_edge_cases(caplog):
    X = np.arange(8.0).reshape(4, 2)
    out = smote(X, np.array([0, 0, 0, 1]), SmoteParams(5, seed=0))
    np.testing.assert_array_equal(out.X[4:], np.repeat(X[3:], 2, axis=0))
    assert "single minority row" in caplog.text
    with pytest.raises(ValueError):
        smote(X, np.zeros(4, int), SmoteParams())
    same = smote(X, np.array([0, 1, 0, 1]), SmoteParams())
    np.testing.assert_array_equal(same.X, X)
    with pytest.raises(ValueError):
        SmoteParams(0)


def test_neighbours_tie_break():
    Xm = np.array([[0.0], [1.0], [-1.0], [2.0]])
    # rows 1 and 2 are equally close to row 0; the lower index wins
    assert minority_neighbours(Xm, 1)[0, 0] == 1
    assert minority_neighbours(Xm, 2)[0].tolist() == [1, 2]
