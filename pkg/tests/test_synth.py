import numpy as np
import pytest

from radiomarker.features.extract import image_features
from radiomarker.features.firstorder import FIRSTORDER_NAMES
from radiomarker.filters import gradient_magnitude
from radiomarker.synth import (PhantomSpec, box_smooth, ellipsoid_mask, gen_phantom, gen_tabular,
                               phantom_cohort)
from radiomarker.volume_io import crop


def test_white_noise_mean():
    spec = PhantomSpec(seed=4, radius=(0, 0), offset=(0.0, 0.0), noise_sd=100.0)
    v, m = gen_phantom(spec)
    x = v.voxels[m.voxels]
    assert abs(x.mean()) <= 3 * 100.0 / np.sqrt(x.size)
    assert x.std() == pytest.approx(100.0, rel=0.05)


def test_same_seed_same_volume():
    a, ma = gen_phantom(PhantomSpec(seed=9))
    b, mb = gen_phantom(PhantomSpec(seed=9))
    np.testing.assert_array_equal(a.voxels, b.voxels)
    np.testing.assert_array_equal(ma.voxels, mb.voxels)
    c, _ = gen_phantom(PhantomSpec(seed=10))
    assert not np.array_equal(a.voxels, c.voxels)
    # values survive an f32 file unchanged
    np.testing.assert_array_equal(a.voxels.astype(np.float32).astype(np.float64), a.voxels)


def test_box_smooth():
    x = np.zeros((5, 5, 5))
    x[2, 2, 2] = 27.0
    y = box_smooth(x, 1)
    assert y[1:4, 1:4, 1:4].sum() == pytest.approx(27.0)
    np.testing.assert_allclose(y[1:4, 1:4, 1:4], 1.0)
    np.testing.assert_array_equal(box_smooth(x, 0), x)
    # periodic: a corner impulse wraps around
    x = np.zeros((4, 4, 4))
    x[0, 0, 0] = 27.0
    assert box_smooth(x, 1)[3, 3, 3] == pytest.approx(1.0)


def test_ellipsoid():
    m = ellipsoid_mask((21, 21, 21), (1, 1, 1), (10, 10, 10))
    assert m[10, 10, 10] and m[0, 10, 10] and not m[0, 0, 10]
    with pytest.raises(ValueError):
        PhantomSpec(dims=(10, 10, 10), semi_axes=(6, 4, 4))
    with pytest.raises(ValueError):
        PhantomSpec(radius=(-1, 2))
    with pytest.raises(ValueError):
        PhantomSpec(class_label=2)


def test_smoother_class_has_lower_gradient():
    means = {0: [], 1: []}
    for seed in range(20):
        for label in (0, 1):
            v, m = gen_phantom(PhantomSpec(seed=seed, class_label=label, dims=(32, 32, 32),
                                           semi_axes=(10, 8, 7)))
            cv, cm = crop(v, m, 3)
            feats = image_features(gradient_magnitude(cv).volume, cm, 25.0)
            means[label].append(feats[FIRSTORDER_NAMES.index("Mean")])
    assert max(means[1]) < min(means[0])


def test_cohort():
    cohort = phantom_cohort(60, seed=0, class_fractions=(2, 1))
    labels = [s.class_label for _, s in cohort]
    assert sum(labels) == 20 and len(labels) == 60
    assert [cid for cid, _ in cohort][:2] == ["case000", "case001"]
    assert len({s.seed for _, s in cohort}) == 60
    assert phantom_cohort(60, seed=0) == cohort


def test_tabular_structure():
    t = gen_tabular(0)
    assert t.values.shape == (42, 200)
    assert np.bincount(t.labels).tolist() == [28, 14]
    assert t.names[0] == "synthetic_FirstOrder_f0000"
    u = gen_tabular(0)
    np.testing.assert_array_equal(t.values, u.values)
    with pytest.raises(ValueError):
        gen_tabular(0, n_cases=4, class_fractions=(3, 1))
    with pytest.raises(ValueError):
        gen_tabular(0, n_features=5, n_informative=6)
    with pytest.raises(ValueError):
        gen_tabular(0, class_fractions=(1, 0))


def _mean_gap(effect, seeds=100, n=42):
    gaps = []
    for seed in range(seeds):
        t = gen_tabular(seed, n_cases=n, n_features=20, n_informative=5, effect_size=effect)
        y = t.labels
        gaps.append(t.values[y == 1].mean(axis=0) - t.values[y == 0].mean(axis=0))
    return np.mean(gaps, axis=0)


def test_tabular_null_effect():
    # averaged over 100 seeds no column separates the classes
    assert np.all(np.abs(_mean_gap(0.0)) <= 4 / np.sqrt(42))
    shifted = _mean_gap(1.5)
    assert np.all(shifted[:5] > 4 / np.sqrt(42)) and np.all(np.abs(shifted[5:]) <= 4 / np.sqrt(42))


def test_tabular_strong_effect():
    t = gen_tabular(1, n_features=10, n_informative=1, effect_size=10.0)
    r = np.corrcoef(t.values[:, 0], t.labels)[0, 1]
    assert r > 0.9
