import math

import numpy as np
import pytest

import clustershap as cx
from clustershap.errors import (
    BadBudget,
    BoundaryCoalition,
    ClusterTooSmall,
    SingularSystem,
    TooManyFeatures,
)
from clustershap.shapley import ExplanationConfig
from conftest import make_synthetic_dataset


# --- split ---

def test_split_iris_20_percent(iris):
    a = cx.annotate(iris, None, "labeled")
    train, test = cx.split(iris, a, 0.2, 42)
    assert test.size == 30
    assert train.size == 120
    for c in range(3):
        assert np.sum(a.labels[test] == c) == 10
    assert np.intersect1d(train, test).size == 0


def test_split_minimum_one_test_row():
    d = cx.Dataset(np.arange(4, dtype=float)[:, None], ("a",), np.array([0, 0, 1, 1]))
    a = cx.annotate(d, None, "labeled")
    train, test = cx.split(d, a, 0.5, 0)
    for c in (0, 1):
        assert np.sum(a.labels[test] == c) == 1


def test_split_deterministic(iris):
    a = cx.annotate(iris, None, "labeled")
    assert np.array_equal(cx.split(iris, a, 0.2, 7)[1], cx.split(iris, a, 0.2, 7)[1])
    assert not np.array_equal(cx.split(iris, a, 0.2, 7)[1], cx.split(iris, a, 0.2, 8)[1])


def test_split_cluster_too_small():
    d = cx.Dataset(np.arange(3, dtype=float)[:, None], ("a",), np.array([0, 0, 1]))
    a = cx.annotate(d, None, "labeled")
    with pytest.raises(ClusterTooSmall):
        cx.split(d, a, 0.2, 0)


def test_split_excludes_unassigned():
    d = cx.Dataset(np.arange(6, dtype=float)[:, None], ("a",))
    a = cx.ClusterAssignment(np.array([0, 0, 1, 1, -1, -1]), 2, "manual")
    train, test = cx.split(d, a, 0.5, 0)
    assert 4 not in np.concatenate([train, test])
    assert 5 not in np.concatenate([train, test])


# --- kernel weights ---

def test_kernel_weight_analytic():
    assert cx.kernel_weight(4, 1) == pytest.approx(0.25)
    assert cx.kernel_weight(4, 2) == pytest.approx(0.125)


def test_kernel_weight_symmetry():
    for m in range(2, 12):
        for s in range(1, m):
            assert cx.kernel_weight(m, s) == pytest.approx(cx.kernel_weight(m, m - s))


def test_kernel_weight_boundary():
    with pytest.raises(BoundaryCoalition):
        cx.kernel_weight(4, 0)
    with pytest.raises(BoundaryCoalition):
        cx.kernel_weight(4, 4)


# --- coalition sampling ---

def test_sample_coalitions_full_enumeration():
    masks = cx.sample_coalitions(4, 14, seed=0)
    assert masks.shape == (14, 4)
    sizes = masks.sum(axis=1)
    assert sizes.min() >= 1 and sizes.max() <= 3
    assert len({tuple(row) for row in masks.tolist()}) == 14


def test_sample_coalitions_m3_budget6():
    masks = cx.sample_coalitions(3, 6, seed=0)
    assert masks.shape == (6, 3)
    assert len({tuple(row) for row in masks.tolist()}) == 6


def test_sample_coalitions_layers_complete_m12():
    masks = cx.sample_coalitions(12, 100, seed=5)
    assert masks.shape == (100, 12)
    assert len({tuple(row) for row in masks.tolist()}) == 100
    sizes = masks.sum(axis=1)
    # complete outer layers: all 12 singletons and all 12 size-11 coalitions
    assert int(np.sum(sizes == 1)) == 12
    assert int(np.sum(sizes == 11)) == 12


def test_sample_coalitions_bad_budget():
    with pytest.raises(BadBudget):
        cx.sample_coalitions(5, 1, seed=0)


def test_sample_coalitions_deterministic():
    a = cx.sample_coalitions(10, 60, seed=3)
    b = cx.sample_coalitions(10, 60, seed=3)
    assert np.array_equal(a, b)


# --- marginalize ---

def _toy():
    rng = np.random.default_rng(21)
    cs = cx.CentroidSet(rng.normal(0, 2, (3, 5)))
    x = rng.normal(0, 2, 5)
    bg = rng.normal(0, 2, (8, 5))
    return cs, x, bg


def test_marginalize_full_is_model_output():
    cs, x, bg = _toy()
    full = cx.marginalize(cs, x, np.ones(5, dtype=bool), bg)
    assert np.abs(full - cx.cluster_probability(x, cs)).max() < 1e-12


def test_marginalize_empty_is_base_value():
    cs, x, bg = _toy()
    empty = cx.marginalize(cs, x, np.zeros(5, dtype=bool), bg)
    base = cx.cluster_probabilities(bg, cs).mean(axis=0)
    assert np.abs(empty - base).max() < 1e-12


def test_marginalize_single_background_row():
    cs, x, bg = _toy()
    mask = np.array([True, False, True, False, True])
    got = cx.marginalize(cs, x, mask, bg[:1])
    hybrid = np.where(mask, x, bg[0])
    assert np.abs(got - cx.cluster_probability(hybrid, cs)).max() < 1e-12


# --- exact oracle ---

def test_exact_single_feature():
    rng = np.random.default_rng(30)
    cs = cx.CentroidSet(rng.normal(size=(2, 1)))
    x = rng.normal(size=1)
    bg = rng.normal(size=(6, 1))
    phi = cx.exact_shapley(cs, x, bg)
    base = cx.cluster_probabilities(bg, cs).mean(axis=0)
    fx = cx.cluster_probability(x, cs)
    assert np.abs(phi[0] - (fx - base)).max() < 1e-12


def test_exact_symmetry_for_duplicate_features():
    rng = np.random.default_rng(31)
    half = rng.normal(size=(2, 3))
    cents = np.hstack([half, half[:, :1]])  # feature 3 duplicates feature 0
    xh = rng.normal(size=3)
    x = np.append(xh, xh[0])
    bgh = rng.normal(size=(7, 3))
    bg = np.hstack([bgh, bgh[:, :1]])
    phi = cx.exact_shapley(cx.CentroidSet(cents), x, bg)
    assert np.abs(phi[0] - phi[3]).max() < 1e-12


def test_exact_dummy_feature_is_zero():
    rng = np.random.default_rng(32)
    cents = rng.normal(size=(3, 4))
    cents[:, 2] = 5.0  # same value in every centroid
    x = rng.normal(size=4)
    x[2] = 5.0
    bg = rng.normal(size=(6, 4))
    bg[:, 2] = 5.0  # identical across x and every background row
    phi = cx.exact_shapley(cx.CentroidSet(cents), x, bg)
    assert np.abs(phi[2]).max() < 1e-12


def test_exact_too_many_features():
    cs = cx.CentroidSet(np.zeros((2, 16)) + np.arange(16))
    with pytest.raises(TooManyFeatures):
        cx.exact_shapley(cs, np.zeros(16), np.ones((2, 16)))


def test_exact_efficiency():
    cs, x, bg = _toy()
    phi = cx.exact_shapley(cs, x, bg)
    base = cx.cluster_probabilities(bg, cs).mean(axis=0)
    fx = cx.cluster_probability(x, cs)
    assert np.abs(phi.sum(axis=0) + base - fx).max() < 1e-12


# --- kernel shap ---

def test_kernel_matches_exact_full_enumeration():
    rng = np.random.default_rng(40)
    for m in (2, 3, 5, 8):
        cs = cx.CentroidSet(rng.normal(0, 2, (3, m)))
        x = rng.normal(0, 2, m)
        bg = rng.normal(0, 2, (10, m))
        exact = cx.exact_shapley(cs, x, bg)
        approx, base = cx.kernel_shap_explain(cs, x, bg, budget=2**m - 2, seed=1)
        assert np.abs(exact - approx).max() < 1e-6


def test_kernel_m1_equals_exact():
    rng = np.random.default_rng(41)
    cs = cx.CentroidSet(rng.normal(size=(2, 1)))
    x = rng.normal(size=1)
    bg = rng.normal(size=(5, 1))
    exact = cx.exact_shapley(cs, x, bg)
    approx, _ = cx.kernel_shap_explain(cs, x, bg, seed=0)
    assert np.array_equal(exact, approx)


def test_kernel_efficiency_constraint():
    rng = np.random.default_rng(42)
    cs = cx.CentroidSet(rng.normal(0, 2, (4, 9)))
    x = rng.normal(0, 2, 9)
    bg = rng.normal(0, 2, (20, 9))
    phi, base = cx.kernel_shap_explain(cs, x, bg, budget=40, seed=2)
    fx = cx.cluster_probability(x, cs)
    assert np.abs(phi.sum(axis=0) + base - fx).max() < 1e-9


def test_kernel_singular_system():
    rng = np.random.default_rng(43)
    cs = cx.CentroidSet(rng.normal(size=(2, 6)))
    with pytest.raises(SingularSystem):
        cx.kernel_shap_explain(cs, rng.normal(size=6), rng.normal(size=(4, 6)), budget=2, seed=0)


def test_kernel_oracle_equivalence_sampled_background(iris):
    # oracle equivalence on a real dataset slice
    a = cx.annotate(iris, None, "labeled")
    cs = cx.centroids(iris, a)
    train, test = cx.split(iris, a, 0.2, 3)
    bg = iris.rows[train[:30]]
    x = iris.rows[test[0]]
    exact = cx.exact_shapley(cs, x, bg)
    approx, _ = cx.kernel_shap_explain(cs, x, bg, budget=14, seed=9)
    assert np.abs(exact - approx).max() < 1e-6


# --- explain_all ---

def test_explain_all_iris_defaults(iris_explained):
    _iris, a, cs, em = iris_explained
    assert em.phi.shape == (30, 4, 3)
    assert em.fx.shape == (30, 3)
    em.validate(tol=1e-9)


def test_explain_all_self_centroid_rows():
    rows = np.array([[0.0, 0.0]] * 4 + [[5.0, 5.0]] * 4)
    d = cx.Dataset(rows, ("a", "b"), np.array([0] * 4 + [1] * 4))
    a = cx.annotate(d, None, "labeled")
    cs = cx.centroids(d, a)
    em = cx.explain_all(d, a, cs, ExplanationConfig(seed=1))
    own = a.labels[em.test_indices]
    for i in range(em.n_test):
        assert em.fx[i, own[i]] == 0.0


def test_explain_all_deterministic(iris):
    a = cx.annotate(iris, None, "labeled")
    cs = cx.centroids(iris, a)
    em1 = cx.explain_all(iris, a, cs, ExplanationConfig(seed=11))
    em2 = cx.explain_all(iris, a, cs, ExplanationConfig(seed=11))
    assert np.array_equal(em1.phi, em2.phi)
    assert np.array_equal(em1.fx, em2.fx)
    assert np.array_equal(em1.test_indices, em2.test_indices)


def test_explain_all_threads_match_serial(iris):
    a = cx.annotate(iris, None, "labeled")
    cs = cx.centroids(iris, a)
    serial = cx.explain_all(iris, a, cs, ExplanationConfig(seed=6, threads=1))
    threaded = cx.explain_all(iris, a, cs, ExplanationConfig(seed=6, threads=4))
    assert np.array_equal(serial.phi, threaded.phi)


def test_explain_all_progress_callback(iris):
    a = cx.annotate(iris, None, "labeled")
    cs = cx.centroids(iris, a)
    seen = []
    cx.explain_all(iris, a, cs, ExplanationConfig(seed=2), on_progress=lambda i, n: seen.append((i, n)))
    assert seen[-1] == (30, 30)


def test_sign_convention_cohesion():
    # one feature separates two clusters; everything else is shared noise.
    # toward its own cluster's output the separating feature must push the
    # normalized distance down, i.e. mean phi < 0
    rng = np.random.default_rng(7)
    n_per = 40
    sep = np.concatenate([rng.normal(0.0, 0.4, n_per), rng.normal(8.0, 0.4, n_per)])
    noise = rng.normal(0.0, 1.0, (2 * n_per, 3))
    d = cx.Dataset(np.column_stack([sep, noise]), ("sep", "n1", "n2", "n3"),
                   np.array([0] * n_per + [1] * n_per))
    a = cx.annotate(d, None, "labeled")
    cs = cx.centroids(d, a)
    em = cx.explain_all(d, a, cs, ExplanationConfig(seed=3))
    for c in (0, 1):
        own = a.labels[em.test_indices] == c
        assert em.phi[own, 0, c].mean() < 0.0


def test_default_budget_rule():
    assert cx.default_budget(4) == 14
    assert cx.default_budget(11) == 2046
    assert cx.default_budget(20) == 2 * 20 + 2048


def test_oracle_equivalence_random_instances():
    rng = np.random.default_rng(99)
    for _ in range(6):
        m = int(rng.integers(2, 9))
        k = int(rng.integers(2, 4))
        cs = cx.CentroidSet(rng.normal(0, 3, (k, m)))
        x = rng.normal(0, 3, m)
        bg = rng.normal(0, 3, (int(rng.integers(3, 15)), m))
        exact = cx.exact_shapley(cs, x, bg)
        approx, _ = cx.kernel_shap_explain(cs, x, bg, budget=2**m - 2, seed=int(rng.integers(1000)))
        assert np.abs(exact - approx).max() < 1e-6
