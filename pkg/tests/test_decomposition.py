import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import random_correlation

from panelkit.decomposition import biplot_data, fit_pca, score_matrix, scores, scree_data
from panelkit.errors import ComponentOutOfRange, UnknownVariable, ZeroVariance

from conftest import design, whiten_recolor


def identity_block(n=40, seed=3):
    return whiten_recolor(n, np.eye(4), np.random.default_rng(seed))


def test_rank_one_two_columns():
    v = np.array([1.0, 3.0, 2.0, 5.0, 4.0])
    m = fit_pca(np.column_stack([v, 2 * v + 1]))
    np.testing.assert_allclose(m.eigenvalues, [2, 0], atol=1e-12)
    assert m.var_explained[0] == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(m.loadings[:, 0], [2 ** -0.5, 2 ** -0.5], atol=1e-12)


def test_identity_equal_shares():
    m = fit_pca(identity_block())
    np.testing.assert_allclose(m.var_explained, 0.25, atol=1e-10)
    rows = scree_data(m)
    assert [r[0] for r in rows] == [1, 2, 3, 4]
    np.testing.assert_allclose([r[3] for r in rows], [0.25, 0.5, 0.75, 1.0], atol=1e-10)


def test_identity_ties_follow_column_order():
    m = fit_pca(identity_block())
    np.testing.assert_allclose(m.loadings, np.eye(4), atol=1e-6)


def test_repeated_eigenvalue_basis_is_canonical(rng):
    # two exactly tied trailing eigenvalues
    R = random_correlation.rvs([2.0, 1.0, 0.5, 0.5], random_state=11)
    m = fit_pca(whiten_recolor(60, R, rng))
    m2 = fit_pca(whiten_recolor(60, R, np.random.default_rng(99)))
    np.testing.assert_allclose(m.loadings, m2.loadings, atol=1e-6)


def test_rank_one_scree_cumulative():
    v = np.arange(6.0)
    rows = scree_data(fit_pca(np.column_stack([v, -3 * v])))
    assert [r[3] for r in rows] == pytest.approx([1.0, 1.0], abs=1e-12)


def test_planted_spectrum(rng):
    shares = np.array([0.6, 0.25, 0.1, 0.05])
    R = random_correlation.rvs(4 * shares, random_state=7)
    X = whiten_recolor(80, R, rng) * [3.0, 100.0, 0.5, 20.0] + [1, -5, 0, 7]
    m = fit_pca(X)
    np.testing.assert_allclose(m.var_explained, shares, atol=1e-8)
    np.testing.assert_allclose(m.correlation(), R, atol=1e-8)


def test_scores_zero_mean_and_oracle(rng):
    X = rng.standard_normal((50, 4)) @ rng.standard_normal((4, 4))
    m = fit_pca(X)
    for c in range(1, 5):
        assert abs(scores(m, X, c).values.mean()) < 1e-9
    # oracle: z-score by hand, eigenvectors from the general (non-symmetric) solver
    Z = (X - X.mean(0)) / X.std(0, ddof=1)
    C = np.cov(Z, rowvar=False)
    w, V = np.linalg.eig(C)
    order = np.argsort(-w.real)
    V = V.real[:, order]
    for c in range(4):
        v = V[:, c] / np.linalg.norm(V[:, c])
        if v[np.argmax(np.abs(v))] < 0:
            v = -v
        np.testing.assert_allclose(scores(m, X, c + 1).values, Z @ v, atol=1e-8)


def test_score_at_means_is_zero():
    v = np.array([1.0, 3.0, 2.0, 5.0, 4.0])
    X = np.column_stack([v, 2 * v])
    m = fit_pca(X)
    assert scores(m, np.array([[v.mean(), 2 * v.mean()]]), 1).values[0] == pytest.approx(0, abs=1e-12)


def test_scores_by_name_and_errors(rng):
    X = rng.standard_normal((20, 3))
    d = design(X, np.zeros(20), names=["a", "b", "c"])
    m = fit_pca(d)
    swapped = design(X[:, [2, 0, 1]], np.zeros(20), names=["c", "a", "b"])
    np.testing.assert_allclose(scores(m, swapped, 2).values, scores(m, d, 2).values, atol=1e-12)
    with pytest.raises(ComponentOutOfRange):
        scores(m, d, 4)
    with pytest.raises(UnknownVariable):
        scores(m, design(X[:, :2], np.zeros(20), names=["a", "b"]), 1)


def test_zero_variance_rejected():
    X = np.column_stack([np.arange(5.0), np.ones(5)])
    with pytest.raises(ZeroVariance):
        fit_pca(X)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 5))
def test_pca_invariants(seed, p):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((30, p)) @ rng.standard_normal((p, p))
    m = fit_pca(X)
    V = m.loadings
    np.testing.assert_allclose(V.T @ V, np.eye(p), atol=1e-9)
    assert np.all(np.diff(m.eigenvalues) <= 1e-12)
    assert m.eigenvalues.min() >= 0
    np.testing.assert_allclose(m.var_explained, m.eigenvalues / m.eigenvalues.sum(), atol=1e-15)
    np.testing.assert_allclose(m.correlation(), np.corrcoef(X, rowvar=False), atol=1e-8)
    S = score_matrix(m, X)
    np.testing.assert_allclose(np.cov(S, rowvar=False), np.diag(m.eigenvalues), atol=1e-8)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 3))
def test_negating_a_column_only_flips_signs(seed, col):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((30, 4)) @ rng.standard_normal((4, 4))
    Y = X.copy()
    Y[:, col] *= -1
    a, b = fit_pca(X), fit_pca(Y)
    np.testing.assert_allclose(a.var_explained, b.var_explained, atol=1e-12)
    np.testing.assert_allclose(np.abs(a.loadings), np.abs(b.loadings), atol=1e-9)
    # determinism
    np.testing.assert_array_equal(fit_pca(X).loadings, a.loadings)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.permutations(range(4)))
def test_permuting_columns_permutes_loadings(seed, perm):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((30, 4)) @ rng.standard_normal((4, 4))
    a, b = fit_pca(X), fit_pca(X[:, perm])
    np.testing.assert_allclose(a.eigenvalues, b.eigenvalues, atol=1e-10)
    np.testing.assert_allclose(np.abs(a.loadings[perm]), np.abs(b.loadings), atol=1e-8)


def test_biplot_rank_one_and_identity():
    v = np.array([1.0, 3.0, 2.0, 5.0, 4.0])
    arrows = biplot_data(fit_pca(np.column_stack([v, 2 * v])))
    assert all(abs(r.dim2) < 1e-12 for r in arrows)
    X = whiten_recolor(30, np.eye(2), np.random.default_rng(1))
    lengths = [np.hypot(r.dim1, r.dim2) for r in biplot_data(fit_pca(X))]
    assert lengths[0] == pytest.approx(lengths[1], abs=1e-10)


def test_biplot_per_country_average(rng):
    X = rng.standard_normal((12, 3))
    countries = ["A"] * 5 + ["B"] * 7
    d = design(X, np.zeros(12), countries=countries, years=list(range(12)))
    m = fit_pca(d)
    rows = [r for r in biplot_data(m, d) if r.kind == "point"]
    avg = [r for r in biplot_data(m, d, per_country=True) if r.kind == "point"]
    assert [r.label for r in avg] == ["A", "B"]
    for label, sl in (("A", slice(0, 5)), ("B", slice(5, 12))):
        got = next(r for r in avg if r.label == label)
        assert got.dim1 == pytest.approx(np.mean([r.dim1 for r in rows[sl]]), abs=1e-12)
        assert got.dim2 == pytest.approx(np.mean([r.dim2 for r in rows[sl]]), abs=1e-12)
