import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from matherm.sampling import (
    MatrixEnsemble,
    RngStream,
    as_generator,
    check_spd,
    mc_mean,
    polar_decompose,
    sample_gaussian_matrix,
    sample_stiefel_haar,
    sample_wishart,
)


def test_streams_are_reproducible_and_distinct():
    a = RngStream(5, 3).generator().standard_normal(4)
    b = RngStream(5, 3).generator().standard_normal(4)
    c = RngStream(5, 4).generator().standard_normal(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(RngStream(5).spawn(1).generator().random(3), RngStream(5, 1).generator().random(3))
    with pytest.raises(ValueError):
        RngStream(-1)
    with pytest.raises(TypeError):
        as_generator("seed")


def test_mc_mean_independent_of_workers():
    def draw(gen, m):
        return gen.standard_normal(m) ** 2

    one = mc_mean(draw, 55_000, RngStream(1), batch_size=10_000, workers=1)
    many = mc_mean(draw, 55_000, RngStream(1), batch_size=10_000, workers=4)
    assert one.value == many.value and one.std_error == many.std_error
    assert abs(one.value - 1) < 4 * one.std_error


def test_mc_mean_matches_numpy():
    def draw(gen, m):
        return gen.uniform(size=m)

    est = mc_mean(draw, 25_000, RngStream(2), batch_size=7_000)
    vals = np.concatenate([RngStream(2).spawn(b).generator().uniform(size=s) for b, s in enumerate([7000] * 3 + [4000])])
    assert est.value == pytest.approx(vals.mean(), rel=1e-13)
    assert est.std_error == pytest.approx(vals.std(ddof=1) / np.sqrt(len(vals)), rel=1e-10)


@given(st.integers(1, 6).flatmap(lambda n: st.tuples(st.just(n), st.integers(1, n))), st.integers(0, 1000))
def test_stiefel_rows_orthonormal(shape, seed):
    n, ell = shape
    U = sample_stiefel_haar(n, ell, seed, size=5)
    assert U.shape == (5, ell, n)
    assert np.allclose(U @ np.swapaxes(U, 1, 2), np.eye(ell), atol=1e-12)


def test_stiefel_projection_moment():
    # E[U^T U] = (ell / n) I for Haar frames
    n, ell = 5, 2
    U = sample_stiefel_haar(n, ell, RngStream(3), size=200_000)
    P = np.einsum("mij,mik->mjk", U, U)
    mean = P.mean(axis=0)
    se = P.std(axis=0) / np.sqrt(len(P))
    assert np.all(np.abs(mean - ell / n * np.eye(n)) <= 4 * se + 1e-12)


def test_gaussian_with_covariance():
    sigma = np.array([[2.0, 0.5], [0.5, 1.0]])
    X = sample_gaussian_matrix(MatrixEnsemble(1, 2, sigma), RngStream(4), size=400_000)[:, 0, :]
    cov = X.T @ X / len(X)
    assert np.allclose(cov, sigma, atol=0.02)
    with pytest.raises(ValueError):
        MatrixEnsemble(3, 2)
    with pytest.raises(ValueError):
        MatrixEnsemble(1, 2, np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_wishart_moments():
    W = sample_wishart(3, 7, RngStream(5), size=200_000)
    assert np.allclose(W.mean(axis=0), 7 * np.eye(3), atol=0.05)
    # Var(W_11) = 2n, Var(W_12) = n
    assert W[:, 0, 0].var() == pytest.approx(14, rel=0.03)
    assert W[:, 0, 1].var() == pytest.approx(7, rel=0.03)


def test_polar_decomposition():
    X = np.random.default_rng(6).standard_normal((3, 2, 5))
    R, U = polar_decompose(X)
    w, V = np.linalg.eigh(R)
    root = (V * np.sqrt(w)[..., None, :]) @ np.swapaxes(V, -1, -2)
    assert np.allclose(root @ U, X)
    assert np.allclose(U @ np.swapaxes(U, -1, -2), np.eye(2))
    with pytest.raises(ValueError, match="rank"):
        polar_decompose(np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0]]))


def test_check_spd():
    assert check_spd(np.eye(2)).shape == (2, 2)
    for bad in (np.ones((2, 3)), np.array([[1.0, 1.0], [0.0, 1.0]]), -np.eye(2)):
        with pytest.raises(ValueError):
            check_spd(bad)
