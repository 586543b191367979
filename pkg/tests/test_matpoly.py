import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import eval_genlaguerre, eval_hermitenorm

from matherm.matpoly import (
    MatPolyContext,
    gram_eigenvalues,
    hermite_eval,
    hermite_eval_sigma,
    hermite_from_eigenvalues,
    hermite_normalization,
    hermite_univariate_expansion,
    laguerre_eval,
)
from matherm.partitions import partitions_up_to
from matherm.sampling import RngStream, mc_mean, sample_stiefel_haar
from matherm.zonal import get_table
from oracles import hermite_via_zonal_sum

SHAPES = [(1, 1), (1, 2), (2, 3), (3, 3), (2, 5), (3, 4)]


@pytest.mark.parametrize("ell,n", SHAPES)
def test_matches_zonal_double_sum(ell, n):
    table = get_table(4)
    ctx = MatPolyContext(ell, n, table)
    gen = np.random.default_rng(ell * 10 + n)
    for kappa in partitions_up_to(3, ell):
        for _ in range(3):
            X = gen.standard_normal((ell, n))
            ref = hermite_via_zonal_sum(kappa, X, n, table)
            got = hermite_eval(kappa, X, ctx)
            assert got == pytest.approx(ref, rel=1e-10, abs=1e-10), kappa


@pytest.mark.parametrize("ell,n", [(1, 2), (2, 3), (3, 3), (2, 2)])
def test_matches_univariate_expansion(ell, n):
    ctx = MatPolyContext(ell, n)
    X = np.random.default_rng(7).standard_normal((50, ell, n))
    for kappa in partitions_up_to(2, ell):
        assert np.allclose(hermite_eval(kappa, X, ctx), hermite_univariate_expansion(kappa, X), rtol=1e-10, atol=1e-10)


def test_examples():
    ctx = MatPolyContext(2, 3)
    assert hermite_eval((1,), np.zeros((2, 3)), ctx) == pytest.approx(-1.0)
    assert hermite_eval((), np.ones((2, 3)), ctx) == 1.0
    x = 0.37
    one = MatPolyContext(1, 1)
    # H_(k) on 1 x 1 matrices is 4^{-k} (1/2)_k^{-1} He_{2k}
    for k in (1, 2, 3):
        expected = eval_hermitenorm(2 * k, x) / (4**k * math.prod(0.5 + j for j in range(k)))
        assert hermite_eval((k,), np.array([[x]]), MatPolyContext(1, 1, get_table(4))) == pytest.approx(expected)
    assert hermite_eval((1,), np.array([[x]]), one) == pytest.approx((x * x - 1) / 2)


def test_univariate_expansion_at_zero():
    ell, n = 2, 3
    X = np.zeros((ell, n))
    closed = (3 * ell * n * 3 + 3 * ell * (ell - 1) * n + 3 * ell * n * (n - 1) + ell * (ell - 1) * n * (n - 1)) / (12 * n * (n + 2))
    assert hermite_univariate_expansion((2,), X) == pytest.approx(closed)
    assert hermite_eval((2,), X, MatPolyContext(ell, n)) == pytest.approx(closed)
    assert hermite_univariate_expansion((1, 1), np.random.default_rng(1).standard_normal((1, 4))) == 0.0


def test_normalization_constants():
    for ell, n in [(1, 2), (2, 3), (3, 5)]:
        norm = hermite_normalization((1,), ell, n)
        assert norm.c_kappa == Fraction(ell, 2 * n)
        assert norm.gamma_kappa == Fraction(-1, 2) / Fraction(n, 2)
    with pytest.raises(ValueError):
        hermite_normalization((1, 1, 1), 2, 3)


def test_laguerre_reduces_to_classical():
    ctx = MatPolyContext(1, 3)
    for gamma in (0.5, 1.0, 2.5):
        for k in (1, 2, 3):
            got = laguerre_eval((k,), gamma, [0.7], ctx)
            assert got == pytest.approx(math.factorial(k) * eval_genlaguerre(k, gamma, 0.7), rel=1e-12)
    assert laguerre_eval((), 0.5, [0.3, 0.2], MatPolyContext(2, 3)) == 1.0


@given(st.integers(0, 2**31))
def test_right_orthogonal_invariance(seed):
    gen = np.random.default_rng(seed)
    ctx = MatPolyContext(2, 4)
    X = gen.standard_normal((2, 4))
    H = sample_stiefel_haar(4, 4, gen)
    for kappa in partitions_up_to(3, 2):
        assert hermite_eval(kappa, X @ H, ctx) == pytest.approx(hermite_eval(kappa, X, ctx), rel=1e-10, abs=1e-10)


def test_sigma_variant():
    ctx = MatPolyContext(2, 3)
    gen = np.random.default_rng(3)
    X = gen.standard_normal((2, 3))
    assert hermite_eval_sigma((2, 1), X, np.eye(3), ctx) == pytest.approx(hermite_eval((2, 1), X, ctx))
    c = 1.7
    # det(c I_n)^{l k} H(X / sqrt(c)) with k = 1
    expected = c ** (ctx.n * ctx.ell) * hermite_eval((1,), X / math.sqrt(c), ctx)
    assert hermite_eval_sigma((1,), X, c * np.eye(3), ctx) == pytest.approx(expected)
    assert hermite_eval_sigma((), X, np.diag([1, 2, 3.0]), ctx) == 1.0
    with pytest.raises(ValueError):
        hermite_eval_sigma((1,), X, -np.eye(3), ctx)


def test_shape_and_length_checks():
    ctx = MatPolyContext(2, 3)
    with pytest.raises(ValueError):
        hermite_eval((1,), np.zeros((3, 2)), ctx)
    with pytest.raises(ValueError):
        MatPolyContext(3, 2)


def test_gram_eigenvalues_use_small_side():
    X = np.random.default_rng(0).standard_normal((4, 2, 7))
    assert gram_eigenvalues(X).shape == (4, 2)


@pytest.mark.parametrize("ell,n", [(1, 2), (2, 3)])
def test_orthogonality_monte_carlo(ell, n):
    ctx = MatPolyContext(ell, n)
    parts = partitions_up_to(2, ell)

    def draw(gen, m):
        eigs = gram_eigenvalues(gen.standard_normal((m, ell, n)))
        H = [hermite_from_eigenvalues(p, eigs, ctx) * np.ones(m) for p in parts]
        return np.stack([H[i] * H[j] for i in range(len(parts)) for j in range(len(parts))], axis=1)

    est = mc_mean(draw, 1_000_000, RngStream(2024, ell))
    k = 0
    for i, p in enumerate(parts):
        for j, q in enumerate(parts):
            target = float(ctx.normalization(p).c_kappa) if i == j else 0.0
            if est.std_error[k] == 0:
                assert est.value[k] == target
            else:
                assert abs(est.value[k] - target) <= 4 * est.std_error[k], (p, q)
            k += 1


def test_sigma_orthogonality_monte_carlo():
    ell, n = 2, 3
    ctx = MatPolyContext(ell, n)
    sigma = np.array([[1.2, 0.3, 0.0], [0.3, 0.8, 0.1], [0.0, 0.1, 1.0]])
    root = np.linalg.cholesky(sigma).T
    parts = [p for p in partitions_up_to(2, ell) if p]
    det = np.linalg.det(sigma)

    def draw(gen, m):
        X = gen.standard_normal((m, ell, n)) @ root
        H = [hermite_eval_sigma(p, X, sigma, ctx) for p in parts]
        return np.stack([H[i] * H[j] for i in range(len(parts)) for j in range(len(parts))], axis=1)

    est = mc_mean(draw, 400_000, RngStream(99))
    k = 0
    for i, p in enumerate(parts):
        for j in range(len(parts)):
            target = det ** (2 * ell * p.weight) * float(ctx.normalization(p).c_kappa) if i == j else 0.0
            assert abs(est.value[k] - target) <= 4 * est.std_error[k]
            k += 1
