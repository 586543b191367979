import json
import math

import numpy as np
import pytest
from scipy import stats
from scipy.special import multigammaln

from matherm.chaos import (
    ChaosExpansion,
    CoefficientRecord,
    coefficient_mc,
    det_coefficient,
    det_coefficient_sigma,
    det_expansion,
    det_rational_part,
    gamma_ratio,
    radial_coefficient_integral,
    reconstruction_error,
    sqrt_det,
    variance_expansion,
    variance_terms,
)
from matherm.matpoly import MatPolyContext, hermite_from_eigenvalues
from matherm.partitions import Partition
from matherm.sampling import MatrixEnsemble, RngStream, mc_mean, sample_gaussian_matrix


def within(rec_or_value, se, target, z=4.0):
    return abs(rec_or_value - target) <= z * se


def test_mean_coefficient_values():
    assert det_coefficient((), 1, 1) == pytest.approx(math.sqrt(2 / math.pi), rel=1e-14)
    assert det_coefficient((), 2, 3) == 2.0
    assert det_coefficient((), 1, 3) == pytest.approx(stats.chi(3).mean(), rel=1e-14)
    for ell in (1, 2, 3):
        # Gamma_l(2) / Gamma_l(3/2) through scipy's log multivariate gamma
        ref = 2 ** (ell / 2) * math.exp(multigammaln(2, ell) - multigammaln(1.5, ell))
        assert det_coefficient((1,), ell, 3) == pytest.approx(ref, rel=1e-13)
        assert gamma_ratio(ell, 3) == pytest.approx(ref, rel=1e-13)


def test_first_coefficient_equals_mean_exactly():
    for n in range(1, 12):
        assert det_rational_part((1,), n) == det_rational_part((), n) == 1


def test_chi_moments_recover_coefficients():
    # l = 1: det^{1/2} = chi_n and H_(k) is a scaled He_{2k}; compare with a quadrature of the chi density
    from scipy import integrate

    n = 3
    for k in (1, 2, 3):
        # on 1 x n matrices H_(k) depends on r = |x| only; realise it through the eigenvalue route
        ctx = MatPolyContext(1, n)
        f = lambda r: r * hermite_from_eigenvalues((k,), np.array([[r * r]]), ctx)[0] * stats.chi(n).pdf(r)
        num, _ = integrate.quad(f, 0, 40)
        c = float(ctx.normalization((k,)).c_kappa)
        assert det_coefficient((k,), 1, n) == pytest.approx(num / c, rel=1e-8)


def test_length_guard():
    with pytest.raises(ValueError):
        det_coefficient((1, 1), 1, 3)
    with pytest.raises(ValueError):
        gamma_ratio(3, 2)


def test_sigma_identity_and_scalar():
    rec = det_coefficient_sigma((1,), 2, 3, np.eye(3), 1000, RngStream(1))
    assert rec.value == pytest.approx(det_coefficient((1,), 2, 3), rel=1e-12)
    assert rec.route == "monte_carlo"
    c = 1.6
    for kappa in [(), (1,), (2,), (1, 1)]:
        k = Partition(kappa).weight
        ell, n = 2, 3
        rec = det_coefficient_sigma(kappa, ell, n, c * np.eye(n), 1000, RngStream(2))
        assert rec.value == pytest.approx(det_coefficient(kappa, ell, n) * c ** (ell / 2 - n * ell * k), rel=1e-12)


def test_sigma_mean_matches_direct_determinant():
    sigma = np.array([[1.5, 0.4, 0.0], [0.4, 1.0, -0.2], [0.0, -0.2, 0.7]])
    rec = det_coefficient_sigma((), 2, 3, sigma, 400_000, RngStream(3))
    ens = MatrixEnsemble(2, 3, sigma)

    def draw(gen, m):
        X = sample_gaussian_matrix(ens, gen, size=m)
        return np.sqrt(np.linalg.det(X @ np.swapaxes(X, 1, 2)))

    direct = mc_mean(draw, 400_000, RngStream(4))
    assert within(rec.value - direct.value, math.hypot(rec.std_error, direct.std_error), 0.0)


def test_coefficient_mc_examples():
    rec = coefficient_mc(sqrt_det, (1,), 2, 3, 1_000_000, RngStream(5))
    assert within(rec.value, rec.std_error, det_coefficient((1,), 2, 3))
    one = coefficient_mc(lambda e: np.ones(len(e)), (1,), 2, 3, 200_000, RngStream(6))
    assert within(one.value, one.std_error, 0.0)
    ctx = MatPolyContext(2, 3)
    selfp = coefficient_mc(lambda e: hermite_from_eigenvalues((1,), e, ctx), (1,), 2, 3, 200_000, RngStream(7))
    assert within(selfp.value, selfp.std_error, 1.0)


def test_radial_route_examples():
    one = radial_coefficient_integral(lambda e: np.ones(len(e)), (), 2, 3, 10_000, RngStream(8))
    assert one.value == pytest.approx(1.0, abs=1e-12)
    chi = radial_coefficient_integral(sqrt_det, (), 1, 3, 500_000, RngStream(9))
    assert within(chi.value, chi.std_error, math.sqrt(8 / math.pi))
    assert chi.route == "radial_integral"
    # trace = 2n H_(1) + l n, so its (1)-coefficient is 2n
    trace = lambda e: np.sum(e, axis=-1)
    rad = radial_coefficient_integral(trace, (1,), 2, 3, 500_000, RngStream(10))
    mc = coefficient_mc(trace, (1,), 2, 3, 500_000, RngStream(11))
    assert within(rad.value, rad.std_error, 6.0)
    assert within(rad.value - mc.value, math.hypot(rad.std_error, mc.std_error), 0.0)


def test_radial_route_matches_closed_form_second_order():
    for kappa in [(2,), (1, 1)]:
        rad = radial_coefficient_integral(sqrt_det, kappa, 2, 3, 1_000_000, RngStream(12))
        assert within(rad.value, rad.std_error, det_coefficient(kappa, 2, 3))


def test_parity_odd_chaos_vanishes():
    def draw(gen, m):
        X = gen.standard_normal((m, 2, 3))
        return sqrt_det(np.linalg.eigvalsh(X @ np.swapaxes(X, 1, 2))) * X[:, 0, 0]

    est = mc_mean(draw, 400_000, RngStream(13))
    assert within(est.value, est.std_error, 0.0)


def test_variance_expansion_chi3():
    target = stats.chi(3).var()
    exp = det_expansion(1, 3, 8)
    partial = variance_expansion(exp, 8)
    assert partial[0] == pytest.approx(8 / (6 * math.pi), rel=1e-12)
    assert all(b >= a for a, b in zip(partial, partial[1:]))
    assert target - partial[2] < 0.02
    assert target - partial[-1] < 5e-4
    # every partial sum is bounded by a Monte Carlo variance
    x = stats.chi(3).rvs(size=400_000, random_state=np.random.default_rng(14))
    se = x.var() * math.sqrt(2 / (len(x) - 1)) * 2
    assert all(p <= x.var() + 4 * se for p in partial)


def test_variance_expansion_constant_function():
    ctx = MatPolyContext(2, 3)
    recs = [CoefficientRecord(Partition(()), 3.0, "closed_form")]
    recs += [CoefficientRecord(Partition(k), 0.0, "closed_form") for k in [(1,), (2,), (1, 1)]]
    assert variance_terms(ChaosExpansion(ctx, recs), 2) == [0.0, 0.0]
    with pytest.raises(ValueError):
        variance_terms(ChaosExpansion(ctx, recs), 3)


def test_reconstruction_error_decreases():
    exp = det_expansion(1, 3, 3)
    errs = [reconstruction_error(sqrt_det, exp, K, 400_000, RngStream(15)) for K in (0, 1, 2, 3)]
    vals = [float(e.value) for e in errs]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert vals[-1] + 4 * float(errs[-1].std_error) < 0.02


def test_record_validation_and_json():
    with pytest.raises(ValueError):
        CoefficientRecord(Partition(()), 1.0, "guess")
    with pytest.raises(ValueError):
        CoefficientRecord(Partition(()), 1.0, "monte_carlo")
    with pytest.raises(ValueError):
        CoefficientRecord(Partition(()), 1.0, "closed_form", 0.1)
    data = json.loads(det_expansion(2, 3, 2).to_json())
    assert [r["partition"] for r in data["coefficients"]] == [[], [1], [2], [1, 1]]
    assert all(r["std_error"] is None for r in data["coefficients"])
