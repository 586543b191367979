"""Mehler-type operators on l x n matrices and correlated Hermite orthogonality.

For a non-negative diagonal A the operator

    O_{t;A} f(X) = E f(X H e^{-tA} + X0 (I - e^{-2tA})^{1/2}),

averages over a Haar rotation H in O(n) and an independent standard Gaussian
X0.  Matrix Hermite polynomials are eigenfunctions, with eigenvalue
C_kappa(e^{-2tA}) / C_kappa(I_n).  The family is not a semigroup unless A is a
multiple of the identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

import numpy as np

from .matpoly import MatPolyContext, gram_eigenvalues, hermite_from_eigenvalues
from .partitions import Partition, gen_pochhammer
from .sampling import DEFAULT_BATCH, Estimate, as_generator, as_stream, mc_mean, sample_stiefel_haar
from .zonal import get_table, zonal_eval


@dataclass(frozen=True)
class MehlerSpec:
    """Time ``t`` and the diagonal ``a`` of A."""

    t: float
    a: tuple

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        if a.ndim == 2:
            if not np.allclose(a, np.diag(np.diag(a))):
                raise ValueError("A must be diagonal")
            a = np.diag(a)
        if a.ndim != 1 or len(a) == 0:
            raise ValueError("A must be given by its diagonal")
        if self.t < 0:
            raise ValueError("t must be non-negative")
        if (a < 0).any():
            raise ValueError("diagonal of A must be non-negative")
        object.__setattr__(self, "a", tuple(float(x) for x in a))

    @property
    def n(self) -> int:
        return len(self.a)

    def contraction(self) -> np.ndarray:
        return np.exp(-self.t * np.asarray(self.a))

    def noise(self) -> np.ndarray:
        return np.sqrt(-np.expm1(-2 * self.t * np.asarray(self.a)))


@dataclass(frozen=True)
class CorrelationSpec:
    """Symmetric n x n R with spectrum in [0, 1], so (I - R^2)^{1/2} exists."""

    R: np.ndarray = field(compare=False)
    label: str = ""

    def __post_init__(self):
        R = np.atleast_2d(np.asarray(self.R, dtype=float))
        if R.shape[0] != R.shape[1] or not np.allclose(R, R.T, rtol=0, atol=1e-12):
            raise ValueError("R must be a symmetric square matrix")
        w = np.linalg.eigvalsh(R)
        if w.min() < -1e-12 or w.max() > 1 + 1e-12:
            raise ValueError(f"spectrum of R must lie in [0, 1], got [{w.min():.3g}, {w.max():.3g}]")
        object.__setattr__(self, "R", R)

    @classmethod
    def rigid(cls, rho: float, n: int) -> "CorrelationSpec":
        return cls(rho * np.eye(n), f"rho={rho:g}")

    @property
    def n(self) -> int:
        return self.R.shape[0]

    def squared_eigenvalues(self) -> np.ndarray:
        return np.clip(np.linalg.eigvalsh(self.R), 0, 1) ** 2

    def noise_root(self) -> np.ndarray:
        w, V = np.linalg.eigh(self.R)
        return (V * np.sqrt(np.clip(1 - w * w, 0, None))) @ V.T


def random_correlation(n: int, rng) -> CorrelationSpec:
    """R = V diag(u) V^T with Haar V and uniform spectrum u in [0, 1]."""
    gen = as_generator(rng)
    V = sample_stiefel_haar(n, n, gen)
    u = gen.uniform(0, 1, n)
    return CorrelationSpec((V.T * u) @ V, "random")


def _check_invariance(f, X, n, gen, trials=3, rtol=1e-8):
    base = np.asarray(f(X[None]), dtype=float)
    for H in sample_stiefel_haar(n, n, gen, size=trials):
        moved = np.asarray(f((X @ H)[None]), dtype=float)
        if not np.allclose(moved, base, rtol=rtol, atol=rtol):
            raise ValueError("functional is not right-invariant under orthogonal transformations")


def mehler_apply(f, X, spec: MehlerSpec, mc_samples: int, rng, batch_size=DEFAULT_BATCH, workers=1) -> Estimate:
    """Monte Carlo value of O_{t;A} f at X; ``f`` maps stacks (m, l, n) to (m,)."""
    X = np.asarray(X, dtype=float)
    ell, n = X.shape
    if n != spec.n:
        raise ValueError(f"A has size {spec.n}, X has {n} columns")
    stream = as_stream(rng)
    _check_invariance(f, X, n, stream.spawn(2**32).generator())
    c, s = spec.contraction(), spec.noise()

    def draw(gen, m):
        H = sample_stiefel_haar(n, n, gen, size=m)
        X0 = gen.standard_normal((m, ell, n))
        return np.asarray(f((X @ H) * c + X0 * s), dtype=float)

    return mc_mean(draw, mc_samples, stream, batch_size, workers)


def hermite_functional(kappa, ell: int, n: int):
    """H_kappa as a functional on stacks of matrices, for use with :func:`mehler_apply`."""
    ctx = MatPolyContext(ell, n, get_table(max(Partition(kappa).weight, 4)))
    return lambda Xs: hermite_from_eigenvalues(kappa, gram_eigenvalues(Xs), ctx)


def eigenvalue_ratio(kappa, spec: MehlerSpec) -> float:
    """C_kappa(e^{-2tA}) / C_kappa(I_n)."""
    kappa = Partition(kappa)
    if len(kappa) > spec.n:
        raise ValueError(f"partition {tuple(kappa)} has more than {spec.n} parts")
    eigs = np.exp(-2 * spec.t * np.asarray(spec.a))
    table = get_table(max(kappa.weight, 4))
    return float(zonal_eval(kappa, eigs, table)) / float(table.identity_value(kappa, spec.n))


def semigroup_check(kappa, a, t: float, s: float) -> tuple[float, float]:
    """(ratio at t + s, product of ratios at t and s); equal for every t, s only when A is scalar."""
    joint = eigenvalue_ratio(kappa, MehlerSpec(t + s, a))
    split = eigenvalue_ratio(kappa, MehlerSpec(t, a)) * eigenvalue_ratio(kappa, MehlerSpec(s, a))
    return joint, split


def correlated_covariance_closed(kappa, sigma, R: CorrelationSpec, ell: int) -> float:
    """1{kappa = sigma} 4^{-k} k! C_kappa(R^2) C_kappa(I_l) / ((n/2)_kappa C_kappa(I_n))."""
    kappa, sigma = Partition(kappa), Partition(sigma)
    if kappa != sigma:
        return 0.0
    n = R.n
    k = kappa.weight
    table = get_table(max(k, 4))
    exact = Fraction(factorial(k)) * table.identity_value(kappa, ell)
    exact /= 4**k * gen_pochhammer(Fraction(n, 2), kappa) * table.identity_value(kappa, n)
    return float(exact) * float(zonal_eval(kappa, R.squared_eigenvalues(), table))


def laguerre_covariance_closed(kappa, sigma, R: CorrelationSpec, ell: int) -> float:
    """Covariance of the Laguerre polynomials L_kappa(X X^T / 2) and L_sigma(Y Y^T / 2).

    Equal to the Hermite covariance divided by gamma_kappa gamma_sigma, that is
    1{kappa = sigma} (n/2)_kappa k! C_kappa(R^2) C_kappa(I_l) / C_kappa(I_n).
    """
    kappa, sigma = Partition(kappa), Partition(sigma)
    if kappa != sigma:
        return 0.0
    n, k = R.n, kappa.weight
    gamma_sq = Fraction(1, 4**k) / gen_pochhammer(Fraction(n, 2), kappa) ** 2
    return correlated_covariance_closed(kappa, sigma, R, ell) / float(gamma_sq)


@dataclass(frozen=True)
class CovarianceResult:
    kappa: Partition
    sigma: Partition
    label: str
    estimate: float
    std_error: float
    closed_form: float

    @property
    def z_score(self) -> float:
        return (self.estimate - self.closed_form) / self.std_error if self.std_error > 0 else 0.0


def correlated_hermite_covariance(kappa, sigma, spec: CorrelationSpec, ctx: MatPolyContext, mc_samples: int, rng,
                                  batch_size=DEFAULT_BATCH, workers=1) -> CovarianceResult:
    """Estimate E[H_kappa(X) H_sigma(Y)] with Y = X R + X0 (I - R^2)^{1/2}."""
    kappa, sigma = Partition(kappa), Partition(sigma)
    ell, n = ctx.ell, ctx.n
    if spec.n != n:
        raise ValueError(f"R must be {n} x {n}")
    R, root = spec.R, spec.noise_root()
    ctx = ctx.with_degree(max(kappa.weight, sigma.weight))

    def draw(gen, m):
        X = gen.standard_normal((m, ell, n))
        Y = X @ R + gen.standard_normal((m, ell, n)) @ root
        hx = hermite_from_eigenvalues(kappa, gram_eigenvalues(X), ctx)
        hy = hermite_from_eigenvalues(sigma, gram_eigenvalues(Y), ctx)
        return hx * hy

    est = mc_mean(draw, mc_samples, rng, batch_size, workers)
    closed = correlated_covariance_closed(kappa, sigma, spec, ell)
    return CovarianceResult(kappa, sigma, spec.label, float(est.value), float(est.std_error), closed)
