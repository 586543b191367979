"""Matrix-variate Laguerre and Hermite polynomials.

Both families are expanded once, exactly, into power sums of the matrix
argument and then evaluated on batches of eigenvalues.  Hermite polynomials
of an l x n matrix X are computed through the Laguerre link

    H_kappa(X) = gamma_kappa * L_kappa^{((n-l-1)/2)}(X X^T / 2),
    gamma_kappa = (-2)^{-k} / (n/2)_kappa,

with the eigenvalues of the l x l Gram matrix X X^T.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import factorial

import numpy as np

from .partitions import Partition, gen_pochhammer
from .symfun import PowerSumPoly, eval_powersum
from .zonal import ZonalTable, get_table


@dataclass(frozen=True)
class HermiteNormalization:
    """Squared norm ``c_kappa`` = E[H_kappa^2] and Laguerre link factor ``gamma_kappa``."""

    c_kappa: Fraction
    gamma_kappa: Fraction


@dataclass(frozen=True)
class MatPolyContext:
    ell: int
    n: int
    table: ZonalTable = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not 1 <= self.ell <= self.n:
            raise ValueError(f"need 1 <= ell <= n, got ell={self.ell}, n={self.n}")
        if self.table is None:
            object.__setattr__(self, "table", get_table(4))

    @property
    def gamma_order(self) -> Fraction:
        return Fraction(self.n - self.ell - 1, 2)

    def with_degree(self, k: int) -> "MatPolyContext":
        if k <= self.table.max_degree:
            return self
        return MatPolyContext(self.ell, self.n, get_table(k))

    def normalization(self, kappa) -> HermiteNormalization:
        return hermite_normalization(kappa, self.ell, self.n, self.table)


def hermite_normalization(kappa, ell: int, n: int, table: ZonalTable | None = None) -> HermiteNormalization:
    kappa = Partition(kappa)
    if len(kappa) > ell:
        raise ValueError(f"partition {tuple(kappa)} has more than {ell} parts; H_kappa vanishes identically")
    table = table or get_table(kappa.weight)
    k = kappa.weight
    poch = gen_pochhammer(Fraction(n, 2), kappa)
    c = Fraction(factorial(k)) * table.identity_value(kappa, ell) / (4**k * poch)
    g = 1 / (Fraction(-2) ** k * poch)
    return HermiteNormalization(c, g)


@lru_cache(maxsize=None)
def _laguerre_poly(kappa: Partition, gamma: Fraction, ell: int, table: ZonalTable) -> PowerSumPoly:
    if len(kappa) > ell:
        return PowerSumPoly()
    a = gamma + Fraction(ell + 1, 2)
    top = gen_pochhammer(a, kappa) * table.identity_value(kappa, ell)
    out = PowerSumPoly()
    for sigma, b in table.binomial_row(kappa).items():
        if len(sigma) > ell:
            continue
        w = top * b * (-1) ** sigma.weight / (gen_pochhammer(a, sigma) * table.identity_value(sigma, ell))
        out = out + table.zonal_powersum(sigma).scale(w)
    return out


def laguerre_poly(kappa, gamma, ell: int, table: ZonalTable | None = None) -> PowerSumPoly:
    """L_kappa^{(gamma)} as an exact power-sum polynomial in an ell x ell argument."""
    kappa = Partition(kappa)
    gamma = Fraction(gamma)  # floats convert exactly
    if gamma <= -1:
        raise ValueError("Laguerre order gamma must exceed -1")
    table = table or get_table(kappa.weight)
    return _laguerre_poly(kappa, gamma, ell, table)


def hermite_poly(kappa, ell: int, n: int, table: ZonalTable | None = None) -> PowerSumPoly:
    """H_kappa^{(ell,n)} as an exact power-sum polynomial in t_s = tr((X X^T)^s)."""
    kappa = Partition(kappa)
    table = table or get_table(kappa.weight)
    if len(kappa) > ell:
        return PowerSumPoly()
    g = hermite_normalization(kappa, ell, n, table).gamma_kappa
    lag = laguerre_poly(kappa, Fraction(n - ell - 1, 2), ell, table)
    # substitute S = G/2: t_nu(S) = 2^{-|nu|} t_nu(G)
    return PowerSumPoly({nu: g * c / 2**nu.weight for nu, c in lag.items()})


def gram_eigenvalues(X) -> np.ndarray:
    """Eigenvalues of X X^T for a batch of l x n matrices (last two axes)."""
    X = np.asarray(X, dtype=float)
    G = X @ np.swapaxes(X, -1, -2)
    return np.linalg.eigvalsh(G)


def _eval(poly: PowerSumPoly, eigs: np.ndarray):
    if not len(poly):
        out = np.zeros(eigs.shape[:-1])
        return out if out.ndim else 0.0
    return eval_powersum(poly, eigs)


def laguerre_eval(kappa, gamma, eigenvalues, ctx: MatPolyContext):
    """L_kappa^{(gamma)}(S) from the eigenvalues of S (last axis has length ell)."""
    eigs = np.asarray(eigenvalues, dtype=float)
    if eigs.shape[-1] != ctx.ell:
        raise ValueError(f"expected {ctx.ell} eigenvalues, got {eigs.shape[-1]}")
    kappa = Partition(kappa)
    ctx = ctx.with_degree(kappa.weight)
    return _eval(laguerre_poly(kappa, gamma, ctx.ell, ctx.table), eigs)


def _check_shape(X, ctx):
    X = np.asarray(X, dtype=float)
    if X.ndim < 2 or X.shape[-2:] != (ctx.ell, ctx.n):
        raise ValueError(f"expected matrices of shape ({ctx.ell}, {ctx.n}), got {X.shape}")
    return X


def hermite_eval(kappa, X, ctx: MatPolyContext):
    """H_kappa^{(ell,n)}(X) for one matrix or a batch stacked on leading axes."""
    X = _check_shape(X, ctx)
    kappa = Partition(kappa)
    ctx = ctx.with_degree(kappa.weight)
    return _eval(hermite_poly(kappa, ctx.ell, ctx.n, ctx.table), gram_eigenvalues(X))


def hermite_from_eigenvalues(kappa, eigs, ctx: MatPolyContext):
    """H_kappa evaluated from precomputed eigenvalues of X X^T."""
    kappa = Partition(kappa)
    ctx = ctx.with_degree(kappa.weight)
    return _eval(hermite_poly(kappa, ctx.ell, ctx.n, ctx.table), np.asarray(eigs, dtype=float))


def sym_inv_sqrt(sigma) -> np.ndarray:
    """Sigma^{-1/2} by spectral decomposition; rejects non-positive-definite input."""
    sigma = np.asarray(sigma, dtype=float)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise ValueError("covariance must be a square matrix")
    if not np.allclose(sigma, sigma.T, rtol=0, atol=1e-12 * max(1.0, np.abs(sigma).max())):
        raise ValueError("covariance must be symmetric")
    w, V = np.linalg.eigh(sigma)
    if w.min() <= 0:
        raise ValueError("covariance must be positive definite")
    return (V / np.sqrt(w)) @ V.T


def hermite_eval_sigma(kappa, X, sigma, ctx: MatPolyContext):
    """det(Sigma)^{ell k} H_kappa(X Sigma^{-1/2})."""
    X = _check_shape(X, ctx)
    kappa = Partition(kappa)
    root = sym_inv_sqrt(sigma)
    if root.shape[0] != ctx.n:
        raise ValueError("covariance size must equal n")
    scale = np.linalg.det(np.asarray(sigma, dtype=float)) ** (ctx.ell * kappa.weight)
    return scale * hermite_eval(kappa, X @ root, ctx)


def _he(x, k):
    if k == 1:
        return x
    if k == 2:
        return x * x - 1
    if k == 4:
        x2 = x * x
        return x2 * x2 - 6 * x2 + 3
    raise ValueError(k)


def hermite_univariate_expansion(kappa, X):
    """H_(), H_(1), H_(2), H_(1,1) written with one-variable Hermite polynomials of the entries.

    Index sums are spelled out term by term; this is a reference route used
    to check :func:`hermite_eval`.
    """
    kappa = Partition(kappa)
    X = np.asarray(X, dtype=float)
    ell, n = X.shape[-2:]
    batch = X.shape[:-2]
    x = lambda i, j: X[..., i, j]
    h2 = lambda i, j: _he(x(i, j), 2)

    if kappa == ():
        return np.ones(batch) if batch else 1.0

    if kappa == (1,):
        total = sum(h2(i, j) for i in range(ell) for j in range(n))
        return total / (2 * n)

    if kappa not in ((2,), (1, 1)):
        raise ValueError(f"no univariate expansion for partition {tuple(kappa)}")

    # both index pairs distinct
    cross2 = np.zeros(batch)
    cross1 = np.zeros(batch)
    for i1 in range(ell):
        for i2 in range(ell):
            if i1 == i2:
                continue
            for j1 in range(n):
                for j2 in range(n):
                    if j1 == j2:
                        continue
                    cross2 = cross2 + h2(i1, j1) * h2(i2, j2)
                    cross1 = cross1 + x(i1, j1) * x(i2, j1) * x(i1, j2) * x(i2, j2)

    if kappa == (1, 1):
        if n == 1:
            return np.zeros(batch) if batch else 0.0
        return (cross2 - cross1) / (6 * n * (n - 1))

    quartic = sum(_he(x(i, j), 4) for i in range(ell) for j in range(n))
    same_col = sum(h2(i1, j) * h2(i2, j) for j in range(n) for i1 in range(ell) for i2 in range(ell) if i1 != i2)
    same_row = sum(h2(i, j1) * h2(i, j2) for i in range(ell) for j1 in range(n) for j2 in range(n) if j1 != j2)
    total = 3 * quartic + 3 * same_col + 3 * same_row + cross2 + 2 * cross1
    return total / (12 * n * (n + 2))
