"""Wiener-chaos coefficients of spectral functionals of Gaussian matrices.

A square-integrable function F of the spectrum of X X^T, with X a standard
l x n Gaussian matrix, expands as F = sum_kappa Fhat(kappa) H_kappa(X).
The coefficient is Fhat(kappa) = E[F H_kappa] / c(kappa), where c(kappa) is
the squared norm of H_kappa.

For F = det(X X^T)^{1/2} the coefficients have a closed form.  It is an
exact rational number times the single transcendental factor
2^{l/2} Gamma_l((n+1)/2) / Gamma_l(n/2).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from math import factorial

import numpy as np

from .matpoly import (
    MatPolyContext,
    gram_eigenvalues,
    hermite_from_eigenvalues,
    hermite_normalization,
    laguerre_eval,
)
from .partitions import Partition, enumerate_partitions, gen_pochhammer
from .sampling import DEFAULT_BATCH, check_spd, mc_mean, sample_stiefel_haar, sample_wishart
from .zonal import ZonalTable, get_table

ROUTES = ("closed_form", "monte_carlo", "radial_integral")


@dataclass(frozen=True)
class CoefficientRecord:
    partition: Partition
    value: float
    route: str
    std_error: float | None = None

    def __post_init__(self):
        if self.route not in ROUTES:
            raise ValueError(f"unknown route {self.route!r}")
        if self.route == "closed_form" and self.std_error is not None:
            raise ValueError("closed-form records carry no standard error")
        if self.route != "closed_form" and not (self.std_error is not None and self.std_error >= 0):
            raise ValueError("Monte Carlo records need a standard error")

    def to_dict(self) -> dict:
        out = asdict(self)
        out["partition"] = list(self.partition)
        return out


@dataclass
class ChaosExpansion:
    context: MatPolyContext
    coefficients: list = field(default_factory=list)

    def max_weight(self) -> int:
        return max((r.partition.weight for r in self.coefficients), default=0)

    def to_json(self) -> str:
        return json.dumps(
            {"ell": self.context.ell, "n": self.context.n, "coefficients": [r.to_dict() for r in self.coefficients]},
            indent=2,
        )


def gamma_ratio(ell: int, n: int) -> float:
    """2^{ell/2} Gamma_ell((n+1)/2) / Gamma_ell(n/2), which is E det(X X^T)^{1/2}."""
    if not 1 <= ell <= n:
        raise ValueError(f"need 1 <= ell <= n, got ell={ell}, n={n}")
    # the products defining Gamma_l telescope to Gamma((n+1)/2) / Gamma((n+1-l)/2)
    hi, lo = (n + 1) / 2, (n + 1 - ell) / 2
    if hi < 150:
        return 2 ** (ell / 2) * math.gamma(hi) / math.gamma(lo)
    return 2 ** (ell / 2) * math.exp(math.lgamma(hi) - math.lgamma(lo))


def det_rational_part(kappa, n: int, table: ZonalTable | None = None) -> Fraction:
    """The exact factor of the determinant coefficient multiplying :func:`gamma_ratio`."""
    kappa = Partition(kappa)
    table = table or get_table(kappa.weight)
    half, half1 = Fraction(n, 2), Fraction(n + 1, 2)
    s_sum = Fraction(0)
    for sigma, b in table.binomial_row(kappa).items():
        s_sum += b * (-1) ** sigma.weight * gen_pochhammer(half1, sigma) / gen_pochhammer(half, sigma)
    k = kappa.weight
    return Fraction(-2) ** k / factorial(k) * gen_pochhammer(half, kappa) * s_sum


def _check_kappa(kappa, ell):
    kappa = Partition(kappa)
    if len(kappa) > ell:
        raise ValueError(f"partition {tuple(kappa)} has more than {ell} parts; H_kappa vanishes identically")
    return kappa


def det_coefficient(kappa, ell: int, n: int, table: ZonalTable | None = None) -> float:
    """Chaos coefficient of det(X X^T)^{1/2} for standard Gaussian X."""
    kappa = _check_kappa(kappa, ell)
    return float(det_rational_part(kappa, n, table)) * gamma_ratio(ell, n)


def det_expansion(ell: int, n: int, K: int, table: ZonalTable | None = None) -> ChaosExpansion:
    """Closed-form coefficient records for every partition of weight <= K with at most ell parts."""
    table = table or get_table(K)
    ctx = MatPolyContext(ell, n, table)
    recs = [
        CoefficientRecord(kappa, det_coefficient(kappa, ell, n, table), "closed_form")
        for k in range(K + 1)
        for kappa in enumerate_partitions(k, ell)
    ]
    return ChaosExpansion(ctx, recs)


def sigma_scale(kappa, ell: int, sigma) -> float:
    """det(Sigma)^{-ell k - ell/2}, the explicit covariance factor of the coefficient."""
    kappa = Partition(kappa)
    sign, logdet = np.linalg.slogdet(np.asarray(sigma, dtype=float))
    return math.exp(-(ell * kappa.weight + ell / 2) * logdet)


def det_coefficient_sigma(kappa, ell: int, n: int, sigma, stiefel_samples: int, rng, batch_size=DEFAULT_BATCH, workers=1):
    """Coefficient of det(X X^T)^{1/2} against H_kappa(. ; Sigma) for rows N(0, Sigma).

    The remaining Stiefel integral of det(U Sigma^{-1} U^T)^{-(n+1)/2} is
    estimated with Haar frames.
    """
    kappa = _check_kappa(kappa, ell)
    sigma = check_spd(sigma, n)
    inv = np.linalg.inv(sigma)

    def draw(gen, m):
        U = sample_stiefel_haar(n, ell, gen, size=m)
        _, logdet = np.linalg.slogdet(U @ inv @ np.swapaxes(U, -1, -2))
        return np.exp(-(n + 1) / 2 * logdet)

    est = mc_mean(draw, stiefel_samples, rng, batch_size, workers)
    factor = float(det_rational_part(kappa, n)) * gamma_ratio(ell, n) * sigma_scale(kappa, ell, sigma)
    return CoefficientRecord(kappa, factor * float(est.value), "monte_carlo", abs(factor) * float(est.std_error))


def coefficient_mc(F, kappa, ell: int, n: int, samples: int, rng, batch_size=DEFAULT_BATCH, workers=1):
    """E[F(X) H_kappa(X)] / c(kappa) by Monte Carlo; ``F`` maps eigenvalue arrays (m, ell) to (m,)."""
    kappa = _check_kappa(kappa, ell)
    ctx = MatPolyContext(ell, n, get_table(max(kappa.weight, 4)))
    c = float(hermite_normalization(kappa, ell, n, ctx.table).c_kappa)

    def draw(gen, m):
        eigs = gram_eigenvalues(gen.standard_normal((m, ell, n)))
        return np.asarray(F(eigs), dtype=float) * hermite_from_eigenvalues(kappa, eigs, ctx)

    est = mc_mean(draw, samples, rng, batch_size, workers)
    return CoefficientRecord(kappa, float(est.value) / c, "monte_carlo", float(est.std_error) / c)


def radial_coefficient_integral(f0, kappa, ell: int, n: int, samples: int, rng, batch_size=DEFAULT_BATCH, workers=1):
    """Coefficient of F(X) = f0(X X^T) written as an integral over positive-definite R.

    The integral against etr(-R/2) det(R)^{(n-l-1)/2} / (2^{nl/2} Gamma_l(n/2))
    is the Wishart(l, n) expectation, so the coefficient becomes
    (-2)^k / (k! C_kappa(I_l)) * E[f0(R) L_kappa^{((n-l-1)/2)}(R/2)].
    R is drawn by the Bartlett construction, not as X X^T.
    """
    kappa = _check_kappa(kappa, ell)
    table = get_table(max(kappa.weight, 4))
    ctx = MatPolyContext(ell, n, table)
    gamma = Fraction(n - ell - 1, 2)
    k = kappa.weight
    pref = float(Fraction(-2) ** k / (factorial(k) * table.identity_value(kappa, ell)))

    def draw(gen, m):
        eigs = np.linalg.eigvalsh(sample_wishart(ell, n, gen, size=m))
        return np.asarray(f0(eigs), dtype=float) * laguerre_eval(kappa, gamma, eigs / 2, ctx)

    est = mc_mean(draw, samples, rng, batch_size, workers)
    return CoefficientRecord(kappa, pref * float(est.value), "radial_integral", abs(pref) * float(est.std_error))


def variance_terms(expansion: ChaosExpansion, K: int) -> list[float]:
    """Per-degree variance contributions sum_{kappa |- k} c(kappa) Fhat(kappa)^2, k = 1..K."""
    ctx = expansion.context
    if expansion.max_weight() < K:
        raise ValueError(f"expansion only reaches weight {expansion.max_weight()}, need {K}")
    terms = [0.0] * K
    for rec in expansion.coefficients:
        k = rec.partition.weight
        if 1 <= k <= K:
            c = float(hermite_normalization(rec.partition, ctx.ell, ctx.n, ctx.table).c_kappa)
            # 4^k (n/2)_kappa / (k! C_kappa(I)) E[F H]^2 with E[F H] = c Fhat
            terms[k - 1] += c * rec.value**2
    return terms


def variance_expansion(expansion: ChaosExpansion, K: int) -> list[float]:
    """Partial sums S_1..S_K of the chaos variance series."""
    return [float(x) for x in np.cumsum(variance_terms(expansion, K))]


def reconstruction_error(F, expansion: ChaosExpansion, K: int, samples: int, rng, batch_size=DEFAULT_BATCH):
    """Monte Carlo estimate of E[(F - sum_{|kappa| <= K} Fhat(kappa) H_kappa)^2]."""
    ctx = expansion.context
    recs = [r for r in expansion.coefficients if r.partition.weight <= K]
    ell, n = ctx.ell, ctx.n

    def draw(gen, m):
        eigs = gram_eigenvalues(gen.standard_normal((m, ell, n)))
        approx = sum(r.value * hermite_from_eigenvalues(r.partition, eigs, ctx) for r in recs)
        return (np.asarray(F(eigs), dtype=float) - approx) ** 2

    return mc_mean(draw, samples, rng, batch_size)


def sqrt_det(eigs):
    """det(X X^T)^{1/2} from Gram eigenvalues."""
    return np.sqrt(np.prod(np.clip(eigs, 0, None), axis=-1))
