"""Intrinsic and mixed volumes of ellipsoids.

The ellipsoid of a covariance Sigma is {x : x^T Sigma^{-1} x <= 1}; its
orthogonal projection onto the row space of a frame U is the ellipsoid of
U Sigma U^T.  The intrinsic volume V_l is computed three ways:

* Kubota: average projection volume over Haar frames U in O(n, l),
* Stiefel identity: average of det(U Sigma^{-1} U^T)^{-(n+1)/2},
* Gaussian determinant: V_l = (2 pi)^{l/2} / l! * E det(X X^T)^{1/2} for
  X with rows N(0, Sigma).

The three routes are mathematically equal, so their agreement is a
numerical check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .chaos import det_rational_part, sqrt_det
from .partitions import Partition
from .sampling import (
    DEFAULT_BATCH,
    MatrixEnsemble,
    as_stream,
    mc_mean,
    sample_gaussian_matrix,
    sample_stiefel_haar,
)

ROUTES = ("closed_form", "kubota_mc", "stiefel_identity_mc", "determinant_mc")


def ball_volume(n: int) -> float:
    """kappa_n = pi^{n/2} / Gamma(1 + n/2)."""
    if n < 0:
        raise ValueError("dimension must be non-negative")
    return math.pi ** (n / 2) / math.gamma(1 + n / 2)


def intrinsic_volume_ball(j: int, n: int) -> float:
    """V_j(B_n) = C(n, j) kappa_n / kappa_{n-j}."""
    if not 0 <= j <= n:
        raise ValueError(f"need 0 <= j <= n, got j={j}, n={n}")
    return comb(n, j) * ball_volume(n) / ball_volume(n - j)


def falling_factorial(n: int, j: int) -> int:
    return math.perm(n, j)


@dataclass(frozen=True)
class EllipsoidSpec:
    """Ellipsoid {x : x^T Sigma^{-1} x <= 1}.

    With ``strict=False`` a positive semi-definite Sigma is accepted and
    describes a flat ellipsoid (for instance a segment); the Stiefel route
    needs ``strict=True``.
    """

    sigma: np.ndarray = field(compare=False)
    strict: bool = True

    def __post_init__(self):
        s = np.atleast_2d(np.asarray(self.sigma, dtype=float))
        if s.shape[0] != s.shape[1]:
            raise ValueError("sigma must be square")
        if not np.allclose(s, s.T, rtol=0, atol=1e-12 * max(1.0, np.abs(s).max())):
            raise ValueError("sigma must be symmetric")
        w = np.linalg.eigvalsh(s)
        floor = 1e-14 * max(1.0, w.max())
        if (w <= 0).any() if self.strict else (w < -floor).any():
            raise ValueError("sigma must be positive definite" if self.strict else "sigma must be positive semi-definite")
        object.__setattr__(self, "sigma", s)

    @property
    def n(self) -> int:
        return self.sigma.shape[0]

    def scaled(self, c: float) -> "EllipsoidSpec":
        """The ellipsoid c * E, whose covariance is c^2 Sigma."""
        return EllipsoidSpec(c * c * self.sigma, self.strict)

    def volume(self) -> float:
        return ball_volume(self.n) * math.sqrt(max(np.linalg.det(self.sigma), 0.0))


@dataclass(frozen=True)
class VolumeEstimate:
    value: float
    std_error: float | None
    route: str

    def __post_init__(self):
        if self.route not in ROUTES:
            raise ValueError(f"unknown route {self.route!r}")
        if (self.route == "closed_form") != (self.std_error is None):
            raise ValueError("std_error is present exactly for Monte Carlo routes")


def _check_order(j, n, lo=1):
    if not lo <= j <= n:
        raise ValueError(f"need {lo} <= j <= n, got j={j}, n={n}")


def intrinsic_volume_ellipsoid_kubota(E: EllipsoidSpec, j: int, samples: int, rng, batch_size=DEFAULT_BATCH, workers=1):
    """V_j by averaging kappa_j det(U Sigma U^T)^{1/2} over Haar frames U in O(n, j)."""
    n = E.n
    _check_order(j, n)
    const = comb(n, j) * ball_volume(n) / (ball_volume(j) * ball_volume(n - j)) * ball_volume(j)
    sigma = E.sigma

    def draw(gen, m):
        U = sample_stiefel_haar(n, j, gen, size=m)
        d = np.linalg.det(U @ sigma @ np.swapaxes(U, -1, -2))
        return np.sqrt(np.clip(d, 0, None))

    est = mc_mean(draw, samples, rng, batch_size, workers)
    return VolumeEstimate(const * float(est.value), const * float(est.std_error), "kubota_mc")


def intrinsic_volume_ellipsoid_stiefel(E: EllipsoidSpec, ell: int, samples: int, rng, batch_size=DEFAULT_BATCH, workers=1):
    """V_l = C(n,l) kappa_n / kappa_{n-l} det(Sigma)^{-l/2} E_U det(U Sigma^{-1} U^T)^{-(n+1)/2}."""
    n = E.n
    _check_order(ell, n)
    if not E.strict:
        raise ValueError("the Stiefel route needs a positive-definite sigma")
    inv = np.linalg.inv(E.sigma)
    _, logdet_sigma = np.linalg.slogdet(E.sigma)
    const = intrinsic_volume_ball(ell, n) * math.exp(-ell / 2 * logdet_sigma)

    def draw(gen, m):
        U = sample_stiefel_haar(n, ell, gen, size=m)
        _, logdet = np.linalg.slogdet(U @ inv @ np.swapaxes(U, -1, -2))
        return np.exp(-(n + 1) / 2 * logdet)

    est = mc_mean(draw, samples, rng, batch_size, workers)
    return VolumeEstimate(const * float(est.value), const * float(est.std_error), "stiefel_identity_mc")


def intrinsic_volume_ellipsoid_determinant(E: EllipsoidSpec, ell: int, samples: int, rng, batch_size=DEFAULT_BATCH, workers=1):
    """V_l = (2 pi)^{l/2} / l! * E det(X X^T)^{1/2}, X an l x n matrix with rows N(0, Sigma)."""
    n = E.n
    _check_order(ell, n)
    ens = MatrixEnsemble(ell, n, E.sigma if E.strict else None)
    root = None if E.strict else _psd_sqrt(E.sigma)
    const = (2 * math.pi) ** (ell / 2) / math.factorial(ell)

    def draw(gen, m):
        X = sample_gaussian_matrix(ens, gen, size=m) if root is None else gen.standard_normal((m, ell, n)) @ root
        return sqrt_det(np.linalg.eigvalsh(X @ np.swapaxes(X, -1, -2)))

    est = mc_mean(draw, samples, rng, batch_size, workers)
    return VolumeEstimate(const * float(est.value), const * float(est.std_error), "determinant_mc")


def _psd_sqrt(s):
    w, V = np.linalg.eigh(s)
    return (V * np.sqrt(np.clip(w, 0, None))) @ V.T


_INTRINSIC_ROUTES = {
    "kubota": intrinsic_volume_ellipsoid_kubota,
    "stiefel": intrinsic_volume_ellipsoid_stiefel,
    "determinant": intrinsic_volume_ellipsoid_determinant,
}


def intrinsic_volume(E: EllipsoidSpec, j: int, samples: int, rng, route: str = "kubota", **kw) -> VolumeEstimate:
    """Dispatch to one of the intrinsic-volume routes; exact for balls and for j in {0, n}."""
    if j == 0:
        return VolumeEstimate(1.0, None, "closed_form")
    if np.allclose(E.sigma, E.sigma[0, 0] * np.eye(E.n)) and E.sigma[0, 0] > 0:
        r = math.sqrt(E.sigma[0, 0])
        return VolumeEstimate(r**j * intrinsic_volume_ball(j, E.n), None, "closed_form")
    if j == E.n:
        return VolumeEstimate(E.volume(), None, "closed_form")
    try:
        fn = _INTRINSIC_ROUTES[route]
    except KeyError:
        raise ValueError(f"unknown route {route!r}; choose from {sorted(_INTRINSIC_ROUTES)}") from None
    return fn(E, j, samples, rng, **kw)


def mixed_volume_ellipsoid_ball(E: EllipsoidSpec, ell: int, samples: int, rng, route: str = "kubota", **kw) -> VolumeEstimate:
    """V(E[l], B_n[n-l]) = kappa_{n-l} / C(n, l) * V_l(E)."""
    _check_order(ell, E.n)
    v = intrinsic_volume(E, ell, samples, rng, route, **kw)
    c = ball_volume(E.n - ell) / comb(E.n, ell)
    return VolumeEstimate(c * v.value, None if v.std_error is None else c * v.std_error, v.route)


def mixed_volume_factor(kappa, ell: int, n: int, sigma=None) -> float:
    """Factor M with Fhat(kappa; Sigma) = M * V(E_Sigma[l], B_n[n-l]) for F = det(X X^T)^{1/2}."""
    kappa = Partition(kappa)
    _check_order(ell, n)
    out = float(det_rational_part(kappa, n)) * falling_factorial(n, ell)
    out /= (2 * math.pi) ** (ell / 2) * ball_volume(n - ell)
    if sigma is not None:
        _, logdet = np.linalg.slogdet(np.asarray(sigma, dtype=float))
        out *= math.exp(-ell * kappa.weight * logdet)
    return out


@dataclass(frozen=True)
class SteinerCheck:
    mc_volume: float
    mc_std_error: float
    steiner_value: float
    intrinsic_volumes: tuple
    rel_diff: float


def distance_to_ellipsoid(points, E: EllipsoidSpec, iters: int = 80) -> np.ndarray:
    """Euclidean distance from each point (rows) to the ellipsoid; zero inside."""
    a2, V = np.linalg.eigh(E.sigma)
    a2 = np.clip(a2, 0, None)
    x = np.asarray(points, dtype=float) @ V
    flat = a2 <= 1e-14 * max(1.0, a2.max())
    live = ~flat
    x2 = x * x
    g0 = (x2[:, live] / a2[live]).sum(axis=1)
    outside = g0 > 1
    t = np.zeros(len(x))
    # nearest point y_i = x_i a_i^2 / (a_i^2 + t), with t >= 0 fixed by the boundary equation;
    # Newton on the convex decreasing g(t) from t = 0 climbs monotonically to the root
    xo, tt = x2[outside][:, live], np.zeros(outside.sum())
    aa = a2[live]
    for _ in range(iters):
        d = aa + tt[:, None]
        g = (xo * aa / d**2).sum(axis=1) - 1
        dg = (-2 * xo * aa / d**3).sum(axis=1)
        step = g / dg
        tt = tt - step
        if np.all(np.abs(step) <= 1e-14 * (1 + tt)):
            break
    t[outside] = tt
    with np.errstate(invalid="ignore", divide="ignore"):
        factor = np.where(flat[None, :], 1.0, t[:, None] / (a2[None, :] + t[:, None]))
    return np.sqrt((x2 * factor**2).sum(axis=1))


def steiner_check(E: EllipsoidSpec, eps: float, mc_points: int, rng, kubota_samples: int = 200_000, batch_size=DEFAULT_BATCH):
    """Hit-or-miss volume of the parallel body E + eps B_n against the Steiner polynomial."""
    n = E.n
    if eps <= 0:
        raise ValueError("eps must be positive")
    if n > 3:
        raise ValueError("the Steiner check is limited to n <= 3")
    stream = as_stream(rng)
    vols = [1.0]
    for j in range(1, n + 1):
        if j == n:
            vols.append(E.volume())
        else:
            vols.append(intrinsic_volume_ellipsoid_kubota(E, j, kubota_samples, stream.spawn(j)).value)
    steiner = sum(eps ** (n - j) * ball_volume(n - j) * vols[j] for j in range(n + 1))
    half = math.sqrt(max(np.linalg.eigvalsh(E.sigma).max(), 0.0)) + eps
    box = (2 * half) ** n

    def draw(gen, m):
        pts = gen.uniform(-half, half, size=(m, n))
        return (distance_to_ellipsoid(pts, E) <= eps).astype(float)

    est = mc_mean(draw, mc_points, stream.spawn(0), batch_size)
    vol = box * float(est.value)
    return SteinerCheck(vol, box * float(est.std_error), steiner, tuple(vols), abs(vol - steiner) / steiner)
