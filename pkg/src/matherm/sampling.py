"""Seeded Gaussian-matrix, Haar-frame and Wishart sampling plus a batched MC estimator.

Randomness is organised in streams.  An ``RngStream`` is a (seed, stream id)
pair mapped to a Philox generator through ``SeedSequence`` spawn keys, so
stream ``b`` produces the same numbers whichever worker draws it.  Monte
Carlo estimators split their sample count into fixed batches, give batch
``b`` its own sub-stream and combine the batch results in batch order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

DEFAULT_BATCH = 100_000


@dataclass(frozen=True)
class RngStream:
    seed: int
    stream_id: int = 0
    parent: tuple = ()

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.stream_id < 0:
            raise ValueError("stream_id must be non-negative")

    @property
    def key(self) -> tuple:
        return self.parent + (self.stream_id,)

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=self.key)
        return np.random.Generator(np.random.Philox(ss))

    def spawn(self, i: int) -> "RngStream":
        """Independent child stream number ``i``."""
        return RngStream(self.seed, i, self.key)


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    if rng is None or isinstance(rng, (int, np.integer)):
        return RngStream(int(rng or 0)).generator()
    raise TypeError(f"cannot make a generator from {type(rng).__name__}")


def as_stream(rng) -> RngStream:
    if isinstance(rng, RngStream):
        return rng
    if rng is None or isinstance(rng, (int, np.integer)):
        return RngStream(int(rng or 0))
    raise TypeError("batched estimators need an RngStream or an integer seed")


@dataclass(frozen=True)
class Estimate:
    """Sample mean with its standard error; arrays when the integrand is vector valued."""

    value: float | np.ndarray
    std_error: float | np.ndarray
    samples: int

    def z_score(self, target) -> float | np.ndarray:
        return (self.value - target) / self.std_error


def _batch_moments(values: np.ndarray):
    values = np.asarray(values, dtype=float)
    m = values.mean(axis=0)
    d = values - m
    return len(values), m, (d * d).sum(axis=0)


def mc_mean(
    draw: Callable[[np.random.Generator, int], np.ndarray],
    samples: int,
    rng,
    batch_size: int = DEFAULT_BATCH,
    workers: int = 1,
) -> Estimate:
    """Mean of ``draw(generator, m)`` over ``samples`` draws, batched and reproducible.

    ``draw`` returns an array whose first axis has length ``m``.  Batches are
    fixed by index, so the result does not depend on ``workers``.
    """
    if samples < 2:
        raise ValueError("need at least two samples")
    stream = as_stream(rng)
    sizes = [batch_size] * (samples // batch_size)
    if samples % batch_size:
        sizes.append(samples % batch_size)

    def run(b):
        return _batch_moments(draw(stream.spawn(b).generator(), sizes[b]))

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(run, range(len(sizes))))
    else:
        parts = [run(b) for b in range(len(sizes))]

    # Chan et al. pairwise update, applied in batch order
    count, mean, m2 = parts[0]
    for nb, mb, m2b in parts[1:]:
        tot = count + nb
        delta = mb - mean
        mean = mean + delta * nb / tot
        m2 = m2 + m2b + delta * delta * count * nb / tot
        count = tot
    var = m2 / (count - 1)
    return Estimate(mean, np.sqrt(var / count), count)


def sym_sqrt(sigma) -> np.ndarray:
    w, V = np.linalg.eigh(np.asarray(sigma, dtype=float))
    return (V * np.sqrt(np.clip(w, 0, None))) @ V.T


def check_spd(sigma, n: int | None = None) -> np.ndarray:
    sigma = np.asarray(sigma, dtype=float)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise ValueError("covariance must be a square matrix")
    if n is not None and sigma.shape[0] != n:
        raise ValueError(f"covariance must be {n} x {n}")
    if not np.allclose(sigma, sigma.T, rtol=0, atol=1e-12 * max(1.0, np.abs(sigma).max())):
        raise ValueError("covariance must be symmetric")
    if np.linalg.eigvalsh(sigma).min() <= 0:
        raise ValueError("covariance must be positive definite")
    return sigma


@dataclass(frozen=True)
class MatrixEnsemble:
    """l x n Gaussian matrices with i.i.d. rows N(0, sigma); sigma None means identity."""

    ell: int
    n: int
    sigma: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        if not 1 <= self.ell <= self.n:
            raise ValueError(f"need 1 <= ell <= n, got ell={self.ell}, n={self.n}")
        if self.sigma is not None:
            object.__setattr__(self, "sigma", check_spd(self.sigma, self.n))

    @property
    def sigma_sqrt(self) -> np.ndarray | None:
        return None if self.sigma is None else sym_sqrt(self.sigma)


def sample_gaussian_matrix(ens: MatrixEnsemble, rng, size: int | None = None) -> np.ndarray:
    """Standard normal entries, right-multiplied by sigma^{1/2} when a covariance is set."""
    gen = as_generator(rng)
    shape = (ens.ell, ens.n) if size is None else (size, ens.ell, ens.n)
    Z = gen.standard_normal(shape)
    root = ens.sigma_sqrt
    return Z if root is None else Z @ root


def sample_stiefel_haar(n: int, ell: int, rng, size: int | None = None) -> np.ndarray:
    """Haar-distributed ell x n frames with orthonormal rows.

    QR of a Gaussian n x ell matrix, with column signs chosen so the
    triangular factor has a positive diagonal.
    """
    if not 1 <= ell <= n:
        raise ValueError(f"need 1 <= ell <= n, got ell={ell}, n={n}")
    gen = as_generator(rng)
    Z = gen.standard_normal((n, ell) if size is None else (size, n, ell))
    Q, R = np.linalg.qr(Z)
    signs = np.sign(np.diagonal(R, axis1=-2, axis2=-1))
    signs[signs == 0] = 1
    Q = Q * signs[..., None, :]
    return np.swapaxes(Q, -1, -2)


def sample_wishart(ell: int, n: int, rng, size: int | None = None) -> np.ndarray:
    """Wishart(ell, n, I) matrices via the Bartlett decomposition R = A A^T."""
    if not 1 <= ell <= n:
        raise ValueError(f"need 1 <= ell <= n, got ell={ell}, n={n}")
    gen = as_generator(rng)
    m = 1 if size is None else size
    A = np.zeros((m, ell, ell))
    for i in range(ell):
        A[:, i, i] = np.sqrt(gen.chisquare(n - i, size=m))
        if i:
            A[:, i, :i] = gen.standard_normal((m, i))
    R = A @ np.swapaxes(A, -1, -2)
    return R[0] if size is None else R


def polar_decompose(X, rel_tol: float = 1e-12):
    """Return (R, U) with R = X X^T and U = R^{-1/2} X, so X = R^{1/2} U."""
    X = np.asarray(X, dtype=float)
    R = X @ np.swapaxes(X, -1, -2)
    w, V = np.linalg.eigh(R)
    trace = w.sum(axis=-1)
    if np.any(w.min(axis=-1) <= rel_tol * trace):
        raise ValueError("rank deficiency: rows of X are numerically linearly dependent")
    inv_root = (V / np.sqrt(w)[..., None, :]) @ np.swapaxes(V, -1, -2)
    return R, inv_root @ X
