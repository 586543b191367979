"""Arithmetic random waves on the three-torus and their generalized total variation.

For n a sum of three squares, Lambda_n is the set of integer vectors with
|lambda|^2 = n and N_n its size.  Each of l independent copies is

    T(z) = N_n^{-1/2} sum_lambda a_lambda e^{2 pi i <lambda, z>},

where a_{-lambda} = conj(a_lambda) and E|a|^2 = 1.  The gradient is
normalized by sqrt(E_n / 3), with E_n = 4 pi^2 n.  The statistic of
interest is the integral over the torus of det(J J^T)^{1/2}, where J is the
l x 3 Jacobian.

Fields are synthesized on a uniform periodic grid with an inverse real FFT.
Point evaluation (:func:`eval_field`, :func:`eval_gradient`) sums over
Lambda_n directly.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.fft
from scipy import stats

from .chaos import gamma_ratio
from .sampling import RngStream, as_generator

MIN_VARIANCE_REPLICATES = 500
MIN_FREQUENCIES = 24


def is_sum_of_three_squares(n: int) -> bool:
    if n < 0:
        return False
    while n and n % 4 == 0:
        n //= 4
    return n % 8 != 7


@dataclass(frozen=True)
class FrequencySet:
    n: int
    lambdas: np.ndarray = field(repr=False)
    half_set: np.ndarray = field(repr=False)

    @property
    def N(self) -> int:
        return len(self.lambdas)

    @property
    def energy(self) -> float:
        """Laplace eigenvalue E_n = 4 pi^2 n."""
        return 4 * math.pi**2 * self.n


def build_frequency_set(n: int) -> FrequencySet:
    """All integer 3-vectors of squared norm n, plus one representative of each +-pair."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    if not is_sum_of_three_squares(n):
        raise ValueError(f"n={n} is of the form 4^a(8b+7), so it is not a sum of three squares")
    r = math.isqrt(n)
    axis = np.arange(-r, r + 1)
    g = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1).reshape(-1, 3)
    lam = g[(g * g).sum(axis=1) == n]
    # lexicographically positive half: first nonzero coordinate > 0
    first = np.where(lam[:, 0] != 0, lam[:, 0], np.where(lam[:, 1] != 0, lam[:, 1], lam[:, 2]))
    half = lam[first > 0]
    return FrequencySet(n, lam, half)


def min_grid(n: int) -> int:
    """Smallest grid on which degree-two trigonometric functionals integrate exactly."""
    return 4 * (math.isqrt(n - 1) + 1) + 1  # 4 * ceil(sqrt(n)) + 1


def default_grid(n: int) -> int:
    return scipy.fft.next_fast_len(min_grid(n), real=True)


@dataclass
class WaveConfig:
    n: int
    ell: int = 1
    grid: int | None = None
    replicates: int = 500
    seed: int = 0
    freq: FrequencySet = field(init=False, repr=False)

    def __post_init__(self):
        if self.ell not in (1, 2, 3):
            raise ValueError("ell must be 1, 2 or 3")
        self.freq = build_frequency_set(self.n)
        if self.grid is None:
            self.grid = default_grid(self.n)
        if self.grid < min_grid(self.n):
            raise ValueError(f"grid {self.grid} violates the alias bound G >= 4*ceil(sqrt(n))+1 = {min_grid(self.n)}")
        if self.replicates < 1:
            raise ValueError("replicates must be positive")

    def resolved(self) -> dict:
        return {"n": self.n, "ell": self.ell, "grid": self.grid, "replicates": self.replicates, "seed": self.seed}


@dataclass(frozen=True)
class WaveSample:
    freq: FrequencySet
    ell: int
    coeffs: np.ndarray = field(repr=False)  # (ell, N/2) complex, on the half set


def sample_field(cfg: WaveConfig, rng) -> WaveSample:
    """Draw a_lambda = (xi + i eta)/sqrt(2) on the half set for each of the l copies."""
    gen = as_generator(rng)
    m = len(cfg.freq.half_set)
    z = gen.standard_normal((cfg.ell, m, 2))
    return WaveSample(cfg.freq, cfg.ell, (z[..., 0] + 1j * z[..., 1]) / math.sqrt(2))


def _phases(freq: FrequencySet, z):
    z = np.asarray(z, dtype=float)
    return np.exp(2j * math.pi * (z @ freq.half_set.T))  # (..., N/2)


def eval_field(sample: WaveSample, z) -> np.ndarray:
    """T^{(i)}(z) for each copy i; shape (l,) + z.shape[:-1]."""
    e = _phases(sample.freq, z)
    return 2 * np.real(np.einsum("...k,ik->i...", e, sample.coeffs)) / math.sqrt(sample.freq.N)


def eval_gradient(sample: WaveSample, z, normalized: bool = True) -> np.ndarray:
    """Gradient of each copy at z; shape (l, 3) + z.shape[:-1]."""
    freq = sample.freq
    e = _phases(freq, z)
    terms = 2j * math.pi * sample.coeffs[:, None, :] * freq.half_set.T[None, :, :]  # (l, 3, N/2)
    grad = 2 * np.real(np.einsum("...k,ijk->ij...", e, terms)) / math.sqrt(freq.N)
    if normalized:
        grad = grad / math.sqrt(freq.energy / 3)
    return grad


def grid_points(G: int) -> np.ndarray:
    axis = np.arange(G) / G
    return np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1)


def _synthesize(spectra: np.ndarray, lam: np.ndarray, G: int) -> np.ndarray:
    """Real fields sum_lambda c_lambda e^{2 pi i <lambda, m/G>} on the full lambda set (Hermitian c)."""
    keep = lam[:, 2] >= 0
    idx = np.mod(lam[keep], G)
    buf = np.zeros(spectra.shape[:-1] + (G, G, G // 2 + 1), dtype=complex)
    buf[..., idx[:, 0], idx[:, 1], idx[:, 2]] = spectra[..., keep]
    return scipy.fft.irfftn(buf, s=(G, G, G), axes=(-3, -2, -1), norm="forward", workers=-1)


def gradient_grid(sample: WaveSample, G: int) -> np.ndarray:
    """Normalized Jacobian on the G^3 grid, shape (l, 3, G, G, G)."""
    freq = sample.freq
    lam = np.concatenate([freq.half_set, -freq.half_set])
    a = np.concatenate([sample.coeffs, np.conj(sample.coeffs)], axis=1)  # (l, N)
    scale = math.sqrt(3 / (freq.n * freq.N))  # 2 pi / sqrt(E_n/3) / sqrt(N)
    spectra = 1j * scale * a[:, None, :] * lam.T[None, :, :]
    return _synthesize(spectra, lam, G)


def gram_sqrt_det(J: np.ndarray) -> np.ndarray:
    """det(J J^T)^{1/2} pointwise for J of shape (l, 3, ...)."""
    ell = J.shape[0]
    if ell == 1:
        return np.sqrt((J[0] ** 2).sum(axis=0))
    if ell == 2:
        return np.sqrt((np.cross(J[0], J[1], axis=0) ** 2).sum(axis=0))
    return np.abs(np.einsum("i...,i...->...", J[0], np.cross(J[1], J[2], axis=0)))


def _volume_scale(freq: FrequencySet, ell: int) -> float:
    return (freq.energy / 3) ** (ell / 2)


def total_variation(sample: WaveSample, cfg: WaveConfig | int) -> float:
    """(E_n/3)^{l/2} times the grid average of det(J J^T)^{1/2}."""
    G = cfg if isinstance(cfg, int) else cfg.grid
    J = gradient_grid(sample, G)
    return _volume_scale(sample.freq, sample.ell) * float(gram_sqrt_det(J).mean())


def second_chaos_stat(sample: WaveSample) -> float:
    """l^{-1/2} sum_i (N/2)^{-1/2} sum_{half set} (|a_{i,lambda}|^2 - 1); mean 0, variance 1."""
    half = sample.coeffs.shape[1]
    return float((np.abs(sample.coeffs) ** 2 - 1).sum() / math.sqrt(half) / math.sqrt(sample.ell))


def grid_hermite_one(sample: WaveSample, G: int) -> float:
    """Grid average of H_(1)(J) = tr(J J^T)/6 - l/2."""
    J = gradient_grid(sample, G)
    return float(((J**2).sum(axis=(0, 1)) / 6 - sample.ell / 2).mean())


def mean_theory(freq: FrequencySet, ell: int) -> float:
    """E V = (E_n/3)^{l/2} 2^{l/2} Gamma_l(2) / Gamma_l(3/2)."""
    return _volume_scale(freq, ell) * gamma_ratio(ell, 3)


def variance_theory(freq: FrequencySet, ell: int) -> float:
    """Leading variance (E_n/3)^l 2^l Gamma_l(2)^2 / Gamma_l(3/2)^2 * l / (2 N_n)."""
    return _volume_scale(freq, ell) ** 2 * gamma_ratio(ell, 3) ** 2 * ell / (2 * freq.N)


def second_chaos_variance(freq: FrequencySet, ell: int, tr_r2_integral: float | None = None) -> float:
    """Variance of the second-chaos component, (E_n/3)^l Phihat((1))^2 l/18 * integral tr R_n^2."""
    if tr_r2_integral is None:
        tr_r2_integral = 9 / freq.N
    return _volume_scale(freq, ell) ** 2 * gamma_ratio(ell, 3) ** 2 * ell / 18 * tr_r2_integral


@dataclass(frozen=True)
class CovarianceDiagnostics:
    n: int
    N: int
    grid: int
    tr_r2_integral: float
    target: float
    abs_error: float
    r_at_zero: list


def normalized_gradient_covariance(freq: FrequencySet, G: int) -> np.ndarray:
    """R_n(z)_{jj'} = 3/(n N) sum_lambda lambda_j lambda_j' cos(2 pi <lambda, z>) on the grid, shape (3, 3, G, G, G)."""
    lam = freq.lambdas
    w = 3 / (freq.n * freq.N)
    spectra = w * lam.T[:, None, :] * lam.T[None, :, :]
    return _synthesize(spectra.astype(complex), lam, G)


def covariance_diagnostics(freq: FrequencySet, grid: int | None = None) -> CovarianceDiagnostics:
    """Grid integral of tr(R_n(z)^2); equals 9/N_n exactly on an alias-free grid."""
    G = grid or default_grid(freq.n)
    if G < min_grid(freq.n):
        raise ValueError(f"grid {G} is below the alias bound {min_grid(freq.n)}")
    R = normalized_gradient_covariance(freq, G)
    integral = float((R**2).sum(axis=(0, 1)).mean())
    target = 9 / freq.N
    return CovarianceDiagnostics(freq.n, freq.N, G, integral, target, abs(integral - target), R[:, :, 0, 0, 0].tolist())


@dataclass
class ReplicateRun:
    config: dict
    total_variation: np.ndarray
    second_chaos: np.ndarray

    def rows(self):
        for i, (v, s) in enumerate(zip(self.total_variation, self.second_chaos)):
            yield {"replicate": i, "total_variation": float(v), "second_chaos_stat": float(s)}


def run_replicates(cfg: WaveConfig, workers: int = 1, grid: int | None = None) -> ReplicateRun:
    """Replicate r uses stream r of the configured seed; output is ordered by replicate."""
    G = grid or cfg.grid

    def one(r):
        sample = sample_field(cfg, RngStream(cfg.seed, r))
        return total_variation(sample, G), second_chaos_stat(sample)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            out = list(pool.map(one, range(cfg.replicates)))
    else:
        out = [one(r) for r in range(cfg.replicates)]
    tv, st = (np.array(x) for x in zip(*out))
    return ReplicateRun(cfg.resolved(), tv, st)


def grid_doubling(cfg: WaveConfig, replicates: int = 10) -> float:
    """Largest relative change of the total variation between grids G and 2G over the first replicates."""
    worst = 0.0
    for r in range(min(replicates, cfg.replicates)):
        sample = sample_field(cfg, RngStream(cfg.seed, r))
        a = total_variation(sample, cfg.grid)
        b = total_variation(sample, 2 * cfg.grid)
        worst = max(worst, abs(a - b) / abs(b))
    return worst


def mean_experiment(cfg: WaveConfig, workers: int = 1, doubling_replicates: int = 10, run: ReplicateRun | None = None) -> dict:
    run = run or run_replicates(cfg, workers)
    tv = run.total_variation
    theory = mean_theory(cfg.freq, cfg.ell)
    se = tv.std(ddof=1) / math.sqrt(len(tv))
    out = {
        "n": cfg.n,
        "N_n": cfg.freq.N,
        "ell": cfg.ell,
        "grid": cfg.grid,
        "replicates": len(tv),
        "mean": float(tv.mean()),
        "std_error": float(se),
        "mean_theory": theory,
        "z_score": float((tv.mean() - theory) / se),
    }
    if doubling_replicates:
        out["grid_doubling_rel_change"] = grid_doubling(cfg, doubling_replicates)
    return out


def _check_experiment(cfg: WaveConfig):
    if cfg.replicates < MIN_VARIANCE_REPLICATES:
        raise ValueError(f"need at least {MIN_VARIANCE_REPLICATES} replicates, got {cfg.replicates}")
    if cfg.freq.N < MIN_FREQUENCIES:
        raise ValueError(f"need N_n >= {MIN_FREQUENCIES}, got {cfg.freq.N} for n={cfg.n}")


def variance_experiment(cfg: WaveConfig, workers: int = 1, run: ReplicateRun | None = None) -> dict:
    """Empirical variance against the leading term; the finite-n band is an engineering choice."""
    _check_experiment(cfg)
    run = run or run_replicates(cfg, workers)
    tv, st = run.total_variation, run.second_chaos
    var = float(tv.var(ddof=1))
    theory = variance_theory(cfg.freq, cfg.ell)
    var2 = second_chaos_variance(cfg.freq, cfg.ell)
    corr = float(np.corrcoef(tv, st)[0, 1])
    m = len(tv)
    return {
        "n": cfg.n,
        "N_n": cfg.freq.N,
        "ell": cfg.ell,
        "grid": cfg.grid,
        "replicates": m,
        "mean": float(tv.mean()),
        "variance": var,
        "variance_std_error": var * math.sqrt(2 / (m - 1)),
        "variance_theory": theory,
        "ratio": var / theory,
        "second_chaos_variance": var2,
        "second_chaos_share": var2 / var,
        "second_chaos_share_empirical": corr**2,
    }


def clt_experiment(cfg: WaveConfig, workers: int = 1, run: ReplicateRun | None = None) -> dict:
    """Kolmogorov-Smirnov normality of the standardized total variation and of the second-chaos statistic.

    The total variation is centered at its exact mean and scaled by the
    empirical standard deviation; the second-chaos statistic is already
    standardized.
    """
    _check_experiment(cfg)
    run = run or run_replicates(cfg, workers)
    tv, st = run.total_variation, run.second_chaos
    z = (tv - mean_theory(cfg.freq, cfg.ell)) / tv.std(ddof=1)
    ks_tv = stats.kstest(z, "norm")
    ks_st = stats.kstest(st, "norm")
    return {
        "n": cfg.n,
        "N_n": cfg.freq.N,
        "ell": cfg.ell,
        "replicates": len(tv),
        "ks_statistic_total_variation": float(ks_tv.statistic),
        "ks_pvalue_total_variation": float(ks_tv.pvalue),
        "ks_statistic_second_chaos": float(ks_st.statistic),
        "ks_pvalue_second_chaos": float(ks_st.pvalue),
        "second_chaos_mean": float(st.mean()),
        "second_chaos_variance": float(st.var(ddof=1)),
    }
