"""The acceptance suite: twelve end-to-end checks with their tolerances and time budgets.

Each ``criterion_*`` function runs one check and returns a
:class:`CriterionResult`.  The CLI ``suite acceptance`` command and the
acceptance tests both call :func:`run_suite`.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

import numpy as np
from scipy import stats

from . import arw
from .chaos import det_coefficient, det_expansion, reconstruction_error, sqrt_det, variance_expansion
from .geometry import (
    EllipsoidSpec,
    intrinsic_volume_ball,
    intrinsic_volume_ellipsoid_determinant,
    intrinsic_volume_ellipsoid_kubota,
    intrinsic_volume_ellipsoid_stiefel,
)
from .matpoly import MatPolyContext, gram_eigenvalues, hermite_eval, hermite_from_eigenvalues, hermite_univariate_expansion
from .mehler import (
    CorrelationSpec,
    MehlerSpec,
    correlated_hermite_covariance,
    eigenvalue_ratio,
    hermite_functional,
    mehler_apply,
    random_correlation,
    semigroup_check,
)
from .partitions import Partition, enumerate_partitions, partitions_up_to
from .sampling import RngStream, mc_mean, sample_stiefel_haar
from .zonal import build_zonal_table, get_table, identity_value_closed_form
from .symfun import SymPoly

Z_TOL = 4.0

# Degree <= 3 zonal polynomials in the monomial basis, m_lambda keyed by lambda.
GOLDEN_ZONAL = {
    (): {(): Fraction(1)},
    (1,): {(1,): Fraction(1)},
    (2,): {(2,): Fraction(1), (1, 1): Fraction(2, 3)},
    (1, 1): {(1, 1): Fraction(4, 3)},
    (3,): {(3,): Fraction(1), (2, 1): Fraction(3, 5), (1, 1, 1): Fraction(2, 5)},
    (2, 1): {(2, 1): Fraction(12, 5), (1, 1, 1): Fraction(18, 5)},
    (1, 1, 1): {(1, 1, 1): Fraction(2)},
}


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    seconds: float
    budget: float
    details: list = field(default_factory=list)

    @property
    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.number:2d}: {self.title} ({self.seconds:.1f}s / budget {self.budget:.0f}s)"

    def to_dict(self) -> dict:
        return {"criterion": self.number, "title": self.title, "passed": self.passed,
                "seconds": self.seconds, "budget": self.budget, "details": self.details}


class _Checks:
    """Collects named boolean checks with a short note each."""

    def __init__(self):
        self.items = []

    def add(self, ok: bool, note: str):
        self.items.append({"ok": bool(ok), "note": note})
        return ok

    def z(self, est, se, target, note: str):
        z = (est - target) / se if se > 0 else (0.0 if est == target else math.inf)
        return self.add(abs(z) <= Z_TOL, f"{note}: est={est:.6g} se={se:.3g} target={target:.6g} z={z:+.2f}")

    @property
    def ok(self) -> bool:
        return all(i["ok"] for i in self.items)


def _timed(number, title, budget, body) -> CriterionResult:
    checks = _Checks()
    t0 = time.perf_counter()
    try:
        body(checks)
    except Exception as exc:  # a crash is a failed criterion, not a crashed suite
        checks.add(False, f"raised {type(exc).__name__}: {exc}")
    dt = time.perf_counter() - t0
    checks.add(dt <= budget, f"runtime {dt:.2f}s within {budget}s")
    return CriterionResult(number, title, checks.ok, dt, budget, checks.items)


def criterion_1(seed=0, workers=1) -> CriterionResult:
    def body(c):
        table = build_zonal_table(3)
        for kappa, row in GOLDEN_ZONAL.items():
            got = {tuple(k): v for k, v in table.zonal(kappa).items()}
            c.add(got == row, f"C_{kappa} row {got}")

    return _timed(1, "zonal golden table, degree <= 3", 1.0, body)


def criterion_2(seed=0, workers=1) -> CriterionResult:
    def body(c):
        K = 6
        table = get_table(K)
        power = SymPoly.constant(1)
        t1 = SymPoly.monomial((1,))
        for k in range(1, K + 1):
            power = power * t1
            total = SymPoly()
            for kappa in enumerate_partitions(k):
                total = total + table.zonal(kappa)
            c.add(total == power, f"sum of C_kappa over kappa |- {k} equals t_1^{k}")
        bad = []
        for kappa in partitions_up_to(K):
            row = table.binomial_row(kappa)
            for s in range(kappa.weight + 1):
                got = sum((v for sig, v in row.items() if sig.weight == s), Fraction(0))
                if got != comb(kappa.weight, s):
                    bad.append((tuple(kappa), s, got))
        c.add(not bad, f"binomial sum rule up to weight {K}; violations {bad[:3]}")
        bad = []
        for tau in partitions_up_to(K):
            for sigma in partitions_up_to(K - tau.weight):
                lin = table.linearization(tau, sigma)
                prod_poly = table.zonal(tau) * table.zonal(sigma)
                recon = SymPoly()
                for kappa, a in lin.items():
                    recon = recon + table.zonal(kappa).scale(a)
                if recon != prod_poly:
                    bad.append(("poly", tuple(tau), tuple(sigma)))
                for m in range(1, 5):
                    lhs = table.identity_value(tau, m) * table.identity_value(sigma, m)
                    rhs = sum((a * table.identity_value(kappa, m) for kappa, a in lin.items()), Fraction(0))
                    if lhs != rhs:
                        bad.append(("id", tuple(tau), tuple(sigma), m))
        c.add(not bad, f"linearization products, exact and at Id_m for m <= 4; violations {bad[:3]}")
        bad = [
            (tuple(kappa), m)
            for kappa in partitions_up_to(K)
            for m in range(1, 7)
            if identity_value_closed_form(kappa, m) != table.identity_value(kappa, m)
        ]
        c.add(not bad, f"closed-form C_kappa(Id_m) equals table value, m <= 6; violations {bad[:3]}")

    return _timed(2, "exact zonal identities, degree <= 6", 30.0, body)


def criterion_3(seed=0, workers=1) -> CriterionResult:
    def body(c):
        gen = RngStream(seed, 3).generator()
        for ell, n in ((1, 2), (2, 3), (3, 3)):
            ctx = MatPolyContext(ell, n)
            Xs = gen.standard_normal((100, ell, n))
            for kappa in partitions_up_to(2, ell):
                fast = hermite_eval(kappa, Xs, ctx)
                slow = np.array([hermite_univariate_expansion(kappa, X) for X in Xs])
                err = float(np.max(np.abs(fast - slow) / np.maximum(1.0, np.abs(slow))))
                c.add(err <= 1e-10, f"(l,n)=({ell},{n}) kappa={kappa}: max rel err {err:.2e}")

    return _timed(3, "Hermite route equivalence", 10.0, body)


def criterion_4(seed=0, workers=1, samples=1_000_000) -> CriterionResult:
    def body(c):
        ell, n = 2, 3
        ctx = MatPolyContext(ell, n)
        parts = partitions_up_to(2, ell)
        pairs = [(i, j) for i in range(len(parts)) for j in range(i, len(parts))]

        def draw(gen, m):
            eigs = gram_eigenvalues(gen.standard_normal((m, ell, n)))
            H = [hermite_from_eigenvalues(p, eigs, ctx) * np.ones(m) for p in parts]
            return np.stack([H[i] * H[j] for i, j in pairs], axis=1)

        est = mc_mean(draw, samples, RngStream(seed, 4), workers=workers)
        for (i, j), v, se in zip(pairs, est.value, est.std_error):
            target = float(ctx.normalization(parts[i]).c_kappa) if i == j else 0.0
            c.z(float(v), float(se), target, f"E[H_{parts[i]} H_{parts[j]}]")

    return _timed(4, "Hermite orthogonality by Monte Carlo", 120.0, body)


def criterion_5(seed=0, workers=1, samples=1_000_000) -> CriterionResult:
    def body(c):
        ell, n, rho = 2, 3, 0.6
        ctx = MatPolyContext(ell, n)
        rigid = CorrelationSpec.rigid(rho, n)
        expected = {
            ((1,), (1,)): rho**2 * ell / (2 * n),
            ((2,), (1, 1)): 0.0,
            ((1, 1), (1, 1)): ell * (ell - 1) * rho**4 / (3 * n * (n - 1)),
        }
        stream = RngStream(seed, 5)
        for i, ((kappa, sigma), value) in enumerate(expected.items()):
            res = correlated_hermite_covariance(kappa, sigma, rigid, ctx, samples, stream.spawn(i), workers=workers)
            c.add(abs(res.closed_form - value) <= 1e-12, f"closed form {res.closed_form:.6g} equals {value:.6g}")
            c.z(res.estimate, res.std_error, value, f"rho={rho} cov(H_{kappa}, H_{sigma})")
        R = random_correlation(n, stream.spawn(100).generator())
        for i, (kappa, sigma) in enumerate((((1,), (1,)), ((2,), (2,)), ((1, 1), (1, 1)), ((2,), (1, 1)))):
            res = correlated_hermite_covariance(kappa, sigma, R, ctx, samples, stream.spawn(10 + i), workers=workers)
            c.z(res.estimate, res.std_error, res.closed_form, f"random R cov(H_{kappa}, H_{sigma})")

    return _timed(5, "correlated orthogonality", 180.0, body)


def criterion_6(seed=0, workers=1, samples=200_000) -> CriterionResult:
    def body(c):
        ell, n = 2, 3
        ctx = MatPolyContext(ell, n)
        kappas = [Partition(k) for k in ((1,), (2,), (1, 1))]
        gen = RngStream(seed, 6).generator()
        points = []
        while len(points) < 5:
            X = gen.standard_normal((ell, n))
            if all(abs(hermite_eval(k, X, ctx)) > 0.1 for k in kappas):
                points.append(X)
        stream = RngStream(seed, 60)
        sid = 0
        for t in (0.1, 0.5):
            spec = MehlerSpec(t, (0.5, 1.0, 2.0))
            for kappa in kappas:
                ratio = eigenvalue_ratio(kappa, spec)
                f = hermite_functional(kappa, ell, n)
                for X in points:
                    est = mehler_apply(f, X, spec, samples, stream.spawn(sid), workers=workers)
                    sid += 1
                    h = float(hermite_eval(kappa, X, ctx))
                    c.z(float(est.value), float(est.std_error), ratio * h, f"t={t} kappa={kappa} O H / H vs ratio {ratio:.5f}")
        a, t, s = (1.0, 2.0), 0.3, 0.7
        joint, split = semigroup_check((1,), a, t, s)
        joint_ref = (math.exp(-2 * (t + s)) + math.exp(-4 * (t + s))) / 2
        split_ref = (math.exp(-2 * t) + math.exp(-4 * t)) * (math.exp(-2 * s) + math.exp(-4 * s)) / 4
        c.add(abs(joint - joint_ref) <= 1e-14, f"ratio at t+s {joint:.12f} vs {joint_ref:.12f}")
        c.add(abs(split - split_ref) <= 1e-14, f"product of ratios {split:.12f} vs {split_ref:.12f}")
        c.add(abs(joint - split) > 1e-3, f"non-semigroup gap {joint - split:.6f}")

    return _timed(6, "Mehler eigenrelation", 120.0, body)


def criterion_7(seed=0, workers=1, samples=1_000_000) -> CriterionResult:
    def body(c):
        c.add(det_coefficient((), 2, 3) == 2.0, f"closed E det^(1/2) at (2,3) = {det_coefficient((), 2, 3)!r}")
        for i, (ell, n) in enumerate(((1, 1), (1, 3), (2, 3), (3, 3))):
            def draw(gen, m, ell=ell, n=n):
                X = gen.standard_normal((m, ell, n))
                return np.sqrt(np.clip(np.linalg.det(X @ np.swapaxes(X, 1, 2)), 0, None))

            est = mc_mean(draw, samples, RngStream(seed, 70 + i), workers=workers)
            c.z(float(est.value), float(est.std_error), det_coefficient((), ell, n), f"(l,n)=({ell},{n})")

    return _timed(7, "determinant mean", 60.0, body)


def criterion_8(seed=0, workers=1, samples=1_000_000) -> CriterionResult:
    def body(c):
        target = float(stats.chi(3).var())
        c.add(abs(target - (3 - 8 / math.pi)) <= 1e-12, f"chi_3 variance {target:.6f}")
        exp = det_expansion(1, 3, 8)
        partial = variance_expansion(exp, 8)
        c.add(abs(partial[0] - 0.42441) <= 5e-6, f"first term {partial[0]:.6f}")
        c.add(all(b >= a for a, b in zip(partial, partial[1:])), "partial sums non-decreasing")
        c.add(all(p <= target + 1e-12 for p in partial), "partial sums below the variance")
        gap3 = target - partial[2]
        c.add(gap3 < 0.02, f"K=3 truncation gap {gap3:.5f}")
        c.add(target - partial[-1] < gap3, f"K=8 gap {target - partial[-1]:.5f}")

        def F(eigs):
            return sqrt_det(eigs)

        err = reconstruction_error(F, exp, 3, samples, RngStream(seed, 8))
        c.z(float(err.value), float(err.std_error), gap3, "Monte Carlo K=3 reconstruction error")
        c.add(float(err.value) + Z_TOL * float(err.std_error) < 0.02, "Monte Carlo K=3 error bound below 0.02")

    return _timed(8, "variance expansion convergence", 60.0, body)


def _random_sigma(gen, n):
    """Haar rotation of a spectrum drawn log-uniformly from [0.2, 5], so the condition number is at most 25."""
    V = sample_stiefel_haar(n, n, gen)
    w = np.exp(gen.uniform(np.log(0.2), np.log(5.0), n))
    return (V.T * w) @ V


def criterion_9(seed=0, workers=1, samples=200_000) -> CriterionResult:
    def body(c):
        gen = RngStream(seed, 9).generator()
        stream = RngStream(seed, 90)
        for i in range(20):
            n = int(gen.integers(2, 6))
            ell = int(gen.integers(1, n))
            E = EllipsoidSpec(_random_sigma(gen, n))
            routes = [
                intrinsic_volume_ellipsoid_kubota(E, ell, samples, stream.spawn(3 * i), workers=workers),
                intrinsic_volume_ellipsoid_stiefel(E, ell, samples, stream.spawn(3 * i + 1), workers=workers),
                intrinsic_volume_ellipsoid_determinant(E, ell, samples, stream.spawn(3 * i + 2), workers=workers),
            ]
            for a in range(3):
                for b in range(a + 1, 3):
                    ra, rb = routes[a], routes[b]
                    se = math.hypot(ra.std_error, rb.std_error)
                    c.z(ra.value - rb.value, se, 0.0, f"Sigma #{i} n={n} l={ell} {ra.route} - {rb.route}")
        for n in range(1, 6):
            E = EllipsoidSpec(np.eye(n))
            for ell in range(1, n + 1):
                exact = intrinsic_volume_ball(ell, n)
                for fn in (intrinsic_volume_ellipsoid_kubota, intrinsic_volume_ellipsoid_stiefel):
                    v = fn(E, ell, 1000, stream.spawn(1000 + 10 * n + ell))
                    c.add(abs(v.value - exact) <= 1e-10 * max(1.0, exact), f"identity n={n} l={ell} {v.route}: {v.value:.12g} vs {exact:.12g}")
                v = intrinsic_volume_ellipsoid_determinant(E, ell, samples, stream.spawn(2000 + 10 * n + ell))
                c.z(v.value, v.std_error, exact, f"identity n={n} l={ell} {v.route}")

    return _timed(9, "geometry route agreement", 180.0, body)


def criterion_10(seed=0, workers=1) -> CriterionResult:
    def body(c):
        for n in (1, 2, 5, 614):
            d = arw.covariance_diagnostics(arw.build_frequency_set(n))
            c.add(d.abs_error <= 1e-10, f"n={n} N={d.N} integral {d.tr_r2_integral:.15f} vs 9/N {d.target:.15f}")
            r0 = np.abs(np.array(d.r_at_zero) - np.eye(3)).max()
            c.add(r0 <= 1e-12, f"n={n} R(0) - I = {r0:.1e}")
        c.add(arw.build_frequency_set(1).N == 6, "N_1 = 6")
        c.add(arw.build_frequency_set(2).N == 12, "N_2 = 12")
        try:
            arw.build_frequency_set(7)
            c.add(False, "n=7 accepted")
        except ValueError as exc:
            c.add(True, f"n=7 rejected: {exc}")

    return _timed(10, "ARW exact diagnostics", 60.0, body)


def criterion_11(seed=0, workers=1, replicates=500, n=614) -> CriterionResult:
    def body(c):
        for ell in (1, 2):
            cfg = arw.WaveConfig(n=n, ell=ell, replicates=replicates, seed=seed + 110 + ell)
            rec = arw.mean_experiment(cfg, workers=workers, doubling_replicates=5)
            c.z(rec["mean"], rec["std_error"], rec["mean_theory"], f"l={ell} n={n} G={cfg.grid} mean total variation")
            c.add(rec["grid_doubling_rel_change"] < 0.005, f"l={ell} grid doubling change {rec['grid_doubling_rel_change']:.2e}")

    return _timed(11, "ARW mean", 900.0, body)


def criterion_12(seed=0, workers=1, replicates=1000, n=614) -> CriterionResult:
    def body(c):
        for ell in (1, 2):
            cfg = arw.WaveConfig(n=n, ell=ell, replicates=replicates, seed=seed + 120 + ell)
            run = arw.run_replicates(cfg, workers)
            v = arw.variance_experiment(cfg, run=run)
            k = arw.clt_experiment(cfg, run=run)
            c.add(0.8 <= v["ratio"] <= 1.2, f"l={ell} variance ratio {v['ratio']:.4f} (engineering band [0.8, 1.2])")
            c.add(k["ks_pvalue_second_chaos"] > 0.01, f"l={ell} KS p second-chaos stat {k['ks_pvalue_second_chaos']:.3f}")
            c.add(k["ks_pvalue_total_variation"] > 0.01, f"l={ell} KS p normalized total variation {k['ks_pvalue_total_variation']:.3f}")
            c.add(v["second_chaos_share"] > 0.9, f"l={ell} second-chaos share {v['second_chaos_share']:.4f}")
            c.add(v["second_chaos_share_empirical"] > 0.9, f"l={ell} squared correlation with second chaos {v['second_chaos_share_empirical']:.4f}")

    return _timed(12, "ARW variance and CLT", 1800.0, body)


CRITERIA = {i: globals()[f"criterion_{i}"] for i in range(1, 13)}


def run_suite(select=None, seed=0, workers=1, echo=print) -> list[CriterionResult]:
    out = []
    for i in select or sorted(CRITERIA):
        res = CRITERIA[i](seed=seed, workers=workers)
        if echo:
            echo(res.line)
        out.append(res)
    return out
