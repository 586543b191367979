"""Exact symmetric-polynomial algebra in the monomial and power-sum bases.

``SymPoly`` stores a symmetric polynomial as rational coefficients on the
monomial symmetric functions m_lambda.  ``PowerSumPoly`` stores rational
coefficients on products of power sums t_s = sum_i x_i^s; the key
``(3, 1, 1)`` stands for t_3 t_1^2.  Both are stored in the stable,
variable-count-free ring.  Operations that depend on the number of variables
take it explicitly.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb, prod

import numpy as np

from .partitions import Partition, enumerate_partitions


class _SparsePoly:
    __slots__ = ("_terms",)

    def __init__(self, terms=None):
        clean = {}
        for key, c in (terms or {}).items():
            c = Fraction(c)
            if c:
                clean[Partition(key)] = c
        # canonical order: by weight, then reverse lexicographic
        self._terms = dict(sorted(clean.items(), key=lambda kv: (kv[0].weight, tuple(-p for p in kv[0]))))

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    @property
    def degree(self) -> int:
        return max((k.weight for k in self._terms), default=0)

    def items(self):
        return self._terms.items()

    def __getitem__(self, key):
        return self._terms.get(Partition(key), Fraction(0))

    def __len__(self):
        return len(self._terms)

    def __eq__(self, other):
        return type(self) is type(other) and self._terms == other._terms

    def __hash__(self):
        return hash((type(self).__name__, tuple(self._terms.items())))

    def __add__(self, other):
        out = dict(self._terms)
        for k, c in other.items():
            out[k] = out.get(k, 0) + c
        return type(self)(out)

    def __neg__(self):
        return type(self)({k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        c = Fraction(c)
        return type(self)({k: c * v for k, v in self._terms.items()})

    def __repr__(self):
        body = " + ".join(f"{c}*{self._sym}{tuple(k)}" for k, c in self._terms.items())
        return f"{type(self).__name__}({body or '0'})"


class SymPoly(_SparsePoly):
    """Rational combination of monomial symmetric functions m_lambda."""

    _sym = "m"

    @classmethod
    def monomial(cls, lam, coeff=1):
        return cls({Partition(lam): coeff})

    @classmethod
    def constant(cls, c):
        return cls({Partition(): c})

    def __mul__(self, other):
        if isinstance(other, SymPoly):
            return sym_multiply(self, other)
        return self.scale(other)

    __rmul__ = __mul__


class PowerSumPoly(_SparsePoly):
    """Rational combination of power-sum products t_nu = prod_s t_{nu_s}."""

    _sym = "t"

    def __mul__(self, other):
        if isinstance(other, PowerSumPoly):
            out = {}
            for a, ca in self.items():
                for b, cb in other.items():
                    key = Partition(sorted(a + b, reverse=True))
                    out[key] = out.get(key, 0) + ca * cb
            return PowerSumPoly(out)
        return self.scale(other)

    __rmul__ = __mul__


def distinct_permutations(seq):
    """Distinct orderings of a multiset, in lexicographic order."""
    items = sorted(seq)
    n = len(items)
    out = []

    def rec(prefix, remaining):
        if len(prefix) == n:
            out.append(tuple(prefix))
            return
        last = None
        for i, x in enumerate(remaining):
            if x == last:
                continue
            last = x
            rec(prefix + [x], remaining[:i] + remaining[i + 1:])

    rec([], items)
    return out


@lru_cache(maxsize=None)
def _arrangements(lam: tuple, m: int) -> tuple:
    return tuple(distinct_permutations(tuple(lam) + (0,) * (m - len(lam))))


@lru_cache(maxsize=None)
def monomial_product(mu: Partition, nu: Partition) -> dict:
    """Coefficients c_lambda with m_mu m_nu = sum_lambda c_lambda m_lambda."""
    w = mu.weight + nu.weight
    out = {}
    target = tuple(nu)
    for lam in enumerate_partitions(w, max(len(mu) + len(nu), 1)):
        if len(lam) < max(len(mu), len(nu)):
            continue
        count = 0
        # coefficient of x^lam: split lam = alpha + beta with alpha ~ mu, beta ~ nu
        for alpha in _arrangements(tuple(mu), len(lam)):
            beta = [a - b for a, b in zip(lam, alpha)]
            if min(beta, default=0) < 0:
                continue
            if tuple(sorted((b for b in beta if b), reverse=True)) == target:
                count += 1
        if count:
            out[lam] = Fraction(count)
    return out


def sym_multiply(p: SymPoly, q: SymPoly) -> SymPoly:
    """Exact product in the monomial basis."""
    out = {}
    for mu, a in p.items():
        for nu, b in q.items():
            for lam, c in monomial_product(mu, nu).items():
                out[lam] = out.get(lam, 0) + a * b * c
    return SymPoly(out)


@lru_cache(maxsize=None)
def _shift_monomial(lam: Partition, ell: int, by: Fraction) -> dict:
    # m_lam(s + by) over ell variables, expanded back into m_mu
    if len(lam) > ell:
        return {}
    arrs = _arrangements(tuple(lam), ell)
    out = {}
    for w in range(lam.weight + 1):
        for mu in enumerate_partitions(w, ell):
            mu_pad = mu.padded(ell)
            total = Fraction(0)
            for alpha in arrs:
                term = Fraction(1)
                for a, b in zip(alpha, mu_pad):
                    if b > a:
                        term = 0
                        break
                    term *= comb(a, b) * by ** (a - b)
                total += term
            if total:
                out[mu] = total
    return out


def shift_variables(p: SymPoly, ell: int, by=1) -> SymPoly:
    """The polynomial q with q(s_1..s_ell) = p(s_1+by, ..., s_ell+by), valid for ``ell`` variables only."""
    by = Fraction(by)
    out = {}
    for lam, c in p.items():
        for mu, d in _shift_monomial(lam, ell, by).items():
            out[mu] = out.get(mu, 0) + c * d
    return SymPoly(out)


def eval_monomial_basis(p: SymPoly, eigenvalues) -> np.ndarray | float:
    """Evaluate at eigenvalue lists; the last axis indexes the variables."""
    x = np.asarray(eigenvalues, dtype=float)
    m = x.shape[-1]
    total = np.zeros(x.shape[:-1])
    for lam, c in p.items():
        if len(lam) > m:
            continue
        acc = np.zeros(x.shape[:-1])
        for alpha in _arrangements(tuple(lam), m):
            acc = acc + np.prod(x ** np.array(alpha), axis=-1)
        total = total + float(c) * acc
    return total if total.ndim else float(total)


def power_sums(eigenvalues, max_order: int) -> np.ndarray:
    """Array of t_1..t_max_order along a new last axis."""
    x = np.asarray(eigenvalues, dtype=float)
    out = np.empty(x.shape[:-1] + (max_order,))
    xp = np.ones_like(x)
    for s in range(max_order):
        xp = xp * x
        out[..., s] = xp.sum(axis=-1)
    return out


def eval_powersum(q: PowerSumPoly, eigenvalues=None, *, sums=None):
    """Evaluate a power-sum polynomial at eigenvalues (or precomputed power sums)."""
    order = max((max(k, default=0) for k in q.terms), default=0)
    if sums is None:
        sums = power_sums(eigenvalues, max(order, 1))
    total = np.zeros(sums.shape[:-1])
    for nu, c in q.items():
        term = np.full(sums.shape[:-1], float(c))
        for s in nu:
            term = term * sums[..., s - 1]
        total = total + term
    return total if total.ndim else float(total)


@lru_cache(maxsize=None)
def _powersum_in_monomials(nu: Partition) -> SymPoly:
    out = SymPoly.constant(1)
    for s in nu:
        out = sym_multiply(out, SymPoly.monomial((s,)))
    return out


@lru_cache(maxsize=None)
def _monomial_in_powersums(lam: Partition) -> PowerSumPoly:
    # p_lam = sum_{mu >= lam} P[lam, mu] m_mu with P[lam, lam] != 0; peel off the larger terms
    rest = PowerSumPoly({lam: 1})
    diag = None
    for mu, c in _powersum_in_monomials(lam).items():
        if mu == lam:
            diag = c
        else:
            rest = rest - _monomial_in_powersums(mu).scale(c)
    return rest.scale(1 / diag)


def _check_rank(keys, num_vars):
    longest = max((len(k) for k in keys), default=0)
    if num_vars < longest:
        raise ValueError(
            f"rank error: {num_vars} variables cannot separate basis elements of length {longest}"
        )


def monomial_to_powersum(p: SymPoly, num_vars: int) -> PowerSumPoly:
    """Rewrite in power sums; valid as an identity of functions of ``num_vars`` variables."""
    _check_rank(p.terms, num_vars)
    out = PowerSumPoly()
    for lam, c in p.items():
        out = out + _monomial_in_powersums(lam).scale(c)
    return out


def powersum_to_monomial(q: PowerSumPoly, num_vars: int) -> SymPoly:
    """Inverse of :func:`monomial_to_powersum`."""
    _check_rank(q.terms, num_vars)
    out = SymPoly()
    for nu, c in q.items():
        out = out + _powersum_in_monomials(nu).scale(c)
    return out
