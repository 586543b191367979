"""Reference computations used only by the tests.

Each oracle takes a route independent of the library code it checks.
"""

from fractions import Fraction
from itertools import permutations
from math import factorial

import numpy as np
import sympy as sp


def monomial_sympy(lam, ys):
    """m_lambda in the variables ys, built from all distinct exponent arrangements."""
    pad = tuple(lam) + (0,) * (len(ys) - len(lam))
    expr = 0
    for perm in set(permutations(pad)):
        term = 1
        for y, e in zip(ys, perm):
            term *= y**e
        expr += term
    return expr


def sympoly_to_sympy(poly, ys):
    return sp.expand(sum(sp.Rational(c.numerator, c.denominator) * monomial_sympy(lam, ys) for lam, c in poly.items()))


def laplace_beltrami(expr, ys):
    """sum_i y_i^2 d_i^2 + sum_{i != j} y_i^2 / (y_i - y_j) d_i, with the pair terms cancelled exactly."""
    out = sum(y**2 * sp.diff(expr, y, 2) for y in ys)
    grads = [sp.diff(expr, y) for y in ys]
    for i in range(len(ys)):
        for j in range(i + 1, len(ys)):
            num = sp.expand(ys[i] ** 2 * grads[i] - ys[j] ** 2 * grads[j])
            q, r = sp.div(num, ys[i] - ys[j], *ys)
            assert r == 0
            out += q
    return sp.expand(out)


def laplace_beltrami_eigenvalue(kappa, m):
    k = sum(kappa)
    return sum(p * (p - i) for i, p in enumerate(kappa, 1)) + k * (m - 1)


def pochhammer_product(a, kappa):
    """prod_i prod_{j < kappa_i} (a - (i-1)/2 + j), straight from the definition."""
    out = Fraction(1)
    for i, p in enumerate(kappa):
        for j in range(p):
            out *= Fraction(a) - Fraction(i, 2) + j
    return out


def hermite_via_zonal_sum(kappa, X, n, table):
    """H_kappa from the double sum over linearization coefficients and zonal polynomials of X X^T.

    k! C_kappa(I_l) sum_{s, sigma |- s, tau |- k-s} a^kappa_{tau,sigma} C_sigma(X X^T)
        / ((-2)^{k+s} (k-s)! s! (n/2)_sigma C_sigma(I_l))
    """
    from matherm.partitions import enumerate_partitions
    from matherm.zonal import zonal_eval

    X = np.asarray(X, dtype=float)
    ell = X.shape[0]
    eigs = np.linalg.eigvalsh(X @ X.T)
    k = sum(kappa)
    total = 0.0
    for s in range(k + 1):
        for sigma in enumerate_partitions(s, ell):
            for tau in enumerate_partitions(k - s):
                a = table.linearization(tau, sigma).get(tuple(kappa), Fraction(0))
                if a == 0:
                    continue
                coef = a / (Fraction(-2) ** (k + s) * factorial(k - s) * factorial(s)
                            * pochhammer_product(Fraction(n, 2), sigma) * table.identity_value(sigma, ell))
                total += float(coef) * float(zonal_eval(sigma, eigs, table))
    return factorial(k) * float(table.identity_value(kappa, ell)) * total
