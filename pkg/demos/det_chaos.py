"""Chaos coefficients of det(X X^T)^{1/2} and how fast the variance series converges."""

import numpy as np

from matherm.chaos import coefficient_mc, det_coefficient, det_expansion, sqrt_det, variance_expansion
from matherm.sampling import RngStream

ell, n = 2, 3
print(f"closed-form coefficients, ell={ell}, n={n}")
for rec in det_expansion(ell, n, 3).coefficients:
    print(f"  {str(rec.partition):8s} {rec.value:+.6f}")

# Monte Carlo against the closed form for a few partitions
for kappa in [(1,), (2,), (1, 1)]:
    rec = coefficient_mc(sqrt_det, kappa, ell, n, 400_000, RngStream(1))
    exact = det_coefficient(kappa, ell, n)
    print(f"  {kappa}: MC {rec.value:+.5f} +- {rec.std_error:.5f}   exact {exact:+.5f}")

# Var det^{1/2} = E det - (E det^{1/2})^2 with E det(X X^T) = n (n-1) for ell = 2
total = n * (n - 1) - det_coefficient((), ell, n) ** 2
sums = variance_expansion(det_expansion(ell, n, 6), 6)
print("partial sums / total variance:", np.round(np.array(sums) / total, 5))
