"""Matrix Hermite polynomials are eigenfunctions of the rotation-averaged Mehler operator."""

import numpy as np

from matherm.matpoly import MatPolyContext, hermite_eval
from matherm.mehler import MehlerSpec, eigenvalue_ratio, hermite_functional, mehler_apply, semigroup_check
from matherm.sampling import RngStream
from matherm.zonal import get_table

ell, n = 2, 3
X = np.random.default_rng(11).standard_normal((ell, n))
ctx = MatPolyContext(ell, n, get_table(4))
spec = MehlerSpec(0.5, (0.2, 1.0, 2.0))
for kappa in [(1,), (2,), (1, 1)]:
    est = mehler_apply(hermite_functional(kappa, ell, n), X, spec, 200_000, RngStream(5))
    pred = eigenvalue_ratio(kappa, spec) * float(hermite_eval(kappa, X, ctx))
    print(f"{kappa}: MC {float(est.value):+.4f} +- {float(est.std_error):.4f}   predicted {pred:+.4f}")

# with a non-scalar A the family does not compose
print("joint vs split ratio, A=diag(0.2,1,2):", semigroup_check((2,), (0.2, 1.0, 2.0), 0.3, 0.4))
print("joint vs split ratio, A=I:           ", semigroup_check((2,), (1.0, 1.0, 1.0), 0.3, 0.4))
