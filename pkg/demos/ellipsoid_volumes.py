"""Intrinsic volumes of an ellipsoid by three independent Monte Carlo routes."""

import numpy as np

from matherm.geometry import EllipsoidSpec, intrinsic_volume, intrinsic_volume_ball
from matherm.sampling import RngStream

E = EllipsoidSpec(np.diag([1.0, 2.0, 0.5]))
for j in (1, 2):
    for route in ("kubota", "stiefel", "determinant"):
        v = intrinsic_volume(E, j, 200_000, RngStream(3), route)
        print(f"V_{j} via {route:11s}: {v.value:.5f} +- {v.std_error:.5f}")

ball = EllipsoidSpec(np.eye(3))
print("unit ball V_1:", intrinsic_volume(ball, 1, 100_000, RngStream(4)).value, "exact", intrinsic_volume_ball(1, 3))
