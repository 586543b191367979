"""Print low-degree zonal polynomials and check them at the identity."""

from matherm.partitions import enumerate_partitions
from matherm.zonal import build_zonal_table, identity_value_closed_form, zonal_eval

table = build_zonal_table(4)

for k in range(1, 4):
    for kappa in enumerate_partitions(k):
        terms = " + ".join(f"{c} m{lam}" for lam, c in table.zonal(kappa).items())
        print(f"C{kappa} = {terms}")

# C_kappa(I_m) from the table against the product formula
for kappa in enumerate_partitions(4):
    for m in (2, 3, 5):
        from_table = zonal_eval(kappa, [1.0] * m, table)
        print(f"C{kappa}(I_{m}) = {float(from_table):10.4f}   closed form {float(identity_value_closed_form(kappa, m)):10.4f}")
