"""Total variation of arithmetic random waves on the 3-torus: mean, variance and normality."""

import sys

from matherm import arw

n = int(sys.argv[1]) if len(sys.argv) > 1 else 614
replicates = int(sys.argv[2]) if len(sys.argv) > 2 else 500

freq = arw.build_frequency_set(n)
d = arw.covariance_diagnostics(freq)
print(f"n={n}: N_n={freq.N}, integral of tr R^2 = {d.tr_r2_integral:.5f} (9/N = {9 / freq.N:.5f})")

cfg = arw.WaveConfig(n=n, ell=1, replicates=replicates, seed=11)
run = arw.run_replicates(cfg)
mean = arw.mean_experiment(cfg, run=run, doubling_replicates=3)
print("mean:", {k: mean[k] for k in ("mean", "mean_theory", "z_score")})
if replicates >= arw.MIN_VARIANCE_REPLICATES and freq.N >= arw.MIN_FREQUENCIES:
    var = arw.variance_experiment(cfg, run=run)
    clt = arw.clt_experiment(cfg, run=run)
    print("variance ratio:", round(var["ratio"], 4), " KS p-value:", round(clt["ks_pvalue_total_variation"], 3))
