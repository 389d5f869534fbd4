# # Estimating the norm as well as the direction
#
# One-bit data carry no information about ||x*||. With b >= 2 the bin counts
# do: without noise the observations are N(0, psi^2) seen through the bins.

import numpy as np

from quantcs import (ExperimentConfig, RandomStream, bin_counts, interval_bounds,
                     lloyd_max_design, prop1_epsilon, quantize, run_experiment,
                     scale_mle_noiseless, scale_mle_noisy, summarize)

q = lloyd_max_design(2)
for psi in (0.5, 1.0, 2.0):
    y = quantize(q, psi * RandomStream(3).normal(5000))
    print("psi*=%.1f  psi_hat=%.4f" % (psi, scale_mle_noiseless(bin_counts(y, q), q).psi_hat))

# The closed-form 2-bit estimator concentrates at rate exp(-c m eps^2), with c
# largest when the threshold equals the true norm.

for m in (1000, 10_000, 100_000):
    print("m=%6d  95%% deviation bound %.4f" % (m, prop1_epsilon(q.thresholds[0], 1.0, m, 0.05)))

# With additive noise the norm and the noise level are estimated together
# from interval-censored data, given a direction.

s = RandomStream(5)
z = s.normal(10_000)
y = quantize(q, 1.0 * z + 0.5 * s.normal(10_000))
est = scale_mle_noisy(z, interval_bounds(y, q), 1.0)
print("psi_hat=%.4f sigma_hat=%.4f after %d sweeps" % (est.psi_hat, est.sigma_hat, est.sweeps))

# In practice the direction is itself estimated and plugged in.

config = ExperimentConfig(signal={"class": "sparse", "n": 200}, s=[5], f=[1.0, 2.0, 4.0], bits=[2],
                          noise_params=[0.0, 1.0], replicates=5, seed=11, estimate_scale=True)
rows = run_experiment(config)
for sigma in (0.0, 1.0):
    for f in config.f:
        sel = [r for r in rows if r.noise_param == sigma and r.f == f]
        print("sigma=%.0f f=%.0f  psi_hat %.3f  sigma_hat %.3f" % (
            sigma, f, np.mean([r.psi_hat for r in sel]), np.mean([r.sigma_hat for r in sel])))
