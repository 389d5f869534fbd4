# # Recovering a sparse direction from quantized measurements
#
# y = Q(A x* + sigma eps) with a Gaussian A. The estimator forms
# eta = A^T y / m and picks the unit vector in the signal class that is most
# aligned with eta. For sparse vectors that is hard thresholding.

import numpy as np

from quantcs import (ExperimentConfig, NoiseModel, RandomStream, Sparse, channel_constants,
                     design_dimensions, l2_error, lloyd_max_design, marginal_statistic,
                     recover_direction, run_experiment, sample_signal, simulate_measurements,
                     summarize)

cls = Sparse(5, 200)
lam1 = channel_constants(lloyd_max_design(1), NoiseModel.additive(1.0)).lam
m, beta = design_dimensions(cls, 2.0, lam1)
stream = RandomStream(42)
truth = sample_signal(cls, 2.0, m, lam1, stream)
print("m=%d, support=%s" % (m, np.flatnonzero(truth.x_star)))

for b in (1, 2, 3):
    q = lloyd_max_design(b)
    ms = simulate_measurements(truth, m, 1.0, q, RandomStream(7))
    est = recover_direction(marginal_statistic(ms), cls)
    print("b=%d  error=%.4f  support=%s" % (b, l2_error(est, truth.direction), np.flatnonzero(est.x_hat)))

# ## Equal measurements versus equal bits
#
# The harness replays the same signal, design and noise for each bit depth.
# With equal m, two bits help a little. Spending the same number of bits on
# twice as many one-bit measurements helps more.

base = ExperimentConfig(signal={"class": "sparse", "n": 200}, s=[5], f=[2.0], bits=[1, 2],
                        noise_params=[1.0], replicates=20, seed=1)
for mode in ("equal_m", "equal_bits"):
    rows = run_experiment(ExperimentConfig(**{**base.__dict__, "m_mode": mode}))
    for cell in summarize(rows):
        print("%-10s b=%d m=%6d  mean error %.4f (sd %.4f)" % (
            mode, cell["b"], cell["m"], cell["mean_error"], cell["sd_error"]))
