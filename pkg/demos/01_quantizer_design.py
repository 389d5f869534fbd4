# # Designing multi-bit quantizers
#
# A b-bit symmetric quantizer splits the half-line into K = 2^(b-1) bins and
# sends each bin to a level. For a Gaussian input the MSE-optimal choice comes
# from the Lloyd-Max alternation: thresholds at level midpoints, levels at bin
# centroids.

import numpy as np

from quantcs import (NoiseModel, channel_constants, distortion, lloyd_max_design,
                     lloyd_max_iterations, omega_optimal, quantize)

for b in (1, 2, 3, 4):
    q = lloyd_max_design(b)
    print("b=%d  t=%s  mu=%s  D=%.6f" % (
        b, np.round(q.thresholds, 5), np.round(q.levels, 5), distortion(q)))

# The alternation decreases the distortion monotonically; watch it settle for b=2.

for i, (step, t, mu, d, change) in enumerate(lloyd_max_iterations(2)):
    if step == "mu" and i % 20 == 1:
        print("iter %3d  t1=%.6f  D=%.8f  change=%.1e" % (i // 2, t[0], d, change))
    if i > 100:
        break

# Quantizing is a lookup. Zero goes to the positive first level and a value
# sitting exactly on a threshold belongs to the bin above it.

q2 = lloyd_max_design(2)
print(quantize(q2, np.array([-2.0, -0.3, 0.0, q2.thresholds[0], 1.2])))

# ## What a quantizer costs the linear estimator
#
# The estimator only sees lambda (how much signal survives) and Psi (the
# spread of the output). Their ratio Omega scales the estimation error.

for sigma in (0.0, 1.0, 2.0):
    c = channel_constants(lloyd_max_design(1), NoiseModel.additive(sigma))
    print("b=1 sigma=%.0f  lambda=%.5f  Psi=%.5f  Omega=%.5f" % (sigma, c.lam, c.psi, c.omega))

# With the quantizer matched to the input variance, Omega is as small as it
# gets, and the ratio between consecutive bit depths does not depend on sigma.
# Doubling the bit budget buys a factor sqrt(b'/b) in measurements, which is
# more than the ratio, so fewer bits per measurement win at a fixed budget.

for b in (1, 2, 3):
    ratio = omega_optimal(b) / omega_optimal(b + 1)
    print("Omega_%d / Omega_%d = %.4f   vs sqrt(%d/%d) = %.4f" % (
        b, b + 1, ratio, b + 1, b, np.sqrt((b + 1) / b)))
