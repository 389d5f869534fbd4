# # Bit flips after quantization
#
# Two corruption mechanisms act on the codewords. Random flips move a
# codeword to any other codeword. Adversarial flips push it to the opposite
# outermost level. Both shrink lambda linearly in the flip probability p until
# it hits zero: past that breakdown point the estimator points the wrong way.

import numpy as np

from quantcs import (ADVERSARIAL_FLIP, RANDOM_FLIP, NoiseModel, RandomStream, apply_bin_flips,
                     breakdown_table, flip_omega_curve, format_breakdown, format_tradeoff,
                     lloyd_max_design, quantize, tradeoff_table)

print(format_breakdown(breakdown_table([1, 2, 3, 4])))

# More bits help against random flips (the breakdown moves toward 1) but
# hurt against adversarial ones, since the outer level gets larger.

ps = np.array([0.0, 0.1, 0.2, 0.3, 0.4])
for mech in (RANDOM_FLIP, ADVERSARIAL_FLIP):
    for b in (1, 2, 3):
        print("%-17s b=%d  log10 Omega: %s" % (
            mech, b, np.round(np.log10(flip_omega_curve(b, mech, ps)), 3)))

# At heavy random flips two bits beat one bit even at a fixed bit budget.

print(format_tradeoff(tradeoff_table([1, 2, 3], NoiseModel.random_flip(0.45))))

# Flips in action: about a fifth of the codewords change.

q = lloyd_max_design(2)
y = quantize(q, RandomStream(0).normal(10))
z = apply_bin_flips(y, q, NoiseModel.random_flip(0.2), RandomStream(1))
print(np.round(y, 3))
print(np.round(z, 3))
