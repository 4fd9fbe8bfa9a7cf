"""
Heisenberg versus standard scaling of the metrology quantities
===============================================================

For H_S = sum of Z/2 under single-erasure noise the noisy channel QFI
quantity F grows quadratically in n, while J, which governs the
covariance bounds, grows only linearly. The symmetric reduction makes
both SDPs cheap well beyond dense sizes.
"""

import numpy as np

from covqec import LocalSum, erasure_channel
from covqec.measures import f_reg, growth_exponent, j_min

z_half = np.diag([0.5, -0.5])
ns = [4, 6, 8, 10, 12]
js, fs = [], []

for n in ns:
    # a LocalSum stays in factored form, so the permutation-symmetric path applies
    h = LocalSum(z_half, n)
    noise = erasure_channel([2] * n)
    js.append(j_min(h, noise).value)
    fs.append(f_reg(h, noise).value)
    print("n=%2d  J=%8.4f  F=%9.4f" % (n, js[-1], fs[-1]))

# log-log slopes: close to 1 for J and close to 2 for F
print("J exponent: %.3f" % growth_exponent(ns, js))
print("F exponent: %.3f" % growth_exponent(ns, fs))
