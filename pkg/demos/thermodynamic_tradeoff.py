"""
Trading covariance for error correction in the thermodynamic code
==================================================================

The modified thermodynamic code interpolates between an exactly
covariant code (q = 0) and one that corrects erasures exactly (q = 1).
Scanning q traces out the trade-off curve between the two errors.
"""

from covqec import erasure_channel, thermodynamic_code
from covqec.bounds import theorem2
from covqec.measures import analyze

n, m = 8, 2

# header for a small table; each row is one value of q
print("%5s %10s %10s %10s %10s" % ("q", "epsilon", "delta_G", "bound", "holds"))

for q in [0.0, 0.25, 0.5, 0.75, 1.0]:
    code, sym = thermodynamic_code(n, m, q)
    noise = erasure_channel(code.physical_shape)
    # a coarse theta grid keeps the scan quick; delta_G is a smooth max
    rep = analyze(code, noise, sym, grid_size=256, gamma_grid=4)
    # theorem2 compares delta_G + epsilon against its metrology lower bound
    chk = theorem2(rep)
    print("%5.2f %10.6f %10.6f %10.6f %10s" % (q, rep.epsilon, rep.delta_group, chk.rhs, chk.satisfied))

# at q = 0 the code is covariant so delta_G vanishes and epsilon carries the cost;
# at q = 1 the roles swap
