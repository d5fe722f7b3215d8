# The universal function e, one round at a time.
#
# Run: python3 demos/sigma_prefix.py

import numpy as np

from univcode import sigma
from univcode.numeral import Numeral

# %% the first 56 values
table = sigma.SigmaTable().extend_to(56)
for i in range(1, 57):
    print(f"({i}) {table[i]}", end="   " if i % 8 else "\n")

# %% how the prefix was laid down
# each round r writes one cycle of every length 1..r, then the values 1..n
# where n is the last cycle position; powers of two are only skipped as positions
for rec in table.phase_log[:8]:
    print(rec)

# %% cycles by length
for k in range(1, 5):
    print(k, [sigma.kth_cycle(k, i).members for i in range(1, 4)])

# %% powers of two are handled symbolically, at any size
print(sigma.eval_e(8), sigma.eval_e(Numeral.pow2(10**9)))

# %% far beyond any table, the phase arithmetic still answers
for x in (10**6 + 1, 10**12 + 3, 10**40 + 7):
    print(x, "->", sigma.eval_e_analytic(x))

# %% numpy view of a longer prefix: how often each small value is hit
big = sigma.default_table().extend_to(10**6)
vals = big.values[1:]
counts = np.bincount(vals[vals < 60], minlength=60)
print("hits for v=1..10:", counts[1:11].tolist())

# %% tree predecessors: beta(v, i) is the i-th position off every cycle with e(x) = v
print([sigma.beta(1, i) for i in range(1, 7)])
print(sigma.partition_tag(43))
