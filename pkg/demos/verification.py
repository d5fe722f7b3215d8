# Checking the conjugacy over a window, with an independent oracle and a
# deliberately broken map.

import time

import numpy as np

from univcode.coder import (
    Coder, all_functions, brute_force_oracle, oracle_prefix, random_table, verify_conjugacy,
)
from univcode.graph import FunctionSpec

battery = {
    "identity": ("n", 500),
    "successor": ("n + 1", 20),
    "constant": ("1", 500),
    "halving": ("max(1, n / 2)", 500),
    "collatz": ("if n % 2 == 0 then n / 2 else 3 * n + 1", 500),
}
for name, (text, hi) in battery.items():
    t0 = time.perf_counter()
    rep = verify_conjugacy(FunctionSpec.from_expr(text), range(1, hi + 1))
    print(f"{name:10s} {rep.summary()}  ({time.perf_counter() - t0:.2f}s)")

# %% the oracle rebuilds the coding from scratch on a plain sigma prefix
prefix = oracle_prefix()
fs = list(all_functions(3))
print(sum(brute_force_oracle(f, prefix=prefix).agrees for f in fs), "of", len(fs))
rng = np.random.default_rng(2024)
print(sum(brute_force_oracle(random_table(10, rng), prefix=prefix).agrees for _ in range(100)),
      "of 100 random tables")

# %% negative control: nudge one code and the check notices
h = FunctionSpec.from_expr("n + 1")
c = Coder(h, range(1, 8))
c.code_window()
rep = verify_conjugacy(h, range(1, 8), coder=c, coding=c.coding.perturbed(5))
print(rep.summary())
