# Embedding a function graph into the graph of e.
#
# For each h the coder builds c with c(h(n)) = e(c(n)), lazily and injectively.

from univcode import sigma
from univcode.coder import Coder
from univcode.graph import FunctionSpec

# %% cycles go onto cycles of the same length
swap = FunctionSpec.from_table({1: 2, 2: 1, 3: 4, 4: 5, 5: 3}, "n")
c = Coder(swap, range(1, 8))
for n in range(1, 8):
    print(n, "->", c.code_of(n), c.coding.pairs[n].provenance)

# %% trees hang below their roots through beta
const = Coder(FunctionSpec.from_expr("1"), range(1, 8))
print([int(const.code_of(n)) for n in range(1, 8)])

# %% a path that never returns climbs the tower 2, 4, 16, 256, ...
succ = Coder(FunctionSpec.from_expr("n + 1"), range(1, 30))
for n in (1, 2, 3, 4, 5, 10, 29):
    print(n, "->", succ.code_of(n))

# %% side branches of a path go into the trees of e below the tower
zigzag = FunctionSpec.from_expr("if n % 2 == 0 then n + 2 else n + 1")
z = Coder(zigzag, range(1, 12))
for n in range(1, 12):
    code = z.code_of(n)
    p = z.coding.pairs[n]
    print(n, "->", code, p.provenance, p.level)
    assert z.code_of(zigzag(n)) == sigma.eval_e(code)

print(z.coding.to_json()[:300])
