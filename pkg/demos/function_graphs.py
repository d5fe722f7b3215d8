# Components of a function graph: cycles, trees, and paths that never return.

from univcode.graph import (
    FunctionSpec, alpha, common_descendant, enumerate_components, orbit, to_dot, tree_slice,
)

collatz = FunctionSpec.from_expr("if n % 2 == 0 then n / 2 else 3 * n + 1")
print(orbit(collatz, 27))

# %% a function with several kinds of components
h = FunctionSpec.from_table({1: 2, 2: 1, 3: 3, 4: 3, 5: 6}, "n + 3")
comps = enumerate_components(h, range(1, 12))
for c in comps:
    print(c.discovery_index, c.classification, c.cycle, c.anchor, c.members)

# %% where do two orbits meet?
half = FunctionSpec.from_expr("max(1, n / 2)")
print(common_descendant(half, 12, 13), common_descendant(half, 40, 3))

# %% predecessors and trees
print([alpha(half, 3, i) for i in (1, 2)])
print(tree_slice(half, 2, 10).members)

# %% a drawing; pipe through `dot -Tsvg` to view
print(to_dot(h, range(1, 12)))
