# The expression language used to write h on the command line.

from univcode.dsl import compile_expr, parse, render
from univcode.errors import DSLSyntaxError, EvaluationError

src = "if n % 3 == 0 then n / 3 else table{1: 5, 2: 7} else 2 * n + 1"
tree = parse(src)
print(tree)
print(render(tree))

h = compile_expr(tree)
print([h(n) for n in range(1, 13)])

# %% errors carry line and column
for bad in ("n +", "if n then 1", "table{1: 2, 1: 3} else n"):
    try:
        parse(bad)
    except DSLSyntaxError as exc:
        print(f"{bad!r}: {exc}")

# %% values must stay in N = {1, 2, ...}
try:
    compile_expr(parse("n - 1"))(1)
except EvaluationError as exc:
    print(exc)
