# Numbers that are mostly powers of two.
#
# Codes for acyclic components look like 2^(2^k m), so Numeral keeps powers
# symbolic once the exponent reaches THETA.

from univcode.numeral import THETA, Numeral, compare, square

small = Numeral.pow2(10)
print(small, small.normalize(), small.is_symbolic, small.normalize().is_symbolic)

huge = Numeral.pow2(Numeral.pow2(40))
print(huge)                     # printed as nested 2^...
print(square(huge))             # exponent doubles, nothing is materialized
print(compare(huge, 10**100))   # 1

# %% plain and symbolic forms of the same value compare and hash alike
a = Numeral(1 << THETA)
b = Numeral.pow2(THETA)
print(a == b, hash(a) == hash(b), str(a) == str(b))

# %% round trip through text
for text in ("12345", "2^64", "2^2^30"):
    n = Numeral.parse(text)
    print(text, "->", repr(n), "->", n)
