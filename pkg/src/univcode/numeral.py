"""Natural numbers with a symbolic fast path for powers of two.

Values such as ``2**(2**40 * 3)`` show up as targets of the acyclic
embedding.  They cannot be materialized, but they are all powers of two, so a
:class:`Numeral` stores them as ``Pow2(exponent)`` where the exponent is
itself a :class:`Numeral`.

Canonical form: a power of two ``2**k`` is kept symbolic iff ``k >= THETA``;
everything else is a plain Python ``int``.  Equality, ordering and hashing are
by value, so the two representations are interchangeable.
"""
from __future__ import annotations

import functools
import re

from .errors import NumeralBudgetError

__all__ = [
    "THETA",
    "MAX_PLAIN_BITS",
    "Numeral",
    "as_numeral",
    "compare",
    "normalize",
    "square",
    "as_pow2_exponent",
    "is_power_of_two",
    "int_to_decimal",
    "decimal_to_int",
]

#: Exponents at or above this are stored symbolically (a 1 Mbit number).
THETA = 1 << 20

#: Largest bit length we are willing to materialize on request.
MAX_PLAIN_BITS = 1 << 26


def is_power_of_two(x: int) -> bool:
    """True for 2, 4, 8, ... (1 = 2**0 is deliberately excluded)."""
    return x >= 2 and x & (x - 1) == 0


# CPython refuses str(int) beyond a few thousand digits; split recursively.
_CHUNK = 1000


def int_to_decimal(x: int) -> str:
    if x < 0:
        return "-" + int_to_decimal(-x)
    if x.bit_length() <= 3 * _CHUNK:
        return str(x)
    digits = int(x.bit_length() * 0.30103) // 2 + 1
    hi, lo = divmod(x, 10**digits)
    return int_to_decimal(hi) + int_to_decimal(lo).rjust(digits, "0")


def decimal_to_int(s: str) -> int:
    if len(s) <= _CHUNK:
        return int(s)
    half = len(s) // 2
    return decimal_to_int(s[:half]) * 10 ** (len(s) - half) + decimal_to_int(s[half:])


@functools.total_ordering
class Numeral:
    """An immutable natural number, either plain or ``2**exponent``.

    >>> Numeral(7) < Numeral.pow2(3)
    True
    >>> Numeral.pow2(3).normalize()
    Numeral(8)
    >>> str(Numeral.pow2(THETA))
    '2^1048576'
    """

    __slots__ = ("_plain", "_exp")

    def __init__(self, value: int):
        if isinstance(value, Numeral):
            self._plain, self._exp = value._plain, value._exp
            return
        value = int(value)
        if value < 0:
            raise ValueError(f"natural numbers only, got {value}")
        self._plain = value
        self._exp = None

    @classmethod
    def pow2(cls, exponent) -> Numeral:
        """Build ``2**exponent`` in symbolic form (not normalized)."""
        self = cls.__new__(cls)
        self._plain = None
        self._exp = as_numeral(exponent)
        return self

    # -- representation -------------------------------------------------

    @property
    def is_symbolic(self) -> bool:
        return self._exp is not None

    @property
    def exponent(self) -> Numeral | None:
        """Stored exponent for symbolic values, else None."""
        return self._exp

    def normalize(self) -> Numeral:
        if self._exp is None:
            v = self._plain
            if is_power_of_two(v) and v.bit_length() - 1 >= THETA:
                return Numeral.pow2(Numeral(v.bit_length() - 1))
            return self
        exp = self._exp.normalize()
        if exp < THETA:
            return Numeral(1 << int(exp))
        if exp is self._exp:
            return self
        return Numeral.pow2(exp)

    def bit_length(self) -> Numeral:
        if self._exp is None:
            return Numeral(self._plain.bit_length())
        return self._exp + 1

    def __int__(self) -> int:
        if self._exp is None:
            return self._plain
        if self._exp > MAX_PLAIN_BITS:
            raise NumeralBudgetError(f"refusing to materialize {self}")
        return 1 << int(self._exp)

    # -- arithmetic -----------------------------------------------------

    def __add__(self, other):
        other = as_numeral(other)
        return Numeral(int(self) + int(other)).normalize()

    __radd__ = __add__

    def __sub__(self, other):
        other = as_numeral(other)
        d = int(self) - int(other)
        if d < 0:
            raise ValueError("subtraction below zero")
        return Numeral(d).normalize()

    def square(self) -> Numeral:
        if self._exp is not None:
            return Numeral.pow2(self._exp + self._exp).normalize()
        k = as_pow2_exponent(self)
        if k is not None:
            return Numeral.pow2(k + k).normalize()
        return Numeral(self._plain * self._plain)

    # -- comparison -----------------------------------------------------

    def _cmp(self, other: Numeral) -> int:
        a, b = self, other
        if a._exp is None and b._exp is None:
            return (a._plain > b._plain) - (a._plain < b._plain)
        if a._exp is not None and b._exp is not None:
            return a._exp._cmp(b._exp)
        if a._exp is None:
            return -b._cmp(a)
        # a = 2**ea symbolic, b plain
        if b._plain == 0:
            return 1
        eb = b._plain.bit_length() - 1
        c = a._exp._cmp(Numeral(eb))
        if c != 0:
            return c
        return 0 if b._plain == 1 << eb else -1

    def __eq__(self, other):
        if isinstance(other, int):
            other = Numeral(other) if other >= 0 else None
        if not isinstance(other, Numeral):
            return NotImplemented
        return self._cmp(other) == 0

    def __lt__(self, other):
        if isinstance(other, int):
            if other < 0:
                return False
            other = Numeral(other)
        if not isinstance(other, Numeral):
            return NotImplemented
        return self._cmp(other) < 0

    def __hash__(self):
        n = self.normalize()
        if n._exp is None:
            return hash(n._plain)
        return hash(("2^", n._exp))

    # -- rendering ------------------------------------------------------

    def __str__(self):
        n = self.normalize()
        if n._exp is None:
            return int_to_decimal(n._plain)
        return "2^" + str(n._exp)

    def __repr__(self):
        if self._exp is None:
            if self._plain.bit_length() > 256:
                return f"Numeral(<{self._plain.bit_length()} bits>)"
            return f"Numeral({self._plain})"
        return f"Numeral.pow2({self._exp!r})"

    @classmethod
    def parse(cls, text: str) -> Numeral:
        """Inverse of ``str``: decimal digits or ``2^<numeral>``, nestable."""
        text = text.strip()
        if text.startswith("2^"):
            return cls.pow2(cls.parse(text[2:])).normalize()
        if not re.fullmatch(r"[0-9]+", text):
            raise ValueError(f"not a numeral: {text[:40]!r}")
        return cls(decimal_to_int(text)).normalize()


def as_numeral(x) -> Numeral:
    return x if isinstance(x, Numeral) else Numeral(x)


def normalize(a) -> Numeral:
    return as_numeral(a).normalize()


def compare(a, b) -> int:
    """-1, 0 or 1 by natural-number order."""
    return as_numeral(a)._cmp(as_numeral(b))


def square(a) -> Numeral:
    return as_numeral(a).square()


def as_pow2_exponent(a) -> Numeral | None:
    """Return k if ``a == 2**k`` with ``k >= 1``, else None."""
    a = as_numeral(a)
    if a.is_symbolic:
        return a.exponent.normalize() if a.exponent >= 1 else None
    v = int(a)
    if is_power_of_two(v):
        return Numeral(v.bit_length() - 1)
    return None
