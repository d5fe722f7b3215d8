"""The universal function e and its image sequence sigma = e(1), e(2), ...

Construction (all positions are 1-based, powers of two 2, 4, 8, ... are never
used as positions by rounds):

* ``e(2**k) = 2**(2k)`` for every ``k >= 1``.
* Round ``k = 1, 2, ...`` first lays down one cycle of each length ``1..k`` at
  consecutive non-power positions, then lets ``n`` be the last position used
  and assigns the values ``1..n`` to the next ``n`` non-power positions.
* A cycle occupying positions ``p0 < p1 < ... < p_{k-1}`` is wired as
  ``e(p0) = p_{k-1}`` and ``e(p_j) = p_{j-1}``.

Two independent routes compute e.  :class:`SigmaTable` runs the round
procedure literally with its counters and stores the prefix in a numpy array.
:class:`PhaseModel` counts non-power positions ("ordinals") and locates the
round of an arbitrary index arithmetically, so e can be evaluated at indices
far beyond any materialized prefix.
"""
from __future__ import annotations

import bisect
import csv
import io
import json
import struct
from dataclasses import asdict, dataclass
from typing import Iterator

import numpy as np

from .errors import BudgetExceeded, CacheError
from .numeral import Numeral, as_numeral, as_pow2_exponent, is_power_of_two

__all__ = [
    "PhaseRecord",
    "CycleDescriptor",
    "PartitionTag",
    "SigmaTable",
    "PhaseModel",
    "nonpower_ordinal",
    "nonpower_position",
    "assign_cycle",
    "extend_to",
    "eval_e",
    "eval_e_analytic",
    "partition_tag",
    "kth_cycle",
    "beta",
    "beta_scan",
    "image_occurrences",
    "cycle_census",
    "cache_save",
    "cache_load",
    "DEFAULT_MAX_ROUNDS",
    "default_model",
    "default_table",
]

DEFAULT_MAX_ROUNDS = 10**6


def nonpower_ordinal(x: int) -> int:
    """Number of non-power positions in ``1..x`` (x itself a non-power)."""
    return x - (x.bit_length() - 1)


def nonpower_position(j: int) -> int:
    """The j-th non-power position: 1, 3, 5, 6, 7, 9, ..."""
    if j < 1:
        raise ValueError("ordinals start at 1")
    x = j
    while True:
        nxt = j + x.bit_length() - 1
        if nxt == x:
            break
        x = nxt
    assert not is_power_of_two(x)
    return x


def _cycle_offset(q: int) -> tuple[int, int]:
    """Split a 1-based offset inside a cycle block into (length, index in cycle)."""
    k = int(((8 * q + 1) ** 0.5 - 1) / 2)
    while k * (k + 1) // 2 < q:
        k += 1
    while (k - 1) * k // 2 >= q:
        k -= 1
    return k, q - (k - 1) * k // 2 - 1


# ---------------------------------------------------------------------------
# records


@dataclass(frozen=True)
class PhaseRecord:
    kind: str  # "cycle-block" | "fill-block" | "power-skip"
    round: int
    start_index: int
    end_index: int
    fill_max: int | None = None
    skipped_powers: int = 0


@dataclass(frozen=True)
class CycleDescriptor:
    length: int
    members: tuple  # in e-order starting from the smallest member

    @property
    def smallest(self):
        return min(self.members)


@dataclass(frozen=True)
class PartitionTag:
    tag: str  # "P" | "C" | "T"
    anchor: Numeral | None = None
    depth: int | None = None


# ---------------------------------------------------------------------------
# literal generator


def assign_cycle(i: int, k: int) -> tuple[dict[int, int], int]:
    """Wire one cycle of length ``k`` starting at non-power position ``i``.

    Powers of two inside the block are skipped both as positions and as
    images.  Returns the edges and the first non-power position after the
    block.

    >>> assign_cycle(20, 3)
    ({20: 22, 21: 20, 22: 21}, 23)
    """
    if i < 1 or k < 1 or is_power_of_two(i):
        raise ValueError(f"bad cycle start ({i}, {k})")
    members = []
    j = i
    while len(members) < k:
        if not is_power_of_two(j):
            members.append(j)
        j += 1
    edges = {members[0]: members[-1]}
    for a in range(1, k):
        edges[members[a]] = members[a - 1]
    while is_power_of_two(j):
        j += 1
    return edges, j


class SigmaTable:
    """Append-only materialized prefix of sigma.

    ``values[i]`` holds e(i) for non-power ``i``; power positions hold 0 and
    are answered by the power rule.
    """

    def __init__(self):
        self.length = 0
        self.phase_log: list[PhaseRecord] = []
        self.cycles: list[CycleDescriptor] = []
        self.cycle_skips: list[int] = []
        self._buf = np.zeros(1024, dtype=np.int64)
        self._frontier = 0
        self._steps = self._generate()
        self._replay_limit = 0

    # -- generation -----------------------------------------------------

    def _ensure_capacity(self, n: int):
        if n >= len(self._buf):
            size = len(self._buf)
            while size <= n:
                size *= 2
            buf = np.zeros(size, dtype=np.int64)
            buf[: len(self._buf)] = self._buf
            self._buf = buf

    def _put(self, i: int, v: int):
        if i <= self._replay_limit:
            if self._buf[i] != v:
                raise CacheError(f"cached value at {i} disagrees with the generator")
        else:
            self._ensure_capacity(i)
            self._buf[i] = v
        if i > self._frontier:
            self._frontier = i

    def _generate(self) -> Iterator[None]:
        k = 1
        i = 1
        while True:
            # (a) one cycle of each length 1..k
            block_start = None
            skipped = 0
            for length in range(1, k + 1):
                while is_power_of_two(i):
                    self.phase_log.append(PhaseRecord("power-skip", k, i, i))
                    self._put(i, 0)
                    if block_start is not None:
                        skipped += 1
                    i += 1
                if block_start is None:
                    block_start = i
                edges, _ = assign_cycle(i, length)
                members = sorted(edges)
                t = members[-1] - members[0] + 1 - length
                skipped += t
                for p in range(members[0], members[-1] + 1):
                    if is_power_of_two(p):
                        self.phase_log.append(PhaseRecord("power-skip", k, p, p))
                        self._put(p, 0)
                for p, v in edges.items():
                    self._put(p, v)
                self.cycles.append(_descriptor(edges))
                self.cycle_skips.append(t)
                last = members[-1]
                i = last + 1
                yield
            n = last
            self.phase_log.append(
                PhaseRecord("cycle-block", k, block_start, last, None, skipped)
            )
            k += 1
            # (b) the values 1..n at the next n non-power positions
            fill_start = None
            for v in range(1, n + 1):
                while is_power_of_two(i):
                    self.phase_log.append(PhaseRecord("power-skip", k - 1, i, i))
                    self._put(i, 0)
                    i += 1
                if fill_start is None:
                    fill_start = i
                self._put(i, v)
                i += 1
                yield
            self.phase_log.append(PhaseRecord("fill-block", k - 1, fill_start, i - 1, n))

    def extend_to(self, L: int) -> "SigmaTable":
        if L < 1:
            raise ValueError("L must be at least 1")
        if L > 1 << 40:
            raise BudgetExceeded(f"prefix length {L} exceeds the memory budget")
        while self._frontier < L:
            next(self._steps)
        self.length = max(self.length, L)
        return self

    # -- access ---------------------------------------------------------

    @property
    def values(self) -> np.ndarray:
        """Raw slots 0..length (slot 0 and power positions hold 0)."""
        return self._buf[: self.length + 1]

    @property
    def materialized(self) -> np.ndarray:
        """Every slot written so far, which may run past ``length`` to finish a cycle."""
        return self._buf[: self._frontier + 1]

    def __len__(self):
        return self.length

    def __getitem__(self, i: int) -> Numeral:
        i = int(i)
        if not 1 <= i <= self.length:
            raise IndexError(i)
        if is_power_of_two(i):
            return Numeral(i).square()
        return Numeral(int(self._buf[i]))

    def __eq__(self, other):
        if not isinstance(other, SigmaTable):
            return NotImplemented
        return self.length == other.length and np.array_equal(self.values, other.values)

    def cycles_through(self, L: int | None = None) -> list[CycleDescriptor]:
        """Cycles lying entirely in positions ``1..L``, in discovery order."""
        L = self.length if L is None else L
        return [c for c in self.cycles if max(c.members) <= L]

    # -- export ---------------------------------------------------------

    def to_csv(self, L: int | None = None) -> str:
        L = self.length if L is None else L
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["i", "e_of_i"])
        for i in range(1, L + 1):
            w.writerow([i, str(self[i])])
        return out.getvalue()

    def phase_json(self) -> str:
        return json.dumps([asdict(r) for r in self.phase_log], indent=2)


def _descriptor(edges: dict[int, int]) -> CycleDescriptor:
    start = min(edges)
    members = [start]
    x = edges[start]
    while x != start:
        members.append(x)
        x = edges[x]
    return CycleDescriptor(len(members), tuple(members))


_TABLE = SigmaTable()


def default_table() -> SigmaTable:
    return _TABLE


def extend_to(L: int, table: SigmaTable | None = None) -> SigmaTable:
    return (table or _TABLE).extend_to(L)


# ---------------------------------------------------------------------------
# analytic route


class PhaseModel:
    """Round boundaries of sigma computed arithmetically over ordinals.

    Round ``r`` starts after ordinal ``start[r]``; its cycle block spans
    ``r(r+1)/2`` ordinals ending at ``cycle_end[r]`` (position ``n[r]``) and
    its fill block spans the next ``n[r]`` ordinals.  Rounds are computed
    once and cached; ``max_rounds`` caps the recurrence.
    """

    def __init__(self, max_rounds: int = DEFAULT_MAX_ROUNDS):
        self.max_rounds = max_rounds
        self.start = [0]
        self.cycle_end = []
        self.fill_max = []
        self.end = []

    @property
    def rounds(self) -> int:
        return len(self.end)

    def _extend(self):
        r = len(self.end) + 1
        if r > self.max_rounds:
            raise BudgetExceeded(f"phase recurrence exceeded {self.max_rounds} rounds")
        s = self.start[-1]
        o = s + r * (r + 1) // 2
        n = nonpower_position(o)
        self.cycle_end.append(o)
        self.fill_max.append(n)
        self.end.append(o + n)
        self.start.append(o + n)

    def _guard_bits(self, bits: int):
        # fill maxima at least double per round, so round r has n >= 2**(r-1)
        if bits - 1 > self.max_rounds:
            raise BudgetExceeded(f"a {bits}-bit index needs more than {self.max_rounds} rounds")

    def round_of_ordinal(self, o: int) -> int:
        """1-based round whose ordinal range contains ``o``."""
        self._guard_bits(o.bit_length())
        while not self.end or self.end[-1] < o:
            self._extend()
        return bisect.bisect_left(self.end, o) + 1

    def first_round_filling(self, v: int) -> int:
        """Smallest round whose fill block contains the value ``v``."""
        self._guard_bits(v.bit_length())
        while not self.fill_max or self.fill_max[-1] < v:
            self._extend()
        return bisect.bisect_left(self.fill_max, v) + 1

    def ensure_round(self, r: int):
        while len(self.end) < r:
            self._extend()

    def locate(self, x: int) -> tuple:
        """Classify non-power position ``x``.

        Returns ``("cycle", r, length, j, first_ordinal)`` or
        ``("fill", r, value)``.
        """
        o = nonpower_ordinal(x)
        r = self.round_of_ordinal(o)
        s = self.start[r - 1]
        if o <= self.cycle_end[r - 1]:
            length, j = _cycle_offset(o - s)
            return ("cycle", r, length, j, o - j)
        return ("fill", r, o - self.cycle_end[r - 1])

    def e(self, x: int) -> int:
        loc = self.locate(x)
        if loc[0] == "fill":
            return loc[2]
        _, _, length, j, first = loc
        if j == 0:
            return nonpower_position(first + length - 1)
        return nonpower_position(first + j - 1)

    def cycle(self, length: int, i: int) -> CycleDescriptor:
        r = length + i - 1
        self.ensure_round(r)
        first = self.start[r - 1] + (length - 1) * length // 2 + 1
        pos = [nonpower_position(first + a) for a in range(length)]
        members = [pos[0]] + [pos[a] for a in range(length - 1, 0, -1)]
        return CycleDescriptor(length, tuple(Numeral(p) for p in members))

    def fill_position(self, v: int, i: int) -> int:
        r = self.first_round_filling(v) + i - 1
        self.ensure_round(r)
        return nonpower_position(self.cycle_end[r - 1] + v)


_MODEL = PhaseModel()


def default_model() -> PhaseModel:
    return _MODEL


def eval_e_analytic(n, model: PhaseModel | None = None) -> Numeral:
    """e(n) for a non-power n without materializing sigma."""
    n = as_numeral(n)
    if n < 1 or as_pow2_exponent(n) is not None:
        raise ValueError(f"analytic evaluation needs a non-power index, got {n}")
    return Numeral((model or _MODEL).e(int(n)))


def eval_e(n, table: SigmaTable | None = None, model: PhaseModel | None = None) -> Numeral:
    """The universal function at any index, symbolic for powers of two."""
    n = as_numeral(n)
    if n < 1:
        raise ValueError("e is defined on n >= 1")
    k = as_pow2_exponent(n)
    if k is not None:
        return n.square()
    table = table or _TABLE
    if n <= table.length:
        return Numeral(int(table.values[int(n)]))
    return eval_e_analytic(n, model)


def partition_tag(n, table: SigmaTable | None = None, model: PhaseModel | None = None) -> PartitionTag:
    n = as_numeral(n)
    model = model or _MODEL
    if as_pow2_exponent(n) is not None:
        return PartitionTag("P")
    if model.locate(int(n))[0] == "cycle":
        return PartitionTag("C")
    x, depth = n, 0
    while True:
        x = eval_e(x, table, model)
        depth += 1
        if as_pow2_exponent(x) is not None or model.locate(int(x))[0] == "cycle":
            return PartitionTag("T", x, depth)


def kth_cycle(k: int, i: int, model: PhaseModel | None = None) -> CycleDescriptor:
    """The i-th cycle of length k, by ascending smallest member."""
    if k < 1 or i < 1:
        raise ValueError("cycle length and ordinal start at 1")
    return (model or _MODEL).cycle(k, i)


def beta(v, i: int, model: PhaseModel | None = None) -> Numeral:
    """The i-th tree predecessor of v: ascending x > v+1 with e(x) = v, x off every cycle.

    Only fill positions qualify, so the answer is the position of value v
    in the i-th fill block that reaches v.
    """
    if i < 1:
        raise ValueError("enumeration starts at 1")
    v = as_numeral(v)
    if v < 1:
        raise ValueError("v must be at least 1")
    if v.is_symbolic:
        bits = v.bit_length()
        raise BudgetExceeded(f"beta on a value of {bits} bits exceeds the round budget")
    return Numeral((model or _MODEL).fill_position(int(v), i))


def beta_scan(v: int, i: int, table: SigmaTable | None = None) -> int:
    """Same as :func:`beta`, by scanning the materialized prefix."""
    table = table or _TABLE
    vals = table.values
    on_cycle = set()
    for c in table.cycles_through():
        on_cycle.update(int(m) for m in c.members)
    hits = np.flatnonzero(vals == v)
    count = 0
    for x in hits:
        x = int(x)
        if x > v + 1 and x not in on_cycle:
            count += 1
            if count == i:
                return x
    raise BudgetExceeded(f"fewer than {i} predecessors of {v} within {table.length}")


def image_occurrences(v, L: int, table: SigmaTable | None = None) -> int:
    """Number of i <= L with e(i) = v."""
    table = table or _TABLE
    table.extend_to(L)
    v = as_numeral(v)
    count = 0
    if not v.is_symbolic:
        count += int(np.count_nonzero(table.values[1 : L + 1] == int(v)))
    k = as_pow2_exponent(v)
    if k is not None and int(k) % 2 == 0 and (1 << (int(k) // 2)) <= L:
        count += 1
    return count


def cycle_census(table: SigmaTable | None = None, max_length: int | None = None) -> dict:
    """Cycles in the materialized prefix grouped by length (smallest members)."""
    table = table or _TABLE
    census: dict[int, list[int]] = {}
    for c in table.cycles_through():
        if max_length is None or c.length <= max_length:
            census.setdefault(c.length, []).append(int(c.smallest))
    return census


# ---------------------------------------------------------------------------
# cache

_MAGIC = b"SIG1"
_VERSION = 1
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK = (1 << 64) - 1


def _fnv1a(data: bytes, h: int = _FNV_OFFSET) -> int:
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & _MASK
    return h


def cache_save(table: SigmaTable, path) -> None:
    header = _MAGIC + bytes([_VERSION]) + struct.pack("<Q", table.length)
    payload = table.values[1:].astype("<u8").tobytes()
    checksum = _fnv1a(payload, _fnv1a(header))
    with open(path, "wb") as f:
        f.write(header)
        f.write(payload)
        f.write(struct.pack("<Q", checksum))


def cache_load(path) -> SigmaTable:
    with open(path, "rb") as f:
        data = f.read()
    if len(data) < 13 + 8 or data[:4] != _MAGIC:
        raise CacheError("bad magic or truncated header")
    if data[4] != _VERSION:
        raise CacheError(f"unsupported cache version {data[4]}")
    (L,) = struct.unpack("<Q", data[5:13])
    if len(data) != 13 + 8 * L + 8:
        raise CacheError(f"length mismatch: header says {L} slots")
    body = data[: 13 + 8 * L]
    (checksum,) = struct.unpack("<Q", data[13 + 8 * L :])
    if _fnv1a(body) != checksum:
        raise CacheError("checksum mismatch")
    table = SigmaTable()
    slots = np.frombuffer(data, dtype="<u8", count=L, offset=13).astype(np.int64)
    table._ensure_capacity(L)
    table._buf[1 : L + 1] = slots
    table._replay_limit = L
    # regenerate bookkeeping; every replayed value is checked against the file
    table.extend_to(L)
    return table
