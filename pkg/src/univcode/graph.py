"""Functional graphs of user functions h: orbits, components and trees.

Every vertex of G_h has exactly one outgoing edge, so each component either
ends in a single cycle (with trees hanging off it) or is acyclic and built
around an infinite forward path.  Acyclicity cannot be decided in general:
an orbit is called acyclic only when it keeps strictly increasing for at
least half of the evaluation budget, or when the user asserts it.
"""
from __future__ import annotations

import bisect
import json
from collections import deque
from dataclasses import dataclass, field
from typing import Callable

from . import dsl
from .errors import BudgetExceeded, EvaluationError, UnknownOrbitError
from .numeral import as_numeral

__all__ = [
    "FunctionSpec",
    "OrbitReport",
    "HCycle",
    "ComponentDescriptor",
    "Components",
    "TreeSlice",
    "orbit",
    "classify_component",
    "alpha",
    "preimage_rank",
    "common_descendant",
    "enumerate_components",
    "tree_slice",
    "to_dot",
    "components_json",
]

TABLE_DEFAULTS = ("error", "identity", "clamp")


class FunctionSpec:
    """A user function h on the positive integers with evaluation budgets.

    Values are memoized, and the inverse image is indexed incrementally as
    arguments ``1, 2, 3, ...`` are scanned.
    """

    def __init__(self, fn: Callable[[int], int], *, text: str | None = None,
                 eval_budget: int = 10_000, preimage_scan_bound: int = 100_000,
                 acyclicity_hint: bool = False):
        self._fn = fn
        self.text = text
        self.eval_budget = eval_budget
        self.preimage_scan_bound = preimage_scan_bound
        self.acyclicity_hint = acyclicity_hint
        self._memo: dict[int, int] = {}
        self._scanned = 0
        self._pre: dict[int, list[int]] = {}

    @classmethod
    def from_expr(cls, text, **budgets) -> "FunctionSpec":
        expr = dsl.parse(text) if isinstance(text, str) else text
        return cls(dsl.compile_expr(expr), text=dsl.render(expr), **budgets)

    @classmethod
    def from_table(cls, mapping, default="error", **budgets) -> "FunctionSpec":
        """A finite table totalized by ``default``.

        ``default`` is ``"error"``, ``"identity"``, ``"clamp"`` (arguments
        beyond the largest key reuse the value at that key) or DSL text.
        """
        table = {int(k): int(v) for k, v in mapping.items()}
        if any(k < 1 or v < 1 for k, v in table.items()):
            raise EvaluationError("table entries must be positive")
        top = max(table) if table else 0
        if default == "error":
            def other(n):
                raise EvaluationError(f"h({n}) is not in the table")
        elif default == "identity":
            def other(n):
                return n
        elif default == "clamp":
            def other(n):
                if n > top:
                    return table[top]
                raise EvaluationError(f"h({n}) is not in the table")
        else:
            other = dsl.compile_expr(dsl.parse(default))

        def fn(n):
            v = table.get(n)
            return v if v is not None else other(n)

        text = json.dumps({"map": {str(k): v for k, v in sorted(table.items())}, "else": default})
        return cls(fn, text=text, **budgets)

    @classmethod
    def from_json(cls, obj, **budgets) -> "FunctionSpec":
        """``{"map": {"1": 2}, "else": "n"}``; ``else`` defaults to ``"error"``."""
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls.from_table(obj["map"], obj.get("else", "error"), **budgets)

    def __call__(self, n) -> int:
        n = int(as_numeral(n))
        v = self._memo.get(n)
        if v is None:
            v = self._fn(n)
            if not isinstance(v, int) or v < 1:
                raise EvaluationError(f"h({n}) = {v!r} is not a positive integer")
            self._memo[n] = v
        return v

    def scan_to(self, x: int):
        """Index preimages of all arguments up to ``x``."""
        if x > self.preimage_scan_bound:
            raise BudgetExceeded(f"preimage scan to {x} exceeds bound {self.preimage_scan_bound}")
        for y in range(self._scanned + 1, x + 1):
            self._pre.setdefault(self(y), []).append(y)
        self._scanned = max(self._scanned, x)

    def preimages_below(self, u: int, x: int) -> list[int]:
        """Ascending h-preimages of u that are smaller than x."""
        self.scan_to(x - 1)
        lst = self._pre.get(u, [])
        return lst[: bisect.bisect_left(lst, x)]

    def __repr__(self):
        return f"FunctionSpec({self.text!r})"


# ---------------------------------------------------------------------------
# orbits


@dataclass(frozen=True)
class OrbitReport:
    start: int
    verdict: str  # "cyclic" | "acyclic" | "unknown"
    visited_count: int
    tail_length: int | None = None
    cycle_length: int | None = None
    cycle_entry: int | None = None
    witness_from: int | None = None


def orbit(spec: FunctionSpec, n) -> OrbitReport:
    """Classify the orbit n, h(n), h(h(n)), ... with Brent's algorithm."""
    n = int(as_numeral(n))
    if n < 1:
        raise ValueError("orbits start at n >= 1")
    h, budget = spec, spec.eval_budget
    power = lam = 1
    tortoise, prev, hare = n, n, h(n)
    steps = 1
    run_from = 0 if hare > prev else 1
    while tortoise != hare:
        if steps >= budget:
            break
        if power == lam:
            tortoise = hare
            power *= 2
            lam = 0
        prev, hare = hare, h(hare)
        steps += 1
        lam += 1
        if hare <= prev:
            run_from = steps
    else:
        # cycle of length lam; find the tail
        tortoise = hare = n
        for _ in range(lam):
            hare = h(hare)
        mu = 0
        while tortoise != hare:
            tortoise, hare = h(tortoise), h(hare)
            mu += 1
        x = tortoise
        for _ in range(lam):
            x = h(x)
        assert x == tortoise
        return OrbitReport(n, "cyclic", steps, mu, lam, tortoise)
    if spec.acyclicity_hint:
        return OrbitReport(n, "acyclic", steps)
    if steps - run_from >= budget // 2:
        return OrbitReport(n, "acyclic", steps, witness_from=run_from)
    return OrbitReport(n, "unknown", steps)


@dataclass(frozen=True)
class HCycle:
    """A cycle of h listed in h-order starting from its smallest member."""

    members: tuple

    @property
    def length(self):
        return len(self.members)

    @property
    def smallest(self):
        return self.members[0]

    def predecessor(self, u: int) -> int:
        i = self.members.index(u)
        return self.members[i - 1]


def _cycle_from(spec, entry, length) -> HCycle:
    seq = [entry]
    for _ in range(length - 1):
        seq.append(spec(seq[-1]))
    i = seq.index(min(seq))
    return HCycle(tuple(seq[i:] + seq[:i]))


@dataclass
class ComponentDescriptor:
    representative: int
    classification: str  # "cyclic" | "acyclic" | "unknown"
    discovery_index: int
    cycle: HCycle | None = None
    anchor: int | None = None
    members: list = field(default_factory=list)

    def to_dict(self):
        d = {
            "discovery_index": self.discovery_index,
            "representative": self.representative,
            "classification": self.classification,
            "members": self.members,
        }
        if self.cycle is not None:
            d["cycle"] = list(self.cycle.members)
        if self.anchor is not None:
            d["anchor"] = self.anchor
        return d


def classify_component(spec: FunctionSpec, n) -> ComponentDescriptor:
    """Describe the component of n from its orbit (discovery index 1)."""
    n = int(as_numeral(n))
    rep = orbit(spec, n)
    if rep.verdict == "unknown":
        raise UnknownOrbitError(f"orbit of {n} not classified within {spec.eval_budget} steps")
    if rep.verdict == "cyclic":
        cyc = _cycle_from(spec, rep.cycle_entry, rep.cycle_length)
        x, seen = n, [n]
        for _ in range(rep.tail_length):
            x = spec(x)
            seen.append(x)
        return ComponentDescriptor(min(seen + list(cyc.members)), "cyclic", 1, cycle=cyc, members=[n])
    return ComponentDescriptor(n, "acyclic", 1, anchor=n, members=[n])


def alpha(spec: FunctionSpec, u, i: int) -> int:
    """The i-th smallest h-preimage of u, scanning up to preimage_scan_bound."""
    u = int(as_numeral(u))
    if i < 1:
        raise ValueError("enumeration starts at 1")
    found = 0
    for x in range(1, spec.preimage_scan_bound + 1):
        if spec(x) == u:
            found += 1
            if found == i:
                return x
    raise BudgetExceeded(f"fewer than {i} preimages of {u} below {spec.preimage_scan_bound}")


def preimage_rank(spec: FunctionSpec, x: int, exclude: int | None = None) -> int:
    """Position of x among the preimages of h(x), ascending, skipping ``exclude``."""
    below = spec.preimages_below(spec(x), x)
    rank = len(below) + 1
    if exclude is not None and exclude < x and exclude in below:
        rank -= 1
    return rank


def common_descendant(spec: FunctionSpec, m, n):
    """Meeting point of the orbits of m and n.

    Returns ``(k1, k2, w)`` with ``h^k1(m) == h^k2(n) == w`` minimizing
    ``k1 + k2`` (then k1), or None when the orbits never meet.
    """
    m, n = int(as_numeral(m)), int(as_numeral(n))
    reports = [orbit(spec, m), orbit(spec, n)]
    if any(r.verdict == "unknown" for r in reports):
        raise UnknownOrbitError("both orbits must be classified")

    def walk(x, rep):
        steps = {}
        k = 0
        limit = spec.eval_budget
        if rep.verdict == "cyclic":
            limit = rep.tail_length + rep.cycle_length
        while k < limit and x not in steps:
            steps[x] = k
            x = spec(x)
            k += 1
        return steps

    a, b = walk(m, reports[0]), walk(n, reports[1])
    common = [(a[w] + b[w], a[w], b[w], w) for w in a.keys() & b.keys()]
    if not common:
        return None
    _, k1, k2, w = min(common)
    return k1, k2, w


class Components:
    """Result of :func:`enumerate_components`: descriptors plus vertex ownership."""

    def __init__(self):
        self.components: list[ComponentDescriptor] = []
        self.unknown: list[int] = []
        self.owner: dict[int, ComponentDescriptor] = {}

    def __iter__(self):
        return iter(self.components)

    def __len__(self):
        return len(self.components)

    def __getitem__(self, i):
        return self.components[i]

    def of(self, x: int) -> ComponentDescriptor | None:
        return self.owner.get(x)


def enumerate_components(spec: FunctionSpec, window) -> Components:
    """Partition the window into components, numbered by first appearance.

    Each new orbit is walked until it hits a vertex of an already known
    component (then it joins it) or closes a cycle or runs out of budget
    (then it starts a new component classified by :func:`orbit`).
    """
    out = Components()
    for n in window:
        comp = out.owner.get(n)
        if comp is None:
            path, seen = [], set()
            x = n
            while x not in out.owner and x not in seen and len(path) < spec.eval_budget:
                path.append(x)
                seen.add(x)
                x = spec(x)
            comp = out.owner.get(x)
            if comp is None:
                rep = orbit(spec, n)
                if rep.verdict == "unknown":
                    out.unknown.append(n)
                    continue
                comp = ComponentDescriptor(n, rep.verdict, len(out.components) + 1)
                if rep.verdict == "cyclic":
                    comp.cycle = _cycle_from(spec, rep.cycle_entry, rep.cycle_length)
                    comp.representative = min(n, comp.cycle.smallest)
                else:
                    comp.anchor = n
                out.components.append(comp)
            for y in path:
                out.owner[y] = comp
            if comp.cycle is not None:
                for y in comp.cycle.members:
                    out.owner[y] = comp
        comp.members.append(n)
        comp.representative = min(comp.representative, n)
    return out


# ---------------------------------------------------------------------------
# trees


@dataclass(frozen=True)
class TreeSlice:
    root: int
    members: tuple
    edges: tuple  # (child, parent) pairs

    def children(self, v: int) -> list[int]:
        return sorted(c for c, p in self.edges if p == v)


def tree_slice(spec: FunctionSpec, root, size_bound: int, exclude: int | None = None) -> TreeSlice:
    """Breadth-first predecessor closure of root, truncated at size_bound members.

    When root lies on a cycle its in-cycle predecessor is left out;
    ``exclude`` removes another immediate predecessor (a spine vertex).
    """
    root = int(as_numeral(root))
    rep = orbit(spec, root)
    if rep.verdict == "unknown":
        raise UnknownOrbitError(f"cannot certify the tree of {root}")
    banned = set()
    if rep.verdict == "cyclic" and rep.tail_length == 0:
        banned.add(_cycle_from(spec, rep.cycle_entry, rep.cycle_length).predecessor(root))
    if exclude is not None:
        banned.add(exclude)
    spec.scan_to(spec.preimage_scan_bound)
    members, edges = [], []
    queue = deque([root])
    while queue and len(members) < size_bound:
        v = queue.popleft()
        for c in spec._pre.get(v, []):
            if v == root and c in banned:
                continue
            members.append(c)
            edges.append((c, v))
            queue.append(c)
            if len(members) >= size_bound:
                break
    return TreeSlice(root, tuple(members), tuple(edges))


# ---------------------------------------------------------------------------
# export


def to_dot(spec: FunctionSpec, vertices, name: str = "G_h") -> str:
    """DOT drawing of the edges n -> h(n) for the given vertices; cycle vertices are filled."""
    vertices = sorted(set(int(v) for v in vertices))
    on_cycle = set()
    for v in vertices:
        rep = orbit(spec, v)
        if rep.verdict == "cyclic" and rep.tail_length == 0:
            on_cycle.add(v)
    lines = [f"digraph {name} {{"]
    for v in vertices:
        style = ' [style=filled, fillcolor="lightcoral"]' if v in on_cycle else ""
        lines.append(f"  {v}{style};")
    for v in vertices:
        lines.append(f"  {v} -> {spec(v)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def components_json(comps: Components) -> str:
    return json.dumps(
        {"components": [c.to_dict() for c in comps], "unknown": comps.unknown}, indent=2
    )
