"""Injective codings c_h with c_h(h(n)) = e(c_h(n)).

Each component of G_h receives its own region of G_e:

* the i-th component whose cycle has length k is laid on the i-th k-cycle of
  e, aligning smallest members and then following the edges;
* the i-th acyclic component takes the odd exponent ``m = 2i - 1``; its
  anchor's forward path ``u_k = h^k(anchor)`` goes to ``2**(2**k * m)``;
* every remaining vertex x hangs in a tree below some cycle or spine vertex
  and is coded from its parent: if x is the j-th tree child of h(x) then
  ``c(x) = beta(c(h(x)), j)``.

Codes are computed lazily along the forward path of the requested vertex and
memoized in a :class:`CodingMap`, which refuses to remap a source or reuse a
target.
"""
from __future__ import annotations

import copy
import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from . import sigma
from .errors import (
    BudgetExceeded,
    ClassificationError,
    InjectivityError,
    UnivCodeError,
    UnknownOrbitError,
)
from .graph import (
    ComponentDescriptor,
    Components,
    FunctionSpec,
    TreeSlice,
    enumerate_components,
    preimage_rank,
)
from .numeral import Numeral, as_numeral, as_pow2_exponent

__all__ = [
    "TREE",
    "CYCLE",
    "SPINE",
    "RESIDUAL",
    "Pair",
    "CodingMap",
    "SpineDecomposition",
    "Coder",
    "VerificationReport",
    "allocate_target",
    "embed_tree",
    "verify_conjugacy",
    "brute_force_oracle",
    "OracleReport",
    "OraclePrefix",
    "oracle_prefix",
    "DEFAULT_SPINE_BOUND",
    "all_functions",
    "random_table",
    "spine_target",
]

TREE = "tree-delta"
CYCLE = "cycle-I"
SPINE = "spine-I0"
RESIDUAL = "residual-Ik"

DEFAULT_SPINE_BOUND = 64


@dataclass(frozen=True)
class Pair:
    source: int
    target: Numeral
    provenance: str
    level: int | None = None  # spine index k for spine and residual pairs
    component: int | None = None


class CodingMap:
    """A finite partial injective map, insert-only."""

    def __init__(self):
        self.pairs: dict[int, Pair] = {}
        self._by_target: dict[Numeral, int] = {}

    def add(self, source: int, target, provenance: str, level=None, component=None) -> Pair:
        target = as_numeral(target).normalize()
        old = self.pairs.get(source)
        if old is not None:
            if old.target != target:
                raise ClassificationError(
                    f"{source} already coded as {old.target}, refusing {target}"
                )
            return old
        other = self._by_target.get(target)
        if other is not None:
            raise InjectivityError(f"{target} already used by {other}, refusing {source}")
        pair = Pair(source, target, provenance, level, component)
        self.pairs[source] = pair
        self._by_target[target] = source
        return pair

    def __contains__(self, source):
        return source in self.pairs

    def __getitem__(self, source) -> Numeral:
        return self.pairs[source].target

    def get(self, source, default=None):
        p = self.pairs.get(source)
        return default if p is None else p.target

    def __len__(self):
        return len(self.pairs)

    def is_injective(self) -> bool:
        return len({p.target for p in self.pairs.values()}) == len(self.pairs)

    def perturbed(self, source: int, delta: int = 1) -> "CodingMap":
        """A copy with the target of ``source`` shifted by ``delta``; a negative control."""
        bad = copy.copy(self)
        bad.pairs = dict(self.pairs)
        old = bad.pairs[source]
        new = old.target + delta
        bad.pairs[source] = Pair(source, new, old.provenance, old.level, old.component)
        bad._by_target = {p.target: s for s, p in bad.pairs.items()}
        return bad

    def to_json(self) -> str:
        rows = []
        for s in sorted(self.pairs):
            p = self.pairs[s]
            row = {"source": s, "target": str(p.target), "provenance": p.provenance}
            if p.level is not None:
                row["level"] = p.level
            if p.component is not None:
                row["component"] = p.component
            rows.append(row)
        return json.dumps({"pairs": rows}, indent=2)


@dataclass
class SpineDecomposition:
    """Forward path of an acyclic component's anchor with residual trees."""

    anchor: int
    spine: list
    residuals: dict = field(default_factory=dict)  # k -> list of Y members

    def index(self, u: int):
        try:
            return self.spine.index(u)
        except ValueError:
            return None


def spine_target(m: int, k: int) -> Numeral:
    """``2**(2**k * m)``."""
    return Numeral.pow2(m << k).normalize()


def allocate_target(component: ComponentDescriptor, ordinal: int, model=None):
    """Target region of the ``ordinal``-th component of its kind.

    Cyclic components of cycle length k get the ordinal-th k-cycle of e (a
    CycleDescriptor); acyclic ones get ``2**(2*ordinal - 1)``.
    """
    if component.classification == "cyclic":
        return sigma.kth_cycle(component.cycle.length, ordinal, model)
    if component.classification == "acyclic":
        return Numeral.pow2(2 * ordinal - 1).normalize()
    raise UnknownOrbitError("cannot allocate a target for an unclassified component")


def embed_tree(tree: TreeSlice, target, model=None, coding: CodingMap | None = None,
               provenance: str = TREE, level=None) -> CodingMap:
    """Map a tree slice below ``target``: the i-th child of v goes to beta(c(v), i)."""
    coding = coding if coding is not None else CodingMap()
    coding.add(tree.root, target, provenance, level)
    children: dict[int, list[int]] = {}
    for c, p in tree.edges:
        children.setdefault(p, []).append(c)
    stack = [tree.root]
    while stack:
        v = stack.pop()
        for i, c in enumerate(sorted(children.get(v, ())), start=1):
            coding.add(c, sigma.beta(coding[v], i, model), provenance, level)
            stack.append(c)
    return coding


class Coder:
    """Lazy c_h for one (spec, window, budgets) triple."""

    def __init__(self, spec: FunctionSpec, window, *, spine_bound: int = DEFAULT_SPINE_BOUND,
                 table: sigma.SigmaTable | None = None, model: sigma.PhaseModel | None = None):
        self.spec = spec
        self.window = range(window.start, window.stop) if isinstance(window, range) else window
        self.spine_bound = spine_bound
        self.table = table
        self.model = model
        self.coding = CodingMap()
        self._components: Components | None = None
        self._cycle_targets: dict[int, tuple] = {}
        self._spines: dict[int, SpineDecomposition] = {}
        self._spine_m: dict[int, int] = {}

    # -- components -----------------------------------------------------

    @property
    def components(self) -> Components:
        if self._components is None:
            self._components = enumerate_components(self.spec, self.window)
            counts: dict = {}
            for comp in self._components:
                key = comp.cycle.length if comp.classification == "cyclic" else "acyclic"
                counts[key] = counts.get(key, 0) + 1
                if comp.classification == "cyclic":
                    self._cycle_targets[comp.discovery_index] = tuple(
                        allocate_target(comp, counts[key], self.model).members
                    )
                else:
                    self._spine_m[comp.discovery_index] = 2 * counts[key] - 1
        return self._components

    def component_of(self, x: int) -> ComponentDescriptor:
        comps = self.components
        comp = comps.of(x)
        if comp is not None:
            return comp
        # outside the scanned orbits: follow x forward until it meets one
        y, path = x, []
        while comps.of(y) is None:
            if y in self.window and y in comps.unknown:
                raise UnknownOrbitError(f"{x} belongs to an unclassified component")
            path.append(y)
            if len(path) > self.spec.eval_budget:
                raise UnknownOrbitError(f"{x} does not reach a component of the window")
            y = self.spec(y)
        comp = comps.of(y)
        for v in path:
            comps.owner[v] = comp
        return comp

    def spine(self, comp: ComponentDescriptor) -> SpineDecomposition:
        sd = self._spines.get(comp.discovery_index)
        if sd is None:
            u = [comp.anchor]
            for _ in range(self.spine_bound):
                u.append(self.spec(u[-1]))
            if len(set(u)) != len(u):
                raise ClassificationError(
                    f"spine of {comp.anchor} repeats; the component is not acyclic"
                )
            sd = SpineDecomposition(comp.anchor, u)
            sd._pos = {v: k for k, v in enumerate(u)}
            self._spines[comp.discovery_index] = sd
        return sd

    # -- coding ---------------------------------------------------------

    def _root_code(self, comp, y):
        """Code of y if it is a cycle or spine vertex, else None."""
        idx = comp.discovery_index
        if comp.classification == "cyclic":
            members = comp.cycle.members
            if y in members:
                t = self._cycle_targets[idx]
                self._code_cycle(comp, t)
                return self.coding[y]
            return None
        sd = self.spine(comp)
        k = sd._pos.get(y)
        if k is None:
            return None
        return self.coding.add(y, spine_target(self._spine_m[idx], k), SPINE, k, idx).target

    def _code_cycle(self, comp, targets):
        for m, t in zip(comp.cycle.members, targets):
            self.coding.add(m, t, CYCLE, None, comp.discovery_index)

    def _excluded(self, comp, u):
        """The predecessor of u that is not a tree child of u."""
        if comp.classification == "cyclic":
            if u in comp.cycle.members:
                return comp.cycle.predecessor(u)
            return None
        sd = self.spine(comp)
        k = sd._pos.get(u)
        if k:
            return sd.spine[k - 1]
        return None

    def code_of(self, n) -> Numeral:
        """c_h(n), computing only the pairs on the forward path of n."""
        n = int(as_numeral(n))
        if n in self.coding:
            return self.coding[n]
        comp = self.component_of(n)
        if comp.classification == "unknown":
            raise UnknownOrbitError(f"{n} belongs to an unclassified component")
        path = []
        y = n
        while y not in self.coding:
            if self._root_code(comp, y) is not None:
                break
            path.append(y)
            if len(path) > self.spec.eval_budget:
                raise BudgetExceeded(
                    f"{n} does not reach the first {self.spine_bound} spine vertices"
                )
            y = self.spec(y)
        # classify the tree by the vertex it hangs from
        if comp.classification == "cyclic":
            prov, level = TREE, None
        else:
            k = self.spine(comp)._pos[y] if y in self.spine(comp)._pos else None
            if k is None:
                p = self.coding.pairs[y]
                prov, level = p.provenance, p.level
            elif k == 0:
                prov, level = TREE, 0
            else:
                prov, level = RESIDUAL, k
        for x in reversed(path):
            u = self.spec(x)
            rank = preimage_rank(self.spec, x, self._excluded(comp, u))
            target = sigma.beta(self.coding[u], rank, self.model)
            self.coding.add(x, target, prov, level, comp.discovery_index)
        return self.coding[n]

    def code_window(self) -> CodingMap:
        for n in self.window:
            self.code_of(n)
            self.code_of(self.spec(n))
        return self.coding


# ---------------------------------------------------------------------------
# verification


@dataclass
class VerificationReport:
    rows: list
    injective: bool

    @property
    def checked(self):
        return sum(1 for r in self.rows if r["status"] in ("ok", "violation"))

    @property
    def passed(self):
        return sum(1 for r in self.rows if r["status"] == "ok")

    @property
    def violations(self):
        return [r["n"] for r in self.rows if r["status"] == "violation"]

    @property
    def errors(self):
        return [r["n"] for r in self.rows if r["status"] == "error"]

    @property
    def ok(self) -> bool:
        return self.injective and not self.violations and not self.errors

    def summary(self) -> str:
        lines = [f"{self.passed}/{len(self.rows)} conjugacy checks passed; "
                 f"injective: {'yes' if self.injective else 'NO'}"]
        for r in self.rows:
            if r["status"] != "ok":
                lines.append(f"  n={r['n']}: {r['status']} {r.get('detail', '')}".rstrip())
        return "\n".join(lines)

    def to_json(self) -> str:
        return json.dumps({
            "ok": self.ok, "passed": self.passed, "total": len(self.rows),
            "injective": self.injective, "rows": self.rows,
        }, indent=2)


def verify_conjugacy(spec: FunctionSpec, window, coder: Coder | None = None,
                     coding: CodingMap | None = None, **kwargs) -> VerificationReport:
    """Check c(h(n)) == e(c(n)) for each n of the window, and injectivity.

    With ``coding`` given, codes are looked up in it instead of being
    computed (used to test tampered maps).  Failures are reported, not raised.
    """
    coder = coder or Coder(spec, window, **kwargs)
    rows = []
    for n in window:
        row = {"n": n}
        try:
            hn = spec(n)
            if coding is not None:
                cn, chn = coding[n], coding[hn]
            else:
                cn, chn = coder.code_of(n), coder.code_of(hn)
            ecn = sigma.eval_e(cn, coder.table, coder.model)
            row.update(h_n=hn, c_n=str(cn), c_h_n=str(chn), e_c_n=str(ecn))
            row["status"] = "ok" if chn == ecn else "violation"
        except (UnivCodeError, KeyError) as exc:
            row["status"] = "error"
            row["detail"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    used = coding if coding is not None else coder.coding
    targets = [p.target for p in used.pairs.values()]
    return VerificationReport(rows, len(set(targets)) == len(targets))


# ---------------------------------------------------------------------------
# brute-force oracle


@dataclass
class OracleReport:
    agrees: bool
    problems: list
    oracle_map: dict


class OraclePrefix:
    """Facts about a freshly generated sigma prefix, computed once and shared."""

    def __init__(self, L: int = 10**6):
        self.L = L
        self.table = sigma.SigmaTable().extend_to(L)
        vals = self.values = self.table.values
        self.cycles = _table_cycles(vals, L)
        self.on_cycle = {x for cs in self.cycles.values() for c in cs for x in c}
        self._order = np.argsort(vals, kind="stable")
        self._sorted = vals[self._order]

    def e(self, x: int) -> int:
        if sigma.is_power_of_two(x):
            return x * x
        if x > self.L:
            raise BudgetExceeded(f"oracle prefix {self.L} does not reach {x}")
        return int(self.values[x])

    def preimages(self, v: int) -> list[int]:
        lo, hi = np.searchsorted(self._sorted, [v, v + 1])
        return sorted(int(x) for x in self._order[lo:hi])


def _table_cycles(values: np.ndarray, L: int) -> dict[int, list[tuple[int, ...]]]:
    """All cycles of the prefix table by length, found by iterating the table as an array."""
    succ = values.copy()
    succ[succ > L] = 0  # walks leaving the prefix cannot close a cycle inside it
    alive = np.arange(L + 1)
    for _ in range(2 * L.bit_length() + 64):
        alive = succ[alive]
    found: dict[int, list[tuple[int, ...]]] = {}
    seen = set()
    for start in np.unique(alive[alive > 0]):
        start = int(start)
        if start in seen:
            continue
        cyc, x = [start], int(values[start])
        while x != start:
            cyc.append(x)
            x = int(values[x])
        seen.update(cyc)
        i = cyc.index(min(cyc))
        found.setdefault(len(cyc), []).append(tuple(cyc[i:] + cyc[:i]))
    for k in found:
        found[k].sort()
    return found


_PREFIXES: dict[int, OraclePrefix] = {}


def oracle_prefix(L: int = 10**6) -> OraclePrefix:
    if L not in _PREFIXES:
        _PREFIXES[L] = OraclePrefix(L)
    return _PREFIXES[L]


def brute_force_oracle(mapping: dict, coder: Coder | None = None,
                       prefix: OraclePrefix | None = None) -> OracleReport:
    """Independently check a coding of a closed finite table.

    Components and cycles are recomputed by exhaustive iteration; an
    embedding is rebuilt greedily over a freshly generated sigma prefix; the
    coder's map is then checked for injectivity, edge preservation (e read
    from the prefix table), matching cycle lengths, and tree targets lying
    off every cycle of e.
    """
    mapping = {int(k): int(v) for k, v in mapping.items()}
    domain = sorted(mapping)
    if any(v not in mapping for v in mapping.values()):
        raise ValueError("oracle needs a table closed under h")
    problems = []

    # components by exhaustive iteration
    def cycle_of(x):
        seen = []
        while x not in seen:
            seen.append(x)
            x = mapping[x]
        return frozenset(seen[seen.index(x):])

    comp_of = {x: cycle_of(x) for x in domain}
    cycles = sorted(set(comp_of.values()), key=min)

    prefix = prefix or oracle_prefix()
    e_cycles, on_e_cycle, e_of = prefix.cycles, prefix.on_cycle, prefix.e

    # an independent greedy embedding over the prefix
    oracle = {}
    used_targets = set()
    next_cycle = {}
    for cyc in cycles:
        k = len(cyc)
        i = next_cycle.get(k, 0)
        next_cycle[k] = i + 1
        try:
            tcyc = e_cycles[k][i]
        except (KeyError, IndexError):
            problems.append(f"prefix has fewer than {i + 1} cycles of length {k}")
            continue
        m = min(cyc)
        for t in tcyc:
            oracle[m] = t
            used_targets.add(t)
            m = mapping[m]
    preds: dict[int, list[int]] = {}
    for x in domain:
        preds.setdefault(mapping[x], []).append(x)
    in_cycle = set().union(*cycles) if cycles else set()
    frontier = sorted(x for x in in_cycle if x in oracle)
    candidates: dict[int, list[int]] = {}
    while frontier:
        nxt = []
        for v in frontier:
            for c in sorted(preds.get(v, ())):
                if c in in_cycle:
                    continue
                tv = oracle[v]
                if tv not in candidates:
                    candidates[tv] = prefix.preimages(tv)
                pick = next((x for x in candidates[tv]
                             if x not in used_targets and x not in on_e_cycle), None)
                if pick is None:
                    problems.append(f"no free preimage of {tv} in the prefix for {c}")
                    continue
                oracle[c] = pick
                used_targets.add(pick)
                nxt.append(c)
        frontier = nxt
    for x in domain:
        if x in oracle and mapping[x] in oracle and oracle[mapping[x]] != e_of(oracle[x]):
            problems.append(f"oracle embedding breaks at {x}")

    # the coder under test
    if coder is None:
        spec = FunctionSpec.from_table(mapping, "error")
        coder = Coder(spec, range(1, max(domain) + 1))
    coded = {}
    try:
        for x in domain:
            coded[x] = coder.code_of(x)
    except UnivCodeError as exc:
        problems.append(f"coder failed: {exc}")
    comps = coder.components
    by_rep = {frozenset(c.cycle.members) for c in comps if c.cycle is not None}
    if by_rep != set(cycles):
        problems.append("coder and oracle disagree on the cycles of h")
    groups = {}
    for x in domain:
        c = comps.of(x)
        groups.setdefault(None if c is None else c.discovery_index, set()).add(x)
    oracle_groups = {}
    for x in domain:
        oracle_groups.setdefault(comp_of[x], set()).add(x)
    if sorted(map(sorted, groups.values())) != sorted(map(sorted, oracle_groups.values())):
        problems.append("coder and oracle disagree on the components")
    targets = [int(t) for t in coded.values()]
    if len(set(targets)) != len(targets):
        problems.append("coder map is not injective")
    for x, t in coded.items():
        try:
            if mapping[x] in coded and int(coded[mapping[x]]) != e_of(int(t)):
                problems.append(f"coder map breaks the edge {x} -> {mapping[x]}")
        except BudgetExceeded as exc:
            problems.append(str(exc))
        if x not in in_cycle and int(t) in on_e_cycle:
            problems.append(f"tree vertex {x} coded onto a cycle of e")
        if x in in_cycle:
            k = len(comp_of[x])
            y = int(t)
            for _ in range(k):
                y = e_of(y)
            if y != int(t):
                problems.append(f"cycle vertex {x} not coded onto a {k}-cycle")
    return OracleReport(not problems, problems, oracle)


def all_functions(size: int):
    """Every total function on ``{1..size}`` as a dict."""
    dom = range(1, size + 1)
    for values in itertools.product(dom, repeat=size):
        yield dict(zip(dom, values))


def random_table(size: int, rng: np.random.Generator) -> dict:
    vals = rng.integers(1, size + 1, size=size)
    return {i + 1: int(v) for i, v in enumerate(vals)}
