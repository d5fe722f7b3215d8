"""Bounded checks of the structural properties of e over a sigma prefix."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import sigma
from .numeral import Numeral

# Reference values for the first 56 positions.
GOLDEN = {
    1: 1, 2: 4, 3: 1, 4: 16, 5: 5, 6: 7, 7: 6, 8: 64, 9: 1, 10: 2, 11: 3,
    12: 4, 13: 5, 14: 6, 15: 7, 16: 256, 17: 17, 18: 19, 19: 18, 20: 22,
    21: 20, 22: 21, 23: 1, 32: 1024, 45: 22, 46: 46, 47: 48, 48: 47, 49: 51,
    50: 49, 51: 50, 52: 55, 53: 52, 54: 53, 55: 54, 56: 1,
}
# Positions 23..45 carry 1..22, with 32 skipped.
GOLDEN_DERIVED = {i: i - 22 for i in range(24, 32)} | {i: i - 23 for i in range(33, 45)}


@dataclass
class Check:
    name: str
    ok: bool
    detail: str = ""

    def line(self) -> str:
        return f"[{'PASS' if self.ok else 'FAIL'}] {self.name}" + (f": {self.detail}" if self.detail else "")


def cycle_mask(values: np.ndarray, L: int) -> np.ndarray:
    """Boolean mask of positions <= L lying on a cycle, from the table alone.

    ``values`` may extend past L; slots pointing beyond it count as dead ends.
    """
    top = len(values) - 1
    succ = values.copy()
    succ[succ > top] = 0
    start = np.arange(top + 1)
    x = start
    on = np.zeros(top + 1, dtype=bool)
    # a cycle has at most as many members as there are rounds, far below the bit length
    for _ in range(top.bit_length() + 2):
        x = succ[x]
        on |= x == start
    on[0] = False
    return on[: L + 1]


def run_properties(L: int = 10**6, table: sigma.SigmaTable | None = None,
                   model: sigma.PhaseModel | None = None, samples: int = 10**4,
                   seed: int = 0) -> list[Check]:
    table = (table or sigma.SigmaTable()).extend_to(L)
    model = model or sigma.PhaseModel()
    vals = table.values[: L + 1]
    idx = np.arange(L + 1)
    checks = []

    prefix = {i: int(table[i]) for i in range(1, min(L, 56) + 1)}
    expect = {i: v for i, v in (GOLDEN | GOLDEN_DERIVED).items() if i <= L}
    bad = [i for i, v in expect.items() if prefix[i] != v]
    checks.append(Check("golden prefix", not bad, f"mismatch at {bad}" if bad else f"{len(expect)} positions"))

    bad = [k for k in range(1, 129) if sigma.eval_e(Numeral.pow2(k), table, model) != Numeral.pow2(2 * k)]
    checks.append(Check("power rule k=1..128", not bad, f"fails at {bad[:5]}" if bad else ""))

    power = np.zeros(L + 1, dtype=bool)
    power[[1 << j for j in range(1, L.bit_length()) if 1 << j <= L]] = True
    on_cycle = cycle_mask(table.materialized, L)
    # C as seen by the phase arithmetic, for every non-power index
    analytic_c = np.zeros(L + 1, dtype=bool)
    for r in range(1, model.round_of_ordinal(sigma.nonpower_ordinal(L)) + 1):
        lo = sigma.nonpower_position(model.start[r - 1] + 1)
        hi = sigma.nonpower_position(model.cycle_end[r - 1])
        analytic_c[lo : min(hi, L) + 1] = True
    analytic_c &= ~power
    analytic_c[0] = False
    t_mask = ~power & ~on_cycle
    t_mask[0] = False
    disjoint = not np.any(power & on_cycle)
    exhaustive = int(power.sum() + on_cycle.sum() + t_mask.sum()) == L
    agree = np.array_equal(on_cycle, analytic_c)
    checks.append(Check("P/C/T partition", disjoint and exhaustive and agree,
                        f"|P|={int(power.sum())} |C|={int(on_cycle.sum())} |T|={int(t_mask.sum())}"
                        + ("" if agree else "; table and phase arithmetic disagree on C")))

    descents = np.flatnonzero(t_mask & (vals >= idx))
    checks.append(Check("descent on T", descents.size == 0,
                        f"violations at {descents[:5].tolist()}" if descents.size else ""))

    census = sigma.cycle_census(table)
    short = {k: len(census.get(k, [])) for k in range(1, 11) if len(census.get(k, [])) < 5}
    checks.append(Check("cycle supply (>= 5 per length <= 10)", not short,
                        f"short lengths {short}" if short else ""))

    counts = np.bincount(vals[1:][~power[1:]], minlength=51)[:51]
    low = [v for v in range(1, 51) if sigma.image_occurrences(v, L, table) < 3]
    checks.append(Check("image frequency (>= 3 for v <= 50)", not low,
                        f"low at {low}" if low else f"min {int(counts[1:].min())}"))

    blocks = [r for r in table.phase_log if r.kind == "cycle-block" and r.end_index <= L]
    heavy = [r.round for r in blocks if r.skipped_powers > 1]
    worst = max((r.skipped_powers for r in blocks), default=0)
    checks.append(Check("t-bound (<= 1 skipped power per cycle block)", not heavy,
                        f"max {worst} over {len(blocks)} blocks"))

    rng = np.random.default_rng(seed)
    nonpow = np.flatnonzero(~power[1:]) + 1
    picks = rng.choice(nonpow, size=min(samples, nonpow.size), replace=False)
    bad = [int(i) for i in picks if model.e(int(i)) != int(vals[i])]
    checks.append(Check(f"analytic agrees on {picks.size} random indices", not bad,
                        f"disagrees at {bad[:5]}" if bad else ""))

    spine_ok = True
    for m in (1, 3, 5):
        x = Numeral.pow2(m)
        seen = [x]
        for _ in range(20):
            x = sigma.eval_e(x, table, model)
            seen.append(x)
        spine_ok &= len(set(seen)) == len(seen)
    checks.append(Check("non-periodic spines from 2^1, 2^3, 2^5", spine_ok))
    return checks
