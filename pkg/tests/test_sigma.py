import struct

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from univcode import sigma
from univcode.errors import BudgetExceeded, CacheError
from univcode.numeral import Numeral
from univcode.properties import GOLDEN, GOLDEN_DERIVED


def fresh(L):
    return sigma.SigmaTable().extend_to(L)


def test_prefix_examples():
    t = fresh(7)
    assert [int(t[i]) for i in range(1, 8)] == [1, 4, 1, 16, 5, 7, 6]
    t = fresh(22)
    assert (t[20], t[21], t[22]) == (22, 20, 21)
    t = fresh(56)
    assert (t[46], t[47], t[56]) == (46, 48, 1)


def test_prefix_matches_reference(ref_big):
    t = fresh(len(ref_big))
    got = {i: int(t[i]) for i in ref_big}
    assert got == ref_big


def test_golden_values(ref56):
    t = fresh(56)
    for i, v in (GOLDEN | GOLDEN_DERIVED).items():
        assert t[i] == v == ref56[i], i


def test_extension_is_append_only():
    t = fresh(30)
    before = t.values.copy()
    t.extend_to(5000)
    assert np.array_equal(t.values[:31], before)
    assert t == fresh(5000)


def test_eval_e_examples():
    assert sigma.eval_e(8) == 64
    big = sigma.eval_e(Numeral.pow2(10**6))
    assert big == Numeral.pow2(2 * 10**6) and big.is_symbolic
    assert sigma.eval_e(31, fresh(56)) == 9


def test_eval_e_rejects_zero():
    with pytest.raises(ValueError):
        sigma.eval_e(0)


def test_assign_cycle_examples():
    assert sigma.assign_cycle(20, 3) == ({20: 22, 22: 21, 21: 20}, 23)
    assert sigma.assign_cycle(17, 1) == ({17: 17}, 18)
    # 32 is skipped inside the block, and 33 closes it
    assert sigma.assign_cycle(30, 3) == ({30: 33, 33: 31, 31: 30}, 34)


def test_assign_cycle_refuses_power_start():
    with pytest.raises(ValueError):
        sigma.assign_cycle(16, 2)


def test_analytic_examples():
    assert sigma.eval_e_analytic(56) == 1
    assert sigma.eval_e_analytic(45) == 22
    with pytest.raises(ValueError):
        sigma.eval_e_analytic(Numeral.pow2(40))


def test_analytic_agrees_with_reference(ref_big):
    model = sigma.PhaseModel()
    for i, v in ref_big.items():
        if i & (i - 1) == 0 and i > 1:
            continue
        assert sigma.eval_e_analytic(i, model) == v, i


@settings(max_examples=300, deadline=None)
@given(st.integers(min_value=1, max_value=10**6))
def test_analytic_agrees_with_table(table_1m, i):
    if i & (i - 1) == 0 and i > 1:
        i += 1
    assert sigma.eval_e_analytic(i) == table_1m[i]


def test_analytic_far_out():
    # well past any table, values must still be below the index on fill positions
    x = 10**30 + 7
    assert sigma.eval_e_analytic(x) <= x + 100


def test_partition_tag_examples():
    assert sigma.partition_tag(16).tag == "P"
    assert sigma.partition_tag(20).tag == "C"
    t = sigma.partition_tag(3)
    assert (t.tag, t.anchor, t.depth) == ("T", 1, 1)


def test_partition_tag_deep_tree():
    t = sigma.partition_tag(43)  # 43 -> 20 on the 3-cycle
    assert (t.tag, t.anchor, t.depth) == ("T", 20, 1)


def test_kth_cycle_examples():
    assert [sigma.kth_cycle(1, i).smallest for i in range(1, 5)] == [1, 5, 17, 46]
    assert [sigma.kth_cycle(2, i).smallest for i in range(1, 4)] == [6, 18, 47]
    assert set(sigma.kth_cycle(3, 2).members) == {49, 50, 51}
    assert set(sigma.kth_cycle(4, 1).members) == {52, 53, 54, 55}


def test_kth_cycle_is_wired_as_listed(table_1m):
    for k in range(1, 8):
        for i in range(1, 4):
            c = sigma.kth_cycle(k, i)
            for a in c.members:
                assert table_1m[a] in c.members
            x = c.members[0]
            for _ in range(k):
                x = int(table_1m[x])
            assert x == c.members[0]


def test_beta_examples():
    assert [sigma.beta(1, i) for i in range(1, 5)] == [3, 9, 23, 56]
    assert sigma.beta(2, 1) == 10
    assert sigma.beta(20, 1) == 43


def test_beta_skips_straddling_cycle(table_1m):
    # the 2-cycle {255, 257} spans 256; 257 must not count as a tree predecessor of 255
    assert table_1m[257] == 255
    assert sigma.beta(255, 1) != 257
    assert sigma.beta(255, 1) == sigma.beta_scan(255, 1, table_1m)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 2000), st.integers(1, 6))
def test_beta_matches_scan(table_1m, v, i):
    assert sigma.beta(v, i) == sigma.beta_scan(v, i, table_1m)


def test_beta_results_are_tree_predecessors(table_1m):
    for v in range(1, 300):
        x = int(sigma.beta(v, 1))
        assert x > v + 1 and table_1m[x] == v
        assert sigma.partition_tag(x).tag == "T"


def test_beta_on_giant_value_is_a_budget_error():
    with pytest.raises(BudgetExceeded):
        sigma.beta(Numeral.pow2(1 << 40), 1)


def test_beta_scan_short_prefix():
    with pytest.raises(BudgetExceeded):
        sigma.beta_scan(1, 10, fresh(56))


def test_image_occurrences_examples():
    t = fresh(56)
    # positions 1 (the loop), 3, 9, 23 and 56
    assert sigma.image_occurrences(1, 56, t) == 5
    assert sigma.image_occurrences(6, 16, t) == 2
    assert sigma.image_occurrences(46, 56, t) == 1
    assert sigma.image_occurrences(64, 56, t) == 1  # 8 -> 64


def test_nonpower_position_inverts_ordinal():
    nonpowers = [x for x in range(1, 5000) if x == 1 or x & (x - 1)]
    for j, x in enumerate(nonpowers, start=1):
        assert sigma.nonpower_position(j) == x
        assert sigma.nonpower_ordinal(x) == j


def test_phase_log_shape():
    t = fresh(600)
    kinds = {r.kind for r in t.phase_log}
    assert {"cycle-block", "fill-block"} <= kinds
    blocks = [r for r in t.phase_log if r.kind == "cycle-block"]
    assert [r.round for r in blocks[:4]] == [1, 2, 3, 4]
    assert all(r.start_index <= r.end_index for r in t.phase_log)


def test_csv_export():
    text = fresh(10).to_csv()
    lines = text.splitlines()
    assert lines[0] == "i,e_of_i"
    assert lines[8] == "8,64" and len(lines) == 11


def test_cache_round_trip(tmp_path, table_1m):
    path = tmp_path / "sigma.bin"
    sigma.cache_save(table_1m, path)
    loaded = sigma.cache_load(path)
    assert loaded == table_1m
    assert loaded.phase_log == table_1m.phase_log


def test_cache_then_extend_matches_direct(tmp_path):
    path = tmp_path / "sigma.bin"
    sigma.cache_save(fresh(10**6), path)
    loaded = sigma.cache_load(path).extend_to(2 * 10**6)
    assert loaded == fresh(2 * 10**6)


def test_cache_corruption_detected(tmp_path):
    path = tmp_path / "sigma.bin"
    sigma.cache_save(fresh(1000), path)
    data = path.read_bytes()

    (tmp_path / "short.bin").write_bytes(data[:-20])
    with pytest.raises(CacheError):
        sigma.cache_load(tmp_path / "short.bin")

    flipped = bytearray(data)
    flipped[100] ^= 1
    (tmp_path / "flip.bin").write_bytes(bytes(flipped))
    with pytest.raises(CacheError):
        sigma.cache_load(tmp_path / "flip.bin")

    (tmp_path / "ver.bin").write_bytes(data[:4] + b"\x02" + data[5:])
    with pytest.raises(CacheError):
        sigma.cache_load(tmp_path / "ver.bin")


def test_cache_rejects_consistent_but_wrong_values(tmp_path):
    # a file with a valid checksum but a wrong slot must still be refused
    L = 100
    slots = fresh(L).values[1:].astype("<u8")
    slots[10] += 1
    header = b"SIG1" + bytes([1]) + struct.pack("<Q", L)
    body = header + slots.tobytes()
    path = tmp_path / "forged.bin"
    path.write_bytes(body + struct.pack("<Q", sigma._fnv1a(body)))
    with pytest.raises(CacheError):
        sigma.cache_load(path)


def test_cache_layout(tmp_path):
    path = tmp_path / "s.bin"
    sigma.cache_save(fresh(8), path)
    data = path.read_bytes()
    assert data[:4] == b"SIG1" and data[4] == 1
    assert struct.unpack("<Q", data[5:13]) == (8,)
    slots = struct.unpack("<8Q", data[13:77])
    assert slots == (1, 0, 1, 0, 5, 7, 6, 0)
    assert len(data) == 13 + 64 + 8


def test_fnv1a_known_vector():
    assert sigma._fnv1a(b"") == 0xCBF29CE484222325
    assert sigma._fnv1a(b"a") == 0xAF63DC4C8601EC8C
