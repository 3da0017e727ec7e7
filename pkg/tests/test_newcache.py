import random

import pytest

from palmscloud.cache_core import (FULL, HIT, INDEX_MISS, TAG_MISS, FARandomCache,
                                   MemoryRef, SplitMix64, make_geometry)
from palmscloud.errors import SimError
from palmscloud.newcache import Newcache, make_nc_geometry


def nc(size=1024, line=64, extra=2, addr_bits=48, seed=7):
    return Newcache(make_nc_geometry(size, line, extra, addr_bits), SplitMix64(seed))


def test_geometry_split():
    g = make_nc_geometry(32768, 64, 4, 48)
    assert g.num_lines == 512
    assert g.n_bits == 9
    assert g.logical_index_bits == 13
    assert g.tag_bits == 48 - 13 - 6 == 29


def test_geometry_rejects_negative_extra_bits():
    with pytest.raises(SimError) as err:
        make_nc_geometry(1024, 64, -1)
    assert err.value.code == "PARAM_OUT_OF_RANGE"


def test_geometry_rejects_narrow_address():
    with pytest.raises(SimError) as err:
        make_nc_geometry(1024, 64, 8, address_bits=12)
    assert err.value.code == "ADDRESS_OUT_OF_RANGE"


def test_first_access_is_index_miss_into_drawn_line():
    c = nc(seed=3)
    shadow = SplitMix64(3)
    out = c.access(MemoryRef(0x1240))
    assert out.kind == INDEX_MISS
    assert out.victim_line_address is None
    assert c._lnreg[shadow.randrange(16)] == (0x1240 >> 6) & c._logical_mask


def test_reaccess_hits():
    c = nc()
    c.access(MemoryRef(0x1240))
    out = c.access(MemoryRef(0x1240))
    assert out.kind == HIT
    assert c.rng.draws == 1


def test_tag_miss_replaces_in_place_with_zero_draws():
    # two addresses sharing the low logical-index bits of the line number but
    # differing in the tag bits; hand-stepped two-access script.
    g = make_nc_geometry(1024, 64, 2, 48)  # 16 lines, logical index 6 bits
    c = Newcache(g, SplitMix64(9))
    shadow = SplitMix64(9)
    a = 0b000001_001010 << 6  # tag 1, logical index 0b001010
    b = 0b000011_001010 << 6  # tag 3, same logical index
    out_a = c.access(MemoryRef(a))
    phys = shadow.randrange(16)
    assert out_a.kind == INDEX_MISS
    draws_before = c.rng.draws
    out_b = c.access(MemoryRef(b, is_write=True))
    assert out_b.kind == TAG_MISS
    assert c.rng.draws == draws_before  # zero draws for a tag miss
    assert out_b.victim_line_address == a
    # replaced in place: same physical line, line register unchanged
    assert c._lnreg[phys] == 0b001010
    assert c._tags[phys] == 3
    assert c._dirty[phys] is True
    # and the original address now misses
    assert c.access(MemoryRef(a)).kind == TAG_MISS


def test_rejects_uncacheable():
    c = nc()
    with pytest.raises(SimError) as err:
        c.access(MemoryRef(0x0, is_cacheable=False))
    assert err.value.code == "UNCACHEABLE_REF"


def test_snapshot_empty_then_single():
    c = nc()
    assert c.snapshot() == []
    c.access(MemoryRef(0x1240))
    line = 0x1240 >> 6
    assert c.snapshot() == [(line & c._logical_mask, line >> c._logical_bits)]


def test_snapshot_after_many_accesses_is_duplicate_free():
    c = nc(size=4096, extra=3, seed=5)
    rnd = random.Random(17)
    for _ in range(100_000):
        c.access(MemoryRef(rnd.randrange(1 << 20), is_write=rnd.random() < 0.3))
    snap = c.snapshot()
    assert len(snap) == c.valid_count()
    logicals = [ln for ln, _ in snap]
    assert len(logicals) == len(set(logicals))


def test_lnreg_uniqueness_after_every_access():
    for extra in (0, 2, 4, 6):
        c = nc(size=1024, extra=extra, addr_bits=32, seed=extra + 1)
        rnd = random.Random(100 + extra)
        for _ in range(5000):
            c.access(MemoryRef(rnd.randrange(1 << 18)))
            logicals = [c._lnreg[p] for p in range(c._lines) if c._valid[p]]
            assert len(logicals) == len(set(logicals))


def test_capacity_never_exceeded():
    c = nc(size=1024, extra=4)
    rnd = random.Random(2)
    for _ in range(5000):
        c.access(MemoryRef(rnd.randrange(1 << 24)))
    assert c.valid_count() <= 16


def test_draw_discipline_counts():
    c = nc(size=1024, extra=2, seed=1)
    rnd = random.Random(0)
    draws = 0
    for _ in range(20_000):
        before = c.rng.draws
        out = c.access(MemoryRef(rnd.randrange(1 << 14)))
        spent = c.rng.draws - before
        if out.kind == INDEX_MISS:
            assert spent == 1
        else:
            assert spent == 0
        draws += spent
    assert c.rng.draws == draws


def test_zero_tag_equivalence_with_fa_random():
    # 16 lines, extra bits sized so the tag field vanishes: the randomized
    # cache must behave exactly like a fully-associative random-replacement
    # cache driven by the same draw sequence.
    g = make_nc_geometry(1024, 64, 6, address_bits=16)
    assert g.tag_bits == 0
    c = Newcache(g, SplitMix64(42))
    fa = FARandomCache(make_geometry(1024, 64, FULL, address_bits=16), SplitMix64(42))
    rnd = random.Random(8)
    for _ in range(10_000):
        ref = MemoryRef(rnd.randrange(1 << 16), is_write=rnd.random() < 0.25)
        a = c.access(ref)
        b = fa.access(MemoryRef(ref.address, ref.is_write))
        assert a.hit == b.hit
        assert a.victim_line_address == b.victim_line_address
        assert a.victim_dirty == b.victim_dirty
    assert c.rng.draws == fa.rng.draws
