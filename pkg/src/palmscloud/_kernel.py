"""Array-state engine: the full 4-level lookup path as one compiled kernel.

State for all levels lives in flat numpy arrays (tags / meta / per-entry aux
/ logical-map table) with per-level base offsets, so a single njit function
can walk the whole hierarchy. Semantics mirror the pure-Python engine
exactly, including the replacement-draw PRNG, which is the same splitmix64
recurrence as cache_core.SplitMix64; a differential test pins the two
engines counter-for-counter.

meta bits: 1 = valid, 2 = dirty. aux holds LRU age stamps for set-associative
levels and logical line numbers for randomized levels. The logical-map table
gives O(1) line-register lookup; entries are physical line indexes or -1.
"""

from __future__ import annotations

import numpy as np

from .cache_core import derive_seed

try:
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - sandbox always has numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def deco(f):
            return f
        return deco if not (args and callable(args[0])) else args[0]

# cache kind codes
K_SA = 0
K_DM = 1
K_FA = 2
K_NC = 3

# geo columns: per-level geometry/layout numbers
G_KIND = 0
G_NSETS = 1
G_WAYS = 2
G_BITS = 3     # index bits (SA/DM), 0 (FA), logical index bits (NC)
G_BASE = 4     # base offset into tags/meta/aux
G_MAPBASE = 5  # base offset into the logical-map table (NC only)

# params indices
P_OFFSET = 0
P_CHARGE = 1
P_L1I = 2
P_L1D = 3
P_L2 = 4
P_L3 = 5
P_MEM = 6
P_UNC = 7

# counters: 5 per level (accesses, hits, misses, evictions, writebacks), then:
C_MEMFETCH = 20
C_MEMWB = 21
C_UNC = 22
C_DATA = 23
C_INSTR = 24
N_COUNTERS = 25

# Newcache logical tables above this many index bits would be oversized;
# such configs fall back to the python engine.
MAX_LOGICAL_BITS = 22

_SM_A = np.uint64(0x9E3779B97F4A7C15)
_SM_B = np.uint64(0xBF58476D1CE4E5B9)
_SM_C = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)


@njit(cache=True)
def _next_u64(rngs, lvl):
    s = rngs[lvl] + _SM_A
    rngs[lvl] = s
    z = (s ^ (s >> _S30)) * _SM_B
    z = (z ^ (z >> _S27)) * _SM_C
    return z ^ (z >> _S31)


@njit(cache=True)
def _demand(tags, meta, aux, lmap, geo, rngs, clocks, lvl, line, install_dirty):
    """One demand access at one level: probe, install on miss, report victim."""
    kind = geo[lvl, G_KIND]
    base = geo[lvl, G_BASE]
    if kind == K_NC:
        bits = geo[lvl, G_BITS]
        ways = geo[lvl, G_WAYS]
        logical = line & ((np.int64(1) << bits) - 1)
        tag = line >> bits
        mb = geo[lvl, G_MAPBASE]
        phys = lmap[mb + logical]
        if phys >= 0:
            p = base + phys
            if tags[p] == tag:
                if install_dirty:
                    meta[p] = meta[p] | 2
                return True, False, np.int64(0), False
            vline = (tags[p] << bits) | logical
            vdirty = (meta[p] & 2) != 0
            tags[p] = tag
            meta[p] = 3 if install_dirty else 1
            return False, True, vline, vdirty
        slot = np.int64(_next_u64(rngs, lvl) % np.uint64(ways))
        p = base + slot
        has_v = False
        vline = np.int64(0)
        vdirty = False
        if meta[p] & 1:
            vline = (tags[p] << bits) | aux[p]
            vdirty = (meta[p] & 2) != 0
            lmap[mb + aux[p]] = -1
            has_v = True
        aux[p] = logical
        tags[p] = tag
        meta[p] = 3 if install_dirty else 1
        lmap[mb + logical] = slot
        return False, has_v, vline, vdirty
    elif kind == K_FA:
        ways = geo[lvl, G_WAYS]
        for w in range(ways):
            p = base + w
            if (meta[p] & 1) and tags[p] == line:
                if install_dirty:
                    meta[p] = meta[p] | 2
                return True, False, np.int64(0), False
        slot = np.int64(_next_u64(rngs, lvl) % np.uint64(ways))
        p = base + slot
        has_v = False
        vline = np.int64(0)
        vdirty = False
        if meta[p] & 1:
            vline = tags[p]
            vdirty = (meta[p] & 2) != 0
            has_v = True
        tags[p] = line
        meta[p] = 3 if install_dirty else 1
        return False, has_v, vline, vdirty
    else:  # K_SA and K_DM: exact LRU over the set (one way for direct-mapped)
        nsets = geo[lvl, G_NSETS]
        ways = geo[lvl, G_WAYS]
        bits = geo[lvl, G_BITS]
        idx = line & (nsets - 1)
        tag = line >> bits
        b = base + idx * ways
        for w in range(ways):
            p = b + w
            if (meta[p] & 1) and tags[p] == tag:
                clocks[lvl] += 1
                aux[p] = clocks[lvl]
                if install_dirty:
                    meta[p] = meta[p] | 2
                return True, False, np.int64(0), False
        victim_way = -1
        for w in range(ways):
            if not (meta[b + w] & 1):
                victim_way = w
                break
        has_v = False
        vline = np.int64(0)
        vdirty = False
        if victim_way < 0:
            victim_way = 0
            best = aux[b]
            for w in range(1, ways):
                if aux[b + w] < best:
                    best = aux[b + w]
                    victim_way = w
            p = b + victim_way
            vline = (tags[p] << bits) | idx
            vdirty = (meta[p] & 2) != 0
            has_v = True
        p = b + victim_way
        clocks[lvl] += 1
        tags[p] = tag
        meta[p] = 3 if install_dirty else 1
        aux[p] = clocks[lvl]
        return False, has_v, vline, vdirty


@njit(cache=True)
def _absorb_writeback(tags, meta, aux, lmap, geo, lvl, line):
    """Mark the line dirty if present; never allocates or reorders."""
    kind = geo[lvl, G_KIND]
    base = geo[lvl, G_BASE]
    if kind == K_NC:
        bits = geo[lvl, G_BITS]
        logical = line & ((np.int64(1) << bits) - 1)
        phys = lmap[geo[lvl, G_MAPBASE] + logical]
        if phys >= 0 and tags[base + phys] == (line >> bits):
            meta[base + phys] = meta[base + phys] | 2
            return True
        return False
    elif kind == K_FA:
        for w in range(geo[lvl, G_WAYS]):
            p = base + w
            if (meta[p] & 1) and tags[p] == line:
                meta[p] = meta[p] | 2
                return True
        return False
    else:
        nsets = geo[lvl, G_NSETS]
        ways = geo[lvl, G_WAYS]
        idx = line & (nsets - 1)
        tag = line >> geo[lvl, G_BITS]
        b = base + idx * ways
        for w in range(ways):
            p = b + w
            if (meta[p] & 1) and tags[p] == tag:
                meta[p] = meta[p] | 2
                return True
        return False


@njit(cache=True)
def _run_refs(addrs, flags, tags, meta, aux, lmap, geo, rngs, clocks, counters, params):
    extra = np.int64(0)
    offset_bits = params[P_OFFSET]
    for i in range(addrs.shape[0]):
        f = flags[i]
        if f & 4:
            counters[C_UNC] += 1
            extra += params[P_UNC]
            continue
        if f & 2:
            counters[C_INSTR] += 1
            first = 0
        else:
            counters[C_DATA] += 1
            first = 1
        line = addrs[i] >> offset_bits
        is_write = (f & 1) != 0
        serviced = -1
        lvl = first
        while True:
            dirty_install = is_write and lvl == first
            hit, has_v, vline, vdirty = _demand(tags, meta, aux, lmap, geo, rngs,
                                                clocks, lvl, line, dirty_install)
            cb = lvl * 5
            counters[cb] += 1
            if hit:
                counters[cb + 1] += 1
                serviced = lvl
                break
            counters[cb + 2] += 1
            if has_v:
                counters[cb + 3] += 1
                if vdirty:
                    counters[cb + 4] += 1
                    absorbed = False
                    start = 2 if lvl <= 1 else lvl + 1
                    for wlvl in range(start, 4):
                        if _absorb_writeback(tags, meta, aux, lmap, geo, wlvl, vline):
                            absorbed = True
                            break
                    if not absorbed:
                        counters[C_MEMWB] += 1
            if lvl <= 1:
                lvl = 2
            elif lvl == 2:
                lvl = 3
            else:
                break
        if serviced < 0:
            counters[C_MEMFETCH] += 1
            extra += params[P_MEM]
        elif serviced == first:
            if params[P_CHARGE] != 0:
                extra += params[P_L1I] if first == 0 else params[P_L1D]
        elif serviced == 2:
            extra += params[P_L2]
        else:
            extra += params[P_L3]
    return extra


def eligible(plans: list[dict]) -> bool:
    if not HAVE_NUMBA:
        return False
    return all(p["kind"] != K_NC or p["bits"] <= MAX_LOGICAL_BITS for p in plans)


class JitState:
    """Flat-array hierarchy state plus the dispatch wrapper."""

    def __init__(self, plans: list[dict], config, seed: int):
        total = sum(p["num_sets"] * p["ways"] for p in plans)
        map_total = sum(p["map_size"] for p in plans)
        self.tags = np.zeros(total, np.int64)
        self.meta = np.zeros(total, np.uint8)
        self.aux = np.zeros(total, np.int64)
        self.lmap = np.full(max(map_total, 1), -1, np.int64)
        self.geo = np.zeros((4, 6), np.int64)
        self.rngs = np.zeros(4, np.uint64)
        self.clocks = np.zeros(4, np.int64)
        self.counters = np.zeros(N_COUNTERS, np.int64)
        base = 0
        map_base = 0
        for lvl, p in enumerate(plans):
            self.geo[lvl, G_KIND] = p["kind"]
            self.geo[lvl, G_NSETS] = p["num_sets"]
            self.geo[lvl, G_WAYS] = p["ways"]
            self.geo[lvl, G_BITS] = p["bits"]
            self.geo[lvl, G_BASE] = base
            self.geo[lvl, G_MAPBASE] = map_base
            base += p["num_sets"] * p["ways"]
            map_base += p["map_size"]
            self.rngs[lvl] = np.uint64(derive_seed(seed, p["label"]))
        self.params = np.array([
            config.line_bytes.bit_length() - 1,
            1 if config.charge_l1_hits else 0,
            config.l1i.hit_latency_cycles,
            config.l1d.hit_latency_cycles,
            config.l2.hit_latency_cycles,
            config.l3.hit_latency_cycles,
            config.memory_latency_cycles,
            config.uncacheable_latency_cycles,
        ], np.int64)

    def run(self, addrs: np.ndarray, flags: np.ndarray) -> int:
        return int(_run_refs(addrs, flags, self.tags, self.meta, self.aux, self.lmap,
                             self.geo, self.rngs, self.clocks, self.counters,
                             self.params))


def build_state(plans: list[dict], config, seed: int) -> JitState:
    return JitState(plans, config, seed)
