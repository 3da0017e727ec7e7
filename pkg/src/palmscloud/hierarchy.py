"""Multi-level cache hierarchy: L1I/L1D/L2/L3 over memory, with timing.

The lookup path is non-inclusive, non-exclusive with fill-on-miss at every
level. Dirty victims are written back toward memory: the next level marks
the line dirty if it holds it, otherwise the writeback keeps moving down
and is finally absorbed by memory. Writebacks are charged zero cycles
(write-buffer assumption) and are not counted as demand accesses, so
demand-traffic conservation (L2 accesses == L1I misses + L1D misses, and
so on) holds exactly.

Cycle accounting: an L1 hit costs nothing beyond the base CPI unless
charge_l1_hits is set; otherwise the access is charged the hit latency of
the level that serviced it, or the memory latency. Uncacheable refs bypass
all levels and pay uncacheable_latency_cycles.

Two interchangeable engines produce bit-identical results: a pure-Python
one built from the cache_core/newcache classes, and an array engine
compiled with numba for bulk traces.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import SimError
from .cache_core import (FULL, FLAG_INSTR, FLAG_UNCACHEABLE, FLAG_WRITE,
                         DMCache, FARandomCache, MemoryRef, RefBlock, SACache,
                         SplitMix64, derive_seed, make_geometry)
from .newcache import Newcache, make_nc_geometry
from . import _kernel

LEVELS = ("L1I", "L1D", "L2", "L3")
KINDS = ("sa_lru", "direct", "fa_random", "newcache")

_KIND_CODE = {"sa_lru": _kernel.K_SA, "direct": _kernel.K_DM,
              "fa_random": _kernel.K_FA, "newcache": _kernel.K_NC}


@dataclass(frozen=True)
class LevelConfig:
    kind: str = "sa_lru"
    size_bytes: int = 32768
    assoc: int | str = 8
    hit_latency_cycles: int = 4
    extra_index_bits: int = 0       # newcache only
    line_bytes: int | None = None   # must match the hierarchy-wide line size


@dataclass(frozen=True)
class HierarchyConfig:
    l1i: LevelConfig
    l1d: LevelConfig
    l2: LevelConfig
    l3: LevelConfig
    line_bytes: int = 64
    address_bits: int = 48
    memory_latency_cycles: int = 200
    uncacheable_latency_cycles: int = 200
    base_cpi: float = 1.0
    charge_l1_hits: bool = False

    def level(self, label: str) -> LevelConfig:
        return getattr(self, label.lower())


def default_config(**overrides) -> HierarchyConfig:
    """Baseline configuration: 8-way 32 KB L1D, 4-way 32 KB L1I, 8-way 256 KB
    L2, 16-way 2 MB L3, 64 B lines, 4/10/35-cycle hit latencies, 200-cycle
    memory."""
    cfg = HierarchyConfig(
        l1i=LevelConfig("sa_lru", 32 * 1024, 4, 4),
        l1d=LevelConfig("sa_lru", 32 * 1024, 8, 4),
        l2=LevelConfig("sa_lru", 256 * 1024, 8, 10),
        l3=LevelConfig("sa_lru", 2 * 1024 * 1024, 16, 35),
    )
    return replace(cfg, **overrides) if overrides else cfg


@dataclass
class LevelStats:
    accesses: int = 0
    hits: int = 0
    misses: int = 0
    evictions: int = 0
    writebacks: int = 0

    @property
    def miss_rate(self) -> float:
        return self.misses / self.accesses if self.accesses else 0.0

    def delta(self, before: "LevelStats") -> "LevelStats":
        return LevelStats(self.accesses - before.accesses, self.hits - before.hits,
                          self.misses - before.misses, self.evictions - before.evictions,
                          self.writebacks - before.writebacks)


@dataclass
class TraceResult:
    """Counters and timing for one trace run (deltas for that trace only)."""

    instructions: int
    cycles: float
    ipc: float
    levels: dict[str, LevelStats]
    memory_fetches: int
    memory_writebacks: int
    uncacheable_refs: int
    data_refs: int
    instruction_refs: int


def _validate(config: HierarchyConfig) -> None:
    for label in LEVELS:
        lc = config.level(label)
        if lc.kind not in KINDS:
            raise SimError("CONFIG_INVALID", f"{label}: unknown cache kind {lc.kind!r}")
        if lc.line_bytes is not None and lc.line_bytes != config.line_bytes:
            raise SimError("CONFIG_INVALID",
                           f"{label}: line_bytes={lc.line_bytes} differs from "
                           f"hierarchy line_bytes={config.line_bytes}")
    l1 = max(config.l1i.hit_latency_cycles, config.l1d.hit_latency_cycles)
    chain = (l1, config.l2.hit_latency_cycles, config.l3.hit_latency_cycles,
             config.memory_latency_cycles)
    if not all(a < b for a, b in zip(chain, chain[1:])):
        raise SimError("CONFIG_INVALID",
                       f"hit latencies must strictly increase down the hierarchy, got {chain}")
    if config.base_cpi <= 0:
        raise SimError("CONFIG_INVALID", f"base_cpi must be positive, got {config.base_cpi}")


def _build_cache(lc: LevelConfig, config: HierarchyConfig, seed: int, label: str):
    line = config.line_bytes
    bits = config.address_bits
    if lc.kind == "sa_lru":
        return SACache(make_geometry(lc.size_bytes, line, lc.assoc, bits), label)
    if lc.kind == "direct":
        return DMCache(make_geometry(lc.size_bytes, line, 1, bits), label)
    rng = SplitMix64(derive_seed(seed, label))
    if lc.kind == "fa_random":
        return FARandomCache(make_geometry(lc.size_bytes, line, FULL, bits), rng, label)
    return Newcache(make_nc_geometry(lc.size_bytes, line, lc.extra_index_bits, bits),
                    rng, label)


class Hierarchy:
    """Common surface for both engines; see build_hierarchy()."""

    engine = "none"

    def __init__(self, config: HierarchyConfig, seed: int):
        self.config = config
        self.seed = seed
        self._offset_bits = (config.line_bytes.bit_length() - 1)
        self._latency = (config.l1i.hit_latency_cycles, config.l1d.hit_latency_cycles,
                         config.l2.hit_latency_cycles, config.l3.hit_latency_cycles)

    # -- engine hooks -------------------------------------------------------
    def access(self, ref: MemoryRef) -> int:
        raise NotImplementedError

    def run_block(self, block: RefBlock) -> int:
        raise NotImplementedError

    def level_stats(self) -> dict[str, LevelStats]:
        raise NotImplementedError

    def totals(self) -> dict[str, int]:
        raise NotImplementedError

    def reset_stats(self) -> None:
        raise NotImplementedError

    # -- shared logic -------------------------------------------------------
    def run_trace(self, refs, instruction_count: int | None = None) -> TraceResult:
        """Push a trace through the hierarchy and report counters + timing.

        refs may be a RefBlock or an iterable of MemoryRef. instruction_count
        defaults to the block's estimate (0 for plain ref lists); it must be
        at least the number of instruction-fetch refs in the trace. An empty
        trace reports zero accesses and IPC == 1/base_cpi by convention.
        """
        before = self.level_stats()
        before_tot = self.totals()
        if isinstance(refs, RefBlock):
            icount = refs.instructions if instruction_count is None else instruction_count
            extra = self.run_block(refs)
        else:
            refs = list(refs)
            icount = 0 if instruction_count is None else instruction_count
            extra = 0
            for ref in refs:
                extra += self.access(ref)
        cpi = self.config.base_cpi
        cycles = icount * cpi + extra
        ipc = icount / cycles if cycles > 0 else 1.0 / cpi
        after = self.level_stats()
        tot = self.totals()
        return TraceResult(
            instructions=icount, cycles=cycles, ipc=ipc,
            levels={lb: after[lb].delta(before[lb]) for lb in LEVELS},
            memory_fetches=tot["memory_fetches"] - before_tot["memory_fetches"],
            memory_writebacks=tot["memory_writebacks"] - before_tot["memory_writebacks"],
            uncacheable_refs=tot["uncacheable_refs"] - before_tot["uncacheable_refs"],
            data_refs=tot["data_refs"] - before_tot["data_refs"],
            instruction_refs=tot["instruction_refs"] - before_tot["instruction_refs"],
        )


class _PythonHierarchy(Hierarchy):
    engine = "python"

    _BELOW = ((2, 3), (2, 3), (3,), ())

    def __init__(self, config: HierarchyConfig, seed: int):
        super().__init__(config, seed)
        self._caches = [_build_cache(config.level(lb), config, seed, lb) for lb in LEVELS]
        self._l1_extra = ((self._latency[0], self._latency[1])
                          if config.charge_l1_hits else (0, 0))
        self._scratch = MemoryRef(0)
        self.reset_stats()

    def reset_stats(self) -> None:
        self._stats = [LevelStats() for _ in LEVELS]
        self._totals = {"memory_fetches": 0, "memory_writebacks": 0,
                        "uncacheable_refs": 0, "data_refs": 0, "instruction_refs": 0}

    def level_stats(self) -> dict[str, LevelStats]:
        return {lb: replace(st) for lb, st in zip(LEVELS, self._stats)}

    def totals(self) -> dict[str, int]:
        return dict(self._totals)

    def access(self, ref: MemoryRef) -> int:
        return self._access_raw(ref.address, ref.flags())

    def run_block(self, block: RefBlock) -> int:
        extra = 0
        raw = self._access_raw
        for addr, flags in zip(block.addrs.tolist(), block.flags.tolist()):
            extra += raw(addr, flags)
        return extra

    def _access_raw(self, address: int, flags: int) -> int:
        tot = self._totals
        if flags & FLAG_UNCACHEABLE:
            tot["uncacheable_refs"] += 1
            return self.config.uncacheable_latency_cycles
        if flags & FLAG_INSTR:
            tot["instruction_refs"] += 1
            first = 0
        else:
            tot["data_refs"] += 1
            first = 1
        scratch = self._scratch
        scratch.address = address
        serviced = -1
        lvl = first
        while True:
            scratch.is_write = bool(flags & FLAG_WRITE) and lvl == first
            out = self._caches[lvl].access(scratch)
            st = self._stats[lvl]
            st.accesses += 1
            if out.hit:
                st.hits += 1
                serviced = lvl
                break
            st.misses += 1
            if out.victim_line_address is not None:
                st.evictions += 1
                if out.victim_dirty:
                    st.writebacks += 1
                    self._writeback_below(lvl, out.victim_line_address)
            if lvl <= 1:
                lvl = 2
            elif lvl == 2:
                lvl = 3
            else:
                break
        if serviced < 0:
            tot["memory_fetches"] += 1
            return self.config.memory_latency_cycles
        if serviced == first:
            return self._l1_extra[first]
        return self._latency[serviced]

    def _writeback_below(self, lvl: int, line_address: int) -> None:
        for below in self._BELOW[lvl]:
            if self._caches[below].write_back(line_address):
                return
        self._totals["memory_writebacks"] += 1


class _JitHierarchy(Hierarchy):
    engine = "jit"

    def __init__(self, config: HierarchyConfig, seed: int):
        super().__init__(config, seed)
        self._state = _kernel.build_state(_level_plans(config), config, seed)
        self._one_addr = np.zeros(1, np.int64)
        self._one_flag = np.zeros(1, np.uint8)

    def reset_stats(self) -> None:
        self._state.counters[:] = 0

    def level_stats(self) -> dict[str, LevelStats]:
        c = self._state.counters
        out = {}
        for i, lb in enumerate(LEVELS):
            b = i * 5
            out[lb] = LevelStats(int(c[b]), int(c[b + 1]), int(c[b + 2]),
                                 int(c[b + 3]), int(c[b + 4]))
        return out

    def totals(self) -> dict[str, int]:
        c = self._state.counters
        return {"memory_fetches": int(c[_kernel.C_MEMFETCH]),
                "memory_writebacks": int(c[_kernel.C_MEMWB]),
                "uncacheable_refs": int(c[_kernel.C_UNC]),
                "data_refs": int(c[_kernel.C_DATA]),
                "instruction_refs": int(c[_kernel.C_INSTR])}

    def access(self, ref: MemoryRef) -> int:
        self._one_addr[0] = ref.address
        self._one_flag[0] = ref.flags()
        return int(self._state.run(self._one_addr, self._one_flag))

    def run_block(self, block: RefBlock) -> int:
        return int(self._state.run(block.addrs, block.flags))


def _level_plans(config: HierarchyConfig) -> list[dict]:
    """Resolve each level to neutral geometry numbers for the array engine,
    reusing the same factories (and validation) the python engine uses."""
    plans = []
    for label in LEVELS:
        lc = config.level(label)
        if lc.kind == "newcache":
            g = make_nc_geometry(lc.size_bytes, config.line_bytes,
                                 lc.extra_index_bits, config.address_bits)
            plans.append({"label": label, "kind": _KIND_CODE[lc.kind], "num_sets": 1,
                          "ways": g.num_lines, "bits": g.logical_index_bits,
                          "map_size": 1 << g.logical_index_bits})
        else:
            assoc = {"sa_lru": lc.assoc, "direct": 1, "fa_random": FULL}[lc.kind]
            g = make_geometry(lc.size_bytes, config.line_bytes, assoc, config.address_bits)
            plans.append({"label": label, "kind": _KIND_CODE[lc.kind],
                          "num_sets": g.num_sets, "ways": g.ways,
                          "bits": g.index_bits, "map_size": 0})
    return plans


def build_hierarchy(config: HierarchyConfig, seed: int = 0,
                    engine: str = "auto") -> Hierarchy:
    """Instantiate the hierarchy with independent per-level seeded RNGs.

    engine: "python" for the object model, "jit" for the compiled array
    engine, "auto" to pick jit when available and the config is eligible.
    """
    _validate(config)
    plans = _level_plans(config)  # validates geometry for both engines
    if engine == "auto":
        engine = "jit" if _kernel.eligible(plans) else "python"
    if engine == "jit":
        if not _kernel.eligible(plans):
            raise SimError("CONFIG_INVALID",
                           "jit engine unavailable for this configuration")
        return _JitHierarchy(config, seed)
    if engine != "python":
        raise SimError("CONFIG_INVALID", f"unknown engine {engine!r}")
    return _PythonHierarchy(config, seed)
