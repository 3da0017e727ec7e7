"""Address decomposition and conventional cache models.

Three deterministic cache organizations live here: direct-mapped,
set-associative with exact LRU, and fully-associative with random
replacement. All of them operate on whole cache lines and report one
AccessOutcome per access, which is what the hierarchy layer turns into
hit/miss/eviction counters.
"""

from __future__ import annotations

import hashlib
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from .errors import SimError

# Associativity sentinel: a single set spanning the whole cache.
FULL = "full"

# Outcome kinds. The first three are produced by the conventional caches;
# tag_miss/index_miss are produced by the randomized-mapping cache.
HIT = "hit"
COLD_MISS = "cold_miss"
REPLACE_MISS = "replace_miss"
TAG_MISS = "tag_miss"
INDEX_MISS = "index_miss"

# MemoryRef/RefBlock flag bits.
FLAG_WRITE = 1
FLAG_INSTR = 2
FLAG_UNCACHEABLE = 4

_M64 = (1 << 64) - 1


class SplitMix64:
    """Tiny deterministic 64-bit PRNG.

    The jit kernel implements the identical recurrence, so replacement
    draws match bit-for-bit between the pure-Python caches and the
    array engine (a dedicated test pins this).
    """

    def __init__(self, seed: int):
        self._state = seed & _M64
        self.draws = 0

    def next_u64(self) -> int:
        s = (self._state + 0x9E3779B97F4A7C15) & _M64
        self._state = s
        z = s
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
        self.draws += 1
        return (z ^ (z >> 31)) & _M64

    def randrange(self, n: int) -> int:
        return self.next_u64() % n


def derive_seed(seed: int, label: str) -> int:
    """Stable per-component seed so adding one consumer never perturbs another.

    Uses blake2b rather than hash() because the latter is salted per process.
    """
    digest = hashlib.blake2b(f"{seed}:{label}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


@dataclass(frozen=True)
class CacheGeometry:
    """Size/line/associativity decomposition of addresses into tag/index/offset."""

    size_bytes: int
    line_bytes: int
    assoc: int | str  # ways per set, or FULL
    address_bits: int
    num_lines: int
    num_sets: int
    ways: int  # assoc resolved to an integer (num_lines when FULL)
    offset_bits: int
    index_bits: int
    tag_bits: int


def _check_pow2(value: int, name: str) -> int:
    if not isinstance(value, int) or value <= 0:
        raise SimError("NON_POWER_OF_TWO", f"{name} must be a positive integer, got {value!r}")
    if value & (value - 1):
        raise SimError("NON_POWER_OF_TWO", f"{name}={value} is not a power of two")
    return value.bit_length() - 1


def make_geometry(size_bytes: int, line_bytes: int, assoc: int | str = 8,
                  address_bits: int = 48) -> CacheGeometry:
    """Validate cache parameters and derive the address-bit split.

    assoc may be the FULL sentinel for a fully-associative cache
    (num_sets == 1, index_bits == 0).
    """
    _check_pow2(size_bytes, "size_bytes")
    offset_bits = _check_pow2(line_bytes, "line_bytes")
    if line_bytes > size_bytes:
        raise SimError("LINE_LARGER_THAN_CACHE",
                       f"line_bytes={line_bytes} exceeds size_bytes={size_bytes}")
    num_lines = size_bytes // line_bytes
    if assoc == FULL:
        ways = num_lines
    else:
        _check_pow2(assoc, "assoc")
        if assoc > num_lines:
            raise SimError("ASSOC_EXCEEDS_LINES",
                           f"assoc={assoc} exceeds num_lines={num_lines}")
        ways = assoc
    num_sets = num_lines // ways
    index_bits = num_sets.bit_length() - 1
    tag_bits = address_bits - index_bits - offset_bits
    if address_bits <= 0 or tag_bits < 0:
        raise SimError("ADDRESS_OUT_OF_RANGE",
                       f"address_bits={address_bits} too narrow for "
                       f"index_bits={index_bits} + offset_bits={offset_bits}")
    return CacheGeometry(size_bytes, line_bytes, assoc, address_bits, num_lines,
                         num_sets, ways, offset_bits, index_bits, tag_bits)


def decompose(address: int, geometry: CacheGeometry) -> tuple[int, int, int]:
    """Split a byte address into (tag, index, offset)."""
    if address < 0 or address >= (1 << geometry.address_bits):
        raise SimError("ADDRESS_OUT_OF_RANGE",
                       f"address {address:#x} outside {geometry.address_bits}-bit space")
    offset = address & (geometry.line_bytes - 1)
    index = (address >> geometry.offset_bits) & (geometry.num_sets - 1)
    tag = address >> (geometry.offset_bits + geometry.index_bits)
    return tag, index, offset


@dataclass(slots=True)
class MemoryRef:
    """One memory access: byte address plus read/write, cacheable and I/D flags."""

    address: int
    is_write: bool = False
    is_cacheable: bool = True
    is_instruction: bool = False

    def flags(self) -> int:
        f = 0
        if self.is_write:
            f |= FLAG_WRITE
        if self.is_instruction:
            f |= FLAG_INSTR
        if not self.is_cacheable:
            f |= FLAG_UNCACHEABLE
        return f


@dataclass(slots=True)
class AccessOutcome:
    """Result of one cache access. victim_line_address is the line-aligned
    byte address of a displaced valid line, or None."""

    kind: str
    victim_line_address: int | None
    victim_dirty: bool
    level_label: str

    @property
    def hit(self) -> bool:
        return self.kind == HIT


class RefBlock:
    """A trace chunk as parallel numpy arrays plus an instruction estimate.

    addrs holds byte addresses (int64); flags holds FLAG_* bitmasks (uint8).
    This is the bulk carrier consumed by the jit engine; to_refs() gives the
    per-object view for small-scale tests.
    """

    __slots__ = ("addrs", "flags", "instructions")

    def __init__(self, addrs: np.ndarray, flags: np.ndarray, instructions: int = 0):
        self.addrs = np.ascontiguousarray(addrs, dtype=np.int64)
        self.flags = np.ascontiguousarray(flags, dtype=np.uint8)
        self.instructions = instructions

    def __len__(self) -> int:
        return int(self.addrs.shape[0])

    def to_refs(self) -> list[MemoryRef]:
        return [
            MemoryRef(int(a), bool(f & FLAG_WRITE), not (f & FLAG_UNCACHEABLE),
                      bool(f & FLAG_INSTR))
            for a, f in zip(self.addrs.tolist(), self.flags.tolist())
        ]

    @staticmethod
    def from_refs(refs, instructions: int = 0) -> "RefBlock":
        addrs = np.fromiter((r.address for r in refs), dtype=np.int64, count=len(refs))
        flags = np.fromiter((r.flags() for r in refs), dtype=np.uint8, count=len(refs))
        return RefBlock(addrs, flags, instructions)

    @staticmethod
    def concat(blocks: list["RefBlock"]) -> "RefBlock":
        if not blocks:
            return RefBlock(np.empty(0, np.int64), np.empty(0, np.uint8), 0)
        return RefBlock(np.concatenate([b.addrs for b in blocks]),
                        np.concatenate([b.flags for b in blocks]),
                        sum(b.instructions for b in blocks))


def _require_cacheable(ref: MemoryRef, label: str) -> None:
    if not ref.is_cacheable:
        raise SimError("UNCACHEABLE_REF",
                       f"uncacheable ref {ref.address:#x} reached cache {label}; "
                       "the caller must filter device accesses")


class SACache:
    """Set-associative cache with exact (true) LRU replacement.

    Each set is an OrderedDict mapping tag -> dirty, most-recently-used last.
    Write-back, write-allocate; consumes no randomness.
    """

    kind = "sa_lru"

    def __init__(self, geometry: CacheGeometry, label: str = "L1"):
        self.geometry = geometry
        self.label = label
        self._sets = [OrderedDict() for _ in range(geometry.num_sets)]
        self._ways = geometry.ways
        self._offset_bits = geometry.offset_bits
        self._index_bits = geometry.index_bits
        self._index_mask = geometry.num_sets - 1
        self.installs = 0
        self.evictions = 0

    def access(self, ref: MemoryRef) -> AccessOutcome:
        _require_cacheable(ref, self.label)
        line = ref.address >> self._offset_bits
        index = line & self._index_mask
        tag = line >> self._index_bits
        entries = self._sets[index]
        if tag in entries:
            entries.move_to_end(tag)
            if ref.is_write:
                entries[tag] = True
            return AccessOutcome(HIT, None, False, self.label)
        victim = None
        victim_dirty = False
        if len(entries) >= self._ways:
            victim_tag, victim_dirty = entries.popitem(last=False)
            victim = ((victim_tag << self._index_bits) | index) << self._offset_bits
            self.evictions += 1
        entries[tag] = ref.is_write
        self.installs += 1
        kind = REPLACE_MISS if victim is not None else COLD_MISS
        return AccessOutcome(kind, victim, victim_dirty, self.label)

    def write_back(self, address: int) -> bool:
        """Absorb a writeback from the level above: mark dirty if present.

        Does not touch LRU order and never allocates; returns False when the
        line is absent so the caller can forward the writeback downward.
        """
        line = address >> self._offset_bits
        entries = self._sets[line & self._index_mask]
        tag = line >> self._index_bits
        if tag in entries:
            entries[tag] = True
            return True
        return False

    def valid_count(self) -> int:
        return sum(len(s) for s in self._sets)

    def contains(self, address: int) -> bool:
        line = address >> self._offset_bits
        return (line >> self._index_bits) in self._sets[line & self._index_mask]


class DMCache:
    """Direct-mapped cache: one way per set, dedicated flat-array implementation.

    Kept separate from SACache(assoc=1) on purpose so the two can be compared
    as independent routes to the same semantics.
    """

    kind = "direct"

    def __init__(self, geometry: CacheGeometry, label: str = "L1"):
        if geometry.ways != 1:
            raise SimError("ASSOC_EXCEEDS_LINES",
                           f"direct-mapped cache needs assoc=1, got {geometry.assoc}")
        self.geometry = geometry
        self.label = label
        n = geometry.num_sets
        self._tags = [0] * n
        self._valid = [False] * n
        self._dirty = [False] * n
        self._offset_bits = geometry.offset_bits
        self._index_bits = geometry.index_bits
        self._index_mask = n - 1
        self.installs = 0
        self.evictions = 0

    def access(self, ref: MemoryRef) -> AccessOutcome:
        _require_cacheable(ref, self.label)
        line = ref.address >> self._offset_bits
        index = line & self._index_mask
        tag = line >> self._index_bits
        if self._valid[index] and self._tags[index] == tag:
            if ref.is_write:
                self._dirty[index] = True
            return AccessOutcome(HIT, None, False, self.label)
        victim = None
        victim_dirty = False
        if self._valid[index]:
            victim = ((self._tags[index] << self._index_bits) | index) << self._offset_bits
            victim_dirty = self._dirty[index]
            self.evictions += 1
        self._tags[index] = tag
        self._valid[index] = True
        self._dirty[index] = ref.is_write
        self.installs += 1
        kind = REPLACE_MISS if victim is not None else COLD_MISS
        return AccessOutcome(kind, victim, victim_dirty, self.label)

    def write_back(self, address: int) -> bool:
        line = address >> self._offset_bits
        index = line & self._index_mask
        if self._valid[index] and self._tags[index] == (line >> self._index_bits):
            self._dirty[index] = True
            return True
        return False

    def valid_count(self) -> int:
        return sum(self._valid)


class FARandomCache:
    """Fully-associative cache with uniform random victim slots.

    On every miss one slot is drawn uniformly over ALL ways, valid or not
    (exactly one rng draw per miss, none on hits). Entries never move between
    slots. This mirrors the randomized-mapping cache's index-miss policy so
    the two can be compared draw-for-draw when the latter runs tagless.
    """

    kind = "fa_random"

    def __init__(self, geometry: CacheGeometry, rng: SplitMix64, label: str = "L1"):
        if geometry.num_sets != 1:
            raise SimError("ASSOC_EXCEEDS_LINES",
                           f"random cache must be fully associative, got {geometry.num_sets} sets")
        self.geometry = geometry
        self.label = label
        self.rng = rng
        n = geometry.ways
        self._lines = n
        self._tags = [0] * n
        self._valid = [False] * n
        self._dirty = [False] * n
        self._where: dict[int, int] = {}  # line number -> slot
        self._offset_bits = geometry.offset_bits
        self.installs = 0
        self.evictions = 0

    def access(self, ref: MemoryRef) -> AccessOutcome:
        _require_cacheable(ref, self.label)
        line = ref.address >> self._offset_bits
        slot = self._where.get(line)
        if slot is not None:
            if ref.is_write:
                self._dirty[slot] = True
            return AccessOutcome(HIT, None, False, self.label)
        slot = self.rng.randrange(self._lines)
        victim = None
        victim_dirty = False
        if self._valid[slot]:
            victim = self._tags[slot] << self._offset_bits
            victim_dirty = self._dirty[slot]
            del self._where[self._tags[slot]]
            self.evictions += 1
        self._tags[slot] = line
        self._valid[slot] = True
        self._dirty[slot] = ref.is_write
        self._where[line] = slot
        self.installs += 1
        kind = REPLACE_MISS if victim is not None else COLD_MISS
        return AccessOutcome(kind, victim, victim_dirty, self.label)

    def write_back(self, address: int) -> bool:
        slot = self._where.get(address >> self._offset_bits)
        if slot is None:
            return False
        self._dirty[slot] = True
        return True

    def valid_count(self) -> int:
        return len(self._where)
