"""Randomized-mapping secure cache (Newcache).

Logically a direct-mapped cache of 2^(n+extra) slots realized on 2^n
physical lines. Each physical line carries a logical line number register;
the set of valid logical numbers is always duplicate-free. Misses split
into two cases:

  tag miss    -- a line register matches the lookup's logical index but the
                 stored tag differs; the physical line is replaced in place.
  index miss  -- no line register matches; a physical line is drawn uniformly
                 over ALL 2^n lines (one rng draw) and replaced.

Hits and tag misses consume no randomness, which makes draw accounting
auditable. This model covers a single trust domain and measures performance
only; per-domain protection semantics are out of scope.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import SimError
from .cache_core import (AccessOutcome, MemoryRef, SplitMix64,
                         HIT, TAG_MISS, INDEX_MISS, _check_pow2, _require_cacheable)


@dataclass(frozen=True)
class NewcacheGeometry:
    """Address split for the randomized cache.

    extra_index_bits widens the logical index beyond log2(physical lines),
    enlarging the randomized namespace.
    """

    size_bytes: int
    line_bytes: int
    extra_index_bits: int
    address_bits: int
    num_lines: int
    n_bits: int            # log2(physical line count)
    offset_bits: int
    logical_index_bits: int  # n_bits + extra_index_bits
    tag_bits: int


def make_nc_geometry(size_bytes: int, line_bytes: int, extra_index_bits: int = 4,
                     address_bits: int = 48) -> NewcacheGeometry:
    size_log = _check_pow2(size_bytes, "size_bytes")
    offset_bits = _check_pow2(line_bytes, "line_bytes")
    if line_bytes > size_bytes:
        raise SimError("LINE_LARGER_THAN_CACHE",
                       f"line_bytes={line_bytes} exceeds size_bytes={size_bytes}")
    if not isinstance(extra_index_bits, int) or extra_index_bits < 0:
        raise SimError("PARAM_OUT_OF_RANGE",
                       f"extra_index_bits must be >= 0, got {extra_index_bits!r}")
    n_bits = size_log - offset_bits
    logical_index_bits = n_bits + extra_index_bits
    tag_bits = address_bits - logical_index_bits - offset_bits
    if tag_bits < 0:
        raise SimError("ADDRESS_OUT_OF_RANGE",
                       f"address_bits={address_bits} too narrow for "
                       f"logical_index_bits={logical_index_bits} + offset_bits={offset_bits}")
    return NewcacheGeometry(size_bytes, line_bytes, extra_index_bits, address_bits,
                            1 << n_bits, n_bits, offset_bits, logical_index_bits, tag_bits)


class Newcache:
    """The randomized cache model; drop-in for any hierarchy level."""

    kind = "newcache"

    def __init__(self, geometry: NewcacheGeometry, rng: SplitMix64, label: str = "L1D"):
        self.geometry = geometry
        self.label = label
        self.rng = rng
        n = geometry.num_lines
        self._lines = n
        self._lnreg = [0] * n
        self._tags = [0] * n
        self._valid = [False] * n
        self._dirty = [False] * n
        self._where: dict[int, int] = {}  # logical line number -> physical line
        self._offset_bits = geometry.offset_bits
        self._logical_bits = geometry.logical_index_bits
        self._logical_mask = (1 << geometry.logical_index_bits) - 1
        self.installs = 0
        self.evictions = 0

    def _split(self, address: int) -> tuple[int, int]:
        line = address >> self._offset_bits
        return line & self._logical_mask, line >> self._logical_bits

    def access(self, ref: MemoryRef) -> AccessOutcome:
        _require_cacheable(ref, self.label)
        logical, tag = self._split(ref.address)
        phys = self._where.get(logical)
        if phys is not None:
            if self._tags[phys] == tag:
                if ref.is_write:
                    self._dirty[phys] = True
                return AccessOutcome(HIT, None, False, self.label)
            # Logical slot reused by a different tag: replace in place, no draw.
            victim = ((self._tags[phys] << self._logical_bits) | logical) << self._offset_bits
            victim_dirty = self._dirty[phys]
            self._tags[phys] = tag
            self._dirty[phys] = ref.is_write
            self.evictions += 1
            self.installs += 1
            return AccessOutcome(TAG_MISS, victim, victim_dirty, self.label)
        phys = self.rng.randrange(self._lines)
        victim = None
        victim_dirty = False
        if self._valid[phys]:
            victim = ((self._tags[phys] << self._logical_bits) | self._lnreg[phys]) \
                << self._offset_bits
            victim_dirty = self._dirty[phys]
            del self._where[self._lnreg[phys]]
            self.evictions += 1
        self._lnreg[phys] = logical
        self._tags[phys] = tag
        self._valid[phys] = True
        self._dirty[phys] = ref.is_write
        self._where[logical] = phys
        self.installs += 1
        return AccessOutcome(INDEX_MISS, victim, victim_dirty, self.label)

    def write_back(self, address: int) -> bool:
        logical, tag = self._split(address)
        phys = self._where.get(logical)
        if phys is not None and self._tags[phys] == tag:
            self._dirty[phys] = True
            return True
        return False

    def snapshot(self) -> list[tuple[int, int]]:
        """Read-only mapping summary: (logical line number, tag) per valid
        physical line, in physical-line order. Rebuilt from the line
        registers themselves so duplicate logical numbers would show up."""
        return [(self._lnreg[p], self._tags[p])
                for p in range(self._lines) if self._valid[p]]

    def valid_count(self) -> int:
        return sum(self._valid)
