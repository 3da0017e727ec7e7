"""Synthetic cloud-server workload generators.

Each benchmark models one server category (web, database, mail, file,
streaming, application, compute) plus an idle baseline. A workload is a
deterministic stream of client requests; every request expands into a
memory-reference template over named regions of the server's address
space. Request payloads and driver parameters follow the suite's
client-tool defaults: the web driver issues 1000 requests at concurrency
10, the database driver runs 200 transactions against a 100-record table,
the mail driver runs one connection with 1 KB messages in batches of 3
for a fixed stressing time, the file driver has 3 clients each writing or
reading five 64 kB files, streaming serves 1/3/30 concurrent sessions,
and the application driver fetches each of several URLs 10 times at
concurrency 2.

Templates generate line-granularity (64 B) references. Only the NIC ring
region is uncacheable; device receive/transmit refs bracket every request.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from .errors import SimError
from .cache_core import (FLAG_INSTR, FLAG_UNCACHEABLE, FLAG_WRITE,
                         MemoryRef, RefBlock, SplitMix64, derive_seed)

LINE_BYTES = 64

BENCHMARKS = ("web", "db", "mail", "file_write", "file_read", "streaming",
              "app", "compute", "idle")
# the eight client-driven workloads swept in experiments (idle has no traffic)
SWEEP_BENCHMARKS = tuple(b for b in BENCHMARKS if b != "idle")

# per-benchmark parameters: name -> (default, min, max)
_FILE_PARAMS = {
    "clients": (3, 1, 64),
    "files_per_client": (5, 1, 1024),
    "file_kb": (64, 1, 65536),
}
PARAM_SPECS: dict[str, dict[str, tuple[int, int, int]]] = {
    "web": {
        "requests": (1000, 1, 10**7),
        "concurrency": (10, 1, 10**4),
        "page_kb": (8, 1, 4096),
        "pages": (32, 1, 4096),
        "heap_touches": (16, 0, 4096),
    },
    "db": {
        "records": (100, 1, 10**6),
        "transactions": (200, 1, 10**7),
        "chase_depth": (3, 0, 64),
        "row_touches": (4, 0, 4096),
        "concurrency": (1, 1, 1024),
    },
    "mail": {
        "threads": (1, 1, 64),
        "message_kb": (1, 1, 1024),
        "per_connection": (3, 1, 1024),
        "seconds": (10, 1, 3600),
    },
    "file_write": dict(_FILE_PARAMS),
    "file_read": dict(_FILE_PARAMS),
    "streaming": {
        "streams": (3, 1, 256),
        "chunks_per_stream": (50, 1, 10**6),
        "chunk_kb": (16, 1, 1024),
    },
    "app": {
        "urls": (3, 1, 64),
        "requests_per_url": (10, 1, 10**6),
        "concurrency": (2, 1, 1024),
        "page_kb": (4, 1, 4096),
        "chase_depth": (8, 0, 64),
    },
    "compute": {
        "support_vectors": (1000, 1, 10**6),
        "features": (128, 8, 65536),
        "instances": (64, 1, 10**6),
    },
    "idle": {},
}
# instructions per memory reference; common to all benchmarks
_ALPHA_SPEC = ("alpha", (4, 1, 64))


@dataclass(frozen=True)
class WorkloadSpec:
    benchmark: str
    params: dict
    seed: int


def make_workload(benchmark: str, overrides: dict | None = None,
                  seed: int = 0) -> WorkloadSpec:
    """Resolve a benchmark name plus overrides into a validated spec."""
    if benchmark not in PARAM_SPECS:
        raise SimError("UNKNOWN_BENCHMARK",
                       f"{benchmark!r} is not one of {', '.join(BENCHMARKS)}")
    spec_table = dict(PARAM_SPECS[benchmark])
    spec_table[_ALPHA_SPEC[0]] = _ALPHA_SPEC[1]
    params = {name: default for name, (default, _, _) in spec_table.items()}
    for key, value in (overrides or {}).items():
        if key not in spec_table:
            raise SimError("PARAM_OUT_OF_RANGE",
                           f"{benchmark} has no parameter {key!r}")
        _, lo, hi = spec_table[key]
        if not isinstance(value, int) or not (lo <= value <= hi):
            raise SimError("PARAM_OUT_OF_RANGE",
                           f"{benchmark}.{key}={value!r} outside [{lo}, {hi}]")
        params[key] = value
    return WorkloadSpec(benchmark, params, seed)


# ---------------------------------------------------------------------------
# server address-space layout

@dataclass(frozen=True)
class Region:
    name: str
    base: int
    size_bytes: int
    uncacheable: bool = False

    @property
    def lines(self) -> int:
        return self.size_bytes // LINE_BYTES

    def line_addr(self, line_index: int) -> int:
        return self.base + (line_index % self.lines) * LINE_BYTES

    def contains(self, address: int) -> bool:
        return self.base <= address < self.base + self.size_bytes


@dataclass(frozen=True)
class FootprintMap:
    regions: dict[str, Region]

    def region(self, name: str) -> Region:
        return self.regions[name]

    def region_of(self, address: int) -> str | None:
        for name, region in self.regions.items():
            if region.contains(address):
                return name
        return None


_LAYOUT_BASE = 0x1000_0000
_ALIGN = 1 << 20


def make_footprint(spec: WorkloadSpec) -> FootprintMap:
    """Lay out the server process regions, disjoint and 1 MB aligned.

    Sizes are modeling defaults chosen so working sets straddle the L1/L2/L3
    boundaries; the database table scales with the record count and the
    stream buffers with the session count.
    """
    records = spec.params.get("records", 100)
    streams = spec.params.get("streams", 1)
    sizes = [
        ("code", 256 * 1024, False),
        ("heap", 4 * 1024 * 1024, False),
        ("file_cache", 16 * 1024 * 1024, False),
        ("db_table", records * 512, False),
        ("db_index", 64 * 1024, False),
        ("mail_queue", 256 * 1024, False),
        ("stream_buffers", 256 * 1024 * streams, False),
        ("nic_ring", 64 * 1024, True),
    ]
    regions = {}
    base = _LAYOUT_BASE
    for name, size, uncacheable in sizes:
        regions[name] = Region(name, base, size, uncacheable)
        base += -(-size // _ALIGN) * _ALIGN
    return FootprintMap(regions)


# ---------------------------------------------------------------------------
# requests

@dataclass(frozen=True)
class Request:
    op: str
    template: str
    payload_bytes: int
    upload_bytes: int     # client -> server message size
    download_bytes: int   # server -> client message size
    params: dict
    alpha: int = 4
    arrival: str = "client"


@dataclass
class ClientState:
    """Driver-side bookkeeping: issue window and progress."""

    issued: int = 0
    completed: int = 0
    in_flight: int = 0
    now_us: float = 0.0
    origin_us: float = 0.0

    def complete(self) -> None:
        self.completed += 1
        self.in_flight -= 1


# TCP port each server-side service listens on; the readiness daemon polls it
_SERVICE_PORTS = {"web": 8080, "db": 3306, "mail": 25, "file_write": 445,
                  "file_read": 445, "streaming": 7654, "app": 8080, "compute": 22}


def service_ports(benchmark: str) -> frozenset[int]:
    """Ports the benchmark's service opens (empty for the idle baseline)."""
    port = _SERVICE_PORTS.get(benchmark)
    return frozenset() if port is None else frozenset({port})


_CONCURRENCY_KEY = {"web": "concurrency", "db": "concurrency", "mail": "threads",
                    "file_write": "clients", "file_read": "clients",
                    "streaming": "streams", "app": "concurrency"}


def concurrency_of(spec: WorkloadSpec) -> int:
    if spec.benchmark == "compute":
        return 1
    if spec.benchmark == "idle":
        return 0
    return spec.params[_CONCURRENCY_KEY[spec.benchmark]]


def request_budget(spec: WorkloadSpec) -> int | None:
    """Total requests the driver will issue; None for time-bounded mail."""
    p = spec.params
    b = spec.benchmark
    if b == "web":
        return p["requests"]
    if b == "db":
        return p["transactions"]
    if b == "mail":
        return None
    if b in ("file_write", "file_read"):
        return p["clients"] * p["files_per_client"]
    if b == "streaming":
        return p["streams"] * p["chunks_per_stream"]
    if b == "app":
        return p["urls"] * p["requests_per_url"]
    if b == "compute":
        return p["instances"]
    return 0


def next_request(spec: WorkloadSpec, state: ClientState,
                 rng: SplitMix64) -> Request | None:
    """Issue the next request, honouring the concurrency window and budget.

    Returns None while the window is full, and forever once the request
    budget (or, for mail, the stressing-time budget) is exhausted.
    """
    if spec.benchmark == "idle":
        return None
    if state.in_flight >= concurrency_of(spec):
        return None
    if spec.benchmark == "mail":
        if state.now_us - state.origin_us >= spec.params["seconds"] * 1e6:
            return None
    elif state.issued >= request_budget(spec):
        return None
    request = _BUILDERS[spec.benchmark](spec, state.issued, rng)
    state.issued += 1
    state.in_flight += 1
    return request


def _build_web(spec, seq, rng):
    p = spec.params
    page = rng.randrange(p["pages"])
    payload = p["page_kb"] * 1024
    return Request(f"GET /page{page}", "web_page", payload, 220, payload,
                   {"seq": seq, "page": page, "heap_touches": p["heap_touches"]},
                   p["alpha"])


def _build_db(spec, seq, rng):
    p = spec.params
    payload = p["row_touches"] * 512
    return Request(f"txn#{seq}", "db_txn", payload, 320, max(payload, 128),
                   {"seq": seq, "chase_depth": p["chase_depth"],
                    "row_touches": p["row_touches"], "records": p["records"]},
                   p["alpha"])


def _build_mail(spec, seq, rng):
    p = spec.params
    payload = p["message_kb"] * 1024
    return Request(f"mail#{seq}", "mail_msg", payload, payload + 256, 64,
                   {"seq": seq, "new_connection": seq % p["per_connection"] == 0},
                   p["alpha"])


def _build_file(spec, seq, rng, write):
    p = spec.params
    payload = p["file_kb"] * 1024
    verb = "write" if write else "read"
    upload = payload + 180 if write else 180
    download = 64 if write else payload
    return Request(f"{verb} f{seq}.dat", "file_op", payload, upload, download,
                   {"seq": seq, "file_index": seq, "write": write}, p["alpha"])


def _build_streaming(spec, seq, rng):
    p = spec.params
    session = seq % p["streams"]
    chunk = seq // p["streams"]
    payload = p["chunk_kb"] * 1024
    return Request(f"PLAY s{session}#c{chunk}", "stream_chunk", payload, 120, payload,
                   {"seq": seq, "session": session, "chunk": chunk}, p["alpha"])


def _build_app(spec, seq, rng):
    p = spec.params
    url = seq // p["requests_per_url"]
    payload = p["page_kb"] * 1024
    return Request(f"GET /app/u{url}", "app_page", payload, 260, payload,
                   {"seq": seq, "url": url, "chase_depth": p["chase_depth"]},
                   p["alpha"])


def _build_compute(spec, seq, rng):
    p = spec.params
    payload = p["features"] * 8
    return Request(f"classify#{seq}", "svm_classify", payload, payload + 128, 32,
                   {"seq": seq, "instance": seq,
                    "support_vectors": p["support_vectors"],
                    "features": p["features"]},
                   p["alpha"])


_BUILDERS = {
    "web": _build_web,
    "db": _build_db,
    "mail": _build_mail,
    "file_write": lambda spec, seq, rng: _build_file(spec, seq, rng, True),
    "file_read": lambda spec, seq, rng: _build_file(spec, seq, rng, False),
    "streaming": _build_streaming,
    "app": _build_app,
    "compute": _build_compute,
}


# ---------------------------------------------------------------------------
# reference templates

_READ = 0
_WRITE = FLAG_WRITE
_IFETCH = FLAG_INSTR
_NIC_READ = FLAG_UNCACHEABLE
_NIC_WRITE = FLAG_UNCACHEABLE | FLAG_WRITE


class _TraceBuilder:
    """Accumulates address/flag segments in order, cheaply."""

    def __init__(self):
        self._chunks: list[tuple[np.ndarray, np.ndarray]] = []
        self._pending_addrs: list[int] = []
        self._pending_flags: list[int] = []

    def one(self, region: Region, line_index: int, flags: int) -> None:
        self._pending_addrs.append(region.line_addr(line_index))
        self._pending_flags.append(flags)

    def _flush(self) -> None:
        if self._pending_addrs:
            self._chunks.append((np.array(self._pending_addrs, np.int64),
                                 np.array(self._pending_flags, np.uint8)))
            self._pending_addrs = []
            self._pending_flags = []

    def seq(self, region: Region, start_line: int, count: int, flags: int,
            window_base: int = 0, window_lines: int | None = None) -> None:
        """count sequential lines from start_line, wrapping inside the window
        (the whole region by default)."""
        if count <= 0:
            return
        self._flush()
        window = region.lines if window_lines is None else window_lines
        idx = window_base + (start_line + np.arange(count, dtype=np.int64)) % window
        addrs = region.base + idx * LINE_BYTES
        self._chunks.append((addrs, np.full(count, flags, np.uint8)))

    def finish(self, alpha: int) -> RefBlock:
        self._flush()
        if not self._chunks:
            return RefBlock(np.empty(0, np.int64), np.empty(0, np.uint8), 0)
        addrs = np.concatenate([c[0] for c in self._chunks])
        flags = np.concatenate([c[1] for c in self._chunks])
        return RefBlock(addrs, flags, instructions=alpha * len(addrs))


@functools.lru_cache(maxsize=None)
def _code_base(template: str, code_lines: int) -> int:
    return derive_seed(0, template) % code_lines


def _code(b: _TraceBuilder, fp: FootprintMap, template: str, count: int,
          offset: int = 0) -> None:
    code = fp.region("code")
    b.seq(code, _code_base(template, code.lines) + offset, count, _IFETCH)


_SCRATCH_LINES = 64


def _scratch(b: _TraceBuilder, fp: FootprintMap) -> None:
    """Hot per-request state (stack frames, connection structs): a small
    fixed window at the top of the heap, reused by every request."""
    heap = fp.region("heap")
    base = heap.lines - _SCRATCH_LINES
    b.seq(heap, base, 24, _READ)
    b.seq(heap, base, 8, _WRITE)


def _nic_rx(b, fp, seq, count):
    b.seq(fp.region("nic_ring"), (seq * 8) % fp.region("nic_ring").lines,
          count, _NIC_READ)


def _nic_tx(b, fp, seq, count):
    nic = fp.region("nic_ring")
    b.seq(nic, (seq * 8 + 4) % nic.lines, count, _NIC_WRITE)


def _expand_web(req, fp, rng):
    b = _TraceBuilder()
    p = req.params
    _nic_rx(b, fp, p["seq"], 4)
    _code(b, fp, "web_page", 32)
    _scratch(b, fp)
    heap = fp.region("heap")
    for _ in range(p["heap_touches"]):
        b.one(heap, rng.randrange(heap.lines), _READ)
    page_lines = req.payload_bytes // LINE_BYTES
    b.seq(fp.region("file_cache"), p["page"] * page_lines, page_lines, _READ)
    _nic_tx(b, fp, p["seq"], 4)
    return b.finish(req.alpha)


def _expand_db(req, fp, rng):
    b = _TraceBuilder()
    p = req.params
    _nic_rx(b, fp, p["seq"], 4)
    _code(b, fp, "db_txn", 32)
    _scratch(b, fp)
    index = fp.region("db_index")
    cursor = rng.randrange(index.lines)
    for _ in range(p["chase_depth"]):  # dependent chain: next hop from current
        b.one(index, cursor, _READ)
        cursor = (cursor * 2654435761 + 911) % index.lines
    table = fp.region("db_table")
    for j in range(p["row_touches"]):
        # one field of a 512 B row: a random line inside it, so hot rows
        # spread over all cache sets instead of aliasing every 8th set
        row_line = rng.randrange(p["records"]) * 8 + rng.randrange(8)
        b.one(table, row_line, _READ)
        if j % 4 == 3:  # every 4th touched row is updated
            b.one(table, row_line, _WRITE)
    _nic_tx(b, fp, p["seq"], 4)
    return b.finish(req.alpha)


def _expand_mail(req, fp, rng):
    b = _TraceBuilder()
    p = req.params
    if p["new_connection"]:
        _nic_rx(b, fp, p["seq"] + 1, 2)
        _code(b, fp, "smtp_conn", 16)
    _nic_rx(b, fp, p["seq"], 4)
    _code(b, fp, "mail_msg", 32)
    _scratch(b, fp)
    heap = fp.region("heap")
    for _ in range(4):  # recipient lookup
        b.one(heap, rng.randrange(heap.lines), _READ)
    queue = fp.region("mail_queue")
    msg_lines = req.payload_bytes // LINE_BYTES
    b.seq(queue, p["seq"] * msg_lines, msg_lines, _WRITE)
    _nic_tx(b, fp, p["seq"], 4)
    return b.finish(req.alpha)


def _expand_file(req, fp, rng):
    b = _TraceBuilder()
    p = req.params
    data_flags = _WRITE if p["write"] else _READ
    _nic_rx(b, fp, p["seq"], 4)
    _code(b, fp, "file_op", 32)
    _scratch(b, fp)
    heap = fp.region("heap")
    meta_base = (p["file_index"] * 8) % heap.lines
    b.seq(heap, meta_base, 4, _READ)     # dentry/inode lookup
    b.seq(heap, meta_base + 4, 4, _WRITE)  # metadata update
    file_lines = req.payload_bytes // LINE_BYTES
    b.seq(fp.region("file_cache"), p["file_index"] * file_lines, file_lines, data_flags)
    _nic_tx(b, fp, p["seq"], 4)
    return b.finish(req.alpha)


def _expand_streaming(req, fp, rng):
    b = _TraceBuilder()
    p = req.params
    _nic_rx(b, fp, p["seq"], 2)
    _code(b, fp, "stream_chunk", 16)
    _scratch(b, fp)
    buffers = fp.region("stream_buffers")
    session_lines = (256 * 1024) // LINE_BYTES
    chunk_lines = req.payload_bytes // LINE_BYTES
    b.seq(buffers, p["chunk"] * chunk_lines, chunk_lines, _READ,
          window_base=p["session"] * session_lines, window_lines=session_lines)
    _nic_tx(b, fp, p["seq"], 4)
    return b.finish(req.alpha)


def _expand_app(req, fp, rng):
    b = _TraceBuilder()
    p = req.params
    _nic_rx(b, fp, p["seq"], 4)
    _code(b, fp, "app_page", 64, offset=p["url"] * 64)
    _scratch(b, fp)
    heap = fp.region("heap")
    cursor = rng.randrange(heap.lines)
    for _ in range(p["chase_depth"]):  # session/bean object walk
        b.one(heap, cursor, _READ)
        cursor = (cursor * 2654435761 + 337) % heap.lines
    page_lines = req.payload_bytes // LINE_BYTES
    b.seq(heap, p["seq"] * page_lines, page_lines, _WRITE)  # rendered page
    _nic_tx(b, fp, p["seq"], 4)
    return b.finish(req.alpha)


def _expand_compute(req, fp, rng):
    b = _TraceBuilder()
    p = req.params
    _nic_rx(b, fp, p["seq"], 4)
    _code(b, fp, "svm_classify", 32)
    _scratch(b, fp)
    heap = fp.region("heap")
    model_lines = p["support_vectors"] * p["features"] // 8  # 8 B per weight
    vec_lines = max(p["features"] // 8, 1)
    slot = model_lines + (p["instance"] * vec_lines) % max(heap.lines - model_lines, 1)
    b.seq(heap, slot, vec_lines, _READ)          # the instance vector
    b.seq(heap, 0, min(model_lines, heap.lines), _READ)  # dense dot products
    b.one(heap, slot, _WRITE)                    # decision value
    _nic_tx(b, fp, p["seq"], 4)
    return b.finish(req.alpha)


def _expand_idle(req, fp, rng):
    b = _TraceBuilder()
    _code(b, fp, "idle_tick", 16)
    return b.finish(req.alpha)


_TEMPLATES = {
    "web_page": _expand_web,
    "db_txn": _expand_db,
    "mail_msg": _expand_mail,
    "file_op": _expand_file,
    "stream_chunk": _expand_streaming,
    "app_page": _expand_app,
    "svm_classify": _expand_compute,
    "idle_tick": _expand_idle,
}


def idle_tick_request(tick: int, alpha: int = 4) -> Request:
    """Housekeeping work the server does while polling its own ports."""
    return Request(f"tick#{tick}", "idle_tick", 0, 0, 0, {"seq": tick}, alpha,
                   arrival="server")


def expand_request_block(request: Request, footprint: FootprintMap,
                         rng: SplitMix64) -> RefBlock:
    """Expand one request into its reference template (bulk-array form)."""
    return _TEMPLATES[request.template](request, footprint, rng)


def expand_request(request: Request, footprint: FootprintMap,
                   rng: SplitMix64) -> tuple[list[MemoryRef], int]:
    """Per-object view of expand_request_block: (refs, instruction estimate)."""
    block = expand_request_block(request, footprint, rng)
    return block.to_refs(), block.instructions
