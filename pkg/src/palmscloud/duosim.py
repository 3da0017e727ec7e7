"""Discrete-event simulation of the two-node client/server system.

A drive node (client, 10.0.0.2) and a test node (server, 10.0.0.1) are
joined by a point-to-point link. Both nodes boot; the server starts its
service; a readiness daemon polls the service port at a fixed interval and
a READY signal crosses the link once the port is open. Only then does the
client start issuing requests, windowed by the workload's concurrency.
Each request that arrives at the server expands into its memory-reference
template, runs through the server's cache hierarchy, and is answered after
the resulting cycles are converted to simulated time (the server handles
requests one at a time, FIFO). Readiness polls, and the housekeeping ticks
an otherwise idle server keeps running, cost a small instruction-fetch
template so every run carries the same baseline footprint.

Events are processed in (timestamp, sequence) order; the sequence number
breaks ties deterministically, so identical inputs replay identically.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from .errors import SimError
from .cache_core import SplitMix64, derive_seed
from .hierarchy import Hierarchy, HierarchyConfig, LevelStats, build_hierarchy
from .workloads import (ClientState, FootprintMap, WorkloadSpec,
                        expand_request_block, idle_tick_request, make_footprint,
                        next_request, service_ports)

BOOT_DELAY_US = 1000.0
SERVICE_START_US = 500.0
POLL_INTERVAL_US = 100.0
IDLE_TICK_INTERVAL_US = 1000.0
DEFAULT_CYCLES_PER_US = 2000.0  # 2 GHz-class server clock
READY_SIGNAL_BYTES = 1

BOOT_DONE = "BOOT_DONE"
SERVICE_UP = "SERVICE_UP"
POLL_PORT = "POLL_PORT"
READY_SENT = "READY_SENT"
REQUEST_ARRIVES = "REQUEST_ARRIVES"
RESPONSE_ARRIVES = "RESPONSE_ARRIVES"
SIM_END = "SIM_END"


@dataclass(frozen=True)
class LinkConfig:
    """Point-to-point link: fixed propagation plus store-and-forward time."""

    propagation_us: float = 50.0
    bytes_per_us: float = 125.0   # 1 Gb/s class
    overhead_bytes: int = 64      # framing per message

    def __post_init__(self):
        if self.propagation_us <= 0 or self.bytes_per_us <= 0 or self.overhead_bytes <= 0:
            raise SimError("CONFIG_INVALID", f"link parameters must be positive: {self}")

    def transfer_us(self, payload_bytes: int) -> float:
        return self.propagation_us + (payload_bytes + self.overhead_bytes) / self.bytes_per_us


@dataclass(frozen=True)
class Event:
    time_us: float
    seq: int
    kind: str
    payload: object = None


class EventQueue:
    """Min-heap of events ordered by (timestamp, insertion sequence)."""

    def __init__(self):
        self._heap: list[tuple[float, int, Event]] = []
        self._seq = 0

    def push(self, time_us: float, kind: str, payload: object = None) -> Event:
        event = Event(time_us, self._seq, kind, payload)
        heapq.heappush(self._heap, (time_us, self._seq, event))
        self._seq += 1
        return event

    def step(self) -> Event:
        if not self._heap:
            raise SimError("EMPTY_QUEUE", "no events left to process")
        return heapq.heappop(self._heap)[2]

    def peek_time(self) -> float:
        return self._heap[0][0]

    def __len__(self) -> int:
        return len(self._heap)


@dataclass
class Node:
    role: str      # "test" (server) or "drive" (client)
    address: str
    hierarchy: Hierarchy | None = None
    footprint: FootprintMap | None = None
    open_ports: frozenset[int] = frozenset()  # filled once the service is up
    workload: WorkloadSpec | None = None
    client: ClientState | None = None


@dataclass
class SimReport:
    """Per-run counters; cache_kind/cache_param describe the L1D under test."""

    benchmark: str
    seed: int
    cache_kind: str
    cache_param: str
    levels: dict[str, LevelStats]
    memory_fetches: int
    memory_writebacks: int
    uncacheable_refs: int
    instructions: int
    cycles: float
    ipc: float
    requests_issued: int
    requests_completed: int
    requests_in_flight: int
    duration_us: float
    ready_us: float
    first_request_us: float


def l1d_descriptor(config: HierarchyConfig) -> tuple[str, str]:
    lc = config.l1d
    if lc.kind == "newcache":
        return lc.kind, str(lc.extra_index_bits)
    if lc.kind == "fa_random":
        return lc.kind, "full"
    if lc.kind == "direct":
        return lc.kind, "1"
    return lc.kind, str(lc.assoc)


class _DuoSim:
    def __init__(self, spec, hierarchy_config, link, seed, budget_us, engine,
                 cycles_per_us, event_log):
        self.spec = spec
        self.link = link
        self.budget = float(budget_us)
        self.cpi = hierarchy_config.base_cpi
        self.cycles_per_us = cycles_per_us
        self.event_log = event_log
        hierarchy = build_hierarchy(hierarchy_config, seed=seed, engine=engine)
        self.server = Node("test", "10.0.0.1", hierarchy=hierarchy,
                           footprint=make_footprint(spec))
        self.client = Node("drive", "10.0.0.2", workload=spec, client=ClientState())
        self.queue = EventQueue()
        self.driver_rng = SplitMix64(derive_seed(seed, "client-driver"))
        self.expand_rng = SplitMix64(derive_seed(seed, "server-expand"))
        self.port_open = False
        self.ready_sent = False
        self.busy_until = 0.0
        self.instructions = 0
        self.extra_cycles = 0
        self.ticks = 0
        self.ready_us = -1.0
        self.first_request_us = -1.0
        self.alpha = spec.params.get("alpha", 4)

    # -- server-side work ----------------------------------------------------
    def _run_refs(self, block) -> float:
        extra = self.server.hierarchy.run_block(block)
        self.instructions += block.instructions
        self.extra_cycles += extra
        return block.instructions * self.cpi + extra

    def _housekeeping(self) -> None:
        block = expand_request_block(idle_tick_request(self.ticks, self.alpha),
                                     self.server.footprint, self.expand_rng)
        self.ticks += 1
        self._run_refs(block)

    # -- client-side issue loop ----------------------------------------------
    def _issue(self, now_us: float) -> None:
        state = self.client.client
        state.now_us = now_us
        while (req := next_request(self.spec, state, self.driver_rng)) is not None:
            arrival = now_us + self.link.transfer_us(req.upload_bytes)
            self.queue.push(arrival, REQUEST_ARRIVES, req)

    # -- event handlers --------------------------------------------------------
    def _dispatch(self, ev: Event) -> None:
        if ev.kind == BOOT_DONE:
            if ev.payload is self.server:
                self.queue.push(ev.time_us + SERVICE_START_US, SERVICE_UP)
                self.queue.push(ev.time_us + POLL_INTERVAL_US, POLL_PORT)
        elif ev.kind == SERVICE_UP:
            self.server.open_ports = service_ports(self.spec.benchmark)
            self.port_open = True
        elif ev.kind == POLL_PORT:
            self._housekeeping()
            if not self.ready_sent:
                if self.port_open:
                    self.ready_sent = True
                    self.queue.push(ev.time_us, READY_SENT)
                else:
                    self.queue.push(ev.time_us + POLL_INTERVAL_US, POLL_PORT)
            if self.ready_sent and self.spec.benchmark == "idle":
                self.queue.push(ev.time_us + IDLE_TICK_INTERVAL_US, POLL_PORT)
        elif ev.kind == READY_SENT:
            self.ready_us = ev.time_us
            client_t = ev.time_us + self.link.transfer_us(READY_SIGNAL_BYTES)
            self.client.client.origin_us = client_t
            self._issue(client_t)
        elif ev.kind == REQUEST_ARRIVES:
            if self.first_request_us < 0:
                self.first_request_us = ev.time_us
            block = expand_request_block(ev.payload, self.server.footprint,
                                         self.expand_rng)
            service_us = self._run_refs(block) / self.cycles_per_us
            start = max(ev.time_us, self.busy_until)
            self.busy_until = start + service_us
            response_at = self.busy_until + self.link.transfer_us(ev.payload.download_bytes)
            self.queue.push(response_at, RESPONSE_ARRIVES, ev.payload)
        elif ev.kind == RESPONSE_ARRIVES:
            self.client.client.complete()
            self._issue(ev.time_us)

    def run(self) -> SimReport:
        self.queue.push(BOOT_DELAY_US, BOOT_DONE, self.server)
        self.queue.push(BOOT_DELAY_US, BOOT_DONE, self.client)
        cut = False
        last_t = 0.0
        while len(self.queue):
            if self.queue.peek_time() > self.budget:
                cut = True
                break
            ev = self.queue.step()
            last_t = ev.time_us
            if self.event_log is not None:
                self.event_log.append(ev)
            self._dispatch(ev)
        end_time = self.budget if cut else last_t
        self.queue.push(end_time, SIM_END)
        final = self.queue.step()
        if self.event_log is not None:
            self.event_log.append(final)
        return self._report(end_time)

    def _report(self, end_time: float) -> SimReport:
        h = self.server.hierarchy
        totals = h.totals()
        cycles = self.instructions * self.cpi + self.extra_cycles
        ipc = self.instructions / cycles if cycles > 0 else 1.0 / self.cpi
        state = self.client.client
        kind, param = l1d_descriptor(h.config)
        return SimReport(
            benchmark=self.spec.benchmark, seed=self.spec.seed,
            cache_kind=kind, cache_param=param,
            levels=h.level_stats(),
            memory_fetches=totals["memory_fetches"],
            memory_writebacks=totals["memory_writebacks"],
            uncacheable_refs=totals["uncacheable_refs"],
            instructions=self.instructions, cycles=cycles, ipc=ipc,
            requests_issued=state.issued, requests_completed=state.completed,
            requests_in_flight=state.in_flight,
            duration_us=end_time, ready_us=self.ready_us,
            first_request_us=self.first_request_us,
        )


def simulate(workload_spec: WorkloadSpec, hierarchy_config: HierarchyConfig,
             link_config: LinkConfig | None = None, seed: int | None = None,
             budget_us: float = 15_000_000.0, engine: str = "auto",
             cycles_per_us: float = DEFAULT_CYCLES_PER_US,
             event_log: list | None = None) -> SimReport:
    """Run the full dual-node protocol for one workload and configuration.

    seed defaults to the workload spec's own seed; budget_us bounds the
    simulated clock (BUDGET_ZERO if not positive). Pass a list as event_log
    to capture the processed event sequence.
    """
    if budget_us <= 0:
        raise SimError("BUDGET_ZERO", f"budget_us must be positive, got {budget_us}")
    if cycles_per_us <= 0:
        raise SimError("CONFIG_INVALID", f"cycles_per_us must be positive, got {cycles_per_us}")
    link = link_config or LinkConfig()
    sim = _DuoSim(workload_spec, hierarchy_config, link,
                  workload_spec.seed if seed is None else seed,
                  budget_us, engine, cycles_per_us, event_log)
    return sim.run()
