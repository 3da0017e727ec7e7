import pytest

from palmscloud.cache_core import FLAG_UNCACHEABLE, SplitMix64, derive_seed
from palmscloud.errors import SimError
from palmscloud.workloads import (BENCHMARKS, SWEEP_BENCHMARKS, ClientState,
                                  concurrency_of, expand_request,
                                  expand_request_block, idle_tick_request,
                                  make_footprint, make_workload, next_request,
                                  request_budget)


def drain(spec, seed=1, limit=100_000):
    """Issue requests with synchronous completion until the budget runs dry."""
    state = ClientState()
    rng = SplitMix64(derive_seed(seed, "client"))
    requests = []
    while len(requests) < limit:
        req = next_request(spec, state, rng)
        if req is None:
            if state.in_flight == 0:
                break
            state.complete()
            continue
        requests.append(req)
    return requests


def test_web_defaults_from_driver_tool():
    spec = make_workload("web", {}, 7)
    assert spec.params["requests"] == 1000
    assert spec.params["concurrency"] == 10


def test_idle_generates_nothing():
    spec = make_workload("idle", {}, 7)
    assert request_budget(spec) == 0
    assert drain(spec) == []


def test_streaming_override_sets_concurrent_sessions():
    spec = make_workload("streaming", {"streams": 30}, 7)
    assert concurrency_of(spec) == 30


def test_unknown_benchmark():
    with pytest.raises(SimError) as err:
        make_workload("quantum", {}, 1)
    assert err.value.code == "UNKNOWN_BENCHMARK"


def test_param_out_of_range_and_unknown_param():
    with pytest.raises(SimError) as err:
        make_workload("web", {"concurrency": 0}, 1)
    assert err.value.code == "PARAM_OUT_OF_RANGE"
    with pytest.raises(SimError) as err:
        make_workload("idle", {"requests": 5}, 1)
    assert err.value.code == "PARAM_OUT_OF_RANGE"


def test_web_budget_and_window():
    spec = make_workload("web", {"requests": 25, "concurrency": 10}, 3)
    state = ClientState()
    rng = SplitMix64(0)
    got = []
    while (r := next_request(spec, state, rng)) is not None:
        got.append(r)
    assert len(got) == 10  # window full
    assert next_request(spec, state, rng) is None
    state.complete()
    assert next_request(spec, state, rng) is not None  # slot freed
    assert len(drain(spec)) == 25 - 0  # fresh drain issues the full budget


def test_file_write_issues_exactly_clients_times_files():
    spec = make_workload("file_write", {}, 11)
    requests = drain(spec)
    assert len(requests) == 15  # 3 clients x five 64 kB files
    assert all(r.template == "file_op" for r in requests)


def test_app_budget_per_url_count():
    for urls in (1, 3, 11):
        spec = make_workload("app", {"urls": urls}, 2)
        assert len(drain(spec)) == urls * 10


def test_streaming_and_compute_budgets():
    spec = make_workload("streaming", {"streams": 3, "chunks_per_stream": 7}, 2)
    assert len(drain(spec)) == 21
    spec = make_workload("compute", {"instances": 5, "support_vectors": 10}, 2)
    assert len(drain(spec)) == 5


def test_mail_budget_is_time_based():
    spec = make_workload("mail", {"seconds": 2}, 2)
    state = ClientState()
    state.origin_us = 1000.0
    rng = SplitMix64(0)
    state.now_us = 1000.0
    first = next_request(spec, state, rng)
    assert first is not None
    state.complete()
    state.now_us = 1000.0 + 2e6  # stressing time exhausted
    assert next_request(spec, state, rng) is None


def test_file_write_expansion_is_1024_sequential_line_writes():
    spec = make_workload("file_write", {}, 5)
    fp = make_footprint(spec)
    req = drain(spec)[0]
    refs, instructions = expand_request(req, fp, SplitMix64(9))
    fc = fp.region("file_cache")
    data = [r for r in refs if fc.contains(r.address)]
    assert len(data) == 65536 // 64 == 1024
    assert all(r.is_write for r in data)
    deltas = {b.address - a.address for a, b in zip(data, data[1:])}
    assert deltas == {64}
    # fixed metadata/scratch and NIC bracketing
    assert sum(1 for r in refs if fp.region("heap").contains(r.address)) == 40
    assert sum(1 for r in refs if not r.is_cacheable) == 8
    assert instructions == 4 * len(refs)


def test_idle_tick_is_instruction_fetch_only():
    spec = make_workload("idle", {}, 5)
    fp = make_footprint(spec)
    refs, _ = expand_request(idle_tick_request(0), fp, SplitMix64(1))
    assert refs
    code = fp.region("code")
    assert all(r.is_instruction and code.contains(r.address) for r in refs)
    assert all(not r.is_write and r.is_cacheable for r in refs)


def test_db_transaction_template_shape():
    spec = make_workload("db", {"chase_depth": 3, "row_touches": 4}, 5)
    fp = make_footprint(spec)
    req = drain(spec)[0]
    refs, _ = expand_request(req, fp, SplitMix64(3))
    index = fp.region("db_index")
    table = fp.region("db_table")
    index_refs = [r for r in refs if index.contains(r.address)]
    table_refs = [r for r in refs if table.contains(r.address)]
    assert len(index_refs) == 3
    assert len(table_refs) == 4 + 1  # every 4th touched row is also updated
    # dependent chain: each hop is a deterministic function of the previous
    lines = [(r.address - index.base) // 64 for r in index_refs]
    for prev, cur in zip(lines, lines[1:]):
        assert cur == (prev * 2654435761 + 911) % index.lines
    # but it comes after the index refs in program order
    first_table = refs.index(table_refs[0])
    last_index = refs.index(index_refs[-1])
    assert last_index < first_table


def test_expansion_deterministic_for_same_spec_and_seed():
    def stream(seed):
        spec = make_workload("web", {"requests": 8}, seed)
        fp = make_footprint(spec)
        rng = SplitMix64(derive_seed(seed, "expand"))
        blocks = [expand_request_block(r, fp, rng) for r in drain(spec, seed=seed)]
        return [(b.addrs.tolist(), b.flags.tolist()) for b in blocks]

    assert stream(4) == stream(4)
    assert stream(4) != stream(5)


@pytest.mark.parametrize("benchmark,write_heavy", [("file_write", True),
                                                   ("file_read", False)])
def test_file_read_write_mix(benchmark, write_heavy):
    spec = make_workload(benchmark, {}, 6)
    fp = make_footprint(spec)
    rng = SplitMix64(2)
    refs = []
    for req in drain(spec):
        refs.extend(expand_request(req, fp, rng)[0])
    fc = fp.region("file_cache")
    matching = [r for r in refs
                if fc.contains(r.address) and r.is_write == write_heavy]
    assert len(matching) / len(refs) >= 0.90


@pytest.mark.parametrize("benchmark", SWEEP_BENCHMARKS)
def test_all_refs_land_in_named_regions(benchmark):
    overrides = {"compute": {"instances": 2, "support_vectors": 50},
                 "streaming": {"chunks_per_stream": 4},
                 "db": {"transactions": 30},
                 "web": {"requests": 20},
                 "app": {"requests_per_url": 4},
                 "mail": {}}.get(benchmark, {})
    spec = make_workload(benchmark, overrides, 8)
    fp = make_footprint(spec)
    rng = SplitMix64(7)
    requests = drain(spec, limit=40)
    assert requests
    for req in requests:
        block = expand_request_block(req, fp, rng)
        for addr, flags in zip(block.addrs.tolist(), block.flags.tolist()):
            name = fp.region_of(addr)
            assert name is not None
            assert bool(flags & FLAG_UNCACHEABLE) == (name == "nic_ring")


def test_footprint_regions_disjoint():
    spec = make_workload("db", {"records": 1000}, 1)
    fp = make_footprint(spec)
    spans = sorted((r.base, r.base + r.size_bytes) for r in fp.regions.values())
    for (a0, a1), (b0, b1) in zip(spans, spans[1:]):
        assert a1 <= b0
    assert fp.region("nic_ring").uncacheable
    assert sum(r.uncacheable for r in fp.regions.values()) == 1
    assert fp.region("db_table").size_bytes == 1000 * 512
