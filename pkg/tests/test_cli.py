import pytest

from palmscloud.cli import (COLUMNS, DEFAULT_ASSOC_AXIS, DEFAULT_K_AXIS,
                            REPORT_HEADER, compare_reports, main, parse_config,
                            read_report, render_report, run_plan)
from palmscloud.errors import SimError
from palmscloud.workloads import SWEEP_BENCHMARKS

SMALL_SWEEP = """
# keep every benchmark tiny so the sweep finishes quickly
benchmarks = all
seeds = 1
assoc = 8
k = 4
output = {out}

[link]
propagation_us = 5000

[web]
requests = 12
page_kb = 2

[db]
transactions = 10

[mail]
seconds = 1

[streaming]
chunks_per_stream = 4
chunk_kb = 4

[app]
requests_per_url = 2

[compute]
instances = 2
support_vectors = 50

[file_write]
file_kb = 16

[file_read]
file_kb = 16
"""


def test_minimal_config_fills_defaults():
    plan = parse_config("benchmark = web")
    assert plan.benchmarks == ["web"]
    assert plan.seeds == [1, 2, 3]
    assert plan.axis == ([("sa_lru", a) for a in DEFAULT_ASSOC_AXIS]
                         + [("newcache", k) for k in DEFAULT_K_AXIS])
    assert plan.hierarchy.l1d.assoc == 8
    assert plan.engine == "auto"


def test_l1d_newcache_override_run_mode():
    plan = parse_config("benchmark = web\nl1d.kind = newcache\nl1d.k = 4",
                        mode="run")
    assert plan.hierarchy.l1d.kind == "newcache"
    assert plan.hierarchy.l1d.extra_index_bits == 4
    assert plan.axis == [("newcache", 4)]


def test_section_and_dotted_forms_agree():
    a = parse_config("l1d.kind = newcache\nl1d.k = 2", mode="run")
    b = parse_config("[l1d]\nkind = newcache\nk = 2", mode="run")
    assert a.hierarchy.l1d == b.hierarchy.l1d


def test_non_power_of_two_assoc_is_parse_error():
    with pytest.raises(SimError) as err:
        parse_config("assoc = 7")
    assert err.value.code == "PARSE_ERROR"
    assert "line 1" in str(err.value)


def test_unknown_key_rejected_with_line():
    with pytest.raises(SimError) as err:
        parse_config("benchmark = web\nturbo = on")
    assert err.value.code == "UNKNOWN_KEY"
    assert "line 2" in str(err.value)


def test_empty_axis_rejected():
    with pytest.raises(SimError) as err:
        parse_config("assoc =")
    assert err.value.code == "EMPTY_AXIS"


def test_duplicates_rejected():
    with pytest.raises(SimError) as err:
        parse_config("benchmarks = web, web")
    assert err.value.code == "EMPTY_AXIS"
    with pytest.raises(SimError):
        parse_config("assoc = 8, 8")
    with pytest.raises(SimError):
        parse_config("seeds = 1, 1")


def test_workload_override_validation_at_parse_time():
    plan = parse_config("benchmark = web\nweb.requests = 500")
    assert plan.workload_overrides["web"]["requests"] == 500
    with pytest.raises(SimError) as err:
        parse_config("web.requests = 0")
    assert err.value.code == "PARAM_OUT_OF_RANGE"
    with pytest.raises(SimError) as err:
        parse_config("web.warp = 9")
    assert err.value.code == "UNKNOWN_KEY"


def test_malformed_lines():
    for text in ("benchmark web", "[l1d", "= 5"):
        with pytest.raises(SimError) as err:
            parse_config(text)
        assert err.value.code == "PARSE_ERROR"


def test_env_seed_override(monkeypatch):
    monkeypatch.setenv("PALMSCLOUD_SEED", "7, 9")
    plan = parse_config("benchmark = web\nseeds = 1, 2")
    assert plan.seeds == [7, 9]
    monkeypatch.setenv("PALMSCLOUD_SEED", "banana")
    with pytest.raises(SimError):
        parse_config("benchmark = web")


def test_sweep_produces_one_row_per_cell(tmp_path):
    out = tmp_path / "report.csv"
    plan = parse_config(SMALL_SWEEP.format(out=out))
    rows = run_plan(plan)
    # 8 benchmarks x {SA8, NC k=4} x 1 seed, no mean rows for a single seed
    assert len(rows) == len(SWEEP_BENCHMARKS) * 2 * 1 == 16
    assert all(r["status"] == "ok" for r in rows)
    # sorted by (benchmark, kind, param, seed)
    keys = [(r["benchmark"], r["cache_kind"], r["cache_param"]) for r in rows]
    assert keys == sorted(keys)
    # every emitted miss rate equals misses/accesses from the same row
    parsed = read_report(str(out))
    assert len(parsed) == 16
    for row in parsed:
        for lvl in ("l1i", "l1d", "l2", "l3"):
            acc = row[f"{lvl}_accesses"]
            want = row[f"{lvl}_misses"] / acc if acc else 0.0
            assert row[f"{lvl}_miss_rate"] == pytest.approx(want, abs=1e-6)


def test_report_reruns_byte_identical(tmp_path):
    out_a = tmp_path / "a.csv"
    out_b = tmp_path / "b.csv"
    text = "benchmarks = app, db\nseeds = 1, 2\nassoc = 8\nk = 2\noutput = {}\n" \
           "app.requests_per_url = 2\ndb.transactions = 8\n"
    run_plan(parse_config(text.format(out_a)))
    run_plan(parse_config(text.format(out_b)))
    assert out_a.read_bytes() == out_b.read_bytes()
    # with two seeds each group carries a mean row: (2 bench x 2 cells) x (2 + 1)
    assert len(read_report(str(out_a))) == 12


def test_idle_row_reports_zero_miss_rates(tmp_path):
    out = tmp_path / "idle.csv"
    plan = parse_config(f"benchmarks = idle\nseeds = 1\nassoc = 8\n"
                        f"budget_us = 20000\noutput = {out}")
    rows = run_plan(plan)
    assert len(rows) == 1
    assert rows[0]["l1d_accesses"] == 0
    assert rows[0]["l1d_miss_rate"] == 0.0
    assert rows[0]["requests_issued"] == 0


def test_compare_identical_reports_pass():
    rows = [{"benchmark": "web", "seed": "1", "status": "ok",
             "ipc": 0.8, "l1d_miss_rate": 0.04}]
    results, ok = compare_reports(rows, rows)
    assert ok
    assert results[0]["ipc_delta_rel"] == 0.0
    assert results[0]["l1d_missrate_delta_abs"] == 0.0
    assert results[0]["verdict"] == "PASS"


def test_compare_within_tolerance_passes():
    base = [{"benchmark": "web", "seed": "1", "status": "ok",
             "ipc": 1.0, "l1d_miss_rate": 0.05}]
    cand = [{"benchmark": "web", "seed": "1", "status": "ok",
             "ipc": 0.99, "l1d_miss_rate": 0.055}]
    results, ok = compare_reports(base, cand, ipc_tolerance=0.05)
    assert ok and results[0]["verdict"] == "PASS"
    results, ok = compare_reports(base, cand, ipc_tolerance=0.005)
    assert not ok and results[0]["verdict"] == "FAIL"


def test_compare_missing_benchmark_is_key_mismatch():
    base = [{"benchmark": "web", "seed": "1", "status": "ok",
             "ipc": 1.0, "l1d_miss_rate": 0.05}]
    cand = base + [{"benchmark": "db", "seed": "1", "status": "ok",
                    "ipc": 1.0, "l1d_miss_rate": 0.05}]
    with pytest.raises(SimError) as err:
        compare_reports(base, cand)
    assert err.value.code == "KEY_MISMATCH"


def test_compare_mismatched_seeds():
    base = [{"benchmark": "web", "seed": "1", "status": "ok",
             "ipc": 1.0, "l1d_miss_rate": 0.05}]
    cand = [{"benchmark": "web", "seed": "2", "status": "ok",
             "ipc": 1.0, "l1d_miss_rate": 0.05}]
    with pytest.raises(SimError) as err:
        compare_reports(base, cand)
    assert err.value.code == "KEY_MISMATCH"


def test_render_report_header_and_columns():
    text = render_report([])
    lines = text.splitlines()
    assert lines[0] == REPORT_HEADER
    assert lines[1].split(",") == list(COLUMNS)


def test_main_list_and_exit_codes(tmp_path, capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    assert "web" in out and "idle" in out

    bad = tmp_path / "bad.cfg"
    bad.write_text("assoc = 7\n")
    assert main(["run", str(bad)]) == 1
    assert main(["run", str(tmp_path / "missing.cfg")]) == 1


def test_main_run_and_compare_roundtrip(tmp_path, capsys):
    out_a = tmp_path / "a.csv"
    out_b = tmp_path / "b.csv"
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"benchmarks = app\nseeds = 1\napp.requests_per_url = 2\n"
                   f"output = {out_a}\n")
    assert main(["run", "-q", str(cfg)]) == 0
    cfg.write_text(f"benchmarks = app\nseeds = 1\napp.requests_per_url = 2\n"
                   f"l1d.kind = newcache\nl1d.k = 4\noutput = {out_b}\n")
    assert main(["run", "-q", str(cfg)]) == 0
    code = main(["compare", str(out_a), str(out_b), "--tolerance", "0.10",
                 "--missrate-abs", "0.2"])
    assert code in (0, 2)
    shown = capsys.readouterr().out
    assert "app" in shown
