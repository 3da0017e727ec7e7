"""Experiment configuration, sweep running and report tooling.

Config files are line-oriented ``key = value`` text with optional
``[section]`` headers and ``#`` comments; there is no nesting. A dotted key
at top level is the same as the bare key inside its section, so
``l1d.kind = newcache`` and ``kind = newcache`` under ``[l1d]`` coincide.

Recognized keys (canonical form):

  experiment.benchmarks   comma list of benchmark names, or "all" (the eight
                          client-driven workloads); "benchmark" is an alias
  experiment.seeds        comma list of ints (default 1,2,3); the
                          PALMSCLOUD_SEED environment variable overrides it
  experiment.budget_us    simulated-time budget per run
  experiment.output       report path
  experiment.engine       auto | python | jit
  experiment.cycles_per_us  server clock for cycles->time conversion
  sweep.assoc             set-associative L1D axis (ints or "full")
  sweep.k                 randomized-cache extra-index-bit axis
  hierarchy.line_bytes / address_bits / memory_latency / uncacheable_latency
  hierarchy.base_cpi / charge_l1_hits
  l1i.size l1i.assoc l1i.kind l1i.k l1i.latency   (same for l1d, l2, l3)
  link.propagation_us link.bytes_per_us link.overhead_bytes
  <benchmark>.<param>     workload overrides, e.g. web.requests = 2000

Reports are plain CSV behind a ``# palmscloud-report v1`` header line, one
row per (benchmark, cache kind, parameter, seed) cell, sorted, plus a mean
row per cell group when several seeds ran. Re-running the same plan yields
byte-identical output.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, replace

from .errors import SimError
from .cache_core import FULL
from .duosim import DEFAULT_CYCLES_PER_US, LinkConfig, SimReport, simulate
from .hierarchy import KINDS, LEVELS, HierarchyConfig, LevelConfig, default_config
from .workloads import BENCHMARKS, PARAM_SPECS, SWEEP_BENCHMARKS, make_workload

REPORT_HEADER = "# palmscloud-report v1"

DEFAULT_SEEDS = (1, 2, 3)
DEFAULT_ASSOC_AXIS = (1, 2, 4, 8, FULL)
DEFAULT_K_AXIS = (0, 2, 4, 6)
DEFAULT_BUDGET_US = 15_000_000.0

_LEVEL_SECTIONS = ("l1i", "l1d", "l2", "l3")
_HIER_KEYS = ("line_bytes", "address_bits", "memory_latency",
              "uncacheable_latency", "base_cpi", "charge_l1_hits")
_EXP_KEYS = ("benchmarks", "seeds", "budget_us", "output", "engine", "cycles_per_us")
_LINK_KEYS = ("propagation_us", "bytes_per_us", "overhead_bytes")
_LEVEL_KEYS = ("size", "assoc", "kind", "k", "latency")

COLUMNS = (
    ["benchmark", "cache_kind", "cache_param", "seed"]
    + [f"{lvl.lower()}_{f}" for lvl in LEVELS
       for f in ("accesses", "hits", "misses", "miss_rate", "evictions", "writebacks")]
    + ["memory_fetches", "memory_writebacks", "uncacheable_refs",
       "instructions", "cycles", "ipc",
       "requests_issued", "requests_completed", "duration_us", "status"]
)
_RATE_COLUMNS = {c for c in COLUMNS if c.endswith("miss_rate")} | {"ipc"}
_TIME_COLUMNS = {"cycles", "duration_us"}
_TEXT_COLUMNS = {"benchmark", "cache_kind", "cache_param", "seed", "status"}


@dataclass
class ExperimentPlan:
    benchmarks: list[str]
    axis: list[tuple[str, object]]  # (cache kind, assoc or extra index bits)
    seeds: list[int]
    hierarchy: HierarchyConfig
    link: LinkConfig
    workload_overrides: dict[str, dict]
    budget_us: float = DEFAULT_BUDGET_US
    output: str = "palmscloud_report.csv"
    engine: str = "auto"
    cycles_per_us: float = DEFAULT_CYCLES_PER_US


def _parse_error(lineno: int, message: str) -> SimError:
    return SimError("PARSE_ERROR", f"line {lineno}: {message}")


def _to_int(value: str, lineno: int, key: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise _parse_error(lineno, f"{key} expects an integer, got {value!r}") from None


def _to_float(value: str, lineno: int, key: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise _parse_error(lineno, f"{key} expects a number, got {value!r}") from None


def _to_bool(value: str, lineno: int, key: str) -> bool:
    low = value.lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise _parse_error(lineno, f"{key} expects a boolean, got {value!r}")


def _to_assoc(value: str, lineno: int, key: str) -> int | str:
    if value.lower() == FULL:
        return FULL
    n = _to_int(value, lineno, key)
    if n <= 0 or n & (n - 1):
        raise _parse_error(lineno, f"{key}={n} is not a power of two")
    return n


def _split_list(value: str) -> list[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


def _normalize(section: str | None, key: str, lineno: int) -> tuple[str, str]:
    """Map (section, key) to a canonical (scope, name) pair."""
    if "." in key:
        if section is not None:
            raise _parse_error(lineno, f"dotted key {key!r} not allowed inside a section")
        section, key = key.split(".", 1)
    if section in (None, "experiment"):
        if key in ("benchmark", "benchmarks"):
            return "experiment", "benchmarks"
        if key in _EXP_KEYS:
            return "experiment", key
    if section in (None, "sweep") and key in ("assoc", "k"):
        return "sweep", key
    if section in (None, "hierarchy") and key in _HIER_KEYS:
        return "hierarchy", key
    if section in _LEVEL_SECTIONS and key in _LEVEL_KEYS:
        return section, key
    if section == "link" and key in _LINK_KEYS:
        return "link", key
    if section in BENCHMARKS:
        return section, key  # validated against the workload's parameter table
    shown = f"{section}.{key}" if section else key
    raise SimError("UNKNOWN_KEY", f"line {lineno}: unknown key {shown!r}")


def _scan(text: str):
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]") or len(line) < 3:
                raise _parse_error(lineno, f"malformed section header {raw.strip()!r}")
            section = line[1:-1].strip().lower()
            known = (("experiment", "sweep", "hierarchy", "link")
                     + _LEVEL_SECTIONS + BENCHMARKS)
            if section not in known:
                raise SimError("UNKNOWN_KEY", f"line {lineno}: unknown section [{section}]")
            continue
        if "=" not in line:
            raise _parse_error(lineno, f"expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise _parse_error(lineno, "empty key")
        yield lineno, section, key.lower(), value


def _reject_duplicates(items, what: str) -> None:
    if len(items) != len(set(items)):
        raise SimError("EMPTY_AXIS", f"duplicate {what} in plan: {items}")
    if not items:
        raise SimError("EMPTY_AXIS", f"no {what} specified")


def parse_config(text: str, mode: str = "sweep") -> ExperimentPlan:
    """Parse config text into a validated plan with defaults filled.

    mode "run" takes the cache axis from the configured L1D itself; mode
    "sweep" builds the axis from sweep.assoc / sweep.k (both defaulted when
    neither is given).
    """
    benchmarks: list[str] | None = None
    seeds: list[int] | None = None
    budget_us = DEFAULT_BUDGET_US
    output = None
    engine = "auto"
    cycles_per_us = DEFAULT_CYCLES_PER_US
    assoc_axis: list | None = None
    k_axis: list | None = None
    hier: dict = {}
    levels: dict[str, dict] = {name: {} for name in _LEVEL_SECTIONS}
    link_kw: dict = {}
    overrides: dict[str, dict] = {}

    for lineno, section, key, value in _scan(text):
        scope, name = _normalize(section, key, lineno)
        if scope == "experiment":
            if name == "benchmarks":
                names = _split_list(value)
                if names == ["all"]:
                    benchmarks = list(SWEEP_BENCHMARKS)
                else:
                    for n in names:
                        if n not in BENCHMARKS:
                            raise _parse_error(lineno, f"unknown benchmark {n!r}")
                    benchmarks = names
            elif name == "seeds":
                seeds = [_to_int(v, lineno, "seeds") for v in _split_list(value)]
            elif name == "budget_us":
                budget_us = _to_float(value, lineno, name)
            elif name == "output":
                output = value
            elif name == "engine":
                if value not in ("auto", "python", "jit"):
                    raise _parse_error(lineno, f"engine must be auto/python/jit, got {value!r}")
                engine = value
            elif name == "cycles_per_us":
                cycles_per_us = _to_float(value, lineno, name)
        elif scope == "sweep":
            items = _split_list(value)
            if name == "assoc":
                assoc_axis = [_to_assoc(v, lineno, "assoc") for v in items]
            else:
                k_axis = [_to_int(v, lineno, "k") for v in items]
                for kk in k_axis:
                    if kk < 0:
                        raise _parse_error(lineno, f"k={kk} must be >= 0")
        elif scope == "hierarchy":
            if name in ("base_cpi",):
                hier[name] = _to_float(value, lineno, name)
            elif name == "charge_l1_hits":
                hier[name] = _to_bool(value, lineno, name)
            else:
                hier[name] = _to_int(value, lineno, name)
        elif scope in _LEVEL_SECTIONS:
            if name == "kind":
                if value not in KINDS:
                    raise _parse_error(lineno, f"kind must be one of {KINDS}, got {value!r}")
                levels[scope][name] = value
            elif name == "assoc":
                levels[scope][name] = _to_assoc(value, lineno, f"{scope}.assoc")
            else:  # size, k, latency
                levels[scope][name] = _to_int(value, lineno, f"{scope}.{name}")
        elif scope == "link":
            if name == "overhead_bytes":
                link_kw[name] = _to_int(value, lineno, name)
            else:
                link_kw[name] = _to_float(value, lineno, name)
        else:  # workload override
            if name not in PARAM_SPECS[scope] and name != "alpha":
                raise SimError("UNKNOWN_KEY",
                               f"line {lineno}: {scope} has no parameter {name!r}")
            overrides.setdefault(scope, {})[name] = _to_int(value, lineno,
                                                            f"{scope}.{name}")

    base = default_config()
    cfg_levels = {}
    for lvl_name in _LEVEL_SECTIONS:
        lc: LevelConfig = getattr(base, lvl_name)
        spec = levels[lvl_name]
        cfg_levels[lvl_name] = LevelConfig(
            kind=spec.get("kind", lc.kind),
            size_bytes=spec.get("size", lc.size_bytes),
            assoc=spec.get("assoc", lc.assoc),
            hit_latency_cycles=spec.get("latency", lc.hit_latency_cycles),
            extra_index_bits=spec.get("k", lc.extra_index_bits),
        )
    hierarchy = HierarchyConfig(
        l1i=cfg_levels["l1i"], l1d=cfg_levels["l1d"],
        l2=cfg_levels["l2"], l3=cfg_levels["l3"],
        line_bytes=hier.get("line_bytes", base.line_bytes),
        address_bits=hier.get("address_bits", base.address_bits),
        memory_latency_cycles=hier.get("memory_latency", base.memory_latency_cycles),
        uncacheable_latency_cycles=hier.get("uncacheable_latency",
                                            base.uncacheable_latency_cycles),
        base_cpi=hier.get("base_cpi", base.base_cpi),
        charge_l1_hits=hier.get("charge_l1_hits", base.charge_l1_hits),
    )

    if mode == "run":
        axis = [_l1d_cell(hierarchy.l1d)]
    elif mode == "sweep":
        if assoc_axis is None and k_axis is None:
            assoc_axis = list(DEFAULT_ASSOC_AXIS)
            k_axis = list(DEFAULT_K_AXIS)
        axis = ([("sa_lru", a) for a in (assoc_axis or [])]
                + [("newcache", kk) for kk in (k_axis or [])])
    else:
        raise SimError("PARSE_ERROR", f"unknown plan mode {mode!r}")

    benchmarks = benchmarks if benchmarks is not None else list(SWEEP_BENCHMARKS)
    env_seed = os.environ.get("PALMSCLOUD_SEED")
    if env_seed:
        try:
            seeds = [int(v) for v in _split_list(env_seed)]
        except ValueError:
            raise SimError("PARSE_ERROR",
                           f"PALMSCLOUD_SEED must be a comma list of ints, got {env_seed!r}")
    elif seeds is None:
        seeds = list(DEFAULT_SEEDS)

    _reject_duplicates(benchmarks, "benchmarks")
    _reject_duplicates(seeds, "seeds")
    _reject_duplicates(axis, "cache configurations")
    for bench, ov in overrides.items():
        make_workload(bench, ov, 0)  # surface range errors at parse time

    return ExperimentPlan(
        benchmarks=benchmarks, axis=axis, seeds=seeds, hierarchy=hierarchy,
        link=LinkConfig(**link_kw), workload_overrides=overrides,
        budget_us=budget_us, output=output or "palmscloud_report.csv",
        engine=engine, cycles_per_us=cycles_per_us,
    )


def _l1d_cell(lc: LevelConfig) -> tuple[str, object]:
    if lc.kind == "newcache":
        return ("newcache", lc.extra_index_bits)
    if lc.kind == "fa_random":
        return ("fa_random", FULL)
    if lc.kind == "direct":
        return ("direct", 1)
    return ("sa_lru", lc.assoc)


def _cell_config(plan: ExperimentPlan, cell: tuple[str, object]) -> HierarchyConfig:
    kind, param = cell
    base = plan.hierarchy.l1d
    if kind == "newcache":
        l1d = LevelConfig("newcache", base.size_bytes, base.assoc,
                          base.hit_latency_cycles, extra_index_bits=int(param))
    elif kind == "fa_random":
        l1d = LevelConfig("fa_random", base.size_bytes, FULL, base.hit_latency_cycles)
    elif kind == "direct":
        l1d = LevelConfig("direct", base.size_bytes, 1, base.hit_latency_cycles)
    else:
        l1d = LevelConfig("sa_lru", base.size_bytes, param, base.hit_latency_cycles)
    return replace(plan.hierarchy, l1d=l1d)


def _param_sort_key(param) -> tuple:
    return (1, 0) if param == FULL else (0, int(param))


def _row_from_report(report: SimReport, status: str = "ok") -> dict:
    row = {"benchmark": report.benchmark, "cache_kind": report.cache_kind,
           "cache_param": report.cache_param, "seed": str(report.seed),
           "status": status}
    for lvl in LEVELS:
        st = report.levels[lvl]
        p = lvl.lower()
        row[f"{p}_accesses"] = st.accesses
        row[f"{p}_hits"] = st.hits
        row[f"{p}_misses"] = st.misses
        row[f"{p}_miss_rate"] = st.miss_rate
        row[f"{p}_evictions"] = st.evictions
        row[f"{p}_writebacks"] = st.writebacks
    row.update(memory_fetches=report.memory_fetches,
               memory_writebacks=report.memory_writebacks,
               uncacheable_refs=report.uncacheable_refs,
               instructions=report.instructions, cycles=report.cycles,
               ipc=report.ipc, requests_issued=report.requests_issued,
               requests_completed=report.requests_completed,
               duration_us=report.duration_us)
    return row


def _error_row(benchmark: str, cell: tuple[str, object], seed: int,
               err: SimError) -> dict:
    row = {c: 0 for c in COLUMNS}
    row.update(benchmark=benchmark, cache_kind=cell[0], cache_param=str(cell[1]),
               seed=str(seed), status=f"error:{err.code}")
    return row


def _mean_row(rows: list[dict]) -> dict:
    out = {"benchmark": rows[0]["benchmark"], "cache_kind": rows[0]["cache_kind"],
           "cache_param": rows[0]["cache_param"], "seed": "mean", "status": "mean"}
    for col in COLUMNS:
        if col in _TEXT_COLUMNS:
            continue
        out[col] = sum(r[col] for r in rows) / len(rows)
    return out


def _format_cell(col: str, value, is_mean: bool) -> str:
    if col in _TEXT_COLUMNS:
        return str(value)
    if col in _RATE_COLUMNS:
        return f"{value:.6f}"
    if col in _TIME_COLUMNS:
        return f"{value:.1f}"
    return f"{value:.4f}" if is_mean else str(int(value))


def render_report(rows: list[dict]) -> str:
    lines = [REPORT_HEADER, ",".join(COLUMNS)]
    for row in rows:
        is_mean = row["seed"] == "mean"
        lines.append(",".join(_format_cell(c, row[c], is_mean) for c in COLUMNS))
    return "\n".join(lines) + "\n"


def run_plan(plan: ExperimentPlan, progress=None) -> list[dict]:
    """Execute every (benchmark, cache config, seed) cell and write the report.

    Rows are generated in sorted order; a failed cell yields an error row
    rather than aborting the whole plan.
    """
    rows = []
    benchmarks = sorted(plan.benchmarks)
    axis = sorted(plan.axis, key=lambda c: (c[0], _param_sort_key(c[1])))
    seeds = sorted(plan.seeds)
    for benchmark in benchmarks:
        for cell in axis:
            config = _cell_config(plan, cell)
            group = []
            for seed in seeds:
                if progress:
                    progress(benchmark, cell, seed)
                try:
                    spec = make_workload(benchmark,
                                         plan.workload_overrides.get(benchmark, {}),
                                         seed)
                    report = simulate(spec, config, plan.link, seed=seed,
                                      budget_us=plan.budget_us, engine=plan.engine,
                                      cycles_per_us=plan.cycles_per_us)
                    group.append(_row_from_report(report))
                except SimError as err:
                    group.append(_error_row(benchmark, cell, seed, err))
            rows.extend(group)
            ok = [r for r in group if r["status"] == "ok"]
            if len(seeds) > 1 and ok:
                rows.append(_mean_row(ok))
    if plan.output:
        try:
            with open(plan.output, "w") as fh:
                fh.write(render_report(rows))
        except OSError as err:
            raise SimError("IO_ERROR", f"cannot write report {plan.output!r}: {err}")
    return rows


def read_report(path: str) -> list[dict]:
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as err:
        raise SimError("IO_ERROR", f"cannot read report {path!r}: {err}")
    if not lines or lines[0] != REPORT_HEADER:
        raise SimError("PARSE_ERROR", f"{path!r} is not a palmscloud report")
    columns = lines[1].split(",")
    rows = []
    for line in lines[2:]:
        if not line.strip():
            continue
        values = line.split(",")
        row = {}
        for col, raw in zip(columns, values):
            if col in _TEXT_COLUMNS:
                row[col] = raw
            else:
                row[col] = float(raw)
        rows.append(row)
    return rows


def missrate_tolerance(baseline_rate: float, abs_floor: float = 0.005,
                       rel: float = 0.15) -> float:
    """Allowed absolute miss-rate deviation: max(abs floor, rel x baseline)."""
    return max(abs_floor, rel * baseline_rate)


def compare_reports(baseline_rows: list[dict], candidate_rows: list[dict],
                    ipc_tolerance: float = 0.05, missrate_abs: float = 0.005,
                    missrate_rel: float = 0.15) -> tuple[list[dict], bool]:
    """Per-benchmark IPC and L1D miss-rate deltas, with a PASS/FAIL verdict.

    The comparison uses mean rows when present, otherwise averages matching
    per-seed rows. Baseline and candidate must cover the same benchmarks and
    seeds (KEY_MISMATCH otherwise).
    """
    def collect(rows):
        means, per_seed = {}, {}
        for row in rows:
            if row["status"] not in ("ok", "mean"):
                continue
            if row["seed"] == "mean":
                means[row["benchmark"]] = row
            else:
                per_seed.setdefault(row["benchmark"], {})[row["seed"]] = row
        return means, per_seed

    b_means, b_seeds = collect(baseline_rows)
    c_means, c_seeds = collect(candidate_rows)
    base_benchmarks = set(b_means) | set(b_seeds)
    cand_benchmarks = set(c_means) | set(c_seeds)
    if base_benchmarks != cand_benchmarks:
        raise SimError("KEY_MISMATCH",
                       f"benchmarks differ: {sorted(base_benchmarks)} vs "
                       f"{sorted(cand_benchmarks)}")

    def values(benchmark, means, per_seed, other_seed_rows):
        if benchmark in means:
            row = means[benchmark]
            return row["ipc"], row["l1d_miss_rate"]
        seeds = per_seed.get(benchmark, {})
        other = other_seed_rows.get(benchmark, {})
        if set(seeds) != set(other):
            raise SimError("KEY_MISMATCH",
                           f"{benchmark}: seeds differ ({sorted(seeds)} vs {sorted(other)})")
        if not seeds:
            raise SimError("KEY_MISMATCH", f"{benchmark}: no usable rows")
        ipc = sum(r["ipc"] for r in seeds.values()) / len(seeds)
        mr = sum(r["l1d_miss_rate"] for r in seeds.values()) / len(seeds)
        return ipc, mr

    results = []
    all_pass = True
    for benchmark in sorted(base_benchmarks):
        base_ipc, base_mr = values(benchmark, b_means, b_seeds, c_seeds)
        cand_ipc, cand_mr = values(benchmark, c_means, c_seeds, b_seeds)
        ipc_delta = (cand_ipc - base_ipc) / base_ipc if base_ipc else 0.0
        mr_delta = cand_mr - base_mr
        ok = (abs(ipc_delta) <= ipc_tolerance
              and abs(mr_delta) <= missrate_tolerance(base_mr, missrate_abs,
                                                      missrate_rel))
        all_pass &= ok
        results.append({"benchmark": benchmark, "ipc_delta_rel": ipc_delta,
                        "l1d_missrate_delta_abs": mr_delta,
                        "verdict": "PASS" if ok else "FAIL"})
    return results, all_pass


# ---------------------------------------------------------------------------
# command line


def _cmd_list() -> int:
    print("benchmark      defaults")
    for name in BENCHMARKS:
        spec = make_workload(name, {}, 0)
        params = {k: v for k, v in sorted(spec.params.items()) if k != "alpha"}
        body = ", ".join(f"{k}={v}" for k, v in params.items()) or "-"
        print(f"{name:<14} {body}")
    return 0


def _load_plan(path: str, mode: str) -> ExperimentPlan:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as err:
        raise SimError("IO_ERROR", f"cannot read config {path!r}: {err}")
    return parse_config(text, mode=mode)


def _cmd_run(path: str, mode: str, quiet: bool) -> int:
    plan = _load_plan(path, mode)

    def progress(benchmark, cell, seed):
        if not quiet:
            print(f"  {benchmark} {cell[0]}/{cell[1]} seed={seed}", file=sys.stderr)

    rows = run_plan(plan, progress=progress)
    errors = sum(1 for r in rows if str(r["status"]).startswith("error"))
    print(f"wrote {plan.output}: {len(rows)} rows"
          + (f" ({errors} error rows)" if errors else ""))
    return 0


def _cmd_compare(baseline: str, candidate: str, tolerance: float,
                 missrate_abs: float, missrate_rel: float) -> int:
    results, all_pass = compare_reports(read_report(baseline), read_report(candidate),
                                        tolerance, missrate_abs, missrate_rel)
    for r in results:
        print(f"{r['benchmark']:<14} ipc {r['ipc_delta_rel']:+7.2%}  "
              f"l1d miss rate {r['l1d_missrate_delta_abs']:+.4f}  {r['verdict']}")
    print("PASS" if all_pass else "FAIL")
    return 0 if all_pass else 2


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="palmscloud",
        description="Cloud-server workload simulator over a configurable cache hierarchy")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("list", help="show benchmarks and their default parameters")
    p_run = sub.add_parser("run", help="run the configured hierarchy once per benchmark/seed")
    p_run.add_argument("config")
    p_run.add_argument("-q", "--quiet", action="store_true")
    p_sweep = sub.add_parser("sweep", help="sweep L1D associativity and extra index bits")
    p_sweep.add_argument("config")
    p_sweep.add_argument("-q", "--quiet", action="store_true")
    p_cmp = sub.add_parser("compare", help="compare two report files per benchmark")
    p_cmp.add_argument("baseline")
    p_cmp.add_argument("candidate")
    p_cmp.add_argument("--tolerance", type=float, default=0.05,
                       help="relative IPC tolerance (default 0.05)")
    p_cmp.add_argument("--missrate-abs", type=float, default=0.005,
                       help="absolute miss-rate floor (default 0.5 pp)")
    p_cmp.add_argument("--missrate-rel", type=float, default=0.15,
                       help="relative miss-rate tolerance (default 0.15)")
    args = parser.parse_args(argv)
    try:
        if args.command == "list":
            return _cmd_list()
        if args.command == "run":
            return _cmd_run(args.config, "run", args.quiet)
        if args.command == "sweep":
            return _cmd_run(args.config, "sweep", args.quiet)
        return _cmd_compare(args.baseline, args.candidate, args.tolerance,
                            args.missrate_abs, args.missrate_rel)
    except SimError as err:
        print(f"palmscloud: {err}", file=sys.stderr)
        return 1


def console_main() -> None:
    raise SystemExit(main())
