"""Deterministic dual-node cloud-server workload simulator.

Modeled client-driven server benchmarks feed memory-reference streams
through a configurable multi-level cache hierarchy (including a
randomized-mapping secure cache) and report per-benchmark miss rates and
IPC across associativity and extra-index-bit sweeps.
"""

from .errors import SimError
from .cache_core import (FULL, AccessOutcome, CacheGeometry, DMCache, FARandomCache,
                         MemoryRef, RefBlock, SACache, SplitMix64, decompose,
                         derive_seed, make_geometry)
from .newcache import Newcache, NewcacheGeometry, make_nc_geometry
from .hierarchy import (Hierarchy, HierarchyConfig, LevelConfig, LevelStats,
                        TraceResult, build_hierarchy, default_config)
from .workloads import (BENCHMARKS, SWEEP_BENCHMARKS, ClientState, FootprintMap,
                        Request, WorkloadSpec, expand_request, expand_request_block,
                        make_footprint, make_workload, next_request)
from .duosim import Event, EventQueue, LinkConfig, Node, SimReport, simulate
from .cli import ExperimentPlan, compare_reports, parse_config, read_report, run_plan

__version__ = "0.1.0"
