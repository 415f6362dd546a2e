from .spec import WorkloadSpec, OpMix, SizeDistribution, Retention, load_workload, parse_workload
from .runtime import Runtime
from .mutator import Mutator
from .workloads import Directory, Workload, BufferWorkload, BatchWorkload, ChurnWorkload, MixedWorkload, make_workload
from .metrics import MetricsReport, ComparisonTable, compare_report, render_metrics, render_comparison
from .driver import run_workload, resolve_config
from .invariants import graph_fingerprint, oracle_reachable, check_heap, build_random_graph
from .selftest import run_selftest, gen0_sweep, CheckResult, SweepPoint

__all__ = [
    "WorkloadSpec",
    "OpMix",
    "SizeDistribution",
    "Retention",
    "load_workload",
    "parse_workload",
    "Runtime",
    "Mutator",
    "Directory",
    "Workload",
    "BufferWorkload",
    "BatchWorkload",
    "ChurnWorkload",
    "MixedWorkload",
    "make_workload",
    "MetricsReport",
    "ComparisonTable",
    "compare_report",
    "render_metrics",
    "render_comparison",
    "run_workload",
    "resolve_config",
    "graph_fingerprint",
    "oracle_reachable",
    "check_heap",
    "build_random_graph",
    "run_selftest",
    "gen0_sweep",
    "CheckResult",
    "SweepPoint",
]
