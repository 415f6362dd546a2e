"""Aggregate GC logs into run reports and compare two runs."""

import json
from dataclasses import dataclass, field, asdict
from typing import Any, Dict, List, Optional

import numpy as np
from rich.console import Console
from rich.table import Table

from src.collector import CollectionKind, GcLog
from src.utils.errors import IncompatibleReportsError
from src.utils.logger import get_logger

logger = get_logger(__name__)

PERCENTILES = (50.0, 90.0, 99.0, 99.9, 100.0)
PERCENTILE_KEYS = ("p50", "p90", "p99", "p99.9", "p100")


def percentiles(values: List[float]) -> Dict[str, float]:
    """Linear-interpolated pause percentiles; all zero when there were no pauses."""
    if not values:
        return {key: 0.0 for key in PERCENTILE_KEYS}
    points = np.percentile(np.asarray(values, dtype=float), PERCENTILES)
    # Interpolation can wobble in the last bit; keep the sequence monotone.
    points = np.maximum.accumulate(points)
    return {key: float(value) for key, value in zip(PERCENTILE_KEYS, points)}


def pause_histogram(values: List[float]) -> List[Dict[str, float]]:
    """Pause counts per power-of-two cost bucket: [0, 1), [1, 2), [2, 4), ..."""
    if not values:
        return []
    top = 1
    while top <= max(values):
        top *= 2
    edges = [0.0] + [float(2 ** k) for k in range(0, int(np.log2(top)) + 1)]
    counts, edges = np.histogram(np.asarray(values, dtype=float), bins=edges)
    return [
        {"low": float(low), "high": float(high), "count": int(count)}
        for low, high, count in zip(edges[:-1], edges[1:], counts)
    ]


@dataclass
class MetricsReport:
    """Pause percentiles, totals and memory high-water of one run."""
    workload: str
    kind: str
    seed: int
    duration_ops: int
    pretenure_enabled: bool
    op_mix: Dict[str, float] = field(default_factory=dict)
    ops_completed: int = 0
    valid: bool = True
    error: Optional[str] = None
    gc_count: int = 0
    gc_counts: Dict[str, int] = field(default_factory=dict)
    pause_cost: Dict[str, float] = field(default_factory=dict)
    pause_wall_ms: Dict[str, float] = field(default_factory=dict)
    total_pause_cost: float = 0.0
    total_bytes_copied: int = 0
    total_rset_updates: int = 0
    total_objects_promoted: int = 0
    max_regions_in_use: int = 0
    elapsed_s: Optional[float] = None
    throughput_ops_per_s: Optional[float] = None
    pause_histogram: List[Dict[str, float]] = field(default_factory=list)
    checkpoints: List[str] = field(default_factory=list)

    @classmethod
    def from_log(cls, log: GcLog, checkpoints: Optional[List[str]] = None) -> "MetricsReport":
        info = log.run_info
        summary = log.summary
        costs = [report.pause_cost_units for report in log.reports]
        walls = [report.wall_ms for report in log.reports]
        max_regions = summary.get("max_regions_in_use")
        if max_regions is None:
            max_regions = max((report.regions_high_water for report in log.reports), default=0)
        elapsed = summary.get("elapsed_s")
        ops = summary.get("ops_completed", 0)
        return cls(
            workload=info.get("workload", ""),
            kind=info.get("kind", ""),
            seed=info.get("seed", 0),
            duration_ops=info.get("duration_ops", 0),
            pretenure_enabled=info.get("pretenure_enabled", False),
            op_mix=dict(info.get("op_mix", {})),
            ops_completed=ops,
            valid=summary.get("valid", False),
            error=summary.get("error"),
            gc_count=len(log.reports),
            gc_counts={
                kind.value: sum(1 for report in log.reports if report.kind == kind)
                for kind in CollectionKind
            },
            pause_cost=percentiles(costs),
            pause_wall_ms=percentiles(walls),
            total_pause_cost=float(sum(costs)),
            total_bytes_copied=sum(report.bytes_copied for report in log.reports),
            total_rset_updates=sum(report.rset_updates for report in log.reports),
            total_objects_promoted=sum(report.objects_promoted for report in log.reports),
            max_regions_in_use=max_regions,
            elapsed_s=elapsed,
            throughput_ops_per_s=ops / elapsed if elapsed else None,
            pause_histogram=pause_histogram(costs),
            checkpoints=list(checkpoints or []),
        )

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def render_metrics(report: MetricsReport, width: int = 120) -> str:
    console = Console(width=width, color_system=None)
    mode = "pretenuring" if report.pretenure_enabled else "baseline"
    table = Table(title=f"{report.workload} ({mode}, seed {report.seed})")
    table.add_column("Metric", style="cyan")
    table.add_column("Value", justify="right")

    table.add_row("Ops completed", f"{report.ops_completed:,} / {report.duration_ops:,}")
    table.add_row("Valid", "yes" if report.valid else f"no ({report.error})")
    table.add_row("Collections", f"{report.gc_count} " + " ".join(
        f"{kind}={count}" for kind, count in report.gc_counts.items()))
    for key in PERCENTILE_KEYS:
        table.add_row(f"Pause cost {key}", f"{report.pause_cost.get(key, 0.0):,.1f}")
    table.add_row("Pause wall p100 (ms)", f"{report.pause_wall_ms.get('p100', 0.0):.3f}")
    table.add_row("Bytes copied", f"{report.total_bytes_copied:,}")
    table.add_row("Objects promoted", f"{report.total_objects_promoted:,}")
    table.add_row("Rset updates", f"{report.total_rset_updates:,}")
    table.add_row("Max regions in use", str(report.max_regions_in_use))
    if report.throughput_ops_per_s is not None:
        table.add_row("Throughput (ops/s)", f"{report.throughput_ops_per_s:,.0f}")

    with console.capture() as capture:
        console.print(table)
        if report.pause_histogram:
            console.print("Pause histogram (cost units)")
            for bucket in report.pause_histogram:
                console.print(f"  [{bucket['low']:g}, {bucket['high']:g}): {bucket['count']}", markup=False)
    return capture.get()


@dataclass
class ComparisonRow:
    metric: str
    baseline: float
    candidate: float
    ratio: float


@dataclass
class ComparisonTable:
    """Ratios candidate/baseline per metric."""
    workload: str
    seed: int
    rows: List[ComparisonRow] = field(default_factory=list)

    def ratio(self, metric: str) -> float:
        for row in self.rows:
            if row.metric == metric:
                return row.ratio
        raise KeyError(metric)

    @property
    def copy_reduction_percent(self) -> float:
        return (1.0 - self.ratio("bytes_copied")) * 100.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "workload": self.workload,
            "seed": self.seed,
            "rows": [asdict(row) for row in self.rows],
            "copy_reduction_percent": self.copy_reduction_percent,
        }


def _ratio(baseline: float, candidate: float) -> float:
    if baseline == 0:
        return 1.0 if candidate == 0 else float("inf")
    return candidate / baseline


def compare_report(report_a: MetricsReport, report_b: MetricsReport) -> ComparisonTable:
    """Compare two runs of the same workload; ratios are b / a."""
    for name in ("workload", "kind", "op_mix", "seed", "duration_ops"):
        left, right = getattr(report_a, name), getattr(report_b, name)
        if left != right:
            logger.warning(f"Refusing to compare reports with different {name}")
            raise IncompatibleReportsError(name, left, right)

    pairs = [(f"pause_{key}", report_a.pause_cost[key], report_b.pause_cost[key]) for key in PERCENTILE_KEYS]
    pairs += [
        ("wall_p100_ms", report_a.pause_wall_ms["p100"], report_b.pause_wall_ms["p100"]),
        ("bytes_copied", report_a.total_bytes_copied, report_b.total_bytes_copied),
        ("rset_updates", report_a.total_rset_updates, report_b.total_rset_updates),
        ("max_regions_in_use", report_a.max_regions_in_use, report_b.max_regions_in_use),
        ("gc_count", report_a.gc_count, report_b.gc_count),
    ]
    if report_a.throughput_ops_per_s and report_b.throughput_ops_per_s:
        pairs.append(("throughput_ops_per_s", report_a.throughput_ops_per_s, report_b.throughput_ops_per_s))

    table = ComparisonTable(workload=report_a.workload, seed=report_a.seed)
    for metric, baseline, candidate in pairs:
        table.rows.append(ComparisonRow(metric, float(baseline), float(candidate), _ratio(baseline, candidate)))
    return table


def render_comparison(table: ComparisonTable, width: int = 120) -> str:
    console = Console(width=width, color_system=None)
    rich_table = Table(title=f"{table.workload} (seed {table.seed}): B / A")
    rich_table.add_column("Metric", style="cyan")
    rich_table.add_column("A", justify="right")
    rich_table.add_column("B", justify="right")
    rich_table.add_column("B/A", justify="right", style="green")
    for row in table.rows:
        rich_table.add_row(row.metric, f"{row.baseline:,.1f}", f"{row.candidate:,.1f}", f"{row.ratio:.3f}")
    with console.capture() as capture:
        console.print(rich_table)
        console.print(f"Copy reduction: {table.copy_reduction_percent:.1f}%")
    return capture.get()
