"""Tests for workload specs, the driver, metrics and the built-in checks."""

import sys
from pathlib import Path
from typing import Optional

import pytest

# Add src to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.collector import CollectionKind, GcLog, GcReport
from src.harness import (
    Directory,
    MetricsReport,
    Runtime,
    compare_report,
    load_workload,
    parse_workload,
    render_comparison,
    render_metrics,
    resolve_config,
    run_workload,
)
from src.harness.driver import thread_rng
from src.harness.metrics import PERCENTILE_KEYS, pause_histogram, percentiles
from src.harness.selftest import (
    allocation_check,
    determinism_check,
    gen0_sweep,
    lifecycle_check,
    reachability_check,
    remembered_set_check,
)
from src.heap import HeapConfig
from src.profiler import LifetimeProfiler
from src.utils.errors import ConfigurationError, IncompatibleReportsError, WorkloadSpecError

KIB = 1024
MIB = 1024 * KIB
WORKLOAD_DIR = Path(__file__).parent.parent / "workloads"


def bench_config(**overrides) -> HeapConfig:
    values = dict(heap_bytes=4 * MIB, region_bytes=8 * KIB, gen0_max_bytes=256 * KIB, tlab_bytes=1 * KIB)
    values.update(overrides)
    return HeapConfig(**values)


def buffer_spec(**updates):
    data = {
        "kind": "buffer",
        "duration_ops": 8000,
        "seed": 7,
        "op_mix": {"read": 0.1, "write": 0.9},
        "retention": {"cohort_bytes": 128 * KIB, "cohort_ops": 2000, "transient_bytes": 1 * KIB},
    }
    data.update(updates)
    return parse_workload(data)


@pytest.fixture(scope="module")
def paired_runs():
    """Baseline and pretenured reports of a shipped workload on its default heap, run once."""
    cache = {}

    def run(stem: str, seed: Optional[int] = None):
        spec = load_workload(WORKLOAD_DIR / f"{stem}.yaml")
        if seed is not None:
            spec = spec.model_copy(update={"seed": seed})
        key = (stem, spec.seed)
        if key not in cache:
            config = resolve_config(spec)
            _, baseline = run_workload(spec.model_copy(update={"pretenure_enabled": False}), config)
            _, pretenured = run_workload(spec.model_copy(update={"pretenure_enabled": True}), config)
            assert baseline.valid and pretenured.valid
            cache[key] = (baseline, pretenured)
        return cache[key]

    return run


class TestWorkloadSpec:
    """Tests for spec parsing and loading."""

    def test_defaults(self):
        spec = parse_workload({"kind": "churn", "duration_ops": 10})
        assert spec.label == "churn"
        assert spec.pretenure_enabled
        assert spec.threads == 1
        assert spec.op_mix.write == 1.0
        assert spec.identity() == {
            "workload": "churn",
            "kind": "churn",
            "op_mix": {"read": 0.0, "write": 1.0},
            "seed": 0,
            "duration_ops": 10,
            "pretenure_enabled": True,
        }

    @pytest.mark.parametrize("data, location", [
        ({"kind": "buffer"}, "duration_ops"),
        ({"kind": "queue", "duration_ops": 1}, "kind"),
        ({"kind": "buffer", "duration_ops": 0}, "duration_ops"),
        ({"kind": "buffer", "duration_ops": 1, "op_mix": {"read": 0.5, "write": 0.6}}, "op_mix"),
        ({"kind": "buffer", "duration_ops": 1, "object_size_dist": {"min": 64, "max": 32}}, "object_size_dist"),
        ({"kind": "batch", "duration_ops": 1, "retention": {"batches_live": 0}}, "retention.batches_live"),
    ])
    def test_invalid_specs(self, data, location):
        with pytest.raises(WorkloadSpecError) as exc_info:
            parse_workload(data)
        assert location in str(exc_info.value)

    def test_load_names_spec_after_file(self, tmp_path):
        path = tmp_path / "nightly.yaml"
        path.write_text("kind: churn\nduration_ops: 5\n")
        spec = load_workload(path)
        assert spec.name == "nightly"
        assert spec.label == "nightly"

    def test_load_missing_file(self, tmp_path):
        with pytest.raises(WorkloadSpecError) as exc_info:
            load_workload(tmp_path / "absent.yaml")
        assert exc_info.value.path.endswith("absent.yaml")

    def test_load_rejects_non_mapping(self, tmp_path):
        path = tmp_path / "list.yaml"
        path.write_text("- kind: churn\n")
        with pytest.raises(WorkloadSpecError):
            load_workload(path)

    @pytest.mark.parametrize("path", sorted(WORKLOAD_DIR.glob("*.yaml")), ids=lambda p: p.stem)
    def test_shipped_workloads_load(self, path):
        spec = load_workload(path)
        assert spec.duration_ops > 0
        resolve_config(spec)


class TestResolveConfig:
    """Tests for layering settings, spec heap block and overrides."""

    def test_spec_heap_block_then_overrides(self):
        spec = parse_workload({"kind": "churn", "duration_ops": 1,
                               "heap": {"region_bytes": 16 * KIB, "promotion_age": 5}})
        config = resolve_config(spec, promotion_age=1, tlab_bytes=None)
        assert config.region_bytes == 16 * KIB
        assert config.promotion_age == 1

    def test_unknown_heap_key(self):
        spec = parse_workload({"kind": "churn", "duration_ops": 1, "heap": {"nursery": 4}})
        with pytest.raises(WorkloadSpecError) as exc_info:
            resolve_config(spec)
        assert "nursery" in str(exc_info.value)

    def test_inconsistent_geometry(self):
        spec = parse_workload({"kind": "churn", "duration_ops": 1})
        with pytest.raises(ConfigurationError):
            resolve_config(spec, region_bytes=100)

    def test_wrong_type(self):
        spec = parse_workload({"kind": "churn", "duration_ops": 1, "heap": {"heap_bytes": "lots"}})
        with pytest.raises(ConfigurationError) as exc_info:
            resolve_config(spec)
        assert exc_info.value.field == "heap_bytes"

    def test_thread_rng_streams(self):
        assert thread_rng(5, 0, 1).random() == thread_rng(5, 0, 1).random()
        assert thread_rng(5, 0, 2).random() != thread_rng(5, 1, 2).random()


class TestDirectory:
    """Tests for the two-level pointer array used by workloads."""

    def test_items_survive_collections(self, runtime, mutator):
        directory = Directory(mutator, "test", None)
        row = mutator.klass("Row", payload_bytes=8)
        for i in range(70):
            item = mutator.new(row, "test.row")
            mutator.write(item, 0, i.to_bytes(8, "little"))
            directory.append(item)
            mutator.release(item)
        assert directory.count == 70
        assert runtime.heap.root_count == 2

        runtime.collector.minor_collect()
        runtime.collector.full_collect()
        for i in (0, 63, 64, 69):
            assert int.from_bytes(mutator.read(directory.get(i), 0, 8), "little") == i
        assert directory.get(70) is None

    def test_capacity_and_drop(self, runtime, mutator):
        directory = Directory(mutator, "test", mutator.new_generation())
        assert directory.capacity == 256 * 64
        assert not directory.full
        directory.drop()
        assert runtime.heap.root_count == 0


class TestMetrics:
    """Tests for percentiles, histograms, reports and comparisons."""

    def test_percentiles_of_nothing(self):
        assert percentiles([]) == {"p50": 0.0, "p90": 0.0, "p99": 0.0, "p99.9": 0.0, "p100": 0.0}

    def test_percentiles(self):
        values = [float(v) for v in range(1, 101)]
        result = percentiles(values)
        assert result["p50"] == pytest.approx(50.5)
        assert result["p100"] == 100.0
        assert list(result.values()) == sorted(result.values())

    def test_histogram_buckets_are_powers_of_two(self):
        buckets = pause_histogram([0.5, 1.0, 3.0])
        assert [(b["low"], b["high"], b["count"]) for b in buckets] == [
            (0.0, 1.0, 1), (1.0, 2.0, 1), (2.0, 4.0, 1)
        ]
        assert pause_histogram([]) == []

    def test_report_from_log(self):
        log = GcLog({"workload": "unit", "kind": "churn", "seed": 3, "duration_ops": 100,
                     "pretenure_enabled": False})
        log.reports = [
            GcReport(CollectionKind.MINOR, pause_cost_units=10.0, bytes_copied=10, rset_updates=2,
                     objects_promoted=1),
            GcReport(CollectionKind.MIXED, pause_cost_units=30.0, bytes_copied=30, rset_updates=1),
            GcReport(CollectionKind.MINOR, pause_cost_units=20.0, bytes_copied=20),
        ]
        log.finish(ops_completed=100, max_regions_in_use=9, elapsed_s=2.0)

        report = MetricsReport.from_log(log)
        assert report.gc_count == 3
        assert report.gc_counts == {"Minor": 2, "Mixed": 1, "Full": 0}
        assert report.total_bytes_copied == 60
        assert report.total_rset_updates == 3
        assert report.total_objects_promoted == 1
        assert report.total_pause_cost == 60.0
        assert report.pause_cost["p100"] == 30.0
        assert report.pause_cost["p50"] == 20.0
        assert report.max_regions_in_use == 9
        assert report.throughput_ops_per_s == 50.0
        assert "Pause cost p100" in render_metrics(report)

    def test_compare_identical_runs(self):
        _, report = run_workload(buffer_spec(duration_ops=2000), bench_config())
        table = compare_report(report, report)
        assert all(row.ratio == 1.0 for row in table.rows)
        assert table.copy_reduction_percent == 0.0
        assert "Copy reduction: 0.0%" in render_comparison(table)

    def test_compare_refuses_different_seeds(self):
        _, first = run_workload(buffer_spec(duration_ops=500), bench_config())
        _, second = run_workload(buffer_spec(duration_ops=500, seed=8), bench_config())
        with pytest.raises(IncompatibleReportsError) as exc_info:
            compare_report(first, second)
        assert exc_info.value.field == "seed"

    def test_compare_refuses_different_workloads(self):
        _, first = run_workload(buffer_spec(duration_ops=500, name="nightly"), bench_config())
        _, second = run_workload(buffer_spec(duration_ops=500), bench_config())
        with pytest.raises(IncompatibleReportsError) as exc_info:
            compare_report(first, second)
        assert exc_info.value.field == "workload"

    def test_compare_refuses_different_op_mix(self):
        _, first = run_workload(buffer_spec(duration_ops=500), bench_config())
        _, second = run_workload(buffer_spec(duration_ops=500, op_mix={"read": 0.75, "write": 0.25}), bench_config())
        assert second.op_mix == {"read": 0.75, "write": 0.25}
        with pytest.raises(IncompatibleReportsError) as exc_info:
            compare_report(first, second)
        assert exc_info.value.field == "op_mix"


class TestRunWorkload:
    """End-to-end runs of the synthetic workloads."""

    def test_pretenuring_cuts_copying_on_buffers(self):
        config = bench_config()
        _, baseline = run_workload(buffer_spec(pretenure_enabled=False, checkpoint_every=2000), config)
        _, pretenured = run_workload(buffer_spec(pretenure_enabled=True, checkpoint_every=2000), config)

        assert baseline.valid and pretenured.valid
        assert baseline.gc_count > 0
        assert pretenured.total_bytes_copied < 0.5 * baseline.total_bytes_copied
        assert len(baseline.checkpoints) == 4
        assert baseline.checkpoints == pretenured.checkpoints

        table = compare_report(baseline, pretenured)
        assert table.copy_reduction_percent > 50.0

    def test_churn_copies_little(self):
        spec = parse_workload({
            "kind": "churn",
            "duration_ops": 6000,
            "object_size_dist": {"min": 16, "max": 128, "distribution": "geometric"},
            "retention": {"transient_bytes": 1 * KIB},
        })
        log, report = run_workload(spec, bench_config())
        assert report.valid
        assert report.gc_count > 0
        assert max(r.bytes_copied for r in log.reports) < 8 * KIB

    @pytest.mark.parametrize("kind", ["batch", "mixed"])
    def test_other_kinds_run(self, kind):
        spec = parse_workload({
            "kind": kind,
            "duration_ops": 3000,
            "op_mix": {"read": 0.25, "write": 0.75},
            "retention": {"transient_bytes": 1 * KIB, "batch_vertices": 300, "cohort_ops": 1000},
        })
        log, report = run_workload(spec, bench_config())
        assert report.valid
        assert report.ops_completed == 3000
        assert log.run_info["kind"] == kind
        assert log.run_info["heap"]["region_bytes"] == 8 * KIB

    def test_out_of_memory_marks_run_invalid(self, small_config):
        spec = buffer_spec(
            duration_ops=5000,
            pretenure_enabled=False,
            retention={"cohort_bytes": 100 * MIB, "cohort_ops": 100_000, "transient_bytes": 0},
        )
        log, report = run_workload(spec, small_config)
        assert not report.valid
        assert report.error
        assert report.ops_completed < 5000
        assert log.summary["valid"] is False

    def test_threads_split_the_operations(self):
        spec = buffer_spec(duration_ops=3000, threads=3)
        log, report = run_workload(spec, bench_config())
        assert report.valid
        assert report.ops_completed == 3000
        assert log.run_info["threads"] == 3

    def test_runs_are_deterministic(self):
        spec = buffer_spec(duration_ops=3000)
        first, _ = run_workload(spec, bench_config())
        second, _ = run_workload(spec, bench_config())
        assert first.dumps() == second.dumps()
        assert "elapsed_s" not in first.summary

    def test_profiling_does_not_change_the_log(self):
        spec = buffer_spec(duration_ops=3000)
        plain, _ = run_workload(spec, bench_config())
        profiler = LifetimeProfiler()
        profiled, _ = run_workload(spec, bench_config(), profiler=profiler)
        assert plain.dumps() == profiled.dumps()
        assert "buffer.row" in profiler.sites

    def test_wall_clock_mode_reports_throughput(self):
        log, report = run_workload(buffer_spec(duration_ops=500), bench_config(), deterministic=False)
        assert "elapsed_s" in log.summary
        assert report.throughput_ops_per_s and report.throughput_ops_per_s > 0


class TestBundledWorkloads:
    """Baseline against pretenuring on the shipped workloads and the default 64 MiB heap."""

    @pytest.mark.parametrize("stem", ["buffer", "batch", "mixed"])
    def test_mixed_collections_reclaim_dead_cohorts(self, paired_runs, stem):
        baseline, pretenured = paired_runs(stem)
        assert baseline.gc_counts["Mixed"] > 0
        assert pretenured.gc_counts["Mixed"] > 0
        assert pretenured.gc_counts["Minor"] > 0

    @pytest.mark.parametrize("seed", [42, 1, 2, 3, 4])
    def test_pretenuring_halves_copying_on_buffers(self, paired_runs, seed):
        baseline, pretenured = paired_runs("buffer", seed)
        assert pretenured.total_bytes_copied <= 0.5 * baseline.total_bytes_copied

    def test_pretenuring_cuts_the_worst_pause(self, paired_runs):
        baseline, pretenured = paired_runs("buffer")
        assert pretenured.pause_cost["p100"] <= 0.6 * baseline.pause_cost["p100"]
        for key in PERCENTILE_KEYS:
            assert pretenured.pause_cost[key] <= 1.1 * baseline.pause_cost[key], key

    @pytest.mark.parametrize("stem", ["buffer", "batch"])
    def test_pretenuring_adds_no_remembered_set_work(self, paired_runs, stem):
        baseline, pretenured = paired_runs(stem)
        assert pretenured.total_rset_updates <= 1.05 * baseline.total_rset_updates

    @pytest.mark.parametrize("stem", sorted(path.stem for path in WORKLOAD_DIR.glob("*.yaml")))
    def test_memory_high_water_stays_close(self, paired_runs, stem):
        baseline, pretenured = paired_runs(stem)
        assert pretenured.max_regions_in_use <= 1.15 * baseline.max_regions_in_use

    def test_write_heavy_store_copies_more_than_read_heavy(self, paired_runs):
        write_heavy, _ = paired_runs("mixed")
        read_heavy, _ = paired_runs("mixed_read_heavy")
        assert write_heavy.total_bytes_copied > read_heavy.total_bytes_copied


class TestSelftest:
    """The built-in invariant checks, at reduced trial counts."""

    def test_reachability(self):
        result = reachability_check(trials=4, objects=120)
        assert result.passed, result.failures

    def test_remembered_sets(self):
        result = remembered_set_check(trials=4, steps=150)
        assert result.passed, result.failures

    def test_allocation_routing(self):
        result = allocation_check(trials=4, steps=120)
        assert result.passed, result.failures

    def test_generation_lifecycle(self):
        result = lifecycle_check()
        assert result.passed, result.failures

    def test_determinism(self):
        result = determinism_check()
        assert result.passed, result.failures
        assert result.to_dict()["passed"] is True

    def test_gen0_sweep(self):
        spec = buffer_spec(duration_ops=3000)
        points = gen0_sweep(spec, sizes=[128 * KIB, 256 * KIB], config=bench_config())
        assert [point.gen0_bytes for point in points] == [128 * KIB, 256 * KIB]
        for point in points:
            assert point.pretenured_copied < point.baseline_copied
