"""Tests for minor, mixed and full collections and the GC log."""

import itertools
import random
import sys
from pathlib import Path

import pytest

# Add src to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.collector import CollectionKind, GcLog, GcReport, MarkingStats
from src.harness import Runtime
from src.harness.invariants import build_random_graph, check_heap, graph_fingerprint
from src.harness.selftest import check_collection, small_config as oracle_config
from src.heap import HeapConfig, SpaceKind, GEN0, OLD
from src.utils.errors import FreeListExhaustedError, Gen0CapacityError, GcLogFormatError

KIB = 1024


def owner_of(runtime, handle):
    return runtime.heap.regions[runtime.heap.resolve(handle).region_id]


class TestMinorCollection:
    """Tests for Gen 0 evacuation."""

    def test_survivors_age_then_promote(self, runtime, mutator):
        handle = mutator.new(mutator.klass("Row", payload_bytes=16), "test.row")

        runtime.collector.minor_collect()
        region = owner_of(runtime, handle)
        assert (region.owner, region.space_kind) == (GEN0, SpaceKind.SURVIVOR)
        assert runtime.heap.header(mutator.resolve(handle)).age == 1

        runtime.collector.minor_collect()
        assert owner_of(runtime, handle).space_kind == SpaceKind.SURVIVOR
        assert runtime.heap.header(mutator.resolve(handle)).age == 2

        report = runtime.collector.minor_collect()
        region = owner_of(runtime, handle)
        assert (region.owner, region.space_kind) == (OLD, SpaceKind.TENURED)
        assert report.objects_promoted == 1

    def test_only_live_bytes_are_copied(self, runtime, mutator):
        row = mutator.klass("Row", payload_bytes=16)
        kept = []
        for i in range(30):
            handle = mutator.new(row, "test.row")
            if i % 3 == 0:
                kept.append(handle)
            else:
                mutator.release(handle)

        report = runtime.collector.minor_collect()
        assert report.kind == CollectionKind.MINOR
        assert report.bytes_copied == len(kept) * row.size_bytes
        assert report.objects_promoted == 0
        assert report.pause_cost_units == report.bytes_copied + runtime.config.pause_alpha * report.rset_entries_scanned
        assert runtime.heap.root_count == len(kept)
        assert check_heap(runtime.heap) == []

    def test_epoch_advances_once_per_collection(self, runtime):
        for expected in (1, 2, 3):
            report = runtime.collector.minor_collect()
            assert report.epoch == expected == runtime.heap.epoch

    def test_old_to_young_reference_keeps_young_alive(self, runtime, mutator):
        node = mutator.klass("Node", ref_slots=1, payload_bytes=8)
        old = mutator.new(node, "test.old", gen=OLD)
        young = mutator.new(node, "test.young")
        mutator.write(young, 0, b"youngest")
        mutator.store(old, 0, young)
        mutator.release(young)

        report = runtime.collector.minor_collect()
        assert report.rset_entries_scanned == 1
        assert report.bytes_copied == node.size_bytes
        moved = mutator.follow(old, 0)
        assert runtime.heap.regions[moved.region_id].space_kind == SpaceKind.SURVIVOR
        assert mutator.read(moved, 0, 8) == b"youngest"
        assert check_heap(runtime.heap) == []

    def test_pretenured_objects_are_not_touched(self, runtime, mutator):
        gen = mutator.new_generation()
        row = mutator.klass("Row", payload_bytes=16)
        kept = mutator.new(row, "test.pretenured", gen)
        dead = mutator.new(row, "test.pretenured", gen)
        dead_ref = mutator.resolve(dead)
        before = mutator.resolve(kept)
        mutator.release(dead)

        report = runtime.collector.minor_collect()
        assert mutator.resolve(kept) == before
        assert report.bytes_copied == 0
        # Garbage outside Gen 0 waits for marking or a full collection.
        assert runtime.heap.header(dead_ref).class_id == row.class_id


class TestMixedCollection:
    """Tests for mixed collections and marking."""

    def test_marking_releases_dead_regions_and_discards_generation(self, runtime, mutator):
        gen = mutator.new_generation()
        handle = mutator.new(mutator.klass("Row", payload_bytes=16), "test.row", gen)
        gen_region = mutator.resolve(handle).region_id
        mutator.release(handle)

        report = runtime.collector.mixed_collect()
        assert report.kind == CollectionKind.MIXED
        assert report.marking_ran
        assert report.regions_reclaimed == 2
        assert runtime.heap.regions[gen_region].is_free
        assert runtime.heap.generation(gen).discarded
        assert check_heap(runtime.heap) == []

    def test_sparse_regions_are_evacuated(self, runtime, mutator):
        gen = mutator.new_generation()
        block = mutator.klass("Block", payload_bytes=1008)
        handles = [mutator.new(block, "test.block", gen) for _ in range(4)]
        region_id = mutator.resolve(handles[0]).region_id
        assert runtime.heap.regions[region_id].top == runtime.config.region_bytes
        for handle in handles[1:]:
            mutator.release(handle)

        epoch = runtime.heap.epoch
        stats = runtime.collector.run_marking(release_empty=False)
        assert runtime.heap.epoch == epoch
        assert stats.live_bytes[region_id] == block.size_bytes
        assert stats.live_fraction(region_id, runtime.config.region_bytes) == 0.25
        assert region_id in runtime.collector.mixed_collection_set(stats)

        report = runtime.collector.mixed_collect(stats)
        assert report.bytes_copied == block.size_bytes
        assert report.objects_promoted == 1
        assert owner_of(runtime, handles[0]).owner == OLD
        assert runtime.heap.generation(gen).discarded
        assert check_heap(runtime.heap) == []

    def test_dense_regions_stay_put(self, runtime, mutator):
        gen = mutator.new_generation()
        block = mutator.klass("Block", payload_bytes=1008)
        handles = [mutator.new(block, "test.block", gen) for _ in range(4)]
        before = mutator.resolve(handles[0])

        stats = runtime.collector.run_marking(release_empty=False)
        assert before.region_id not in runtime.collector.mixed_collection_set(stats)
        runtime.collector.mixed_collect(stats)
        assert mutator.resolve(handles[0]) == before

    def test_standalone_marking_releases_dead_regions(self, runtime, mutator):
        gen = mutator.new_generation()
        handle = mutator.new(mutator.klass("Row", payload_bytes=16), "test.row", gen)
        region_id = mutator.resolve(handle).region_id
        mutator.release(handle)

        events = []
        runtime.collector.add_listener(events.append)
        stats = runtime.collector.run_marking()
        assert stats.released == frozenset({region_id})
        assert events[0].report is None
        assert region_id in events[0].collected_regions
        assert runtime.gc_log.reports == []

    def test_bytes_allocated_after_marking_count_as_live(self):
        stats = MarkingStats(live_bytes={5: 1024}, top_at_mark={5: 2048})
        assert stats.live_fraction(5, 2048) == 0.5
        assert stats.live_fraction(5, 4096) == 0.75
        assert stats.live_fraction(6, 4096) is None

    def test_reused_region_ids_keep_their_live_objects(self, runtime, mutator):
        block = mutator.klass("Block", payload_bytes=496)
        first = mutator.new_generation()
        dead = [mutator.new(block, "test.block", first) for _ in range(16)]
        dead_regions = {mutator.resolve(handle).region_id for handle in dead}
        for handle in dead:
            mutator.release(handle)

        runtime.collector.mixed_collect()
        stats = runtime.collector.last_marking
        assert dead_regions <= stats.released
        assert not dead_regions & set(stats.live_bytes)

        # The new generation picks up the ids the marking just freed.
        second = mutator.new_generation()
        kept = [mutator.new(block, "test.block", second) for _ in range(16)]
        before = [mutator.resolve(handle) for handle in kept]
        reused = {ref.region_id for ref in before}
        assert reused & dead_regions
        assert not reused & runtime.collector.mixed_collection_set(stats)

        report = runtime.collector.mixed_collect()
        assert [mutator.resolve(handle) for handle in kept] == before
        assert report.objects_promoted == 0
        assert not runtime.heap.generation(second).discarded
        assert check_heap(runtime.heap) == []

    def test_regions_filled_after_marking_are_not_picked(self, runtime, mutator):
        block = mutator.klass("Block", payload_bytes=496)
        gen = mutator.new_generation()
        handles = [mutator.new(block, "test.block", gen)]
        region_id = mutator.resolve(handles[0]).region_id
        stats = runtime.collector.run_marking(release_empty=False)
        assert stats.live_fraction(region_id, runtime.heap.regions[region_id].top) == 1.0

        handles.extend(mutator.new(block, "test.block", gen) for _ in range(7))
        assert runtime.heap.regions[region_id].top == runtime.config.region_bytes
        assert region_id not in runtime.collector.mixed_collection_set(stats)

    @pytest.mark.parametrize("seed", range(8))
    def test_random_graphs_match_the_oracle(self, seed):
        runtime = Runtime(oracle_config(heap_bytes=512 * KIB))
        m = runtime.mutator()
        build_random_graph(m, random.Random(seed), objects=80, generations=2)
        gen = m.new_generation()
        block = m.klass("Block", payload_bytes=496)
        blocks = [m.new(block, "test.block", gen) for _ in range(8)]
        for handle in blocks[1:]:
            m.release(handle)
        sparse = m.resolve(blocks[0]).region_id

        runtime.collector.run_marking(release_empty=False)
        assert sparse in runtime.collector.mixed_collection_set(runtime.collector.last_marking)
        assert check_collection(runtime, CollectionKind.MIXED) == []
        assert owner_of(runtime, blocks[0]).owner == OLD

    def test_sparse_old_regions_match_the_oracle(self, runtime, mutator):
        block = mutator.klass("Block", payload_bytes=496)
        gen = mutator.new_generation()
        blocks = [mutator.new(block, "test.block", gen) for _ in range(8)]
        runtime.collector.full_collect()
        old_region = mutator.resolve(blocks[0]).region_id
        assert runtime.heap.regions[old_region].owner == OLD
        for handle in blocks[1:]:
            mutator.release(handle)

        assert check_collection(runtime, CollectionKind.MIXED) == []
        moved = mutator.resolve(blocks[0])
        assert moved.region_id != old_region
        assert runtime.heap.regions[moved.region_id].owner == OLD


class TestFullCollection:
    """Tests for whole-heap compaction."""

    def test_everything_ends_up_in_old(self, runtime, mutator):
        node = mutator.klass("Node", ref_slots=1, payload_bytes=8)
        gens = [mutator.new_generation() for _ in range(2)]
        kept = []
        for i in range(60):
            handle = mutator.new(node, "test.node", gens[i % 2] if i % 3 else None)
            if kept:
                mutator.store(handle, 0, kept[-1])
            kept.append(handle)
        for handle in kept[::2]:
            mutator.release(handle)
        live = len(runtime.heap.reachable_objects())
        fingerprint = graph_fingerprint(runtime.heap)

        report = runtime.collector.full_collect()
        assert report.kind == CollectionKind.FULL
        assert report.bytes_copied == live * node.size_bytes
        assert graph_fingerprint(runtime.heap) == fingerprint
        for ref in runtime.heap.reachable_objects():
            region = runtime.heap.regions[ref.region_id]
            assert (region.owner, region.space_kind) == (OLD, SpaceKind.TENURED)
        assert all(runtime.heap.generation(gen).discarded for gen in gens)
        assert runtime.heap.generation(GEN0).regions
        assert check_heap(runtime.heap) == []

    def test_full_collection_seeds_marking_stats(self, runtime, mutator):
        mutator.new(mutator.klass("Row", payload_bytes=16), "test.row")
        runtime.collector.full_collect()
        stats = runtime.collector.last_marking
        assert sum(stats.live_bytes.values()) == 32

    def test_failed_evacuation_escalates(self):
        config = HeapConfig(
            heap_bytes=64 * KIB,
            region_bytes=4 * KIB,
            gen0_max_bytes=48 * KIB,
            tlab_bytes=1 * KIB,
        )
        runtime = Runtime(config)
        m = runtime.mutator()
        block = m.klass("Block", payload_bytes=1008)
        handles = [m.new(block, "test.block") for _ in range(49)]

        first = runtime.collector.reports[0]
        assert first.escalated
        assert first.kind == CollectionKind.FULL
        assert runtime.heap.root_count == len(handles)
        assert check_heap(runtime.heap) == []


class TestPolicy:
    """Tests for trigger selection, clocks and listeners."""

    def test_should_trigger(self, runtime):
        collector = runtime.collector
        assert collector.should_trigger() is None
        assert collector.should_trigger(FreeListExhaustedError("x")) == CollectionKind.FULL
        assert collector.should_trigger(Gen0CapacityError("x")) == CollectionKind.MINOR

    def test_high_occupancy_with_full_gen0_is_mixed(self, runtime):
        for _ in range(runtime.config.max_eden_regions - 1):
            runtime.heap.region_acquire(GEN0, SpaceKind.EDEN)
        for _ in range(20):
            runtime.heap.region_acquire(OLD, SpaceKind.TENURED)
        assert runtime.heap.heap_occupancy() >= runtime.config.mixed_trigger_occupancy
        assert runtime.collector.should_trigger() == CollectionKind.MIXED

    def test_deterministic_clock(self, runtime):
        report = runtime.collector.mixed_collect()
        assert report.wall_ms == 0.0
        assert report.marking_wall_ms == 0.0

    def test_injected_clock(self, small_config):
        ticks = itertools.count()
        runtime = Runtime(small_config, deterministic=False, clock=lambda: next(ticks) * 0.001)
        assert runtime.collector.minor_collect().wall_ms == pytest.approx(1.0)

    def test_rset_updates_count_new_entries_between_collections(self, runtime, mutator):
        gen = mutator.new_generation()
        node = mutator.klass("Node", ref_slots=3)
        source = mutator.new(node, "test.source", gen=OLD)
        targets = [mutator.new(node, "test.target", gen) for _ in range(3)]
        for slot, target in enumerate(targets):
            mutator.store(source, slot, target)

        assert runtime.collector.minor_collect().rset_updates == 1
        assert runtime.collector.minor_collect().rset_updates == 0

    def test_listeners(self, runtime):
        events = []
        runtime.collector.add_listener(events.append)
        runtime.collector.minor_collect()
        runtime.collector.remove_listener(events.append)
        runtime.collector.minor_collect()
        assert len(events) == 1
        assert events[0].report.kind == CollectionKind.MINOR


class TestGcLog:
    """Tests for the JSON-lines GC log."""

    def test_write_and_read(self, runtime, tmp_path):
        runtime.gc_log.run_info.update({"workload": "unit", "seed": 1})
        runtime.collector.minor_collect()
        runtime.collector.full_collect()
        runtime.gc_log.finish(ops_completed=10, max_regions_in_use=3)
        path = runtime.gc_log.write(tmp_path / "unit.gclog.jsonl")

        log = GcLog.read(path)
        assert log.run_info == {"workload": "unit", "seed": 1}
        assert [r.kind for r in log.reports] == [CollectionKind.MINOR, CollectionKind.FULL]
        assert log.summary == {"ops_completed": 10, "max_regions_in_use": 3, "valid": True}
        assert log.dumps() == path.read_text()

    def test_report_fields_survive_parsing(self):
        report = GcReport(kind=CollectionKind.MIXED, bytes_copied=64, rset_entries_scanned=2,
                          pause_cost_units=65.0, marking_ran=True, epoch=4)
        assert GcReport.from_dict(report.to_dict()) == report

    def test_elapsed_only_when_given(self):
        log = GcLog()
        log.finish(1, 1, valid=False, error="out of memory", elapsed_s=0.5)
        assert log.summary["error"] == "out of memory"
        assert log.summary["elapsed_s"] == 0.5

    @pytest.mark.parametrize("text", [
        "not json\n",
        '{"record": "bogus"}\n',
        '{"record": "gc", "kind": "Sideways"}\n',
        '{"kind": "Minor"}\n',
    ])
    def test_malformed_logs(self, text):
        with pytest.raises(GcLogFormatError):
            GcLog.loads(text)

    def test_missing_file(self, tmp_path):
        with pytest.raises(GcLogFormatError):
            GcLog.read(tmp_path / "absent.jsonl")
