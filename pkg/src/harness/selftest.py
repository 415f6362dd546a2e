"""Built-in invariant suite and the Gen 0 size sweep."""

import random
from dataclasses import dataclass, field, asdict
from typing import Any, Callable, Dict, List, Optional

from src.collector import CollectionKind
from src.harness.driver import run_workload
from src.harness.invariants import (
    build_random_graph,
    cset_survivors,
    check_heap,
    check_remembered_sets,
    graph_fingerprint,
    oracle_reachable,
)
from src.harness.runtime import Runtime
from src.harness.spec import WorkloadSpec, parse_workload
from src.heap import HeapConfig, GEN0, SpaceKind
from src.utils.errors import SimulatorError
from src.utils.logger import get_logger

logger = get_logger(__name__)

KIB = 1024
MIB = 1024 * KIB


def small_config(**overrides) -> HeapConfig:
    values = dict(
        heap_bytes=256 * KIB,
        region_bytes=4 * KIB,
        gen0_max_bytes=32 * KIB,
        tlab_bytes=512,
        survivor_regions=2,
        promotion_age=1,
    )
    values.update(overrides)
    return HeapConfig(**values)


@dataclass
class CheckResult:
    name: str
    trials: int
    failures: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["passed"] = self.passed
        return data


def check_collection(runtime: Runtime, kind: CollectionKind) -> List[str]:
    """Run one collection and compare its outcome with the oracles."""
    heap = runtime.heap
    collector = runtime.collector
    problems = check_remembered_sets(heap)

    if kind == CollectionKind.FULL:
        cset = None
        expected = oracle_reachable(heap)
    elif kind == CollectionKind.MIXED:
        # Fresh statistics, so sparse dynamic and Old regions join the collection set.
        collector.run_marking(release_empty=False)
        cset = collector.mixed_collection_set(collector.last_marking)
        expected = cset_survivors(heap, cset)
    else:
        cset = set(heap.generations[GEN0].regions)
        expected = cset_survivors(heap, cset)
    before = graph_fingerprint(heap)

    events = []
    collector.add_listener(events.append)
    try:
        report = collector.collect(kind)
    finally:
        collector.remove_listener(events.append)
    event = [e for e in events if e.report is report][-1]

    if not report.escalated:
        moved = {ref for ref in event.forwarding if cset is None or ref.region_id in cset}
        if moved != expected:
            problems.append(
                f"{kind.value}: {len(moved)} survivors, oracle expects {len(expected)}"
            )
    if graph_fingerprint(heap) != before:
        problems.append(f"{kind.value}: reachable graph changed")
    problems.extend(f"{kind.value}: {problem}" for problem in check_heap(heap))
    return problems


def reachability_check(trials: int = 50, objects: int = 300, seed: int = 0) -> CheckResult:
    """Random graphs, random collection kinds, exact survivor sets."""
    result = CheckResult("reachability oracle", trials)
    rng = random.Random(seed)
    kinds = list(CollectionKind)
    for trial in range(trials):
        runtime = Runtime(small_config(heap_bytes=512 * KIB))
        m = runtime.mutator()
        try:
            build_random_graph(m, rng, objects=objects, generations=rng.randint(0, 3))
            for _ in range(rng.randint(1, 3)):
                result.failures.extend(
                    f"trial {trial}: {problem}" for problem in check_collection(runtime, rng.choice(kinds))
                )
        except SimulatorError as exc:
            result.failures.append(f"trial {trial}: {exc}")
    return result


def remembered_set_check(trials: int = 50, steps: int = 300, seed: int = 1) -> CheckResult:
    """Random stores, releases and allocations; remembered sets match a full slot scan."""
    result = CheckResult("remembered-set completeness", trials)
    rng = random.Random(seed)
    for trial in range(trials):
        runtime = Runtime(small_config(heap_bytes=512 * KIB))
        m = runtime.mutator()
        gens = [m.new_generation() for _ in range(2)]
        node = m.klass("Node", ref_slots=2, payload_bytes=8)
        handles = []
        try:
            for step in range(steps):
                roll = rng.random()
                if roll < 0.4 or len(handles) < 2:
                    gen = rng.choice(gens + [None])
                    handles.append(m.new(node, "fuzz.node", gen))
                elif roll < 0.85:
                    m.store(rng.choice(handles), rng.randrange(2), rng.choice(handles + [None]))
                elif roll < 0.97:
                    m.release(handles.pop(rng.randrange(len(handles))))
                else:
                    result.failures.extend(f"trial {trial} step {step}: {p}" for p in check_remembered_sets(runtime.heap))
                    runtime.collector.collect(rng.choice(list(CollectionKind)))
            result.failures.extend(f"trial {trial}: {p}" for p in check_remembered_sets(runtime.heap))
        except SimulatorError as exc:
            result.failures.append(f"trial {trial}: {exc}")
    return result


def allocation_check(trials: int = 50, steps: int = 200, seed: int = 2) -> CheckResult:
    """Routing, the TLAB size-class boundary and lazy TLAB creation."""
    result = CheckResult("allocation routing", trials)
    rng = random.Random(seed)
    for trial in range(trials):
        runtime = Runtime(small_config())
        allocator = runtime.allocator
        ctx = allocator.new_thread_context()
        boundary = runtime.config.large_object_bytes
        tlab_gens = set()
        gens = []
        try:
            for _ in range(steps):
                if rng.random() < 0.1:
                    gens.append(allocator.new_generation(ctx))
                elif gens and rng.random() < 0.2:
                    allocator.set_generation(ctx, rng.choice(gens))
                pretenure = rng.random() < 0.5
                payload = rng.choice([0, 8, boundary - 24, boundary - 16, boundary, 4 * boundary])
                klass = runtime.heap.classes.define("Obj", 0, max(0, payload))
                ref = allocator.allocate(ctx, klass, pretenure=pretenure)
                expected_gen = ctx.current_generation if pretenure else GEN0
                owner = runtime.heap.regions[ref.region_id].owner
                if owner != expected_gen:
                    result.failures.append(f"trial {trial}: object in generation {owner}, expected {expected_gen}")
                if klass.size_bytes < boundary:
                    tlab_gens.add(expected_gen)
                if set(ctx.tlabs) != tlab_gens:
                    result.failures.append(f"trial {trial}: TLABs for {sorted(ctx.tlabs)}, used {sorted(tlab_gens)}")
                    break
        except SimulatorError as exc:
            result.failures.append(f"trial {trial}: {exc}")
    return result


def lifecycle_check() -> CheckResult:
    """create -> allocate -> die -> mixed collect -> discarded -> allocate -> re-created."""
    result = CheckResult("generation lifecycle", 1)
    runtime = Runtime(small_config())
    heap = runtime.heap
    m = runtime.mutator()
    gen = m.new_generation()
    if heap.generation(gen).regions:
        result.failures.append("new generation owns regions before its first allocation")
    record = m.klass("Record", payload_bytes=64)
    handles = [m.new(record, "lifecycle.record", gen) for _ in range(8)]
    if not heap.generation(gen).regions:
        result.failures.append("allocation did not give the generation a region")
    for handle in handles:
        m.release(handle)
    runtime.collector.mixed_collect()
    if not heap.generation(gen).discarded:
        result.failures.append("dead generation was not discarded by mixed collection and marking")
    handle = m.new(record, "lifecycle.record", gen)
    owner = heap.regions[m.resolve(handle).region_id].owner
    if heap.generation(gen).discarded or owner != gen:
        result.failures.append("allocating into a discarded generation did not re-create it")
    result.failures.extend(check_heap(heap))
    return result


def determinism_check(seed: int = 3) -> CheckResult:
    """Two identical runs produce byte-identical GC logs."""
    result = CheckResult("determinism", 2)
    spec = parse_workload({
        "kind": "buffer",
        "duration_ops": 3000,
        "seed": seed,
        "retention": {"cohort_bytes": 64 * KIB, "cohort_ops": 1000, "transient_bytes": 1 * KIB},
    })
    config = small_config(heap_bytes=2 * MIB, region_bytes=8 * KIB, gen0_max_bytes=128 * KIB, tlab_bytes=1 * KIB)
    first, _ = run_workload(spec, config)
    second, _ = run_workload(spec, config)
    if first.dumps() != second.dumps():
        result.failures.append("GC logs differ between identical runs")
    return result


CHECKS: Dict[str, Callable[[], CheckResult]] = {
    "reachability": reachability_check,
    "remembered_sets": remembered_set_check,
    "allocation": allocation_check,
    "lifecycle": lifecycle_check,
    "determinism": determinism_check,
}


def run_selftest(names: Optional[List[str]] = None) -> List[CheckResult]:
    results = []
    for name in names or list(CHECKS):
        check = CHECKS[name]()
        level = "INFO" if check.passed else "WARNING"
        logger.log(level, f"Selftest {check.name}: {'passed' if check.passed else f'{len(check.failures)} failures'}")
        results.append(check)
    return results


@dataclass
class SweepPoint:
    gen0_bytes: int
    baseline_p100: float
    pretenured_p100: float
    baseline_copied: int
    pretenured_copied: int
    baseline_gcs: int
    pretenured_gcs: int


def gen0_sweep(
    spec: WorkloadSpec,
    sizes: Optional[List[int]] = None,
    config: Optional[HeapConfig] = None
) -> List[SweepPoint]:
    """Worst pause cost against Gen 0 size, with and without pretenuring."""
    config = config or HeapConfig.from_settings()
    sizes = sizes or [size for size in (1 * MIB, 2 * MIB, 4 * MIB, 8 * MIB, 16 * MIB) if size <= config.heap_bytes // 2]
    points = []
    for size in sizes:
        sized = config.model_copy(update={"gen0_max_bytes": size})
        _, base = run_workload(spec.model_copy(update={"pretenure_enabled": False}), sized)
        _, pre = run_workload(spec.model_copy(update={"pretenure_enabled": True}), sized)
        points.append(SweepPoint(
            gen0_bytes=size,
            baseline_p100=base.pause_cost["p100"],
            pretenured_p100=pre.pause_cost["p100"],
            baseline_copied=base.total_bytes_copied,
            pretenured_copied=pre.total_bytes_copied,
            baseline_gcs=base.gc_count,
            pretenured_gcs=pre.gc_count,
        ))
    return points
