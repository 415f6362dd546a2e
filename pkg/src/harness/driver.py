"""Workload driver: runs a deterministic operation trace against one heap config."""

import random
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Optional, Tuple

from pydantic import ValidationError

from src.collector import GcLog
from src.harness.invariants import graph_fingerprint
from src.harness.metrics import MetricsReport
from src.harness.runtime import Runtime
from src.harness.spec import WorkloadSpec
from src.harness.workloads import make_workload
from src.heap import HeapConfig
from src.profiler import LifetimeProfiler
from src.utils.errors import ConfigurationError, OutOfMemoryError, WorkloadSpecError
from src.utils.logger import get_logger

logger = get_logger(__name__)


def resolve_config(spec: WorkloadSpec, **overrides) -> HeapConfig:
    """Settings, then the workload's ``heap`` block, then explicit overrides."""
    unknown = sorted(set(spec.heap) - set(HeapConfig.model_fields))
    if unknown:
        raise WorkloadSpecError(f"unknown heap settings: {', '.join(unknown)}")
    values: Dict[str, Any] = dict(spec.heap)
    values.update({key: value for key, value in overrides.items() if value is not None})
    try:
        return HeapConfig.from_settings(**values)
    except ValidationError as exc:
        first = exc.errors()[0]
        raise ConfigurationError(".".join(str(part) for part in first["loc"]) or "heap", first["msg"]) from exc


def thread_rng(seed: int, thread_index: int, threads: int) -> random.Random:
    """Single-threaded runs use the bare seed; each extra thread gets its own stream."""
    if threads == 1:
        return random.Random(seed)
    return random.Random(f"{seed}:{thread_index}")


def run_workload(
    spec: WorkloadSpec,
    config: Optional[HeapConfig] = None,
    profiler: Optional[LifetimeProfiler] = None,
    deterministic: bool = True
) -> Tuple[GcLog, MetricsReport]:
    """Execute the workload's operation trace and return its GC log and report.

    An out-of-memory failure ends the run early; the partial log and report are
    returned with ``valid`` set to False.
    """
    config = config or resolve_config(spec)
    run_info = {**spec.identity(), "threads": spec.threads, "heap": config.model_dump()}
    runtime = Runtime(config, deterministic=deterministic, profiler=profiler, run_info=run_info)
    mode = "pretenuring" if spec.pretenure_enabled else "baseline"
    logger.info(f"Running {spec.label} ({mode}, seed {spec.seed}, {spec.duration_ops} ops)")

    checkpoints: List[str] = []
    started = time.perf_counter()
    error = None
    if spec.threads == 1:
        ops, error = _run_single(runtime, spec, checkpoints)
    else:
        ops, error = _run_threads(runtime, spec)
    elapsed = time.perf_counter() - started

    if error:
        logger.warning(f"Run of {spec.label} aborted after {ops} ops: {error}")
    runtime.gc_log.finish(
        ops_completed=ops,
        max_regions_in_use=runtime.heap.regions_high_water,
        valid=error is None,
        error=error,
        elapsed_s=None if deterministic else elapsed,
    )
    report = MetricsReport.from_log(runtime.gc_log, checkpoints=checkpoints)
    logger.info(
        f"Finished {spec.label} ({mode}): {report.gc_count} collections, "
        f"{report.total_bytes_copied} bytes copied, p100 cost {report.pause_cost['p100']:.1f}"
    )
    return runtime.gc_log, report


def _run_single(runtime: Runtime, spec: WorkloadSpec, checkpoints: List[str]) -> Tuple[int, Optional[str]]:
    mutator = runtime.mutator()
    ops = 0
    try:
        with mutator.operation():
            workload = make_workload(spec, mutator, thread_rng(spec.seed, 0, 1))
        for op in range(spec.duration_ops):
            with mutator.operation():
                workload.step(op)
            ops = op + 1
            if spec.checkpoint_every and ops % spec.checkpoint_every == 0:
                with runtime.heap.safepoint.exclusive():
                    checkpoints.append(graph_fingerprint(runtime.heap))
    except OutOfMemoryError as exc:
        return ops, str(exc)
    return ops, None


def _run_threads(runtime: Runtime, spec: WorkloadSpec) -> Tuple[int, Optional[str]]:
    """Each thread runs its own workload instance over a strided share of the ops."""
    threads = spec.threads

    def worker(index: int) -> Tuple[int, Optional[str]]:
        mutator = runtime.mutator()
        done = 0
        try:
            with mutator.operation():
                workload = make_workload(spec, mutator, thread_rng(spec.seed, index, threads))
            for op in range(index, spec.duration_ops, threads):
                with mutator.operation():
                    workload.step(op)
                done += 1
        except OutOfMemoryError as exc:
            return done, str(exc)
        return done, None

    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(worker, range(threads)))
    errors = [error for _, error in results if error]
    return sum(done for done, _ in results), errors[0] if errors else None
