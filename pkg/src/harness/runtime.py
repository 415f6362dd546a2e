"""Wiring of heap, collector, allocator, profiler and GC log for one run."""

from typing import Any, Callable, Dict, Optional

from src.allocator import Allocator
from src.collector import Collector, GcLog
from src.harness.mutator import Mutator
from src.heap import Heap, HeapConfig
from src.profiler import LifetimeProfiler


class Runtime:
    """Everything one simulated JVM-like process needs."""

    def __init__(
        self,
        config: HeapConfig,
        deterministic: bool = True,
        profiler: Optional[LifetimeProfiler] = None,
        run_info: Optional[Dict[str, Any]] = None,
        clock: Optional[Callable[[], float]] = None
    ):
        self.config = config
        self.heap = Heap(config)
        self.collector = Collector(self.heap, deterministic=deterministic, clock=clock)
        self.allocator = Allocator(self.heap, self.collector)
        self.profiler = profiler
        if profiler is not None:
            profiler.attach(self.collector)
        self.gc_log = GcLog(run_info)
        self.gc_log.attach(self.collector)

    def mutator(self) -> Mutator:
        return Mutator(self, self.allocator.new_thread_context())
