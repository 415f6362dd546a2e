"""Mutator allocation paths: TLAB fast path, TLAB refill and region allocation."""

import threading
from typing import List

from src.allocator.tlab import TLAB, ThreadContext
from src.heap.heap import Heap
from src.heap.object_model import ClassDescriptor, ObjectRef
from src.heap.regions import Generation, Region, SpaceKind, GEN0
from src.utils.errors import (
    HeapExhaustedError,
    ObjectTooLargeError,
    OutOfMemoryError,
    UnknownGenerationError,
)
from src.utils.logger import get_logger

logger = get_logger(__name__)


class Allocator:
    """Allocates objects into Gen 0 or into a thread's current generation.

    Small non-array objects are bumped inside a per-generation TLAB; objects of at
    least ``tlab_bytes / 8`` go straight to the generation's allocation region.
    When no region can be handed out, one collection runs and the allocation is
    retried once.
    """

    def __init__(self, heap: Heap, collector=None):
        self.heap = heap
        self.collector = collector
        self.config = heap.config
        self._contexts: List[ThreadContext] = []
        self._lock = threading.Lock()
        self._next_thread_id = 1
        self.tlab_refills = 0
        heap.add_safepoint_listener(self.retire_all_tlabs)

    # Thread and generation API

    def new_thread_context(self) -> ThreadContext:
        with self._lock:
            ctx = ThreadContext(thread_id=self._next_thread_id)
            self._next_thread_id += 1
            self._contexts.append(ctx)
        return ctx

    @property
    def contexts(self) -> List[ThreadContext]:
        return list(self._contexts)

    def new_generation(self, ctx: ThreadContext) -> int:
        """Create a generation and make it the thread's current one."""
        gen_id = self.heap.create_generation()
        ctx.current_generation = gen_id
        return gen_id

    def get_generation(self, ctx: ThreadContext) -> int:
        return ctx.current_generation

    def set_generation(self, ctx: ThreadContext, gen_id: int):
        if not self.heap.has_generation(gen_id):
            raise UnknownGenerationError(gen_id)
        ctx.current_generation = gen_id

    # Allocation

    def allocate(self, ctx: ThreadContext, klass: ClassDescriptor, pretenure: bool = False) -> ObjectRef:
        size = klass.size_bytes
        if size > self.config.region_bytes:
            raise ObjectTooLargeError(f"{size} bytes does not fit a {self.config.region_bytes}-byte region")
        gen_id = ctx.current_generation if pretenure else GEN0

        if not klass.is_array and size < self.config.large_object_bytes:
            tlab = ctx.tlabs.get(gen_id)
            if tlab is not None and tlab.free_bytes >= size:
                return self._bump(tlab, klass)

        if size >= self.config.large_object_bytes:
            return self.alloc_in_region(gen_id, klass)
        return self.alloc_in_tlab(ctx, gen_id, klass)

    def alloc_in_tlab(self, ctx: ThreadContext, gen_id: int, klass: ClassDescriptor) -> ObjectRef:
        """Allocate from the thread's TLAB for gen_id, materializing or refilling it."""
        size = klass.size_bytes
        tlab = ctx.tlabs.get(gen_id)
        if tlab is not None and tlab.free_bytes >= size:
            return self._bump(tlab, klass)

        for attempt in range(2):
            if tlab is not None:
                self._retire(tlab)
            try:
                fresh = self._reserve_tlab(gen_id, size)
                break
            except HeapExhaustedError as exc:
                if attempt:
                    raise OutOfMemoryError(f"cannot reserve a TLAB in generation {gen_id}") from exc
                self._collect(exc)
        if tlab is None:
            tlab = ctx.tlabs[gen_id] = fresh
        else:
            tlab.region_id, tlab.start, tlab.top, tlab.end = fresh.region_id, fresh.start, fresh.top, fresh.end
        self.tlab_refills += 1
        return self._bump(tlab, klass)

    def alloc_in_region(self, gen_id: int, klass: ClassDescriptor) -> ObjectRef:
        """Allocate directly in the generation's allocation region."""
        size = klass.size_bytes
        if size > self.config.region_bytes:
            raise ObjectTooLargeError(f"{size} bytes does not fit a {self.config.region_bytes}-byte region")

        for attempt in range(2):
            try:
                gen = self.heap.generation(gen_id)
                with gen.lock:
                    region = self._allocation_region(gen, size)
                    offset = region.top
                    region.top += size
                    return self.heap.place_object(region.region_id, offset, klass)
            except HeapExhaustedError as exc:
                if attempt:
                    raise OutOfMemoryError(f"cannot allocate {size} bytes in generation {gen_id}") from exc
                self._collect(exc)

    def _bump(self, tlab: TLAB, klass: ClassDescriptor) -> ObjectRef:
        offset = tlab.top
        tlab.top += klass.size_bytes
        return self.heap.place_object(tlab.region_id, offset, klass)

    def _reserve_tlab(self, gen_id: int, size: int) -> TLAB:
        gen = self.heap.generation(gen_id)
        with gen.lock:
            region = self._allocation_region(gen, size)
            take = min(self.config.tlab_bytes, region.free_bytes)
            start = region.top
            region.top += take
            return TLAB(region.region_id, start, start, start + take)

    def _allocation_region(self, gen: Generation, size: int) -> Region:
        # Caller holds gen.lock.
        region_id = gen.current_alloc_region
        if region_id is not None:
            region = self.heap.regions[region_id]
            if region.free_bytes >= size:
                return region
            self._retire_region_tail(region)
        kind = SpaceKind.EDEN if gen.gen_id == GEN0 else SpaceKind.TENURED
        region_id = self.heap.region_acquire(gen.gen_id, kind)
        return self.heap.regions[region_id]

    def _retire_region_tail(self, region: Region):
        if region.free_bytes > 0:
            self.heap.place_filler(region.region_id, region.top, region.free_bytes)
            region.top = region.size

    def _retire(self, tlab: TLAB):
        if not tlab.retired and tlab.top < tlab.end:
            self.heap.place_filler(tlab.region_id, tlab.top, tlab.end - tlab.top)
        tlab.clear()

    def retire_all_tlabs(self):
        """Fill every TLAB tail; runs at the start of each collection."""
        for ctx in self._contexts:
            for tlab in ctx.tlabs.values():
                self._retire(tlab)

    def _collect(self, signal: HeapExhaustedError):
        if self.collector is None:
            raise OutOfMemoryError(str(signal)) from signal
        logger.debug(f"Allocation failed ({signal}); collecting")
        with self.heap.safepoint.exclusive():
            self.collector.collect_for_allocation(signal)

