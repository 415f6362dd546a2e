"""Handle-based mutator API used by workloads."""

from contextlib import contextmanager
from typing import Optional

from src.allocator import ThreadContext
from src.heap import ClassDescriptor, ObjectRef, RootHandle


class Mutator:
    """One mutator thread's view of the heap.

    Everything that survives an allocation is held through a RootHandle, because
    any allocation may move objects. Raw ObjectRefs are only valid until the next
    allocation.
    """

    def __init__(self, runtime, ctx: ThreadContext):
        self.runtime = runtime
        self.heap = runtime.heap
        self.allocator = runtime.allocator
        self.profiler = runtime.profiler
        self.ctx = ctx

    @contextmanager
    def operation(self):
        with self.heap.safepoint.mutator():
            yield self

    def klass(self, name: str, ref_slots: int = 0, payload_bytes: int = 0, is_array: bool = False) -> ClassDescriptor:
        return self.heap.classes.define(name, ref_slots, payload_bytes, is_array)

    def new_generation(self) -> int:
        return self.allocator.new_generation(self.ctx)

    def new(self, klass: ClassDescriptor, site: str, gen: Optional[int] = None) -> RootHandle:
        """Allocate and root an object; gen=None allocates in Gen 0."""
        pretenure = gen is not None
        if pretenure and self.ctx.current_generation != gen:
            self.allocator.set_generation(self.ctx, gen)
        ref = self.allocator.allocate(self.ctx, klass, pretenure=pretenure)
        handle = self.heap.register_root(ref)
        if self.profiler is not None:
            self.profiler.record_allocation(site, ref, klass.size_bytes)
        return handle

    def release(self, handle: RootHandle):
        self.heap.unregister_root(handle)

    def resolve(self, handle: RootHandle) -> ObjectRef:
        return self.heap.resolve(handle)

    def store(self, handle: RootHandle, slot: int, target: Optional[RootHandle]):
        target_ref = self.heap.resolve(target) if target is not None else None
        self.heap.write_ref(self.heap.resolve(handle), slot, target_ref)

    def store_ref(self, handle: RootHandle, slot: int, target: Optional[ObjectRef]):
        self.heap.write_ref(self.heap.resolve(handle), slot, target)

    def follow(self, handle: RootHandle, *slots: int) -> Optional[ObjectRef]:
        """Walk a slot path from a rooted object; None if any hop is null."""
        ref = self.heap.resolve(handle)
        for slot in slots:
            ref = self.heap.read_ref(ref, slot)
            if ref is None:
                return None
        return ref

    def write(self, handle: RootHandle, offset: int, data: bytes):
        self.heap.write_payload(self.heap.resolve(handle), offset, data)

    def read(self, ref: ObjectRef, offset: int, length: int) -> bytes:
        return self.heap.read_payload(ref, offset, length)
