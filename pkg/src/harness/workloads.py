"""Synthetic workloads: buffers, batches, churn and a mixed read/write store.

Every workload draws all of its decisions from its own RNG, so the operation
trace depends only on the workload spec and seed, never on where objects were placed.
"""

import random
from collections import deque
from typing import Deque, Dict, List, Optional, Type

from src.harness.mutator import Mutator
from src.harness.spec import WorkloadSpec
from src.heap import ClassDescriptor, ObjectRef, RootHandle, HEADER_BYTES, align_up


class Directory:
    """Two-level pointer array: a head of leaves, each leaf holding items.

    The head stays rooted for the directory's lifetime, as does the leaf being
    filled; older leaves are reachable only through the head.
    """

    HEAD_SLOTS = 256
    LEAF_SLOTS = 64

    def __init__(self, m: Mutator, prefix: str, gen: Optional[int]):
        self.m = m
        self.prefix = prefix
        self.gen = gen
        self._leaf_class = m.klass("DirectoryLeaf", ref_slots=self.LEAF_SLOTS)
        self.head = m.new(m.klass("DirectoryHead", ref_slots=self.HEAD_SLOTS), f"{prefix}.head", gen)
        self.leaf: Optional[RootHandle] = None
        self.count = 0

    @property
    def capacity(self) -> int:
        return self.HEAD_SLOTS * self.LEAF_SLOTS

    @property
    def full(self) -> bool:
        return self.count >= self.capacity

    def append(self, item: RootHandle):
        leaf_index, slot = divmod(self.count, self.LEAF_SLOTS)
        if slot == 0:
            leaf = self.m.new(self._leaf_class, f"{self.prefix}.leaf", self.gen)
            self.m.store(self.head, leaf_index, leaf)
            if self.leaf is not None:
                self.m.release(self.leaf)
            self.leaf = leaf
        self.m.store(self.leaf, slot, item)
        self.count += 1

    def get(self, index: int) -> Optional[ObjectRef]:
        leaf_index, slot = divmod(index, self.LEAF_SLOTS)
        return self.m.follow(self.head, leaf_index, slot)

    def drop(self):
        """Unroot the whole directory."""
        self.m.release(self.head)
        if self.leaf is not None:
            self.m.release(self.leaf)
            self.leaf = None


class Workload:
    kind = ""

    def __init__(self, spec: WorkloadSpec, m: Mutator, rng: random.Random):
        self.spec = spec
        self.m = m
        self.rng = rng
        self.retention = spec.retention
        self.pretenure = spec.pretenure_enabled
        self._window: Deque[RootHandle] = deque()
        self._scratch_class = None
        if self.retention.transient_bytes:
            payload = max(0, self.retention.transient_bytes - HEADER_BYTES)
            self._scratch_class = m.klass("byte[]", payload_bytes=payload, is_array=True)
        self._result_class = m.klass("Result", payload_bytes=16)

    def setup(self):
        pass

    def step(self, op: int):
        raise NotImplementedError

    def generation(self) -> Optional[int]:
        """A fresh generation when pretenuring, else None (Gen 0)."""
        return self.m.new_generation() if self.pretenure else None

    def scratch(self):
        """Per-operation temporary buffer; a few recent ones stay reachable."""
        if self._scratch_class is None:
            return
        self._window.append(self.m.new(self._scratch_class, f"{self.kind}.scratch"))
        while len(self._window) > self.retention.survivor_window:
            self.m.release(self._window.popleft())

    def is_read(self) -> bool:
        return self.rng.random() < self.spec.op_mix.read

    def payload_size(self) -> int:
        dist = self.spec.object_size_dist
        if dist.distribution == "fixed" or dist.max == dist.min:
            return dist.min
        if dist.distribution == "geometric":
            mean = max(1.0, (dist.max - dist.min) / 4)
            return min(dist.max, dist.min + int(self.rng.expovariate(1.0 / mean)))
        return self.rng.randint(dist.min, dist.max)

    def record_class(self, payload: int, ref_slots: int = 0, name: str = "Record") -> ClassDescriptor:
        return self.m.klass(name, ref_slots=ref_slots, payload_bytes=align_up(payload))

    def read_value(self, ref: Optional[ObjectRef]) -> bytes:
        if ref is None:
            return b""
        payload = self.m.heap.class_of(ref).payload_bytes
        return self.m.read(ref, 0, min(8, payload))

    def emit_result(self, value: bytes):
        result = self.m.new(self._result_class, f"{self.kind}.result")
        self.m.write(result, 0, value[:16].ljust(16, b"\0"))
        self.m.release(result)

    def stamp(self, handle: RootHandle, klass: ClassDescriptor, op: int):
        if klass.payload_bytes >= 8:
            self.m.write(handle, 0, op.to_bytes(8, "little"))


class BufferWorkload(Workload):
    """Rows accumulate in a buffer that is flushed (dropped) as a whole.

    With pretenuring each buffer gets its own generation, so a flushed buffer
    dies together with its regions.
    """

    kind = "buffer"

    def setup(self):
        self.flushes = 0
        self._start_buffer(0)

    def _start_buffer(self, op: int):
        self.gen = self.generation()
        self.buffer = Directory(self.m, "buffer", self.gen)
        self.buffer_bytes = 0
        self.started = op

    def _flush(self, op: int):
        self.buffer.drop()
        self.flushes += 1
        self._start_buffer(op)

    def step(self, op: int):
        self.scratch()
        if self.is_read():
            self._read()
        else:
            self._write(op)

    def _write(self, op: int):
        klass = self.record_class(self.payload_size(), name="Row")
        row = self.m.new(klass, "buffer.row", self.gen)
        self.stamp(row, klass, op)
        self.buffer.append(row)
        self.m.release(row)
        self.buffer_bytes += klass.size_bytes
        if (
            self.buffer_bytes >= self.retention.cohort_bytes
            or op + 1 - self.started >= self.retention.cohort_ops
            or self.buffer.full
        ):
            self._flush(op + 1)

    def _read(self):
        ref = self.buffer.get(self.rng.randrange(self.buffer.count)) if self.buffer.count else None
        self.emit_result(self.read_value(ref))


class MixedWorkload(BufferWorkload):
    """Buffer traffic plus a long-lived index kept in a single generation."""

    kind = "mixed"

    def setup(self):
        self.index_gen = self.generation()
        self.indexes: List[Directory] = [Directory(self.m, "index", self.index_gen)]
        super().setup()

    def _write(self, op: int):
        super()._write(op)
        if self.rng.random() < self.retention.index_fraction:
            self._index(op)

    def _index(self, op: int):
        klass = self.record_class(24, name="IndexEntry")
        entry = self.m.new(klass, "index.entry", self.index_gen)
        self.stamp(entry, klass, op)
        if self.indexes[-1].full:
            self.indexes.append(Directory(self.m, "index", self.index_gen))
        self.indexes[-1].append(entry)
        self.m.release(entry)


class BatchWorkload(Workload):
    """Graph batches: vertices with edges inside one batch, one generation per batch."""

    kind = "batch"

    def setup(self):
        self.batches: Deque[Directory] = deque()
        self.completed = 0
        self._start_batch()

    def _start_batch(self):
        self.gen = self.generation()
        self.batches.append(Directory(self.m, "batch", self.gen))
        while len(self.batches) > self.retention.batches_live:
            self.batches.popleft().drop()

    def step(self, op: int):
        self.scratch()
        if self.is_read():
            self._read()
        else:
            self._write(op)

    def _write(self, op: int):
        batch = self.batches[-1]
        edges = self.retention.edges_per_vertex
        klass = self.record_class(self.payload_size(), ref_slots=edges, name="Vertex")
        vertex = self.m.new(klass, "batch.vertex", self.gen)
        self.stamp(vertex, klass, op)
        for edge in range(edges):
            if batch.count:
                self.m.store_ref(vertex, edge, batch.get(self.rng.randrange(batch.count)))
        batch.append(vertex)
        self.m.release(vertex)
        if batch.count >= self.retention.batch_vertices:
            self.completed += 1
            self._start_batch()

    def _read(self):
        batch = self.batches[-1]
        value = b""
        if batch.count:
            vertex = batch.get(self.rng.randrange(batch.count))
            value = self.read_value(vertex)
            for slot in range(self.m.heap.class_of(vertex).ref_slot_count):
                neighbour = self.m.heap.read_ref(vertex, slot)
                if neighbour is not None:
                    value = self.read_value(neighbour)
        self.emit_result(value)


class ChurnWorkload(Workload):
    """Short-lived records only; a small sliding window stays reachable."""

    kind = "churn"

    def setup(self):
        self.live: Deque[RootHandle] = deque()

    def step(self, op: int):
        self.scratch()
        if self.is_read():
            ref = self.m.resolve(self.live[self.rng.randrange(len(self.live))]) if self.live else None
            self.emit_result(self.read_value(ref))
            return
        for _ in range(self.rng.randint(1, 3)):
            klass = self.record_class(self.payload_size())
            record = self.m.new(klass, "churn.record")
            self.stamp(record, klass, op)
            self.live.append(record)
        limit = max(1, 4 * self.retention.survivor_window)
        while len(self.live) > limit:
            self.m.release(self.live.popleft())


WORKLOADS: Dict[str, Type[Workload]] = {
    "buffer": BufferWorkload,
    "batch": BatchWorkload,
    "churn": ChurnWorkload,
    "mixed": MixedWorkload,
}


def make_workload(spec: WorkloadSpec, m: Mutator, rng: random.Random) -> Workload:
    workload = WORKLOADS[spec.kind](spec, m, rng)
    workload.setup()
    return workload
