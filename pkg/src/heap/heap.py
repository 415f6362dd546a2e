"""Region pool, generations, roots and the write barrier."""

import heapq
import threading
from collections import deque
from typing import Callable, Dict, Iterator, List, Optional, Set, Tuple

from src.heap.object_model import (
    ClassDescriptor,
    ClassTable,
    ObjectHeader,
    ObjectRef,
    RootHandle,
    FILLER_CLASS_ID,
    HEADER_BYTES,
    REF_BYTES,
    encode_ref,
    decode_ref,
)
from src.heap.regions import Region, Generation, HeapConfig, SpaceKind, FREE, GEN0, OLD
from src.heap.safepoint import Safepoint
from src.utils.errors import (
    DoubleFreeError,
    FreeListExhaustedError,
    Gen0CapacityError,
    InvalidHandleError,
    InvalidReferenceError,
    SafepointViolationError,
    SimulatorError,
    SlotBoundsError,
    UnknownGenerationError,
)
from src.utils.logger import get_logger

logger = get_logger(__name__)


def slot_offset(obj_offset: int, slot: int) -> int:
    """Byte offset of a reference slot inside its region."""
    return obj_offset + HEADER_BYTES + slot * REF_BYTES


class Heap:
    """Region-based heap with an arbitrary number of generations.

    Gen 0 and Old always exist; dynamic generations get ids 2, 3, ... and are
    discarded when they lose their last region.
    """

    def __init__(self, config: HeapConfig):
        self.config = config
        self.classes = ClassTable()
        self.regions: List[Region] = [
            Region(region_id=i, size=config.region_bytes) for i in range(config.region_count)
        ]
        self._free: List[int] = list(range(config.region_count))
        heapq.heapify(self._free)
        self.generations: Dict[int, Generation] = {
            GEN0: Generation(GEN0),
            OLD: Generation(OLD),
        }
        self._next_gen_id = OLD + 1
        self._lock = threading.RLock()
        self._rset_lock = threading.Lock()
        self._roots: Dict[int, ObjectRef] = {}
        self._next_root_id = 1
        self.safepoint = Safepoint()
        self._safepoint_listeners: List[Callable[[], None]] = []
        self.in_collection = False
        self.epoch = 0
        self.rset_insertions_total = 0
        self.regions_high_water = 0

        self.ensure_builtin_regions()
        logger.debug(
            f"Heap created: {config.region_count} regions of {config.region_bytes} bytes, "
            f"{self.free_region_count} free"
        )

    # Generations

    def create_generation(self) -> int:
        """Create a dynamic generation; it owns no regions until first allocation."""
        with self._lock:
            gen_id = self._next_gen_id
            self._next_gen_id += 1
            self.generations[gen_id] = Generation(gen_id, created_epoch=self.epoch)
        logger.debug(f"Created generation {gen_id}")
        return gen_id

    def generation(self, gen_id: int) -> Generation:
        try:
            return self.generations[gen_id]
        except KeyError:
            raise UnknownGenerationError(gen_id) from None

    def has_generation(self, gen_id: int) -> bool:
        return gen_id in self.generations

    def live_generations(self) -> List[int]:
        return sorted(g.gen_id for g in self.generations.values() if not g.discarded)

    def _revive(self, gen: Generation):
        gen.discarded = False
        gen.regions = []
        gen.current_alloc_region = None
        gen.created_epoch = self.epoch
        logger.debug(f"Re-created generation {gen.gen_id}")

    def eden_region_count(self) -> int:
        return sum(
            1 for rid in self.generations[GEN0].regions
            if self.regions[rid].space_kind == SpaceKind.EDEN
        )

    def gen0_full(self) -> bool:
        return self.eden_region_count() >= self.config.max_eden_regions

    # Regions

    @property
    def free_region_count(self) -> int:
        return len(self._free)

    @property
    def regions_in_use(self) -> int:
        return len(self.regions) - len(self._free)

    def free_region_ids(self) -> List[int]:
        return sorted(self._free)

    def region_acquire(self, gen_id: int, space_kind: SpaceKind, make_current: bool = True) -> int:
        """Move the lowest free region into a generation.

        Raises Gen0CapacityError when Gen 0 already holds its Eden cap and
        FreeListExhaustedError when no region is free.
        """
        with self._lock:
            gen = self.generation(gen_id)
            if gen.discarded:
                self._revive(gen)
            if gen_id == GEN0 and space_kind == SpaceKind.EDEN and self.gen0_full():
                raise Gen0CapacityError(f"Gen 0 holds {self.config.max_eden_regions} Eden regions")
            if not self._free:
                raise FreeListExhaustedError("no free regions")
            region_id = heapq.heappop(self._free)
            region = self.regions[region_id]
            region.owner = gen_id
            region.space_kind = space_kind
            region.top = 0
            region.live_bytes_estimate = None
            gen.regions.append(region_id)
            if make_current:
                gen.current_alloc_region = region_id
            self.regions_high_water = max(self.regions_high_water, self.regions_in_use)
        return region_id

    def region_release(self, region_id: int):
        """Return a region holding no live objects to the free list."""
        with self._lock:
            region = self.regions[region_id]
            if region.is_free:
                raise DoubleFreeError(f"region {region_id} is already free")
            if self.config.debug_checks:
                self._assert_unreachable(region_id)

            self._scrub_outgoing(region)
            region.data[:region.top] = bytes(region.top)
            region.top = 0
            region.objects.clear()
            with self._rset_lock:
                region.remembered_set.clear()
            region.live_bytes_estimate = None

            gen = self.generations[region.owner]
            gen.regions.remove(region_id)
            if gen.current_alloc_region == region_id:
                gen.current_alloc_region = None
            region.owner = FREE
            region.space_kind = None
            heapq.heappush(self._free, region_id)

            if not gen.regions and not gen.is_builtin:
                gen.discarded = True
                logger.debug(f"Generation {gen.gen_id} discarded")

    def release_regions(self, region_ids) -> int:
        count = 0
        for region_id in sorted(region_ids):
            self.region_release(region_id)
            count += 1
        return count

    def _scrub_outgoing(self, region: Region):
        # Objects leaving with the region stop counting as referrers elsewhere.
        with self._rset_lock:
            for offset, header in region.objects.items():
                if header.is_filler:
                    continue
                klass = self.classes.get(header.class_id)
                for slot in range(klass.ref_slot_count):
                    target = decode_ref(region.data, slot_offset(offset, slot))
                    if target is not None and target.region_id != region.region_id:
                        self._rset_decrement_locked(target.region_id, region.region_id)

    def _assert_unreachable(self, region_id: int):
        for ref in self.reachable_objects():
            if ref.region_id == region_id:
                raise SimulatorError(f"region {region_id} still holds reachable object {ref}")

    def reassign_region(self, region_id: int, gen_id: int, space_kind: SpaceKind):
        """Move a non-free region to another generation without touching its contents."""
        with self._lock:
            region = self.regions[region_id]
            old_gen = self.generations[region.owner]
            old_gen.regions.remove(region_id)
            if old_gen.current_alloc_region == region_id:
                old_gen.current_alloc_region = None
            if not old_gen.regions and not old_gen.is_builtin:
                old_gen.discarded = True
            gen = self.generation(gen_id)
            if gen.discarded:
                self._revive(gen)
            gen.regions.append(region_id)
            region.owner = gen_id
            region.space_kind = space_kind

    def ensure_builtin_regions(self):
        """Give Gen 0 an Eden region and Old a region when free regions allow."""
        with self._lock:
            gen0 = self.generations[GEN0]
            if self._free and self.eden_region_count() == 0:
                self.region_acquire(GEN0, SpaceKind.EDEN)
            elif gen0.current_alloc_region is None:
                eden = [r for r in gen0.regions if self.regions[r].space_kind == SpaceKind.EDEN]
                if eden:
                    gen0.current_alloc_region = eden[-1]
            if self._free and not self.generations[OLD].regions:
                self.region_acquire(OLD, SpaceKind.TENURED)

    def heap_occupancy(self) -> float:
        """Fraction of the heap held by non-free regions."""
        return self.regions_in_use * self.config.region_bytes / self.config.heap_bytes

    # Objects

    def place_object(self, region_id: int, offset: int, klass: ClassDescriptor, age: int = 0) -> ObjectRef:
        """Record a header for a freshly bumped extent; contents are already zero."""
        self.regions[region_id].objects[offset] = ObjectHeader(klass.class_id, klass.size_bytes, age=age)
        return ObjectRef(region_id, offset)

    def place_filler(self, region_id: int, offset: int, size: int):
        if size > 0:
            self.regions[region_id].objects[offset] = ObjectHeader(FILLER_CLASS_ID, size)

    def header(self, obj: ObjectRef) -> ObjectHeader:
        """Header of a valid object; stale or forwarded refs are rejected."""
        if obj is None or not 0 <= obj.region_id < len(self.regions):
            raise InvalidReferenceError(f"{obj} is not a heap address")
        region = self.regions[obj.region_id]
        header = region.objects.get(obj.offset_bytes)
        if region.is_free or header is None or header.is_filler:
            raise InvalidReferenceError(f"{obj} does not point at an object")
        if header.forward_to is not None and not self.in_collection:
            raise InvalidReferenceError(f"{obj} was forwarded to {header.forward_to}")
        return header

    def class_of(self, obj: ObjectRef) -> ClassDescriptor:
        return self.classes.get(self.header(obj).class_id)

    def iter_objects(self, region_id: int) -> Iterator[Tuple[ObjectRef, ObjectHeader]]:
        """Non-filler objects of a region in address order."""
        region = self.regions[region_id]
        for offset in sorted(region.objects):
            header = region.objects[offset]
            if not header.is_filler:
                yield ObjectRef(region_id, offset), header

    def load_slot(self, obj: ObjectRef, slot: int) -> Optional[ObjectRef]:
        """Raw slot read without validation; for the collector."""
        return decode_ref(self.regions[obj.region_id].data, slot_offset(obj.offset_bytes, slot))

    def store_slot(self, obj: ObjectRef, slot: int, target: Optional[ObjectRef]):
        """Raw slot write without barrier; the caller maintains remembered sets."""
        position = slot_offset(obj.offset_bytes, slot)
        self.regions[obj.region_id].data[position:position + REF_BYTES] = encode_ref(target)

    def outgoing(self, obj: ObjectRef, header: Optional[ObjectHeader] = None) -> List[Tuple[int, ObjectRef]]:
        """Non-null (slot, target) pairs of an object."""
        header = header or self.regions[obj.region_id].objects[obj.offset_bytes]
        klass = self.classes.get(header.class_id)
        data = self.regions[obj.region_id].data
        pairs = []
        for slot in range(klass.ref_slot_count):
            target = decode_ref(data, slot_offset(obj.offset_bytes, slot))
            if target is not None:
                pairs.append((slot, target))
        return pairs

    def _check_slot(self, obj: ObjectRef, slot: int) -> ClassDescriptor:
        klass = self.class_of(obj)
        if not 0 <= slot < klass.ref_slot_count:
            raise SlotBoundsError(f"slot {slot} outside {klass.ref_slot_count} slots of {klass.name or klass.class_id}")
        return klass

    def read_ref(self, obj: ObjectRef, slot: int) -> Optional[ObjectRef]:
        self._check_slot(obj, slot)
        return self.load_slot(obj, slot)

    def write_ref(self, obj: ObjectRef, slot: int, target: Optional[ObjectRef]):
        """Store a reference through the write barrier."""
        if self.in_collection:
            raise SafepointViolationError("reference store during a collection")
        self._check_slot(obj, slot)
        if target is not None:
            self.header(target)
        with self._rset_lock:
            previous = self.load_slot(obj, slot)
            if previous is not None and previous.region_id != obj.region_id:
                self._rset_decrement_locked(previous.region_id, obj.region_id)
            self.store_slot(obj, slot, target)
            if target is not None and target.region_id != obj.region_id:
                self._rset_increment_locked(target.region_id, obj.region_id)

    def read_payload(self, obj: ObjectRef, offset: int, length: int) -> bytes:
        klass = self.class_of(obj)
        if offset < 0 or length < 0 or offset + length > klass.payload_bytes:
            raise SlotBoundsError(f"payload range [{offset}, {offset + length}) outside {klass.payload_bytes} bytes")
        start = obj.offset_bytes + klass.payload_offset + offset
        return bytes(self.regions[obj.region_id].data[start:start + length])

    def write_payload(self, obj: ObjectRef, offset: int, data: bytes):
        if self.in_collection:
            raise SafepointViolationError("payload store during a collection")
        klass = self.class_of(obj)
        if offset < 0 or offset + len(data) > klass.payload_bytes:
            raise SlotBoundsError(f"payload range [{offset}, {offset + len(data)}) outside {klass.payload_bytes} bytes")
        start = obj.offset_bytes + klass.payload_offset + offset
        self.regions[obj.region_id].data[start:start + len(data)] = data

    # Remembered sets

    def _rset_increment_locked(self, target_region: int, source_region: int):
        rset = self.regions[target_region].remembered_set
        rset[source_region] += 1
        if rset[source_region] == 1:
            self.regions[target_region].rset_insertions += 1
            self.rset_insertions_total += 1

    def _rset_decrement_locked(self, target_region: int, source_region: int):
        rset = self.regions[target_region].remembered_set
        if rset[source_region] <= 1:
            rset.pop(source_region, None)
        else:
            rset[source_region] -= 1

    def rset_add(self, target_region: int, source_region: int):
        if target_region != source_region:
            with self._rset_lock:
                self._rset_increment_locked(target_region, source_region)

    def rset_remove(self, target_region: int, source_region: int):
        if target_region != source_region:
            with self._rset_lock:
                self._rset_decrement_locked(target_region, source_region)

    def clear_remembered_sets(self):
        with self._rset_lock:
            for region in self.regions:
                region.remembered_set.clear()

    # Roots

    def register_root(self, obj: ObjectRef) -> RootHandle:
        self.header(obj)
        with self._lock:
            handle = RootHandle(self._next_root_id)
            self._next_root_id += 1
            self._roots[handle.handle_id] = obj
        return handle

    def unregister_root(self, handle: RootHandle):
        with self._lock:
            if self._roots.pop(handle.handle_id, None) is None:
                raise InvalidHandleError(f"root handle {handle.handle_id} is not registered")

    def resolve(self, handle: RootHandle) -> ObjectRef:
        try:
            return self._roots[handle.handle_id]
        except KeyError:
            raise InvalidHandleError(f"root handle {handle.handle_id} is not registered") from None

    def root_items(self) -> List[Tuple[int, ObjectRef]]:
        """(handle id, ref) pairs in handle order."""
        return sorted(self._roots.items())

    def update_root(self, handle_id: int, obj: ObjectRef):
        self._roots[handle_id] = obj

    @property
    def root_count(self) -> int:
        return len(self._roots)

    def reachable_objects(self) -> Set[ObjectRef]:
        """Objects reachable from the roots (breadth-first)."""
        seen: Set[ObjectRef] = set()
        queue = deque()
        for _, ref in self.root_items():
            if ref not in seen:
                seen.add(ref)
                queue.append(ref)
        while queue:
            ref = queue.popleft()
            for _, target in self.outgoing(ref):
                if target not in seen:
                    seen.add(target)
                    queue.append(target)
        return seen

    # Safepoints

    def add_safepoint_listener(self, listener: Callable[[], None]):
        """Register a callback run at the start of every collection."""
        self._safepoint_listeners.append(listener)

    def begin_collection(self):
        for listener in self._safepoint_listeners:
            listener()
        self.in_collection = True

    def end_collection(self, advance_epoch: bool = True):
        self.in_collection = False
        if advance_epoch:
            self.epoch += 1


def heap_new(config: HeapConfig) -> Heap:
    return Heap(config)
