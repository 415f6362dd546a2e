"""Copying evacuation of a collection set (minor and mixed collections).

Survivors are found from the roots and from every object in a remembered-set
source region outside the collection set, traced through the collection set,
then copied in (region, offset) order:

* Gen 0 objects younger than ``promotion_age`` go to Survivor space (age + 1)
  while Survivor space has room, everything else goes to Old.
* Dynamic-generation and Old survivors go to Old, never into a region of the
  collection set.

Destinations are planned before anything moves; a plan that needs more free
regions than exist raises EvacuationFailure with the heap untouched.
"""

from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple

from src.heap.heap import Heap
from src.heap.object_model import ObjectHeader, ObjectRef
from src.heap.regions import SpaceKind, GEN0, OLD
from src.utils.errors import EvacuationFailure
from src.utils.logger import get_logger

logger = get_logger(__name__)


@dataclass
class EvacuationResult:
    forwarding: Dict[ObjectRef, ObjectRef] = field(default_factory=dict)
    collected: Set[int] = field(default_factory=set)
    bytes_copied: int = 0
    objects_promoted: int = 0
    rset_entries_scanned: int = 0
    regions_released: int = 0


class _PlanStream:
    """Bump-pointer simulation of one destination space."""

    def __init__(self, region_bytes: int, initial_free: int = 0, max_regions: Optional[int] = None):
        self.region_bytes = region_bytes
        self.free = initial_free
        self.new_regions = 0
        self.max_regions = max_regions

    def can_take(self, size: int) -> bool:
        return size <= self.free or self.max_regions is None or self.new_regions < self.max_regions

    def take(self, size: int):
        if size > self.free:
            self.new_regions += 1
            self.free = self.region_bytes
        self.free -= size


class _Destination:
    """Real destination space: fills its current region, then acquires fresh ones."""

    def __init__(self, heap: Heap, gen_id: int, kind: SpaceKind, region_id: Optional[int], make_current: bool):
        self.heap = heap
        self.gen_id = gen_id
        self.kind = kind
        self.region_id = region_id
        self.make_current = make_current

    def place(self, size: int) -> Tuple[int, int]:
        region = self.heap.regions[self.region_id] if self.region_id is not None else None
        if region is None or region.free_bytes < size:
            self.region_id = self.heap.region_acquire(self.gen_id, self.kind, make_current=self.make_current)
            region = self.heap.regions[self.region_id]
        offset = region.top
        region.top += size
        return self.region_id, offset


def _scan_external(heap: Heap, cset: Set[int]) -> Tuple[List[Tuple[ObjectRef, int, ObjectRef]], int]:
    """Slots outside the collection set that point into it, via remembered sets."""
    sources = set()
    entries = 0
    for region_id in sorted(cset):
        for source in heap.regions[region_id].rset_sources():
            if source not in cset:
                entries += 1
                sources.add(source)

    external = []
    for source in sorted(sources):
        for ref, header in heap.iter_objects(source):
            for slot, target in heap.outgoing(ref, header):
                if target.region_id in cset:
                    external.append((ref, slot, target))
    return external, entries


def _trace(heap: Heap, cset: Set[int], seeds: List[ObjectRef]) -> List[ObjectRef]:
    live: Set[ObjectRef] = set()
    queue = deque()
    for ref in seeds:
        if ref not in live:
            live.add(ref)
            queue.append(ref)
    while queue:
        ref = queue.popleft()
        for _, target in heap.outgoing(ref):
            if target.region_id in cset and target not in live:
                live.add(target)
                queue.append(target)
    return sorted(live)


def evacuate(heap: Heap, cset: Set[int], promotion_age: int, survivor_regions: int) -> EvacuationResult:
    """Copy every survivor out of ``cset`` and release the collection set."""
    config = heap.config
    result = EvacuationResult(collected=set(cset))

    external, result.rset_entries_scanned = _scan_external(heap, cset)
    seeds = [ref for _, ref in heap.root_items() if ref.region_id in cset]
    seeds.extend(target for _, _, target in external)
    live = _trace(heap, cset, seeds)

    old_gen = heap.generations[OLD]
    old_region = old_gen.current_alloc_region
    if old_region is not None and old_region in cset:
        old_region = None
    old_free = heap.regions[old_region].free_bytes if old_region is not None else 0

    survivor_plan = _PlanStream(config.region_bytes, max_regions=survivor_regions)
    old_plan = _PlanStream(config.region_bytes, initial_free=old_free)
    plan: List[Tuple[ObjectRef, ObjectHeader, SpaceKind]] = []
    for ref in live:
        header = heap.regions[ref.region_id].objects[ref.offset_bytes]
        owner = heap.regions[ref.region_id].owner
        if owner == GEN0 and header.age < promotion_age and survivor_plan.can_take(header.size_bytes):
            survivor_plan.take(header.size_bytes)
            plan.append((ref, header, SpaceKind.SURVIVOR))
        else:
            old_plan.take(header.size_bytes)
            plan.append((ref, header, SpaceKind.TENURED))

    needed = survivor_plan.new_regions + old_plan.new_regions
    if needed > heap.free_region_count:
        raise EvacuationFailure(needed, heap.free_region_count)

    survivor_dest = _Destination(heap, GEN0, SpaceKind.SURVIVOR, None, make_current=False)
    old_dest = _Destination(heap, OLD, SpaceKind.TENURED, old_region, make_current=True)

    copies: List[ObjectRef] = []
    for ref, header, space in plan:
        source = heap.regions[ref.region_id]
        dest = survivor_dest if space == SpaceKind.SURVIVOR else old_dest
        region_id, offset = dest.place(header.size_bytes)
        target = heap.regions[region_id]
        target.data[offset:offset + header.size_bytes] = source.data[ref.offset_bytes:ref.offset_bytes + header.size_bytes]
        age = header.age + 1 if source.owner == GEN0 else header.age
        target.objects[offset] = ObjectHeader(header.class_id, header.size_bytes, age=age)

        new_ref = ObjectRef(region_id, offset)
        header.forward_to = new_ref
        result.forwarding[ref] = new_ref
        result.bytes_copied += header.size_bytes
        if space == SpaceKind.TENURED and source.owner != OLD:
            result.objects_promoted += 1
        copies.append(new_ref)

    # Fix up slots of the copies, then external slots and roots.
    for new_ref in copies:
        for slot, target in heap.outgoing(new_ref):
            if target.region_id in cset:
                target = result.forwarding[target]
                heap.store_slot(new_ref, slot, target)
            heap.rset_add(target.region_id, new_ref.region_id)

    for ref, slot, target in external:
        moved = result.forwarding[target]
        heap.store_slot(ref, slot, moved)
        heap.rset_add(moved.region_id, ref.region_id)

    for handle_id, ref in heap.root_items():
        if ref.region_id in cset:
            heap.update_root(handle_id, result.forwarding[ref])

    result.regions_released = heap.release_regions(cset)
    logger.debug(
        f"Evacuated {len(copies)} objects ({result.bytes_copied} bytes) out of {len(cset)} regions"
    )
    return result
