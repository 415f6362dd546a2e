"""Sliding mark-compact over the whole heap (full collections)."""

from dataclasses import dataclass, field
from typing import Dict, List, Set, Tuple

from src.collector.marking import mark_from_roots, clear_marks
from src.heap.heap import Heap
from src.heap.object_model import ObjectHeader, ObjectRef
from src.heap.regions import SpaceKind, OLD
from src.utils.logger import get_logger

logger = get_logger(__name__)


@dataclass
class CompactionResult:
    forwarding: Dict[ObjectRef, ObjectRef] = field(default_factory=dict)
    collected: Set[int] = field(default_factory=set)
    bytes_copied: int = 0
    objects_promoted: int = 0
    rset_entries_scanned: int = 0
    regions_released: int = 0
    live_bytes: Dict[int, int] = field(default_factory=dict)


def full_compact(heap: Heap) -> CompactionResult:
    """Slide every reachable object towards the lowest in-use region ids.

    All survivors end up in Old; every other in-use region is released and every
    dynamic generation is discarded. Each survivor counts as copied, including
    those that keep their address.
    """
    region_bytes = heap.config.region_bytes
    order = [region.region_id for region in heap.regions if not region.is_free]
    result = CompactionResult(collected=set(order))

    marked = mark_from_roots(heap)
    clear_marks(heap, marked)
    live = sorted(marked)

    # Compute forwarding addresses.
    dest_index = 0
    cursor = 0
    tops: Dict[int, int] = {}
    moves: List[Tuple[ObjectRef, ObjectHeader, bytes]] = []
    for ref in live:
        region = heap.regions[ref.region_id]
        header = region.objects[ref.offset_bytes]
        if cursor + header.size_bytes > region_bytes:
            dest_index += 1
            cursor = 0
        new_ref = ObjectRef(order[dest_index], cursor)
        cursor += header.size_bytes
        tops[new_ref.region_id] = cursor

        header.forward_to = new_ref
        result.forwarding[ref] = new_ref
        result.bytes_copied += header.size_bytes
        if region.owner != OLD:
            result.objects_promoted += 1
        blob = bytes(region.data[ref.offset_bytes:ref.offset_bytes + header.size_bytes])
        moves.append((new_ref, header, blob))

    # Rebuild region contents from the snapshot.
    for region_id in order:
        region = heap.regions[region_id]
        region.data[:region.top] = bytes(region.top)
        region.top = 0
        region.objects.clear()
        region.live_bytes_estimate = None
    heap.clear_remembered_sets()

    for new_ref, header, blob in moves:
        region = heap.regions[new_ref.region_id]
        region.data[new_ref.offset_bytes:new_ref.offset_bytes + len(blob)] = blob
        region.objects[new_ref.offset_bytes] = ObjectHeader(header.class_id, header.size_bytes, age=header.age)
    for region_id, top in tops.items():
        heap.regions[region_id].top = top
        heap.regions[region_id].live_bytes_estimate = top
    result.live_bytes = dict(tops)

    # Fix up slots and rebuild remembered sets without counting insertions.
    for new_ref, _, _ in moves:
        for slot, target in heap.outgoing(new_ref):
            moved = result.forwarding[target]
            heap.store_slot(new_ref, slot, moved)
            if moved.region_id != new_ref.region_id:
                heap.regions[moved.region_id].remembered_set[new_ref.region_id] += 1

    for handle_id, ref in heap.root_items():
        heap.update_root(handle_id, result.forwarding[ref])

    destinations = sorted(tops)
    for region_id in destinations:
        region = heap.regions[region_id]
        if region.owner != OLD or region.space_kind != SpaceKind.TENURED:
            heap.reassign_region(region_id, OLD, SpaceKind.TENURED)
    empty = [region_id for region_id in order if region_id not in tops]
    result.regions_released = heap.release_regions(empty)

    old_gen = heap.generations[OLD]
    old_gen.current_alloc_region = destinations[-1] if destinations else None
    for gen in heap.generations.values():
        if not gen.is_builtin and not gen.discarded:
            for region_id in list(gen.regions):
                heap.reassign_region(region_id, OLD, SpaceKind.TENURED)
            gen.discarded = True

    logger.debug(
        f"Compacted {len(moves)} objects ({result.bytes_copied} bytes) into {len(destinations)} regions"
    )
    return result
