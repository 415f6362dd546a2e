"""Stop-the-world marking cycle."""

from typing import Iterable, List, Set

from src.collector.reports import MarkingStats
from src.heap.heap import Heap
from src.heap.object_model import ObjectRef
from src.heap.regions import GEN0
from src.utils.logger import get_logger

logger = get_logger(__name__)


def mark_from_roots(heap: Heap) -> List[ObjectRef]:
    """Set the mark bit of every reachable object and return them."""
    marked: List[ObjectRef] = []
    stack = [ref for _, ref in heap.root_items()]
    while stack:
        ref = stack.pop()
        header = heap.regions[ref.region_id].objects[ref.offset_bytes]
        if header.mark:
            continue
        header.mark = True
        marked.append(ref)
        for _, target in heap.outgoing(ref, header):
            if not heap.regions[target.region_id].objects[target.offset_bytes].mark:
                stack.append(target)
    return marked


def clear_marks(heap: Heap, marked: Iterable[ObjectRef]):
    for ref in marked:
        heap.regions[ref.region_id].objects[ref.offset_bytes].mark = False


def null_incoming(heap: Heap, victims: Set[int]):
    """Null slots outside ``victims`` that point into them.

    Only unreachable objects can hold such slots once the victims have no live data.
    """
    sources = set()
    for region_id in victims:
        sources.update(src for src in heap.regions[region_id].rset_sources() if src not in victims)
    for source in sorted(sources):
        for ref, header in list(heap.iter_objects(source)):
            for slot, target in heap.outgoing(ref, header):
                if target.region_id in victims:
                    heap.store_slot(ref, slot, None)
                    heap.rset_remove(target.region_id, source)


def run_marking(heap: Heap, release_empty: bool = True) -> MarkingStats:
    """Mark the heap, record per-region live bytes and free dead non-Gen-0 regions.

    Marks are cleared again before returning; only the statistics survive.
    """
    marked = mark_from_roots(heap)
    live_bytes = {region.region_id: 0 for region in heap.regions if not region.is_free}
    top_at_mark = {region_id: heap.regions[region_id].top for region_id in live_bytes}
    for ref in marked:
        live_bytes[ref.region_id] += heap.regions[ref.region_id].objects[ref.offset_bytes].size_bytes
    clear_marks(heap, marked)

    for region_id, live in live_bytes.items():
        heap.regions[region_id].live_bytes_estimate = live

    released = set()
    if release_empty:
        released = {
            region_id for region_id, live in live_bytes.items()
            if live == 0 and top_at_mark[region_id] > 0 and heap.regions[region_id].owner != GEN0
        }
        if released:
            null_incoming(heap, released)
            heap.release_regions(released)
            logger.debug(f"Marking released {len(released)} dead regions")
            # A released id may be handed to another generation before the next mixed collection.
            for region_id in released:
                del live_bytes[region_id]
                del top_at_mark[region_id]

    return MarkingStats(
        live_bytes=live_bytes,
        epoch=heap.epoch,
        released=frozenset(released),
        top_at_mark=top_at_mark,
    )
