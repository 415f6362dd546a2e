"""Independent heap oracles: reachability, remembered sets, partition and closure.

These read region memory directly instead of going through the collector, so
they can be used to check it.
"""

import hashlib
import random
from collections import Counter, deque
from typing import Dict, Iterable, List, Optional, Set

from src.harness.mutator import Mutator
from src.heap import Heap, ObjectRef, RootHandle, REF_BYTES, HEADER_BYTES, FREE, decode_ref


def _slots(heap: Heap, ref: ObjectRef) -> List[Optional[ObjectRef]]:
    region = heap.regions[ref.region_id]
    header = region.objects[ref.offset_bytes]
    klass = heap.classes.get(header.class_id)
    base = ref.offset_bytes + HEADER_BYTES
    return [decode_ref(region.data, base + slot * REF_BYTES) for slot in range(klass.ref_slot_count)]


def all_objects(heap: Heap, regions: Optional[Iterable[int]] = None) -> List[ObjectRef]:
    """Every non-filler object of the given (default: all in-use) regions."""
    if regions is None:
        regions = [r.region_id for r in heap.regions if not r.is_free]
    found = []
    for region_id in sorted(regions):
        region = heap.regions[region_id]
        for offset, header in sorted(region.objects.items()):
            if not header.is_filler:
                found.append(ObjectRef(region_id, offset))
    return found


def oracle_reachable(heap: Heap, extra_roots: Iterable[ObjectRef] = ()) -> Set[ObjectRef]:
    """Breadth-first closure from the roots plus ``extra_roots``."""
    seen: Set[ObjectRef] = set()
    queue = deque()
    for ref in [ref for _, ref in heap.root_items()] + list(extra_roots):
        if ref not in seen:
            seen.add(ref)
            queue.append(ref)
    while queue:
        for target in _slots(heap, queue.popleft()):
            if target is not None and target not in seen:
                seen.add(target)
                queue.append(target)
    return seen


def cset_survivors(heap: Heap, cset: Set[int]) -> Set[ObjectRef]:
    """Objects of ``cset`` reachable from roots or from any object outside it."""
    outside = [r.region_id for r in heap.regions if not r.is_free and r.region_id not in cset]
    reachable = oracle_reachable(heap, all_objects(heap, outside))
    return {ref for ref in reachable if ref.region_id in cset}


def rset_oracle(heap: Heap) -> Dict[int, Counter]:
    """Cross-region slot counts per target region, from a scan of every object slot."""
    expected: Dict[int, Counter] = {}
    for ref in all_objects(heap):
        for target in _slots(heap, ref):
            if target is not None and target.region_id != ref.region_id:
                expected.setdefault(target.region_id, Counter())[ref.region_id] += 1
    return expected


def check_remembered_sets(heap: Heap) -> List[str]:
    problems = []
    expected = rset_oracle(heap)
    for region in heap.regions:
        actual = {source: count for source, count in region.remembered_set.items() if count > 0}
        wanted = dict(expected.get(region.region_id, {}))
        if actual != wanted:
            problems.append(f"region {region.region_id}: remembered set {actual} != scanned {wanted}")
    return problems


def check_partition(heap: Heap) -> List[str]:
    """Every region is free or owned by exactly the generation that lists it."""
    problems = []
    free = set(heap.free_region_ids())
    listed: Dict[int, int] = {}
    for gen in heap.generations.values():
        for region_id in gen.regions:
            if region_id in listed:
                problems.append(f"region {region_id} listed by generations {listed[region_id]} and {gen.gen_id}")
            listed[region_id] = gen.gen_id
        if gen.discarded and gen.regions:
            problems.append(f"discarded generation {gen.gen_id} still owns regions")
    for region in heap.regions:
        if region.owner == FREE:
            if region.region_id not in free or region.region_id in listed:
                problems.append(f"free region {region.region_id} is not only on the free list")
        elif listed.get(region.region_id) != region.owner:
            problems.append(f"region {region.region_id} owner {region.owner} disagrees with generation lists")
    return problems


def check_accounting(heap: Heap) -> List[str]:
    """Object extents are aligned, disjoint and below the region's top."""
    problems = []
    for region in heap.regions:
        if region.is_free:
            if region.objects or region.top:
                problems.append(f"free region {region.region_id} is not empty")
            continue
        end = 0
        for offset, header in sorted(region.objects.items()):
            if offset < end:
                problems.append(f"region {region.region_id}: object at {offset} overlaps previous")
            if offset % 8 or header.size_bytes % 8:
                problems.append(f"region {region.region_id}: misaligned object at {offset}")
            end = offset + header.size_bytes
        if end > region.top:
            problems.append(f"region {region.region_id}: objects end at {end} past top {region.top}")
    return problems


def check_closure(heap: Heap) -> List[str]:
    """Reachable objects only point at live headers, and nothing is left forwarded."""
    problems = []
    for ref in oracle_reachable(heap):
        region = heap.regions[ref.region_id]
        header = region.objects.get(ref.offset_bytes)
        if region.is_free or header is None or header.is_filler:
            problems.append(f"dangling reference to {ref}")
            continue
        if header.forward_to is not None or header.mark:
            problems.append(f"{ref} carries collector state between collections")
    return problems


def check_heap(heap: Heap) -> List[str]:
    return check_partition(heap) + check_accounting(heap) + check_closure(heap) + check_remembered_sets(heap)


def graph_fingerprint(heap: Heap) -> str:
    """sha256 over the reachable graph with addresses replaced by discovery order.

    Two heaps with the same roots, shapes, payloads and edges hash alike no
    matter where their objects were placed.
    """
    ids: Dict[ObjectRef, int] = {}
    order: List[ObjectRef] = []
    roots = [ref for _, ref in heap.root_items()]

    def visit(ref: ObjectRef) -> int:
        if ref not in ids:
            ids[ref] = len(order)
            order.append(ref)
        return ids[ref]

    digest = hashlib.sha256()
    digest.update(repr([visit(ref) for ref in roots]).encode())
    index = 0
    while index < len(order):
        ref = order[index]
        index += 1
        region = heap.regions[ref.region_id]
        header = region.objects[ref.offset_bytes]
        klass = heap.classes.get(header.class_id)
        edges = [None if target is None else visit(target) for target in _slots(heap, ref)]
        start = ref.offset_bytes + klass.payload_offset
        payload = bytes(region.data[start:start + klass.payload_bytes])
        digest.update(repr((klass.name, klass.ref_slot_count, klass.is_array, edges)).encode())
        digest.update(payload)
    return digest.hexdigest()


def build_random_graph(
    m: Mutator,
    rng: random.Random,
    objects: int = 200,
    generations: int = 2,
    max_slots: int = 3,
    root_fraction: float = 0.2,
    pretenure_fraction: float = 0.5
) -> List[RootHandle]:
    """Allocate a random object graph with cross-generation edges.

    Returns the handles kept as roots; the others are released, so part of the
    graph is garbage.
    """
    gens = [m.new_generation() for _ in range(generations)]
    handles: List[RootHandle] = []
    for _ in range(objects):
        klass = m.klass("Node", ref_slots=rng.randint(0, max_slots), payload_bytes=rng.choice([0, 8, 24]))
        gen = rng.choice(gens) if gens and rng.random() < pretenure_fraction else None
        handle = m.new(klass, "graph.node", gen)
        if klass.payload_bytes:
            m.write(handle, 0, rng.getrandbits(64).to_bytes(8, "little"))
        for slot in range(klass.ref_slot_count):
            if handles and rng.random() < 0.7:
                m.store(handle, slot, rng.choice(handles))
        if handles:
            source = rng.choice(handles)
            slots = m.heap.class_of(m.resolve(source)).ref_slot_count
            if slots:
                m.store(source, rng.randrange(slots), handle)
        handles.append(handle)

    kept = []
    for handle in handles:
        if rng.random() < root_fraction:
            kept.append(handle)
        else:
            m.release(handle)
    return kept
