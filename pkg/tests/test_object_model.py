"""Tests for object layout, references, the write barrier and roots."""

import sys
from pathlib import Path

import pytest

# Add src to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.heap import (
    ClassDescriptor,
    ClassTable,
    ObjectRef,
    RootHandle,
    GEN0,
    OLD,
    align_up,
    decode_ref,
    encode_ref,
)
from src.utils.errors import (
    ConfigurationError,
    InvalidHandleError,
    InvalidReferenceError,
    SafepointViolationError,
    SlotBoundsError,
)


class TestClassDescriptor:
    """Tests for ClassDescriptor sizing."""

    def test_size_is_header_slots_and_payload_aligned(self):
        klass = ClassDescriptor(class_id=1, ref_slot_count=2, payload_bytes=5)
        assert klass.size_bytes == align_up(16 + 2 * 8 + 5) == 40
        assert klass.payload_offset == 32

    def test_empty_class_is_just_a_header(self):
        assert ClassDescriptor(class_id=1, ref_slot_count=0, payload_bytes=0).size_bytes == 16

    def test_filler_id_is_reserved(self):
        with pytest.raises(ConfigurationError):
            ClassDescriptor(class_id=0, ref_slot_count=0, payload_bytes=0)

    def test_negative_counts_rejected(self):
        with pytest.raises(ConfigurationError) as exc_info:
            ClassDescriptor(class_id=1, ref_slot_count=-1, payload_bytes=0)
        assert exc_info.value.field == "ref_slot_count"


class TestClassTable:
    """Tests for the per-heap class registry."""

    def test_ids_start_at_one_and_shapes_are_cached(self):
        table = ClassTable()
        first = table.define("Row", 0, 32)
        second = table.define("Node", 2, 8)
        assert first.class_id == 1
        assert second.class_id == 2
        assert table.define("Row", 0, 32) is first
        assert len(table) == 2

    def test_array_of_names_the_shape(self):
        table = ClassTable()
        array = table.array_of(24)
        assert array.is_array
        assert array.name == "byte[]24"
        assert table.array_of(24) is array
        assert table.array_of(0, ref_slots=4).name == "ref[]4"

    def test_register_rejects_conflicting_id(self):
        table = ClassTable()
        table.define("Row", 0, 32)
        with pytest.raises(ConfigurationError):
            table.register(ClassDescriptor(class_id=1, ref_slot_count=1, payload_bytes=0, name="Other"))

    def test_register_advances_next_id(self):
        table = ClassTable()
        table.register(ClassDescriptor(class_id=10, ref_slot_count=0, payload_bytes=8, name="Ext"))
        assert 10 in table
        assert table.define("Row", 0, 32).class_id == 11


class TestReferenceWords:
    """Tests for the in-arena encoding of references."""

    def test_zeroed_word_is_null(self):
        assert encode_ref(None) == bytes(8)
        assert decode_ref(bytearray(16), 8) is None

    def test_region_zero_offset_zero_is_not_null(self):
        word = encode_ref(ObjectRef(0, 0))
        assert word != bytes(8)
        assert decode_ref(word) == ObjectRef(0, 0)

    def test_decode_at_offset(self):
        buffer = bytearray(24)
        buffer[8:16] = encode_ref(ObjectRef(3, 64))
        assert decode_ref(buffer, 8) == ObjectRef(3, 64)

    def test_refs_order_by_region_then_offset(self):
        assert sorted([ObjectRef(1, 0), ObjectRef(0, 64), ObjectRef(0, 8)]) == [
            ObjectRef(0, 8), ObjectRef(0, 64), ObjectRef(1, 0)
        ]
        assert str(ObjectRef(2, 16)) == "R2+16"


class TestReadWriteRef:
    """Tests for slot access and the write barrier."""

    def test_fresh_slots_are_null(self, heap, bump):
        node = heap.classes.define("Node", 2, 0)
        obj = bump(heap, GEN0, node)
        assert heap.read_ref(obj, 0) is None
        assert heap.read_ref(obj, 1) is None

    def test_read_after_write(self, heap, bump):
        node = heap.classes.define("Node", 2, 0)
        a = bump(heap, GEN0, node)
        b = bump(heap, GEN0, node)
        heap.write_ref(a, 1, b)
        assert heap.read_ref(a, 1) == b
        assert heap.read_ref(a, 0) is None

    def test_same_region_store_adds_no_rset_entry(self, heap, bump):
        node = heap.classes.define("Node", 1, 0)
        a = bump(heap, GEN0, node)
        b = bump(heap, GEN0, node)
        heap.write_ref(a, 0, b)
        assert not heap.regions[a.region_id].remembered_set
        assert heap.rset_insertions_total == 0

    def test_old_to_young_store_is_remembered(self, heap, bump):
        node = heap.classes.define("Node", 1, 0)
        old = bump(heap, OLD, node)
        young = bump(heap, GEN0, node)
        heap.write_ref(old, 0, young)
        target = heap.regions[young.region_id]
        assert target.rset_sources() == [old.region_id]
        assert target.rset_insertions == 1
        assert heap.rset_insertions_total == 1

    def test_overwrite_drops_entry_when_count_reaches_zero(self, heap, bump):
        node = heap.classes.define("Node", 2, 0)
        old = bump(heap, OLD, node)
        young = bump(heap, GEN0, node)
        heap.write_ref(old, 0, young)
        heap.write_ref(old, 1, young)
        assert heap.regions[young.region_id].remembered_set[old.region_id] == 2
        # A second slot from the same source is not a new entry.
        assert heap.rset_insertions_total == 1

        heap.write_ref(old, 0, None)
        assert heap.regions[young.region_id].remembered_set[old.region_id] == 1
        heap.write_ref(old, 1, None)
        assert heap.regions[young.region_id].rset_sources() == []

    def test_slot_out_of_range(self, heap, bump):
        obj = bump(heap, GEN0, heap.classes.define("Node", 1, 0))
        with pytest.raises(SlotBoundsError):
            heap.read_ref(obj, 1)
        with pytest.raises(SlotBoundsError):
            heap.write_ref(obj, -1, None)

    def test_forwarded_ref_rejected_outside_collection(self, heap, bump):
        node = heap.classes.define("Node", 1, 0)
        obj = bump(heap, GEN0, node)
        heap.regions[obj.region_id].objects[obj.offset_bytes].forward_to = ObjectRef(5, 0)
        with pytest.raises(InvalidReferenceError):
            heap.read_ref(obj, 0)

    def test_ref_to_nothing_rejected(self, heap):
        with pytest.raises(InvalidReferenceError):
            heap.read_ref(ObjectRef(0, 8), 0)
        with pytest.raises(InvalidReferenceError):
            heap.read_ref(ObjectRef(999, 0), 0)

    def test_store_during_collection_rejected(self, heap, bump):
        node = heap.classes.define("Node", 1, 0)
        a = bump(heap, GEN0, node)
        heap.in_collection = True
        with pytest.raises(SafepointViolationError):
            heap.write_ref(a, 0, None)


class TestPayload:
    """Tests for payload reads and writes."""

    def test_payload_round_trip_and_zero_init(self, heap, bump):
        row = heap.classes.define("Row", 1, 24)
        obj = bump(heap, GEN0, row)
        assert heap.read_payload(obj, 0, 24) == bytes(24)
        heap.write_payload(obj, 4, b"abcd")
        assert heap.read_payload(obj, 0, 8) == b"\0\0\0\0abcd"
        # The reference slot is untouched by payload writes.
        assert heap.read_ref(obj, 0) is None

    def test_payload_bounds(self, heap, bump):
        obj = bump(heap, GEN0, heap.classes.define("Row", 0, 8))
        with pytest.raises(SlotBoundsError):
            heap.write_payload(obj, 4, b"12345")
        with pytest.raises(SlotBoundsError):
            heap.read_payload(obj, 0, 9)


class TestRoots:
    """Tests for root registration across collections."""

    def test_rooted_object_survives_full_collection(self, runtime, mutator):
        handle = mutator.new(mutator.klass("Row", payload_bytes=8), "test.row")
        mutator.write(handle, 0, b"survivor")
        runtime.collector.full_collect()
        assert mutator.read(mutator.resolve(handle), 0, 8) == b"survivor"

    def test_unrooted_object_is_reclaimed(self, runtime, mutator):
        handle = mutator.new(mutator.klass("Row", payload_bytes=8), "test.row")
        ref = mutator.resolve(handle)
        mutator.release(handle)
        runtime.collector.full_collect()
        assert runtime.heap.root_count == 0
        assert not any(
            not header.is_filler
            for region in runtime.heap.regions
            for header in region.objects.values()
        )
        with pytest.raises(InvalidReferenceError):
            runtime.heap.header(ref)

    def test_promoted_object_handle_follows(self, runtime, mutator):
        handle = mutator.new(mutator.klass("Row", payload_bytes=8), "test.row")
        for _ in range(runtime.config.promotion_age + 1):
            runtime.collector.minor_collect()
        ref = mutator.resolve(handle)
        assert runtime.heap.regions[ref.region_id].owner == OLD

    def test_double_unregister(self, heap, bump):
        obj = bump(heap, GEN0, heap.classes.define("Row", 0, 8))
        handle = heap.register_root(obj)
        heap.unregister_root(handle)
        with pytest.raises(InvalidHandleError):
            heap.unregister_root(handle)

    def test_unknown_handle(self, heap):
        with pytest.raises(InvalidHandleError):
            heap.resolve(RootHandle(12345))
