from .object_model import (
    ClassDescriptor,
    ClassTable,
    ObjectHeader,
    ObjectRef,
    RootHandle,
    HEADER_BYTES,
    ALIGNMENT,
    REF_BYTES,
    FILLER_CLASS_ID,
    align_up,
    encode_ref,
    decode_ref,
)
from .regions import Region, Generation, HeapConfig, SpaceKind, FREE, GEN0, OLD
from .safepoint import Safepoint
from .heap import Heap, heap_new, slot_offset

__all__ = [
    "ClassDescriptor",
    "ClassTable",
    "ObjectHeader",
    "ObjectRef",
    "RootHandle",
    "HEADER_BYTES",
    "ALIGNMENT",
    "REF_BYTES",
    "FILLER_CLASS_ID",
    "align_up",
    "encode_ref",
    "decode_ref",
    "Region",
    "Generation",
    "HeapConfig",
    "SpaceKind",
    "FREE",
    "GEN0",
    "OLD",
    "Safepoint",
    "Heap",
    "heap_new",
    "slot_offset",
]
