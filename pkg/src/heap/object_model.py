"""Word-level layout of simulated heap objects."""

import struct
import threading
from dataclasses import dataclass, asdict
from typing import Dict, Optional, Tuple, Any

from src.utils.errors import ConfigurationError

HEADER_BYTES = 16
ALIGNMENT = 8
REF_BYTES = 8

# Class id reserved for dead filler objects that pad TLAB and region tails.
FILLER_CLASS_ID = 0

NULL_WORD = 0
_WORD = struct.Struct("<Q")


def align_up(value: int, alignment: int = ALIGNMENT) -> int:
    """Round value up to the next multiple of alignment."""
    return (value + alignment - 1) // alignment * alignment


@dataclass(frozen=True)
class ClassDescriptor:
    """Shape of a simulated class: reference slots followed by raw payload."""
    class_id: int
    ref_slot_count: int
    payload_bytes: int
    is_array: bool = False
    name: str = ""

    def __post_init__(self):
        if self.class_id <= FILLER_CLASS_ID:
            raise ConfigurationError("class_id", f"must be > {FILLER_CLASS_ID}, got {self.class_id}")
        if self.ref_slot_count < 0:
            raise ConfigurationError("ref_slot_count", "must be >= 0")
        if self.payload_bytes < 0:
            raise ConfigurationError("payload_bytes", "must be >= 0")

    @property
    def size_bytes(self) -> int:
        return align_up(HEADER_BYTES + self.ref_slot_count * REF_BYTES + self.payload_bytes)

    @property
    def payload_offset(self) -> int:
        """Offset of the payload relative to the object start."""
        return HEADER_BYTES + self.ref_slot_count * REF_BYTES

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


class ClassTable:
    """Per-heap registry of class descriptors.

    Ids are handed out in definition order starting at 1; id 0 is the filler class.
    """

    def __init__(self):
        self._classes: Dict[int, ClassDescriptor] = {}
        self._by_shape: Dict[Tuple[str, int, int, bool], ClassDescriptor] = {}
        self._next_id = FILLER_CLASS_ID + 1
        self._lock = threading.Lock()

    def define(
        self,
        name: str,
        ref_slots: int = 0,
        payload_bytes: int = 0,
        is_array: bool = False
    ) -> ClassDescriptor:
        """Return the descriptor for this shape, defining it on first use."""
        key = (name, ref_slots, payload_bytes, is_array)
        with self._lock:
            existing = self._by_shape.get(key)
            if existing is not None:
                return existing
            descriptor = ClassDescriptor(
                class_id=self._next_id,
                ref_slot_count=ref_slots,
                payload_bytes=payload_bytes,
                is_array=is_array,
                name=name
            )
            self._next_id += 1
            self._classes[descriptor.class_id] = descriptor
            self._by_shape[key] = descriptor
            return descriptor

    def register(self, descriptor: ClassDescriptor) -> ClassDescriptor:
        """Register an externally built descriptor, rejecting id clashes."""
        with self._lock:
            existing = self._classes.get(descriptor.class_id)
            if existing is not None and existing != descriptor:
                raise ConfigurationError("class_id", f"{descriptor.class_id} already names {existing.name!r}")
            self._classes[descriptor.class_id] = descriptor
            self._by_shape[(descriptor.name, descriptor.ref_slot_count,
                            descriptor.payload_bytes, descriptor.is_array)] = descriptor
            self._next_id = max(self._next_id, descriptor.class_id + 1)
            return descriptor

    def array_of(self, payload_bytes: int, ref_slots: int = 0) -> ClassDescriptor:
        """Descriptor for an array with the given element layout."""
        kind = "ref[]" if ref_slots else "byte[]"
        return self.define(f"{kind}{ref_slots or payload_bytes}", ref_slots, payload_bytes, is_array=True)

    def get(self, class_id: int) -> ClassDescriptor:
        return self._classes[class_id]

    def __contains__(self, class_id: int) -> bool:
        return class_id in self._classes

    def __len__(self) -> int:
        return len(self._classes)


@dataclass(frozen=True, order=True)
class ObjectRef:
    """Simulated address: a region index plus a byte offset inside it."""
    region_id: int
    offset_bytes: int

    def encode(self) -> int:
        # Region ids are stored biased by one so that a zeroed word reads as null.
        return ((self.region_id + 1) << 32) | self.offset_bytes

    def __str__(self) -> str:
        return f"R{self.region_id}+{self.offset_bytes}"


def encode_ref(ref: Optional[ObjectRef]) -> bytes:
    """Pack a reference (or null) into an 8-byte little-endian word."""
    return _WORD.pack(NULL_WORD if ref is None else ref.encode())


def decode_ref(buffer, offset: int = 0) -> Optional[ObjectRef]:
    """Unpack the reference word at offset; null decodes to None."""
    (word,) = _WORD.unpack_from(buffer, offset)
    if word == NULL_WORD:
        return None
    return ObjectRef((word >> 32) - 1, word & 0xFFFFFFFF)


@dataclass
class ObjectHeader:
    """Collector-visible metadata of one object."""
    class_id: int
    size_bytes: int
    age: int = 0
    mark: bool = False
    forward_to: Optional[ObjectRef] = None

    @property
    def is_filler(self) -> bool:
        return self.class_id == FILLER_CLASS_ID


@dataclass(frozen=True)
class RootHandle:
    """Opaque handle to a root slot; stays valid across object moves."""
    handle_id: int

