"""Region, generation and heap configuration types."""

import threading
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Any

from pydantic import BaseModel, ConfigDict, model_validator

from src.config import settings
from src.heap.object_model import ObjectHeader, ALIGNMENT
from src.utils.errors import ConfigurationError

FREE = -1
GEN0 = 0
OLD = 1


class SpaceKind(str, Enum):
    EDEN = "eden"
    SURVIVOR = "survivor"
    TENURED = "tenured"


@dataclass
class Region:
    """Fixed-size block of heap memory with a bump pointer.

    ``remembered_set`` maps a source region id to the number of reference slots in
    that region pointing here; its keys are the remembered set proper.
    ``objects`` maps offsets to headers for every object and filler in [0, top).
    """
    region_id: int
    size: int
    data: bytearray = None
    top: int = 0
    owner: int = FREE
    space_kind: Optional[SpaceKind] = None
    remembered_set: Counter = field(default_factory=Counter)
    rset_insertions: int = 0
    live_bytes_estimate: Optional[int] = None
    objects: Dict[int, ObjectHeader] = field(default_factory=dict)

    def __post_init__(self):
        if self.data is None:
            self.data = bytearray(self.size)

    @property
    def is_free(self) -> bool:
        return self.owner == FREE

    @property
    def free_bytes(self) -> int:
        return self.size - self.top

    def rset_sources(self) -> List[int]:
        """Source region ids currently in the remembered set, ascending."""
        return sorted(src for src, count in self.remembered_set.items() if count > 0)


@dataclass
class Generation:
    """Identifier-addressed list of regions with a current allocation region."""
    gen_id: int
    regions: List[int] = field(default_factory=list)
    current_alloc_region: Optional[int] = None
    created_epoch: int = 0
    discarded: bool = False
    lock: threading.RLock = field(default_factory=threading.RLock, repr=False, compare=False)

    @property
    def is_builtin(self) -> bool:
        return self.gen_id in (GEN0, OLD)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "gen_id": self.gen_id,
            "regions": list(self.regions),
            "current_alloc_region": self.current_alloc_region,
            "created_epoch": self.created_epoch,
            "discarded": self.discarded,
        }


class HeapConfig(BaseModel):
    """Heap geometry and collection policy."""

    model_config = ConfigDict(frozen=True)

    heap_bytes: int
    region_bytes: int
    gen0_max_bytes: int
    tlab_bytes: int
    promotion_age: int = 2
    mixed_trigger_occupancy: float = 0.45
    region_live_threshold: float = 0.5
    survivor_regions: int = 2
    full_trigger_occupancy: float = 0.95
    pause_alpha: float = 0.5
    debug_checks: bool = False

    @model_validator(mode="after")
    def _check_geometry(self) -> "HeapConfig":
        # ConfigurationError is not a ValueError, so pydantic lets it through unchanged.
        if self.region_bytes <= 0 or self.region_bytes % ALIGNMENT:
            raise ConfigurationError("region_bytes", f"must be a positive multiple of {ALIGNMENT}")
        if self.heap_bytes <= 0 or self.heap_bytes % self.region_bytes:
            raise ConfigurationError("heap_bytes", "region_bytes must divide heap_bytes")
        if self.tlab_bytes <= 0 or self.tlab_bytes > self.region_bytes:
            raise ConfigurationError("tlab_bytes", "must be in (0, region_bytes]")
        if self.gen0_max_bytes < 2 * self.region_bytes:
            raise ConfigurationError("gen0_max_bytes", "must be at least 2 x region_bytes")
        if self.gen0_max_bytes > self.heap_bytes:
            raise ConfigurationError("gen0_max_bytes", "must not exceed heap_bytes")
        if not 0 < self.mixed_trigger_occupancy < 1:
            raise ConfigurationError("mixed_trigger_occupancy", "must be in (0, 1)")
        if not 0 < self.region_live_threshold <= 1:
            raise ConfigurationError("region_live_threshold", "must be in (0, 1]")
        if not 0 < self.full_trigger_occupancy <= 1:
            raise ConfigurationError("full_trigger_occupancy", "must be in (0, 1]")
        if self.promotion_age < 0:
            raise ConfigurationError("promotion_age", "must be >= 0")
        if self.survivor_regions < 1:
            raise ConfigurationError("survivor_regions", "must be >= 1")
        if self.pause_alpha < 0:
            raise ConfigurationError("pause_alpha", "must be >= 0")
        return self

    @property
    def region_count(self) -> int:
        return self.heap_bytes // self.region_bytes

    @property
    def max_eden_regions(self) -> int:
        return self.gen0_max_bytes // self.region_bytes

    @property
    def large_object_bytes(self) -> int:
        """Objects at least this big bypass TLABs."""
        return self.tlab_bytes // 8

    @classmethod
    def from_settings(cls, **overrides) -> "HeapConfig":
        """Build a config from global settings, with explicit overrides winning."""
        values = {
            "heap_bytes": settings.heap_bytes,
            "region_bytes": settings.region_bytes,
            "gen0_max_bytes": settings.gen0_max_bytes,
            "tlab_bytes": settings.tlab_bytes,
            "promotion_age": settings.promotion_age,
            "mixed_trigger_occupancy": settings.mixed_trigger_occupancy,
            "region_live_threshold": settings.region_live_threshold,
            "survivor_regions": settings.survivor_regions,
            "full_trigger_occupancy": settings.full_trigger_occupancy,
            "pause_alpha": settings.pause_alpha,
            "debug_checks": settings.debug_checks,
        }
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**values)
