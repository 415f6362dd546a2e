"""Collection kinds, per-collection reports and marking statistics."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Mapping, Any, Optional, FrozenSet

from src.heap.object_model import ObjectRef

# Field order of a GC log record; the first eight names are the stable interface.
REPORT_FIELDS = (
    "kind",
    "pause_cost_units",
    "wall_ms",
    "bytes_copied",
    "objects_promoted",
    "rset_updates",
    "regions_reclaimed",
    "epoch",
    "rset_entries_scanned",
    "marking_ran",
    "marking_wall_ms",
    "regions_in_use",
    "regions_high_water",
    "escalated",
)


class CollectionKind(str, Enum):
    MINOR = "Minor"
    MIXED = "Mixed"
    FULL = "Full"


def pause_cost(bytes_copied: int, rset_entries_scanned: int, alpha: float) -> float:
    return bytes_copied + alpha * rset_entries_scanned


@dataclass
class GcReport:
    """Metrics of one collection."""
    kind: CollectionKind
    pause_cost_units: float = 0.0
    wall_ms: float = 0.0
    bytes_copied: int = 0
    objects_promoted: int = 0
    rset_updates: int = 0
    regions_reclaimed: int = 0
    epoch: int = 0
    rset_entries_scanned: int = 0
    marking_ran: bool = False
    marking_wall_ms: float = 0.0
    regions_in_use: int = 0
    regions_high_water: int = 0
    escalated: bool = False

    def to_dict(self) -> Dict[str, Any]:
        data = {name: getattr(self, name) for name in REPORT_FIELDS}
        data["kind"] = self.kind.value
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "GcReport":
        values = {name: data[name] for name in REPORT_FIELDS if name in data}
        values["kind"] = CollectionKind(values["kind"])
        return cls(**values)


@dataclass
class MarkingStats:
    """Per-region live bytes found by a marking cycle.

    Regions released by the marking itself are not listed. ``top_at_mark`` is the
    bump pointer of each listed region when it was marked; anything allocated
    above it since then counts as live.
    """
    live_bytes: Dict[int, int] = field(default_factory=dict)
    epoch: int = 0
    released: FrozenSet[int] = frozenset()
    wall_ms: float = 0.0
    top_at_mark: Dict[int, int] = field(default_factory=dict)

    def live_fraction(self, region_id: int, top: int) -> Optional[float]:
        if region_id not in self.live_bytes or top <= 0:
            return None
        allocated_since = max(0, top - self.top_at_mark.get(region_id, top))
        return min(1.0, (self.live_bytes[region_id] + allocated_since) / top)


@dataclass
class CollectionEvent:
    """What listeners see after each collection.

    ``forwarding`` maps every surviving object of a collected region to its new
    address (possibly the same one); objects of ``collected_regions`` missing from
    it are dead. ``report`` is None for a standalone marking cycle.
    """
    report: Optional[GcReport]
    forwarding: Mapping[ObjectRef, ObjectRef]
    collected_regions: FrozenSet[int]
    epoch: int
