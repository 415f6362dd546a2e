"""Allocation-site and object-lifetime recording."""

import threading
from dataclasses import dataclass, asdict
from typing import Dict, Iterable, List, Mapping, Optional, Union, Any

from src.collector.reports import CollectionEvent
from src.heap.object_model import ObjectRef
from src.utils.logger import get_logger

logger = get_logger(__name__)


@dataclass
class AllocationSite:
    """Counters for one allocation site."""
    site_id: str
    alloc_count: int = 0
    alloc_bytes: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class LifetimeRecord:
    """Birth and (once observed) death of one object, in collection epochs."""
    site_id: str
    birth_epoch: int
    death_epoch: Optional[int] = None

    @property
    def completed(self) -> bool:
        return self.death_epoch is not None

    @property
    def lifetime(self) -> Optional[int]:
        return None if self.death_epoch is None else self.death_epoch - self.birth_epoch


class LifetimeProfiler:
    """Tracks allocation sites and follows their objects across collections.

    A disabled profiler is a no-op and retains nothing.
    """

    def __init__(self, enabled: bool = True):
        self.enabled = enabled
        self.sites: Dict[str, AllocationSite] = {}
        self.records: List[LifetimeRecord] = []
        self._live: Dict[ObjectRef, LifetimeRecord] = {}
        self._lock = threading.Lock()
        self.epoch = 0
        self.collections_observed = 0

    def attach(self, collector):
        collector.add_listener(self._on_collection)

    def _on_collection(self, event: CollectionEvent):
        self.observe_collection(event.forwarding, event.epoch, event.collected_regions,
                                completed=event.report is not None)

    def record_allocation(self, site_id: str, obj: ObjectRef, size: int):
        if not self.enabled:
            return
        with self._lock:
            site = self.sites.get(site_id)
            if site is None:
                site = self.sites[site_id] = AllocationSite(site_id)
            site.alloc_count += 1
            site.alloc_bytes += size
            record = LifetimeRecord(site_id, birth_epoch=self.epoch)
            self.records.append(record)
            self._live[obj] = record

    def observe_collection(
        self,
        survivors: Union[Mapping[ObjectRef, ObjectRef], Iterable[ObjectRef]],
        epoch: int,
        collected_regions: Optional[Iterable[int]] = None,
        completed: bool = True
    ):
        """Close records of objects that did not survive and re-key moved ones.

        ``survivors`` is either a forwarding map (old address to new address) or a
        plain set of surviving addresses. When ``collected_regions`` is given, only
        objects inside those regions can die; the rest are left alone.
        """
        if not self.enabled:
            return
        if not isinstance(survivors, Mapping):
            survivors = {ref: ref for ref in survivors}
        collected = None if collected_regions is None else set(collected_regions)

        with self._lock:
            still_live: Dict[ObjectRef, LifetimeRecord] = {}
            deaths = 0
            for ref, record in self._live.items():
                moved = survivors.get(ref)
                if moved is not None:
                    still_live[moved] = record
                elif collected is None or ref.region_id in collected:
                    record.death_epoch = epoch
                    deaths += 1
                else:
                    still_live[ref] = record
            self._live = still_live
            self.epoch = epoch
            if completed:
                self.collections_observed += 1
        if deaths:
            logger.debug(f"Profiler observed {deaths} deaths at epoch {epoch}")

    @property
    def live_count(self) -> int:
        return len(self._live)

    def records_for(self, site_id: str) -> List[LifetimeRecord]:
        return [record for record in self.records if record.site_id == site_id]
