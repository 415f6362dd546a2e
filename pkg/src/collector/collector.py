"""Collection policy and orchestration: minor, mixed and full collections."""

import time
from typing import Callable, List, Optional, Set

from src.collector.compaction import full_compact
from src.collector.evacuation import evacuate
from src.collector.marking import run_marking
from src.collector.reports import (
    CollectionEvent,
    CollectionKind,
    GcReport,
    MarkingStats,
    pause_cost,
)
from src.heap.heap import Heap
from src.heap.regions import GEN0
from src.utils.errors import EvacuationFailure, FreeListExhaustedError, Gen0CapacityError, HeapExhaustedError
from src.utils.logger import get_logger

logger = get_logger(__name__)

CollectionListener = Callable[[CollectionEvent], None]


class Collector:
    """Runs collections at a safepoint and reports their cost.

    In deterministic mode the clock is frozen, so every wall time is 0.0 and GC
    logs of identical runs are byte-identical.
    """

    def __init__(
        self,
        heap: Heap,
        alpha: Optional[float] = None,
        deterministic: bool = True,
        clock: Optional[Callable[[], float]] = None
    ):
        self.heap = heap
        self.config = heap.config
        self.alpha = self.config.pause_alpha if alpha is None else alpha
        self.deterministic = deterministic
        if clock is not None:
            self._clock = clock
        elif deterministic:
            self._clock = lambda: 0.0
        else:
            self._clock = time.perf_counter
        self.last_marking: Optional[MarkingStats] = None
        self.reports: List[GcReport] = []
        self._listeners: List[CollectionListener] = []
        self._insertions_at_last_gc = heap.rset_insertions_total

    def add_listener(self, listener: CollectionListener):
        self._listeners.append(listener)

    def remove_listener(self, listener: CollectionListener):
        self._listeners.remove(listener)

    # Policy

    def should_trigger(self, signal: Optional[HeapExhaustedError] = None) -> Optional[CollectionKind]:
        """Pick the collection kind for the current heap state, or None."""
        occupancy = self.heap.heap_occupancy()
        if (
            isinstance(signal, FreeListExhaustedError)
            or self.heap.free_region_count == 0
            or occupancy >= self.config.full_trigger_occupancy
        ):
            return CollectionKind.FULL
        if isinstance(signal, Gen0CapacityError) or self.heap.gen0_full():
            if occupancy >= self.config.mixed_trigger_occupancy:
                return CollectionKind.MIXED
            return CollectionKind.MINOR
        return None

    def collect_for_allocation(self, signal: Optional[HeapExhaustedError] = None) -> GcReport:
        kind = self.should_trigger(signal) or CollectionKind.MINOR
        return self.collect(kind)

    def collect(self, kind: CollectionKind) -> GcReport:
        if kind == CollectionKind.FULL:
            return self.full_collect()
        if kind == CollectionKind.MIXED:
            return self.mixed_collect()
        return self.minor_collect()

    # Collections

    def minor_collect(self) -> GcReport:
        """Collect exactly Gen 0 (Eden plus From-survivor regions)."""
        return self._collect(CollectionKind.MINOR)

    def mixed_collect(self, marking: Optional[MarkingStats] = None) -> GcReport:
        """Collect Gen 0 plus low-liveness regions of other generations, then mark."""
        return self._collect(CollectionKind.MIXED, marking=marking or self.last_marking)

    def full_collect(self) -> GcReport:
        """Compact the whole heap into Old."""
        return self._collect(CollectionKind.FULL)

    def run_marking(self, release_empty: bool = True) -> MarkingStats:
        """Standalone marking cycle; does not advance the collection epoch."""
        heap = self.heap
        with heap.safepoint.exclusive():
            heap.begin_collection()
            try:
                stats = self._mark(release_empty)
            finally:
                heap.end_collection(advance_epoch=False)
            if stats.released:
                self._notify(CollectionEvent(None, {}, stats.released, heap.epoch))
        return stats

    def _mark(self, release_empty: bool = True) -> MarkingStats:
        started = self._clock()
        stats = run_marking(self.heap, release_empty=release_empty)
        stats.wall_ms = (self._clock() - started) * 1000.0
        self.last_marking = stats
        return stats

    def mixed_collection_set(self, marking: Optional[MarkingStats]) -> Set[int]:
        heap = self.heap
        cset = set(heap.generations[GEN0].regions)
        if marking is None:
            return cset
        for region_id in sorted(marking.live_bytes):
            region = heap.regions[region_id]
            # Regions released and reacquired since the marking carry no estimate.
            if region.is_free or region.owner == GEN0 or region.live_bytes_estimate is None:
                continue
            fraction = marking.live_fraction(region_id, region.top)
            if fraction is not None and fraction <= self.config.region_live_threshold:
                cset.add(region_id)
        return cset

    def _collect(self, kind: CollectionKind, marking: Optional[MarkingStats] = None) -> GcReport:
        heap = self.heap
        with heap.safepoint.exclusive():
            heap.begin_collection()
            started = self._clock()
            in_use_before = heap.regions_in_use
            escalated = False
            marking_stats = None
            try:
                if kind == CollectionKind.FULL:
                    outcome = full_compact(heap)
                else:
                    if kind == CollectionKind.MIXED:
                        cset = self.mixed_collection_set(marking)
                    else:
                        cset = set(heap.generations[GEN0].regions)
                    try:
                        outcome = evacuate(heap, cset, self.config.promotion_age, self.config.survivor_regions)
                    except EvacuationFailure as exc:
                        logger.warning(f"{kind.value} collection escalated to full: {exc}")
                        kind = CollectionKind.FULL
                        escalated = True
                        outcome = full_compact(heap)
                wall_ms = (self._clock() - started) * 1000.0

                if kind == CollectionKind.MIXED:
                    marking_stats = self._mark()
                elif kind == CollectionKind.FULL:
                    self.last_marking = MarkingStats(
                        live_bytes=dict(outcome.live_bytes),
                        epoch=heap.epoch + 1,
                        top_at_mark=dict(outcome.live_bytes),
                    )
                heap.ensure_builtin_regions()
            finally:
                heap.end_collection()

            if kind == CollectionKind.FULL:
                reclaimed = max(0, in_use_before - heap.regions_in_use)
            else:
                reclaimed = outcome.regions_released
            released_by_marking = marking_stats.released if marking_stats else frozenset()
            reclaimed += len(released_by_marking)

            rset_updates = heap.rset_insertions_total - self._insertions_at_last_gc
            self._insertions_at_last_gc = heap.rset_insertions_total

            report = GcReport(
                kind=kind,
                pause_cost_units=pause_cost(outcome.bytes_copied, outcome.rset_entries_scanned, self.alpha),
                wall_ms=wall_ms,
                bytes_copied=outcome.bytes_copied,
                objects_promoted=outcome.objects_promoted,
                rset_updates=rset_updates,
                regions_reclaimed=reclaimed,
                epoch=heap.epoch,
                rset_entries_scanned=outcome.rset_entries_scanned,
                marking_ran=marking_stats is not None,
                marking_wall_ms=marking_stats.wall_ms if marking_stats else 0.0,
                regions_in_use=heap.regions_in_use,
                regions_high_water=heap.regions_high_water,
                escalated=escalated,
            )
            self.reports.append(report)
            self._notify(CollectionEvent(
                report,
                outcome.forwarding,
                frozenset(outcome.collected) | released_by_marking,
                heap.epoch,
            ))

        logger.info(
            f"GC #{report.epoch} {report.kind.value}: copied {report.bytes_copied} bytes, "
            f"cost {report.pause_cost_units:.1f}, reclaimed {report.regions_reclaimed} regions"
        )
        return report

    def _notify(self, event: CollectionEvent):
        for listener in self._listeners:
            listener(event)
