from .reports import CollectionKind, GcReport, MarkingStats, CollectionEvent, REPORT_FIELDS, pause_cost
from .marking import run_marking, mark_from_roots
from .evacuation import evacuate, EvacuationResult
from .compaction import full_compact, CompactionResult
from .collector import Collector
from .gclog import GcLog

__all__ = [
    "CollectionKind",
    "GcReport",
    "MarkingStats",
    "CollectionEvent",
    "REPORT_FIELDS",
    "pause_cost",
    "run_marking",
    "mark_from_roots",
    "evacuate",
    "EvacuationResult",
    "full_compact",
    "CompactionResult",
    "Collector",
    "GcLog",
]
