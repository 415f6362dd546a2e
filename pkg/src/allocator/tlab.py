"""Thread-local allocation buffers and per-thread allocation state."""

from dataclasses import dataclass, field
from typing import Dict, Optional

from src.heap.regions import GEN0


@dataclass
class TLAB:
    """A thread-private slice [start, end) of one region, bumped at top."""
    region_id: Optional[int]
    start: int = 0
    top: int = 0
    end: int = 0

    @property
    def free_bytes(self) -> int:
        return self.end - self.top

    @property
    def retired(self) -> bool:
        return self.region_id is None

    def clear(self):
        self.region_id = None
        self.start = self.top = self.end = 0


@dataclass
class ThreadContext:
    """Allocation state of one mutator thread.

    ``tlabs`` only gains an entry for a generation on the first TLAB allocation
    into it.
    """
    thread_id: int
    current_generation: int = GEN0
    tlabs: Dict[int, TLAB] = field(default_factory=dict)
