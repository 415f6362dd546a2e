"""Exception hierarchy for the heap simulator."""

from typing import Optional


class SimulatorError(Exception):
    """Base class for every error raised by the simulator."""


class ConfigurationError(SimulatorError):
    """A heap or workload configuration value is invalid."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class SlotBoundsError(SimulatorError):
    """A reference slot or payload range lies outside the object."""


class InvalidReferenceError(SimulatorError):
    """An ObjectRef does not point at a live object header."""


class InvalidHandleError(SimulatorError):
    """A root handle is unknown or was already unregistered."""


class SafepointViolationError(SimulatorError):
    """A mutator operation was attempted while a collection is running."""


class UnknownGenerationError(SimulatorError):
    """A generation id was never created."""

    def __init__(self, gen_id: int):
        self.gen_id = gen_id
        super().__init__(f"generation {gen_id} was never created")


class HeapExhaustedError(SimulatorError):
    """A region could not be handed out; the caller should collect and retry."""


class FreeListExhaustedError(HeapExhaustedError):
    """No free region is left in the heap."""


class Gen0CapacityError(HeapExhaustedError):
    """Gen 0 already holds its maximum number of Eden regions."""


class DoubleFreeError(SimulatorError):
    """A region that is already free was released again."""


class ObjectTooLargeError(SimulatorError):
    """The requested object does not fit in a single region."""


class OutOfMemoryError(SimulatorError):
    """Allocation failed even after a collection."""


class EvacuationFailure(SimulatorError):
    """Evacuation planning ran out of free regions."""

    def __init__(self, needed: int, available: int):
        self.needed = needed
        self.available = available
        super().__init__(f"evacuation needs {needed} regions, {available} free")


class InsufficientDataError(SimulatorError):
    """The profiler has not observed any completed collection."""


class IncompatibleReportsError(SimulatorError):
    """Two metrics reports come from different workloads."""

    def __init__(self, field: str, left, right):
        self.field = field
        super().__init__(f"reports differ in {field}: {left!r} != {right!r}")


class WorkloadSpecError(SimulatorError):
    """A workload spec file is missing or malformed."""

    def __init__(self, message: str, path: Optional[str] = None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class GcLogFormatError(SimulatorError):
    """A GC log file cannot be parsed."""
