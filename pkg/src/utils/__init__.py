from .logger import setup_logging, get_logger
from .errors import (
    SimulatorError,
    ConfigurationError,
    SlotBoundsError,
    InvalidReferenceError,
    InvalidHandleError,
    SafepointViolationError,
    UnknownGenerationError,
    HeapExhaustedError,
    FreeListExhaustedError,
    Gen0CapacityError,
    DoubleFreeError,
    ObjectTooLargeError,
    OutOfMemoryError,
    EvacuationFailure,
    InsufficientDataError,
    IncompatibleReportsError,
    WorkloadSpecError,
    GcLogFormatError,
)

__all__ = [
    "setup_logging",
    "get_logger",
    "SimulatorError",
    "ConfigurationError",
    "SlotBoundsError",
    "InvalidReferenceError",
    "InvalidHandleError",
    "SafepointViolationError",
    "UnknownGenerationError",
    "HeapExhaustedError",
    "FreeListExhaustedError",
    "Gen0CapacityError",
    "DoubleFreeError",
    "ObjectTooLargeError",
    "OutOfMemoryError",
    "EvacuationFailure",
    "InsufficientDataError",
    "IncompatibleReportsError",
    "WorkloadSpecError",
    "GcLogFormatError",
]
