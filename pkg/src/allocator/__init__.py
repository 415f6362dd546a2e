from .tlab import TLAB, ThreadContext
from .allocator import Allocator

__all__ = ["TLAB", "ThreadContext", "Allocator"]
