"""Stop-the-world coordination between mutator threads and the collector."""

import threading
from contextlib import contextmanager


class Safepoint:
    """Readers-writer gate: mutators share it, a collection holds it exclusively.

    A thread inside ``mutator()`` may call ``exclusive()``; its own mutator hold is
    parked for the duration of the collection and restored afterwards.
    """

    def __init__(self):
        self._cond = threading.Condition()
        self._active = 0
        self._waiting_writers = 0
        self._exclusive = False
        self._local = threading.local()

    def _depth(self) -> int:
        return getattr(self._local, "depth", 0)

    def _exclusive_depth(self) -> int:
        return getattr(self._local, "exclusive_depth", 0)

    @property
    def in_exclusive(self) -> bool:
        return self._exclusive

    @contextmanager
    def mutator(self):
        depth = self._depth()
        if depth == 0 and self._exclusive_depth() == 0:
            with self._cond:
                while self._exclusive or self._waiting_writers:
                    self._cond.wait()
                self._active += 1
        self._local.depth = depth + 1
        try:
            yield
        finally:
            self._local.depth -= 1
            if self._local.depth == 0 and self._exclusive_depth() == 0:
                with self._cond:
                    self._active -= 1
                    self._cond.notify_all()

    @contextmanager
    def exclusive(self):
        if self._exclusive_depth():
            self._local.exclusive_depth += 1
            try:
                yield
            finally:
                self._local.exclusive_depth -= 1
            return

        parked = self._depth() > 0
        with self._cond:
            if parked:
                self._active -= 1
                self._cond.notify_all()
            self._waiting_writers += 1
            while self._exclusive or self._active:
                self._cond.wait()
            self._waiting_writers -= 1
            self._exclusive = True
        self._local.exclusive_depth = 1
        try:
            yield
        finally:
            self._local.exclusive_depth = 0
            with self._cond:
                self._exclusive = False
                if parked:
                    self._active += 1
                self._cond.notify_all()
