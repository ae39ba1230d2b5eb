"""Wall-clock vs. logical time.

Deterministic runs (fixed seed + mock provider) use the logical clock so
persisted records are byte-identical across repeated runs.
"""

from __future__ import annotations

import threading
import time


class Clock:
    def now(self) -> float:
        return time.time()


class LogicalClock(Clock):
    """Monotone counter starting at 0; one tick per timestamp request."""

    def __init__(self, start: float = 0.0):
        self._next = start
        self._lock = threading.Lock()

    def now(self) -> float:
        with self._lock:
            value = self._next
            self._next += 1.0
            return value
