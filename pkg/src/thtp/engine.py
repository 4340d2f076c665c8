"""Continuous-time discrete-event engine.

Events live on a binary heap keyed by ``(time, seq)``. ``seq`` is a global
insertion counter, so events scheduled for the same instant run in the order
they were scheduled. Cancellation is lazy: a cancelled event stays on the
heap and is skipped when it reaches the top.
"""

from __future__ import annotations

import enum
import heapq
import itertools
from dataclasses import dataclass, field
from typing import Any, Callable


class EventKind(enum.Enum):
    TARGET_WAYPOINT_ARRIVAL = "waypoint"
    DETECTION = "detection"
    SPREAD_FORWARD = "spread"
    AGENT_STEP = "agent"
    METRIC_SAMPLE = "sample"
    ROUTE_HOP = "route"


_PENDING, _DONE, _CANCELLED = 0, 1, 2


@dataclass(order=True)
class Event:
    time: float
    seq: int
    kind: EventKind = field(compare=False)
    payload: Any = field(default=None, compare=False)
    _state: int = field(default=_PENDING, compare=False, repr=False)

    @property
    def pending(self) -> bool:
        return self._state == _PENDING


class SchedulingError(RuntimeError):
    """Raised when an event is scheduled in the past."""


Handler = Callable[[Event], None]


class Scheduler:
    """Ordered scheduled-events queue with a simulation clock.

    Handlers are registered per :class:`EventKind` and receive the event
    being executed; they may schedule further events at ``time >= now``.
    """

    def __init__(self, start: float = 0.0, record: bool = False):
        self.now = float(start)
        self._heap: list[Event] = []
        self._seq = itertools.count()
        self._handlers: dict[EventKind, Handler] = {}
        self._live = 0
        self.executed = 0
        # (time, seq, kind) of every executed event, when recording
        self.log: list[tuple[float, int, EventKind]] | None = [] if record else None

    def on(self, kind: EventKind, handler: Handler) -> None:
        self._handlers[kind] = handler

    def schedule(self, time: float, kind: EventKind, payload: Any = None) -> Event:
        if time < self.now:
            raise SchedulingError(
                f"cannot schedule {kind.name} at t={time!r} before now={self.now!r}"
            )
        ev = Event(float(time), next(self._seq), kind, payload)
        heapq.heappush(self._heap, ev)
        self._live += 1
        return ev

    def cancel(self, event: Event | None) -> bool:
        if event is None or event._state != _PENDING:
            return False
        event._state = _CANCELLED
        self._live -= 1
        return True

    def __len__(self) -> int:
        return self._live

    def peek(self) -> Event | None:
        self._drop_cancelled()
        return self._heap[0] if self._heap else None

    def _drop_cancelled(self) -> None:
        heap = self._heap
        while heap and heap[0]._state == _CANCELLED:
            heapq.heappop(heap)

    def step(self) -> Event | None:
        """Execute the next pending event, whatever its time."""
        self._drop_cancelled()
        if not self._heap:
            return None
        ev = heapq.heappop(self._heap)
        self._execute(ev)
        return ev

    def _execute(self, ev: Event) -> None:
        ev._state = _DONE
        self._live -= 1
        self.now = ev.time
        self.executed += 1
        if self.log is not None:
            self.log.append((ev.time, ev.seq, ev.kind))
        handler = self._handlers.get(ev.kind)
        if handler is not None:
            handler(ev)

    def run_until(self, t_end: float) -> int:
        """Execute every event with ``time <= t_end``; leave the clock at t_end."""
        if t_end < self.now:
            raise SchedulingError(f"t_end={t_end!r} is before now={self.now!r}")
        heap = self._heap
        count = 0
        while True:
            self._drop_cancelled()
            if not heap or heap[0].time > t_end:
                break
            self._execute(heapq.heappop(heap))
            count += 1
        self.now = float(t_end)
        return count

    def run(self, max_events: int | None = None) -> int:
        """Run to quiescence (or until ``max_events`` have executed)."""
        count = 0
        while max_events is None or count < max_events:
            if self.step() is None:
                break
            count += 1
        return count
