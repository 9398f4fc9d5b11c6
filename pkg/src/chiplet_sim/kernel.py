"""Deterministic discrete-event kernel.

Time is an integer number of picoseconds. Events are delivered in
lexicographic ``(time, seq)`` order where ``seq`` is minted by the kernel at
scheduling time, so equal-time events run in the order they were scheduled.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Any, Callable, Protocol

PS_PER_NS = 1_000
PS_PER_S = 1_000_000_000_000


def ticks_to_seconds(ticks: int) -> float:
    return ticks / PS_PER_S


def seconds_to_ticks(seconds: float) -> int:
    return round(seconds * PS_PER_S)


class SimulationError(RuntimeError):
    """An internal invariant of the simulation was violated."""


class Component(Protocol):
    id: str

    def handle(self, event: "Event") -> None: ...


@dataclass(order=True, frozen=True)
class Event:
    time: int
    seq: int
    target: str = field(compare=False)
    kind: str = field(compare=False)
    data: Any = field(default=None, compare=False)


@dataclass
class RunStats:
    events: int
    clock: int


class Kernel:
    """Global clock, event queue and run loop."""

    def __init__(self, trace: bool = False):
        self._queue: list[Event] = []
        self._seq = 0
        self._clock = 0
        self._last_popped = 0
        self._components: dict[str, Component] = {}
        self._callbacks: dict[str, Callable[[Event], None]] = {}
        self.events_processed = 0
        self.trace: list[tuple[int, int, str]] | None = [] if trace else None

    def now(self) -> int:
        return self._clock

    def register(self, component: Component) -> None:
        if component.id in self._components or component.id in self._callbacks:
            raise SimulationError(f"duplicate component id {component.id!r}")
        self._components[component.id] = component

    def register_callback(self, target: str, fn: Callable[[Event], None]) -> None:
        if target in self._components or target in self._callbacks:
            raise SimulationError(f"duplicate component id {target!r}")
        self._callbacks[target] = fn

    def schedule(self, time: int, target: str, kind: str, data: Any = None) -> Event:
        if time < self._clock:
            raise SimulationError(
                f"event {kind!r} for {target!r} scheduled at {time} ps, before clock {self._clock} ps"
            )
        ev = Event(time, self._seq, target, kind, data)
        self._seq += 1
        heapq.heappush(self._queue, ev)
        return ev

    def pending(self) -> int:
        return len(self._queue)

    def peek_time(self) -> int | None:
        return self._queue[0].time if self._queue else None

    def pop(self) -> Event:
        ev = heapq.heappop(self._queue)
        if ev.time < self._last_popped:
            raise SimulationError("event queue yielded an event from the past")
        self._last_popped = ev.time
        return ev

    def _dispatch(self, ev: Event) -> None:
        comp = self._components.get(ev.target)
        if comp is not None:
            comp.handle(ev)
            return
        fn = self._callbacks.get(ev.target)
        if fn is None:
            raise SimulationError(f"event for unknown component {ev.target!r}")
        fn(ev)

    def run_until(self, limit: int | None = None) -> RunStats:
        """Process every event with ``time <= limit``.

        With ``limit=None`` the queue is drained. When the queue empties before
        ``limit`` the clock is advanced to ``limit``.
        """
        processed = 0
        while self._queue and (limit is None or self._queue[0].time <= limit):
            ev = self.pop()
            self._clock = ev.time
            if self.trace is not None:
                self.trace.append((ev.time, ev.seq, ev.target))
            self._dispatch(ev)
            processed += 1
        if limit is not None and limit > self._clock:
            self._clock = limit
        self.events_processed += processed
        return RunStats(events=processed, clock=self._clock)
