"""DRAM module timing: bounded FIFO, fixed access latency plus burst transfer."""

from __future__ import annotations

from collections import deque
from fractions import Fraction
from typing import Any, Callable

from .config import DramSpec
from .interconnect import interleave_index, serialization_ticks
from .kernel import Event, Kernel, SimulationError


def dram_target_for(addr: int, n_drams: int, granularity: int) -> int:
    if n_drams < 1:
        raise ValueError("die has no DRAM module")
    return interleave_index(addr, granularity, n_drams)


def service_time(access_latency: int, line_bytes: int, bandwidth_bytes_per_ns: Fraction) -> int:
    return access_latency + serialization_ticks(line_bytes, bandwidth_bytes_per_ns)


class DramState:
    """Closed-form FIFO server.

    ``enqueue`` returns the completion time immediately: service starts at
    ``max(arrive, busy_until)`` and lasts access latency plus the line burst.
    """

    def __init__(self, spec: DramSpec, line_bytes: int = 64):
        self.spec = spec
        self.line_bytes = line_bytes
        self.pending: deque[tuple[Any, int, int]] = deque()  # (txn, enqueue time, completion)
        self.busy_until = 0
        self.busy_time = 0
        self.served = 0
        self.max_depth = 0

    @property
    def service(self) -> int:
        return service_time(self.spec.access_latency, self.line_bytes, self.spec.bandwidth_bytes_per_ns)

    def has_space(self) -> bool:
        return len(self.pending) < self.spec.queue_capacity

    def enqueue(self, txn: Any, arrive: int) -> int:
        if not self.has_space():
            raise SimulationError(f"DRAM {self.spec.id} queue overflow")
        start = max(arrive, self.busy_until)
        done = start + self.service
        self.busy_time += done - start
        self.busy_until = done
        self.pending.append((txn, arrive, done))
        self.max_depth = max(self.max_depth, len(self.pending))
        return done

    def retire(self, now: int) -> Any:
        txn, _, done = self.pending.popleft()
        if done != now:
            raise SimulationError(f"DRAM {self.spec.id} retired out of FIFO order")
        self.served += 1
        return txn


def dram_service(state: DramState, txn: Any, arrive_time: int) -> int:
    return state.enqueue(txn, arrive_time)


class Dram:
    """Kernel component wrapping a DramState.

    Home nodes reserve a queue slot before forwarding (``try_reserve``), which
    is how backpressure reaches the home node.
    """

    def __init__(self, kernel: Kernel, comp_id: str, spec: DramSpec, line_bytes: int,
                 on_complete: Callable[[Any, int], None],
                 energy: Callable[[str, str, int, int], None] | None = None):
        self.kernel = kernel
        self.id = comp_id
        self.state = DramState(spec, line_bytes)
        self.reserved = 0
        self.waiters: deque[Callable[[], None]] = deque()
        self._on_complete = on_complete
        self._energy = energy
        self.arrivals: list[int] = []
        self.completions: list[int] = []
        kernel.register(self)

    def try_reserve(self) -> bool:
        if self.reserved < self.state.spec.queue_capacity:
            self.reserved += 1
            return True
        return False

    def wait_for_slot(self, cb: Callable[[], None]) -> None:
        self.waiters.append(cb)

    def arrive(self, txn: Any, t: int) -> None:
        done = self.state.enqueue(txn, t)
        self.arrivals.append(t)
        if self._energy is not None:
            self._energy(self.id, "dram_access", t, 1)
        self.kernel.schedule(done, self.id, "complete", txn)

    def handle(self, ev: Event) -> None:
        txn = self.state.retire(ev.time)
        self.completions.append(ev.time)
        self.reserved -= 1
        self._on_complete(txn, ev.time)
        while self.waiters and self.reserved < self.state.spec.queue_capacity:
            self.waiters.popleft()()
