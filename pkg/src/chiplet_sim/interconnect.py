"""On-die 2-D mesh and die-to-die links.

The mesh uses XY dimension-ordered routing. Every directed link grants one
flit per NoC cycle; a message holds a link for as many cycles as it has
flits. Hops are simulated as kernel events so that link arbitration is FIFO
by request time with the kernel's (time, seq) tie-break.

Die-to-die links are modeled as a fixed adapter latency plus serialization at
the link bandwidth, with one occupancy state per direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

from .config import Coord, D2DLinkSpec
from .kernel import PS_PER_NS, Event, Kernel, SimulationError

HEADER_BYTES = 16
MSG_CLASSES = ("REQ", "DAT_RSP", "WB")


def payload_bytes(msg_class: str, line_bytes: int) -> int:
    if msg_class == "REQ":
        return HEADER_BYTES
    if msg_class in ("DAT_RSP", "WB"):
        return HEADER_BYTES + line_bytes
    raise ValueError(f"unknown message class {msg_class!r}")


@dataclass
class MeshMessage:
    msg_class: str
    payload_bytes: int
    src: Coord
    dst: Coord
    txn: Any = None
    hops: list[tuple[Coord, Coord]] = field(default_factory=list)


def xy_route(src: Coord, dst: Coord, cols: int, rows: int) -> list[tuple[Coord, Coord]]:
    """Directed hops from ``src`` to ``dst``: all of X first, then all of Y."""
    for c in (src, dst):
        if not (0 <= c[0] < cols and 0 <= c[1] < rows):
            raise ValueError(f"coordinate {c} outside a {cols}x{rows} mesh")
    hops = []
    x, y = src
    step = 1 if dst[0] > x else -1
    while x != dst[0]:
        hops.append(((x, y), (x + step, y)))
        x += step
    step = 1 if dst[1] > y else -1
    while y != dst[1]:
        hops.append(((x, y), (x, y + step)))
        y += step
    return hops


def interleave_index(addr: int, granularity: int, n: int) -> int:
    return (addr // granularity) % n


def home_node_for(addr: int, home_nodes: list[Coord], granularity: int) -> Coord:
    if not home_nodes:
        raise ValueError("die has no home node")
    return home_nodes[interleave_index(addr, granularity, len(home_nodes))]


def serialization_ticks(nbytes: int, bandwidth_bytes_per_ns: Fraction) -> int:
    """Whole picoseconds to push ``nbytes`` at the given rate, rounded up."""
    return math.ceil(Fraction(nbytes * PS_PER_NS) / Fraction(bandwidth_bytes_per_ns))


class Mesh:
    """One die's mesh: link reservation state and hop-by-hop message transport."""

    def __init__(self, kernel: Kernel, comp_id: str, cols: int, rows: int,
                 hop_cycles: int, clock_period: int, flit_bytes: int,
                 energy: Callable[[str, str, int, int], None] | None = None):
        self.kernel = kernel
        self.id = comp_id
        self.cols = cols
        self.rows = rows
        self.hop_latency = hop_cycles * clock_period
        self.clock_period = clock_period
        self.flit_bytes = flit_bytes
        self.next_free: dict[tuple[Coord, Coord], int] = {}
        self.grants: dict[tuple[Coord, Coord], list[tuple[int, int]]] = {}
        self.injected = 0
        self.delivered = 0
        self.flit_hops = 0
        self._energy = energy
        kernel.register(self)

    def flits(self, msg: MeshMessage) -> int:
        return max(1, math.ceil(msg.payload_bytes / self.flit_bytes))

    def send(self, msg: MeshMessage, depart: int, on_arrival: Callable[[MeshMessage, int], None]) -> None:
        """Inject ``msg`` at ``depart``; ``on_arrival(msg, t)`` fires when its tail arrives."""
        msg.hops = xy_route(msg.src, msg.dst, self.cols, self.rows)
        self.injected += 1
        if not msg.hops:
            self.kernel.schedule(depart + self.clock_period, self.id, "deliver", (msg, on_arrival))
            return
        self.kernel.schedule(depart, self.id, "hop", (msg, 0, on_arrival))

    def handle(self, ev: Event) -> None:
        if ev.kind == "deliver":
            msg, cb = ev.data
            self.delivered += 1
            cb(msg, ev.time)
            return
        if ev.kind != "hop":
            raise SimulationError(f"mesh got unexpected event {ev.kind!r}")
        msg, i, cb = ev.data
        link = msg.hops[i]
        n = self.flits(msg)
        grant = max(ev.time, self.next_free.get(link, 0))
        self.next_free[link] = grant + n * self.clock_period
        self.grants.setdefault(link, []).append((grant, n))
        self.flit_hops += n
        if self._energy is not None:
            self._energy(self.id, "flit_hop", ev.time, n)
        head = grant + self.hop_latency
        if i + 1 < len(msg.hops):
            self.kernel.schedule(head, self.id, "hop", (msg, i + 1, cb))
        else:
            self.kernel.schedule(head + (n - 1) * self.clock_period, self.id, "deliver", (msg, cb))

    def check_link_capacity(self) -> None:
        """Every directed link carried at most one flit per NoC cycle."""
        for link, grants in self.grants.items():
            for (g0, n0), (g1, _) in zip(grants, grants[1:]):
                if g1 < g0 + n0 * self.clock_period:
                    raise SimulationError(f"link {link} over-granted at {g1} ps")


class D2DLink:
    """Full-duplex die-to-die link joining two gateway nodes."""

    def __init__(self, kernel: Kernel, spec: D2DLinkSpec,
                 energy: Callable[[str, str, int, int], None] | None = None):
        self.kernel = kernel
        self.spec = spec
        self.id = spec.id
        self.ends = ((spec.endpoints[0].die, spec.endpoints[0].gateway),
                     (spec.endpoints[1].die, spec.endpoints[1].gateway))
        self.free_at = {0: 0, 1: 0}
        self.bytes_moved = 0
        self.injected = 0
        self.delivered = 0
        self._energy = energy
        kernel.register(self)

    def wire_bytes(self, nbytes: int) -> int:
        f = self.spec.flit_bytes
        return math.ceil(nbytes / f) * f

    def transfer_time(self, nbytes: int, depart: int, direction: int) -> int:
        """Reserve the link and return the arrival time at the far gateway."""
        ser = serialization_ticks(self.wire_bytes(nbytes), self.spec.bandwidth_bytes_per_ns)
        start = max(depart, self.free_at[direction])
        self.free_at[direction] = start + ser
        return start + self.spec.adapter_latency + ser

    def direction_from(self, die_id: str) -> int:
        if self.ends[0][0] == die_id:
            return 0
        if self.ends[1][0] == die_id:
            return 1
        raise SimulationError(f"link {self.id} does not touch die {die_id!r}")

    def far_end(self, direction: int) -> tuple[str, Coord]:
        return self.ends[1 - direction]

    def send(self, msg: MeshMessage, from_die: str, depart: int,
             on_arrival: Callable[[MeshMessage, int], None]) -> None:
        d = self.direction_from(from_die)
        arrival = self.transfer_time(msg.payload_bytes, depart, d)
        wb = self.wire_bytes(msg.payload_bytes)
        self.bytes_moved += wb
        self.injected += 1
        if self._energy is not None:
            self._energy(self.id, "d2d_byte", depart, wb)
        self.kernel.schedule(arrival, self.id, "deliver", (msg, on_arrival))

    def handle(self, ev: Event) -> None:
        msg, cb = ev.data
        self.delivered += 1
        cb(msg, ev.time)
