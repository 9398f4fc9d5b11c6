"""Synthetic CCa-style workload: per-flow group streams and flow latency records."""

from __future__ import annotations

from dataclasses import dataclass

from .config import FlowSpec

MASK64 = (1 << 64) - 1


class Rng:
    """splitmix64. The recurrence is fixed so streams match across platforms."""

    def __init__(self, state: int):
        self.state = state & MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def next_float(self) -> float:
        """Uniform in [0, 1) from the top 53 bits."""
        return (self.next() >> 11) * (1.0 / (1 << 53))


def flow_rng(seed: int, flow_id: int) -> Rng:
    return Rng((seed ^ flow_id) & MASK64)


@dataclass(frozen=True)
class MemAccess:
    addr: int
    is_read: bool
    bytes: int


@dataclass(frozen=True)
class FlowLatencyRecord:
    flow_id: int
    core_id: str
    start: int
    end: int

    @property
    def latency(self) -> int:
        return self.end - self.start


def gen_access_stream(flow: FlowSpec, rng: Rng, line_bytes: int = 64) -> list[tuple[int, MemAccess | None]]:
    """One entry per instruction group; ``None`` marks a compute-only group.

    Per group one draw decides whether it touches memory; memory groups then
    draw the read/write choice and, for uniform patterns, the line index.
    Strided patterns walk ``base + (k * stride) mod footprint`` over the k-th
    access.
    """
    ap = flow.address_pattern
    n_lines = max(1, ap.footprint_bytes // line_bytes)
    mask = ~(line_bytes - 1)
    out: list[tuple[int, MemAccess | None]] = []
    k = 0
    for g in range(flow.n_groups):
        if rng.next_float() < flow.mem_ratio:
            is_read = rng.next_float() < flow.read_fraction
            if ap.kind == "strided":
                off = (k * ap.stride_bytes) % ap.footprint_bytes
            else:
                off = (rng.next() % n_lines) * line_bytes
            k += 1
            out.append((g, MemAccess((ap.base + off) & mask, is_read, line_bytes)))
        else:
            out.append((g, None))
    return out
