"""Energy-event power accounting and flow latency statistics.

Energy is kept as integer picojoules. Power is derived only at reporting
time: 1 pJ over 1 ns is 1 mW, so ``mW = pJ * 1000 / window_ps``.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction

from .config import ENERGY_CLASSES, PowerSpec
from .kernel import PS_PER_NS, ticks_to_seconds
from .workload import FlowLatencyRecord

ALL = "ALL"


@dataclass(frozen=True)
class PowerSample:
    window_end: int
    component: str
    instantaneous_mw: float
    average_mw: float


@dataclass
class LatencyStats:
    count: int
    mean_s: float
    p50_s: float
    max_s: float
    records: list[FlowLatencyRecord]


def mw(energy_pj: int, duration_ps: int) -> Fraction:
    return Fraction(energy_pj * PS_PER_NS, duration_ps)


class EnergyLedger:
    """Per-component energy accumulators binned into fixed windows."""

    def __init__(self, spec: PowerSpec):
        self.spec = spec
        self.window = spec.window
        self.static: dict[str, Fraction] = {}
        self.windows: dict[str, dict[int, int]] = {}
        self.cumulative: dict[str, int] = {}
        self.log: list[tuple[int, str, str, int]] = []  # (time, component, class, pJ)

    def add_component(self, comp_id: str, static_class: str) -> None:
        self.static[comp_id] = Fraction(str(self.spec.static_mw.get(static_class, 0)))
        self.windows[comp_id] = defaultdict(int)
        self.cumulative[comp_id] = 0

    @property
    def components(self) -> list[str]:
        return list(self.static)

    def record(self, component: str, event_class: str, time: int, count: int = 1) -> None:
        if event_class not in ENERGY_CLASSES:
            raise ValueError(f"unknown energy event class {event_class!r}")
        if component not in self.windows:
            raise ValueError(f"unknown power component {component!r}")
        e = self.spec.energy_pj[event_class] * count
        if e == 0:
            return
        self.windows[component][time // self.window] += e
        self.cumulative[component] += e
        self.log.append((time, component, event_class, e))

    def total_energy(self) -> int:
        return sum(self.cumulative.values())

    def total_static(self) -> Fraction:
        return sum(self.static.values(), Fraction(0))


def record_energy(ledger: EnergyLedger, component: str, event_class: str, time: int, count: int = 1) -> None:
    ledger.record(component, event_class, time, count)


def window_bounds(final_clock: int, window: int) -> list[tuple[int, int]]:
    """Windows covering [0, final_clock]; the last one may be partial."""
    n = math.ceil(final_clock / window)
    return [(i * window, min((i + 1) * window, final_clock)) for i in range(n)]


def _series(static: Fraction, per_window: list[int], bounds: list[tuple[int, int]], comp: str) -> list[PowerSample]:
    out = []
    cum = 0
    for (lo, hi), e in zip(bounds, per_window):
        cum += e
        inst = static + mw(e, hi - lo)
        avg = static + mw(cum, hi)
        out.append(PowerSample(hi, comp, float(inst), float(avg)))
    return out


def power_series(ledger: EnergyLedger, final_clock: int) -> list[PowerSample]:
    """One sample per component per window plus the ALL aggregate.

    Energy stamped exactly at ``final_clock`` on a window boundary is folded
    into the last window. Samples are ordered by window, then component in
    registration order, then ALL.
    """
    bounds = window_bounds(final_clock, ledger.window)
    n = len(bounds)
    if n == 0:
        return []
    per_comp: dict[str, list[int]] = {}
    for comp in ledger.components:
        arr = [0] * n
        for idx, e in ledger.windows[comp].items():
            arr[min(idx, n - 1)] += e
        per_comp[comp] = arr
    total = [sum(per_comp[c][i] for c in per_comp) for i in range(n)]
    series = {c: _series(ledger.static[c], per_comp[c], bounds, c) for c in per_comp}
    series[ALL] = _series(ledger.total_static(), total, bounds, ALL)
    order = ledger.components + [ALL]
    return [series[c][i] for i in range(n) for c in order]


def flow_latency_stats(records: list[FlowLatencyRecord]) -> LatencyStats:
    if not records:
        raise ValueError("no flow latency records")
    lat = sorted(r.latency for r in records)
    n = len(lat)
    p50 = lat[math.ceil(0.5 * n) - 1]
    return LatencyStats(
        count=n,
        mean_s=float(Fraction(sum(lat), n) / 10**12),
        p50_s=ticks_to_seconds(p50),
        max_s=ticks_to_seconds(lat[-1]),
        records=list(records),
    )
