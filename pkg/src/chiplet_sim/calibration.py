"""Fit the free constants so exp1's mean flow latency hits its target.

Coordinate search: each coordinate in a fixed order gets a bisection line
search within its bounds (latency grows with every searched constant), and
the search stops as soon as the relative error is within tolerance or the
run budget is spent. exp2 and exp3 are only evaluated afterwards, as
held-out checks; they are never fit.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from .config import serialize_config
from .power import flow_latency_stats
from .presets import BUILDERS, Constants, build_preset
from .system import simulate

log = logging.getLogger(__name__)

SEARCH_ORDER = ("n_groups", "compute_cycles", "mem_ratio", "dram_access_latency")
DEFAULT_BOUNDS: dict[str, tuple[float, float]] = {
    "n_groups": (50, 4000),
    "compute_cycles": (1, 64),
    "mem_ratio": (0.01, 0.9),
    "dram_access_latency": (10_000, 200_000),
}
RESOLUTION = {"n_groups": 1, "compute_cycles": 1, "mem_ratio": 0.001, "dram_access_latency": 500}


@dataclass
class CalibrationResult:
    constants: Constants
    achieved_s: dict[str, float]
    rel_error: dict[str, float]
    runs: int
    status: str  # "ok" | "warning"
    iterations: int = 0  # coordinate line searches performed
    history: list[dict] = field(default_factory=list)

    def report(self) -> dict:
        k = asdict(self.constants)
        for name, v in k.items():
            if isinstance(v, Fraction):
                k[name] = str(v)
        return {
            "status": self.status,
            "runs": self.runs,
            "iterations": self.iterations,
            "constants": k,
            "achieved_mean_latency_s": self.achieved_s,
            "relative_error": self.rel_error,
            "history": self.history,
        }


def mean_latency(name: str, k: Constants, seed: int | None = None) -> float:
    res = simulate(build_preset(name, k), seed=seed)
    return flow_latency_stats(res.records).mean_s


def _coerce(param: str, v: float):
    return float(round(v, 6)) if param == "mem_ratio" else int(round(v))


class _Search:
    def __init__(self, target: float, budget: int, seed: int | None):
        self.target = target
        self.budget = budget
        self.seed = seed
        self.runs = 0
        self.cache: dict[Constants, float] = {}
        self.history: list[dict] = []

    def err(self, k: Constants) -> float:
        return abs(self.eval(k) - self.target) / self.target

    def eval(self, k: Constants) -> float:
        if k not in self.cache:
            if self.runs >= self.budget:
                raise _BudgetSpent
            self.runs += 1
            self.cache[k] = mean_latency("exp1", k, self.seed)
            self.history.append({"run": self.runs, **{p: getattr(k, p) for p in SEARCH_ORDER},
                                 "exp1_mean_s": self.cache[k]})
        return self.cache[k]

    def line_search(self, k: Constants, param: str, bounds: tuple[float, float]) -> Constants:
        lo = k.replace(**{param: _coerce(param, bounds[0])})
        hi = k.replace(**{param: _coerce(param, bounds[1])})
        best = min((k, lo, hi), key=self.err)
        if not self.eval(lo) <= self.target <= self.eval(hi):
            return best
        res = RESOLUTION[param]
        while getattr(hi, param) - getattr(lo, param) > res:
            mid_v = _coerce(param, (getattr(lo, param) + getattr(hi, param)) / 2)
            if mid_v in (getattr(lo, param), getattr(hi, param)):
                break
            mid = k.replace(**{param: mid_v})
            if self.err(mid) < self.err(best):
                best = mid
            if self.eval(mid) < self.target:
                lo = mid
            else:
                hi = mid
        return best


class _BudgetSpent(Exception):
    pass


def calibrate(
    target_s: float,
    base: Constants | None = None,
    bounds: dict[str, tuple[float, float]] | None = None,
    tolerance: float = 0.05,
    budget: int = 200,
    seed: int | None = None,
) -> CalibrationResult:
    """Fit exp1 to ``target_s``; returns ``base`` untouched if it already fits."""
    bounds = {**DEFAULT_BOUNDS, **(bounds or {})}
    search = _Search(target_s, budget, seed)
    best = base or Constants()
    iterations = 0
    try:
        if search.err(best) > tolerance:
            for param in SEARCH_ORDER:
                iterations += 1
                best = search.line_search(best, param, bounds[param])
                if search.err(best) <= tolerance:
                    break
    except _BudgetSpent:
        best = min(search.cache, key=search.err)
    achieved = {"exp1": search.cache[best]} if best in search.cache else {}
    status = "ok" if abs(achieved.get("exp1", float("inf")) - target_s) / target_s <= tolerance else "warning"
    if status == "warning":
        log.warning("calibration budget exhausted; best relative error %.3f", search.err(best))
    return CalibrationResult(best, achieved, {}, search.runs, status, iterations, search.history)


def evaluate_presets(result: CalibrationResult, targets: dict[str, float], seed: int | None = None) -> None:
    for name in BUILDERS:
        if name not in result.achieved_s:
            result.achieved_s[name] = mean_latency(name, result.constants, seed)
        if name in targets:
            result.rel_error[name] = (result.achieved_s[name] - targets[name]) / targets[name]


def write_presets(constants: Constants, out_dir: Path) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for name in BUILDERS:
        p = out_dir / f"{name}.yaml"
        p.write_text(serialize_config(build_preset(name, constants)), encoding="utf-8")
        paths.append(p)
    return paths


def write_report(result: CalibrationResult, path: Path) -> None:
    path.write_text(json.dumps(result.report(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
