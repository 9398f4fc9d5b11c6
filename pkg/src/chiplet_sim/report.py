"""CSV artifacts and SVG plots.

The CSV schemas are the stable machine interface::

    latency.csv  flow_id,core_id,start_ns,end_ns,latency_ns
    power.csv    window_end_ns,component_id,instantaneous_mw,average_mw
    sweep.csv    param_value,mean_latency_s,final_avg_power_mw

Times are written in nanoseconds with three decimals, converted exactly from
integer picoseconds.
"""

from __future__ import annotations

import csv
import io
import json
from decimal import Decimal
from fractions import Fraction
from pathlib import Path
from typing import Iterable

from .power import ALL, PowerSample
from .workload import FlowLatencyRecord

LATENCY_HEADER = ["flow_id", "core_id", "start_ns", "end_ns", "latency_ns"]
POWER_HEADER = ["window_end_ns", "component_id", "instantaneous_mw", "average_mw"]
SWEEP_HEADER = ["param_value", "mean_latency_s", "final_avg_power_mw"]
COMPARE_HEADER = ["preset", "mean_latency_s", "final_avg_power_mw"]


class ReportError(ValueError):
    """A CSV did not match its schema."""


def ns(ticks: int) -> str:
    sign = "-" if ticks < 0 else ""
    t = abs(ticks)
    return f"{sign}{t // 1000}.{t % 1000:03d}"


def ns_to_ticks(text: str) -> int:
    try:
        return int(Decimal(text) * 1000)
    except Exception:
        raise ReportError(f"not a time in ns: {text!r}") from None


def _write_csv(path: Path, header: list[str], rows: Iterable[list]) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    path.write_text(buf.getvalue(), encoding="utf-8")


def write_latency_csv(path: Path, records: list[FlowLatencyRecord]) -> None:
    _write_csv(path, LATENCY_HEADER,
               ([r.flow_id, r.core_id, ns(r.start), ns(r.end), ns(r.latency)] for r in records))


def write_power_csv(path: Path, samples: list[PowerSample]) -> None:
    _write_csv(path, POWER_HEADER,
               ([ns(s.window_end), s.component, repr(s.instantaneous_mw), repr(s.average_mw)] for s in samples))


def write_sweep_csv(path: Path, rows: list[tuple[str, float, float]]) -> None:
    _write_csv(path, SWEEP_HEADER, ([v, repr(lat), repr(p)] for v, lat, p in rows))


def write_compare_csv(path: Path, rows: list[tuple[str, float, float]]) -> None:
    _write_csv(path, COMPARE_HEADER, ([n, repr(lat), repr(p)] for n, lat, p in rows))


def write_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _read_csv(path: Path, header: list[str]) -> list[dict[str, str]]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ReportError(f"cannot read {path}: {exc}") from None
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != header:
        raise ReportError(f"{path}: expected header {','.join(header)}")
    body = rows[1:]
    if not body:
        raise ReportError(f"{path}: no data rows")
    out = []
    for i, r in enumerate(body, start=2):
        if len(r) != len(header):
            raise ReportError(f"{path}:{i}: expected {len(header)} fields, got {len(r)}")
        out.append(dict(zip(header, r)))
    return out


def read_latency_csv(path: Path) -> list[dict[str, str]]:
    rows = _read_csv(path, LATENCY_HEADER)
    for r in rows:
        for k in ("start_ns", "end_ns", "latency_ns"):
            ns_to_ticks(r[k])
    return rows


def read_power_csv(path: Path) -> list[dict[str, str]]:
    rows = _read_csv(path, POWER_HEADER)
    for r in rows:
        ns_to_ticks(r["window_end_ns"])
        for k in ("instantaneous_mw", "average_mw"):
            try:
                float(r[k])
            except ValueError:
                raise ReportError(f"{path}: bad number {r[k]!r} in {k}") from None
    return rows


def mean_latency_from_csv(path: Path) -> float:
    lat = [ns_to_ticks(r["latency_ns"]) for r in read_latency_csv(path)]
    return float(Fraction(sum(lat), len(lat)) / 10**12)


def final_power_from_csv(path: Path, component: str = ALL) -> float:
    rows = [r for r in read_power_csv(path) if r["component_id"] == component]
    if not rows:
        raise ReportError(f"{path}: no rows for component {component!r}")
    return float(rows[-1]["average_mw"])


# ---------------------------------------------------------------------------
# SVG
# ---------------------------------------------------------------------------

W, H = 640, 400
ML, MR, MT, MB = 70, 20, 30, 50


def _f(v: float) -> str:
    return f"{v:.2f}"


def _frame(title: str, xlabel: str, ylabel: str, x0: float, x1: float, y0: float, y1: float) -> list[str]:
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W / 2}" y="18" text-anchor="middle" font-size="14">{title}</text>',
        f'<line x1="{ML}" y1="{H - MB}" x2="{W - MR}" y2="{H - MB}" stroke="black"/>',
        f'<line x1="{ML}" y1="{MT}" x2="{ML}" y2="{H - MB}" stroke="black"/>',
        f'<text x="{(ML + W - MR) / 2}" y="{H - 12}" text-anchor="middle" font-size="12">{xlabel}</text>',
        f'<text x="16" y="{(MT + H - MB) / 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 16 {(MT + H - MB) / 2})">{ylabel}</text>',
    ]
    for i in range(5):
        fx = x0 + (x1 - x0) * i / 4
        fy = y0 + (y1 - y0) * i / 4
        px = ML + (W - ML - MR) * i / 4
        py = H - MB - (H - MT - MB) * i / 4
        parts.append(f'<text x="{_f(px)}" y="{H - MB + 16}" text-anchor="middle" font-size="10">{fx:.4g}</text>')
        parts.append(f'<text x="{ML - 6}" y="{_f(py + 3)}" text-anchor="end" font-size="10">{fy:.4g}</text>')
    return parts


def _scale(v: float, lo: float, hi: float, plo: float, phi: float) -> float:
    if hi == lo:
        return (plo + phi) / 2
    return plo + (v - lo) * (phi - plo) / (hi - lo)


def power_trace_svg(path: Path, component: str = ALL, title: str | None = None) -> str:
    rows = [r for r in read_power_csv(path) if r["component_id"] == component]
    if not rows:
        raise ReportError(f"{path}: no rows for component {component!r}")
    t = [ns_to_ticks(r["window_end_ns"]) / 1000 for r in rows]
    series = {
        "instantaneous": [float(r["instantaneous_mw"]) for r in rows],
        "average": [float(r["average_mw"]) for r in rows],
    }
    ymax = max(max(v) for v in series.values())
    y0, y1 = 0.0, ymax * 1.1 if ymax > 0 else 1.0
    x0, x1 = 0.0, max(t)
    parts = _frame(title or f"Instantaneous and average power ({component})", "time (ns)", "power (mW)", x0, x1, y0, y1)
    colors = {"instantaneous": "#1f77b4", "average": "#d62728"}
    for name, ys in series.items():
        pts = " ".join(
            f"{_f(_scale(x, x0, x1, ML, W - MR))},{_f(_scale(y, y0, y1, H - MB, MT))}" for x, y in zip(t, ys)
        )
        parts.append(f'<polyline fill="none" stroke="{colors[name]}" stroke-width="1.5" points="{pts}"/>')
    parts.append(f'<text x="{W - MR - 4}" y="{MT + 12}" text-anchor="end" font-size="11" fill="{colors["instantaneous"]}">instantaneous</text>')
    parts.append(f'<text x="{W - MR - 4}" y="{MT + 26}" text-anchor="end" font-size="11" fill="{colors["average"]}">average</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def latency_hist_svg(path: Path, bins: int = 10, title: str | None = None) -> str:
    lat = [ns_to_ticks(r["latency_ns"]) / 1000 for r in read_latency_csv(path)]
    lo, hi = min(lat), max(lat)
    width = (hi - lo) / bins if hi > lo else 1.0
    counts = [0] * bins
    for v in lat:
        counts[min(int((v - lo) / width), bins - 1)] += 1
    y1 = max(counts) * 1.1
    x1 = lo + width * bins
    parts = _frame(title or "Flow latency distribution", "flow latency (ns)", "flows", lo, x1, 0, y1)
    for i, c in enumerate(counts):
        xa = _scale(lo + i * width, lo, x1, ML, W - MR)
        xb = _scale(lo + (i + 1) * width, lo, x1, ML, W - MR)
        ya = _scale(c, 0, y1, H - MB, MT)
        parts.append(
            f'<rect x="{_f(xa)}" y="{_f(ya)}" width="{_f(xb - xa)}" height="{_f(H - MB - ya)}" '
            f'fill="#1f77b4" stroke="white"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_plot(csv_path: Path, kind: str, component: str = ALL) -> str:
    if kind == "power-trace":
        return power_trace_svg(csv_path, component)
    if kind == "latency-hist":
        return latency_hist_svg(csv_path)
    raise ValueError(f"unknown plot kind {kind!r}")
