"""Command-line entry point.

Exit codes: 0 ok, 2 invalid input, 64 usage error, 70 internal invariant
violation.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from fractions import Fraction
from pathlib import Path

from .calibration import calibrate, evaluate_presets, write_presets, write_report
from .config import EXPERIMENTS, ConfigError, SystemSpec, config_hash, parse_config
from .kernel import SimulationError, seconds_to_ticks
from .power import ALL, flow_latency_stats
from .presets import TARGET_LATENCIES_S, Constants, preset
from .report import (
    ReportError,
    emit_plot,
    final_power_from_csv,
    mean_latency_from_csv,
    write_compare_csv,
    write_json,
    write_latency_csv,
    write_power_csv,
    write_sweep_csv,
)
from .sweep import run_sweep
from .system import simulate

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_USAGE = 64
EXIT_INTERNAL = 70

log = logging.getLogger("chiplet_sim")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(message)


def _default_out() -> str:
    return os.environ.get("CHIPLET_SIM_OUT", "out")


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _preset_name(name: str) -> str:
    if name not in EXPERIMENTS:
        raise UsageError(f"unknown preset {name!r}; valid presets: {'|'.join(EXPERIMENTS)}")
    return name


def _load(args) -> SystemSpec:
    if args.preset:
        return preset(_preset_name(args.preset))
    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {args.config}: {exc}") from None
    return parse_config(text)


def run_to_dir(spec: SystemSpec, out: Path, seed: int | None, until_s: float | None, plots: bool = True) -> dict:
    if seed is not None:
        spec.workload.seed = seed
    until = seconds_to_ticks(until_s) if until_s is not None else None
    res = simulate(spec, until=until)
    out.mkdir(parents=True, exist_ok=True)
    write_latency_csv(out / "latency.csv", res.records)
    samples = res.power()
    write_power_csv(out / "power.csv", samples)
    final = [s for s in samples if s.component == ALL]
    summary = {
        "config_hash": config_hash(spec),
        "seed": spec.workload.seed,
        "final_clock_ps": res.final_clock,
        "final_avg_power_mw": final[-1].average_mw if final else None,
        "run": res.summary,
    }
    if res.records:
        st = flow_latency_stats(res.records)
        summary["latency"] = {"count": st.count, "mean_s": st.mean_s, "p50_s": st.p50_s, "max_s": st.max_s}
    write_json(out / "summary.json", summary)
    if plots and res.records and samples:
        (out / "latency.svg").write_text(emit_plot(out / "latency.csv", "latency-hist"), encoding="utf-8")
        (out / "power.svg").write_text(emit_plot(out / "power.csv", "power-trace"), encoding="utf-8")
    return summary


def cmd_run(args) -> int:
    if bool(args.config) == bool(args.preset):
        raise UsageError("exactly one of --config or --preset is required")
    spec = _load(args)
    run_to_dir(spec, Path(args.out), args.seed, args.until, plots=not args.no_plots)
    return EXIT_OK


def compare_verdicts(rows: dict[str, tuple[float, float]]) -> list[str]:
    lat = {k: v[0] for k, v in rows.items()}
    pw = {k: v[1] for k, v in rows.items()}
    lines = [
        "latency order: " + " < ".join(sorted(lat, key=lambda k: (lat[k], k))),
        "power order: " + " < ".join(sorted(pw, key=lambda k: (pw[k], k))),
    ]
    if all(e in rows for e in EXPERIMENTS):
        checks = [
            ("latency exp2 < exp1", lat["exp2"] < lat["exp1"]),
            ("latency exp2 <= exp3 <= exp1", lat["exp2"] <= lat["exp3"] <= lat["exp1"]),
            ("power exp1 < exp2 < exp3", pw["exp1"] < pw["exp2"] < pw["exp3"]),
        ]
        lines += [f"{name}: {'PASS' if ok else 'FAIL'}" for name, ok in checks]
    return lines


def cmd_compare(args) -> int:
    names = [n.strip() for n in args.presets.split(",") if n.strip()]
    for n in names:
        _preset_name(n)
    if len(names) < 2:
        raise UsageError("--presets needs at least two presets")
    out = Path(args.out)
    for n in names:
        run_to_dir(preset(n), out / n, args.seed, None, plots=True)
    rows = {n: (mean_latency_from_csv(out / n / "latency.csv"), final_power_from_csv(out / n / "power.csv"))
            for n in names}
    write_compare_csv(out / "compare.csv", [(n, *rows[n]) for n in names])
    verdicts = compare_verdicts(rows)
    (out / "verdicts.txt").write_text("\n".join(verdicts) + "\n", encoding="utf-8")
    for line in verdicts:
        print(line)
    return EXIT_OK


def cmd_sweep(args) -> int:
    if bool(args.config) == bool(args.preset):
        raise UsageError("exactly one of --config or --preset is required")
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    if not values:
        raise UsageError("--values needs at least one value")
    for v in values:
        try:
            Fraction(v)
        except ValueError:
            raise UsageError(f"sweep value {v!r} is not a number") from None
    spec = _load(args)
    rows = run_sweep(spec, args.param, values, seed=args.seed, jobs=args.jobs)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_sweep_csv(out / "sweep.csv", rows)
    return EXIT_OK


def cmd_plot(args) -> int:
    svg = emit_plot(Path(args.csv), args.kind, args.component)
    if args.out:
        Path(args.out).write_text(svg, encoding="utf-8")
    else:
        sys.stdout.write(svg)
    return EXIT_OK


def cmd_calibrate(args) -> int:
    targets = dict(TARGET_LATENCIES_S)
    if args.target is not None:
        targets["exp1"] = args.target
    result = calibrate(targets["exp1"], Constants(), tolerance=args.tolerance, budget=args.budget, seed=args.seed)
    evaluate_presets(result, targets, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_presets(result.constants, out / "presets")
    if args.write_presets:
        write_presets(result.constants, Path(__file__).parent / "presets")
    write_report(result, out / "calibration.json")
    for name, v in sorted(result.achieved_s.items()):
        print(f"{name}: mean latency {v:.4e} s ({result.rel_error.get(name, 0):+.2%} vs target)")
    print(f"status: {result.status} after {result.runs} runs")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="chiplet-sim", description="Chiplet / multi-die SoC discrete-event simulator")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="cmd", parser_class=_Parser)

    r = sub.add_parser("run", help="run one preset or config file")
    r.add_argument("--config")
    r.add_argument("--preset")
    r.add_argument("--seed", type=_u64)
    r.add_argument("--until", type=float, help="stop after this many simulated seconds")
    r.add_argument("--out", default=_default_out())
    r.add_argument("--no-plots", action="store_true")
    r.set_defaults(fn=cmd_run)

    c = sub.add_parser("compare", help="run several presets and compare them")
    c.add_argument("--presets", default=",".join(EXPERIMENTS))
    c.add_argument("--seed", type=_u64)
    c.add_argument("--out", default=_default_out())
    c.set_defaults(fn=cmd_compare)

    s = sub.add_parser("sweep", help="sweep one numeric field")
    s.add_argument("--config")
    s.add_argument("--preset")
    s.add_argument("--param", required=True, help="dotted key path, '*' matches all list items")
    s.add_argument("--values", required=True, help="comma-separated values")
    s.add_argument("--seed", type=_u64)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--out", default=_default_out())
    s.set_defaults(fn=cmd_sweep)

    pl = sub.add_parser("plot", help="render an SVG from a CSV artifact")
    pl.add_argument("--csv", required=True)
    pl.add_argument("--kind", required=True, choices=["latency-hist", "power-trace"])
    pl.add_argument("--component", default=ALL)
    pl.add_argument("--out")
    pl.set_defaults(fn=cmd_plot)

    cal = sub.add_parser("calibrate", help="fit exp1 to its target latency")
    cal.add_argument("--target", type=float)
    cal.add_argument("--tolerance", type=float, default=0.05)
    cal.add_argument("--budget", type=int, default=200)
    cal.add_argument("--seed", type=_u64)
    cal.add_argument("--out", default=_default_out())
    cal.add_argument("--write-presets", action="store_true", help="also overwrite the shipped presets")
    cal.set_defaults(fn=cmd_calibrate)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "fn", None):
            raise UsageError("a command is required: run, compare, sweep, plot, calibrate")
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return args.fn(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, ReportError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        for d in getattr(exc, "diagnostics", []):
            print(f"  {d}", file=sys.stderr)
        return EXIT_INVALID
    except SimulationError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
