"""Parameter sweeps over numeric SystemSpec fields addressed by key paths.

A key path is a dotted walk through the serialized document, with list
indices as integers and ``*`` matching every element, e.g.
``d2d_links.0.bandwidth_bytes_per_ns`` or ``dies.*.drams.*.access_latency``.
"""

from __future__ import annotations

import copy
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from .config import ConfigError, SystemSpec, spec_from_dict, spec_to_dict, validate
from .power import ALL, flow_latency_stats
from .system import simulate


def _leaves(node, parts: list[str], path: str):
    if not parts:
        yield None, None, path
        return
    head, rest = parts[0], parts[1:]
    if isinstance(node, list):
        if head == "*":
            keys = list(range(len(node)))
        else:
            try:
                keys = [int(head)]
            except ValueError:
                raise ConfigError(f"{path}: {head!r} is not a list index") from None
            if not 0 <= keys[0] < len(node):
                raise ConfigError(f"{path}: index {head} out of range")
    elif isinstance(node, dict):
        if head == "*":
            keys = list(node)
        elif head in node:
            keys = [head]
        else:
            raise ConfigError(f"{path}: no key {head!r}")
    else:
        raise ConfigError(f"{path}: cannot descend into a scalar")
    for k in keys:
        sub = f"{path}.{k}" if path else str(k)
        if rest:
            yield from _leaves(node[k], rest, sub)
        else:
            yield node, k, sub


def _numeric(v) -> bool:
    if isinstance(v, bool):
        return False
    if isinstance(v, (int, float)):
        return True
    if isinstance(v, str):
        try:
            Fraction(v)
            return True
        except ValueError:
            return False
    return False


def set_keypath(spec: SystemSpec, keypath: str, value: str) -> SystemSpec:
    """A copy of ``spec`` with every field matched by ``keypath`` set to ``value``."""
    doc = copy.deepcopy(spec_to_dict(spec))
    leaves = list(_leaves(doc, keypath.split("."), ""))
    if not leaves:
        raise ConfigError(f"key path {keypath!r} matches nothing")
    for parent, key, path in leaves:
        if parent is None:
            raise ConfigError(f"key path {keypath!r} is empty")
        if not _numeric(parent[key]):
            raise ConfigError(f"{path}: not a numeric field")
        parent[key] = _coerce(value, parent[key])
    out = spec_from_dict(doc)
    diags = validate(out)
    if diags:
        raise ConfigError("; ".join(str(d) for d in diags), diags)
    return out


def _coerce(value: str, old):
    frac = Fraction(value)
    if isinstance(old, float):
        return float(frac)
    return frac.numerator if frac.denominator == 1 else f"{frac.numerator}/{frac.denominator}"


def run_point(spec: SystemSpec, seed: int | None, until: int | None = None) -> tuple[float, float]:
    res = simulate(spec, seed=seed, until=until)
    stats = flow_latency_stats(res.records)
    final = [s for s in res.power() if s.component == ALL][-1]
    return stats.mean_s, final.average_mw


def _run_point_args(args):
    return run_point(*args)


def run_sweep(spec: SystemSpec, keypath: str, values: list[str], seed: int | None = None,
              jobs: int = 1) -> list[tuple[str, float, float]]:
    specs = [set_keypath(spec, keypath, v) for v in values]
    work = [(s, seed) for s in specs]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_point_args, work))
    else:
        results = [run_point(*w) for w in work]
    return [(v, lat, p) for v, (lat, p) in zip(values, results)]
