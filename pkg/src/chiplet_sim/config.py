"""System description: types, YAML parsing, serialization and validation.

The on-disk format is YAML with a strict schema. Keys are exactly the field
names of the dataclasses below; unknown keys are rejected. Times are integer
picoseconds, bandwidths are exact rationals in bytes per nanosecond (written
as integers, decimals, or ``"p/q"`` strings).
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import yaml

Coord = tuple[int, int]

ENERGY_CLASSES = (
    "core_cycle",
    "l1_hit",
    "l2_hit",
    "l3_hit",
    "cache_miss",
    "flit_hop",
    "d2d_byte",
    "dram_access",
)
STATIC_CLASSES = ("cluster", "dram", "mesh", "d2d")
EXPERIMENTS = ("exp1", "exp2", "exp3")


class ConfigError(ValueError):
    """Raised for syntax, schema or validation problems in a system description."""

    def __init__(self, message: str, diagnostics: list["Diagnostic"] | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or []


@dataclass(frozen=True)
class Diagnostic:
    code: str
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.code} at {self.path}: {self.message}"


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------


@dataclass
class CacheSpec:
    capacity_bytes: int
    line_bytes: int = 64
    associativity: int = 4
    hit_latency_cycles: int = 2


@dataclass
class ClusterSpec:
    id: str
    coord: Coord | None = None
    cores: int = 1
    clock_period: int = 500
    l1i: CacheSpec = field(default_factory=lambda: CacheSpec(32 * 1024, 64, 4, 2))
    l1d: CacheSpec = field(default_factory=lambda: CacheSpec(32 * 1024, 64, 4, 2))
    l2: CacheSpec = field(default_factory=lambda: CacheSpec(256 * 1024, 64, 8, 10))
    l3: CacheSpec = field(default_factory=lambda: CacheSpec(1024 * 1024, 64, 16, 30))


@dataclass
class DramSpec:
    id: str
    coord: Coord | None = None
    access_latency: int = 50_000
    bandwidth_bytes_per_ns: Fraction = Fraction(16)
    queue_capacity: int = 8


@dataclass
class DieSpec:
    id: str
    mesh_cols: int | None = None
    mesh_rows: int | None = None
    clusters: list[ClusterSpec] = field(default_factory=list)
    home_nodes: list[Coord | None] = field(default_factory=list)
    drams: list[DramSpec] = field(default_factory=list)
    gateways: list[Coord | None] = field(default_factory=list)
    # Physical address ranges [base, base + size) served by this die's DRAMs.
    mem_ranges: list[tuple[int, int]] = field(default_factory=list)

    def node_coords(self) -> list[tuple[str, Coord | None]]:
        nodes: list[tuple[str, Coord | None]] = []
        nodes += [(f"clusters.{i}", c.coord) for i, c in enumerate(self.clusters)]
        nodes += [(f"home_nodes.{i}", c) for i, c in enumerate(self.home_nodes)]
        nodes += [(f"drams.{i}", d.coord) for i, d in enumerate(self.drams)]
        nodes += [(f"gateways.{i}", c) for i, c in enumerate(self.gateways)]
        return nodes


@dataclass
class Endpoint:
    die: str
    gateway: Coord


@dataclass
class D2DLinkSpec:
    id: str
    endpoints: tuple[Endpoint, Endpoint]
    bandwidth_bytes_per_ns: Fraction = Fraction(32)
    adapter_latency: int = 10_000
    flit_bytes: int = 16


@dataclass
class CalibrationSpec:
    noc_hop_latency_cycles: int = 2
    noc_clock_period: int = 1_000
    noc_flit_bytes: int = 32
    interleave_granularity_bytes: int = 4096
    target_latencies_s: dict[str, float] = field(default_factory=dict)


@dataclass
class AddressPattern:
    kind: str  # "strided" | "uniform"
    footprint_bytes: int
    base: int = 0
    stride_bytes: int | None = None


@dataclass
class FlowSpec:
    id: int
    die: str
    cluster: str
    core: int
    address_pattern: AddressPattern
    n_groups: int = 2000
    compute_cycles_per_group: int = 8
    mem_ratio: float = 0.3
    read_fraction: float = 0.8


@dataclass
class WorkloadSpec:
    flows: list[FlowSpec] = field(default_factory=list)
    seed: int = 0


def default_static_mw() -> dict[str, float]:
    return {"cluster": 100, "dram": 50, "mesh": 30, "d2d": 20}


def default_energy_pj() -> dict[str, int]:
    return {
        "core_cycle": 50,
        "l1_hit": 1,
        "l2_hit": 5,
        "l3_hit": 10,
        "cache_miss": 2,
        "flit_hop": 2,
        "d2d_byte": 1,
        "dram_access": 500,
    }


@dataclass
class PowerSpec:
    window: int = 100_000
    static_mw: dict[str, float] = field(default_factory=default_static_mw)
    energy_pj: dict[str, int] = field(default_factory=default_energy_pj)


@dataclass
class SystemSpec:
    dies: list[DieSpec]
    d2d_links: list[D2DLinkSpec] = field(default_factory=list)
    calibration: CalibrationSpec = field(default_factory=CalibrationSpec)
    workload: WorkloadSpec = field(default_factory=WorkloadSpec)
    power: PowerSpec = field(default_factory=PowerSpec)

    def die(self, die_id: str) -> DieSpec:
        for d in self.dies:
            if d.id == die_id:
                return d
        raise KeyError(die_id)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_MISSING = object()


class _Reader:
    """Strict accessor over one mapping node of the document."""

    def __init__(self, node: Any, path: str):
        if not isinstance(node, dict):
            raise ConfigError(f"{path or '<root>'}: expected a mapping, got {type(node).__name__}")
        self.node = node
        self.path = path
        self.used: set[str] = set()

    def _p(self, key: str) -> str:
        return f"{self.path}.{key}" if self.path else key

    def get(self, key: str, default: Any = _MISSING) -> Any:
        self.used.add(key)
        if key not in self.node or self.node[key] is None and default is not _MISSING:
            if default is _MISSING:
                raise ConfigError(f"{self._p(key)}: missing required key")
            return default
        return self.node[key]

    def int(self, key: str, default: Any = _MISSING) -> Any:
        v = self.get(key, default)
        if v is default and default is not _MISSING:
            return v
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError(f"{self._p(key)}: expected an integer, got {v!r}")
        return v

    def str(self, key: str, default: Any = _MISSING) -> Any:
        v = self.get(key, default)
        if v is default and default is not _MISSING:
            return v
        if isinstance(v, bool) or not isinstance(v, (str, int)):
            raise ConfigError(f"{self._p(key)}: expected a string, got {v!r}")
        return str(v)

    def float(self, key: str, default: Any = _MISSING) -> Any:
        v = self.get(key, default)
        if v is default and default is not _MISSING:
            return v
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"{self._p(key)}: expected a number, got {v!r}")
        return v

    def rational(self, key: str, default: Any = _MISSING) -> Any:
        v = self.get(key, default)
        if v is default and default is not _MISSING:
            return v
        return _to_fraction(v, self._p(key))

    def list(self, key: str, default: Any = _MISSING) -> Any:
        v = self.get(key, default)
        if not isinstance(v, list):
            raise ConfigError(f"{self._p(key)}: expected a list, got {v!r}")
        return v

    def sub(self, key: str) -> "_Reader | None":
        v = self.get(key, None)
        return None if v is None else _Reader(v, self._p(key))

    def finish(self) -> None:
        extra = sorted(set(self.node) - self.used, key=str)
        if extra:
            raise ConfigError(f"{self._p(str(extra[0]))}: unknown key")


def _to_fraction(v: Any, path: str) -> Fraction:
    if isinstance(v, bool):
        raise ConfigError(f"{path}: expected a number, got {v!r}")
    try:
        if isinstance(v, int):
            return Fraction(v)
        if isinstance(v, float):
            return Fraction(repr(v))
        if isinstance(v, str):
            return Fraction(v.strip())
    except (ValueError, ZeroDivisionError):
        pass
    raise ConfigError(f"{path}: expected a rational number, got {v!r}")


def _coord(v: Any, path: str, optional: bool = False) -> Coord | None:
    if v is None and optional:
        return None
    if (
        not isinstance(v, (list, tuple))
        or len(v) != 2
        or not all(isinstance(x, int) and not isinstance(x, bool) for x in v)
    ):
        raise ConfigError(f"{path}: expected a coordinate [x, y], got {v!r}")
    return (v[0], v[1])


def _parse_cache(r: _Reader | None, default: CacheSpec) -> CacheSpec:
    if r is None:
        return CacheSpec(default.capacity_bytes, default.line_bytes, default.associativity, default.hit_latency_cycles)
    c = CacheSpec(
        capacity_bytes=r.int("capacity_bytes", default.capacity_bytes),
        line_bytes=r.int("line_bytes", default.line_bytes),
        associativity=r.int("associativity", default.associativity),
        hit_latency_cycles=r.int("hit_latency_cycles", default.hit_latency_cycles),
    )
    r.finish()
    return c


def _parse_cluster(r: _Reader) -> ClusterSpec:
    base = ClusterSpec(id="")
    c = ClusterSpec(
        id=r.str("id"),
        coord=_coord(r.get("coord", None), r._p("coord"), optional=True),
        cores=r.int("cores", 1),
        clock_period=r.int("clock_period", 500),
        l1i=_parse_cache(r.sub("l1i"), base.l1i),
        l1d=_parse_cache(r.sub("l1d"), base.l1d),
        l2=_parse_cache(r.sub("l2"), base.l2),
        l3=_parse_cache(r.sub("l3"), base.l3),
    )
    r.finish()
    return c


def _parse_dram(r: _Reader) -> DramSpec:
    d = DramSpec(
        id=r.str("id"),
        coord=_coord(r.get("coord", None), r._p("coord"), optional=True),
        access_latency=r.int("access_latency", 50_000),
        bandwidth_bytes_per_ns=r.rational("bandwidth_bytes_per_ns", Fraction(16)),
        queue_capacity=r.int("queue_capacity", 8),
    )
    r.finish()
    return d


def _parse_range(v: Any, path: str) -> tuple[int, int]:
    if (
        not isinstance(v, (list, tuple))
        or len(v) != 2
        or not all(isinstance(x, int) and not isinstance(x, bool) for x in v)
    ):
        raise ConfigError(f"{path}: expected an address range [base, size], got {v!r}")
    return (v[0], v[1])


def _parse_die(r: _Reader) -> DieSpec:
    p = r.path
    d = DieSpec(
        id=r.str("id"),
        mesh_cols=r.int("mesh_cols", None),
        mesh_rows=r.int("mesh_rows", None),
        clusters=[_parse_cluster(_Reader(x, f"{p}.clusters.{i}")) for i, x in enumerate(r.list("clusters", []))],
        home_nodes=[_coord(x, f"{p}.home_nodes.{i}", optional=True) for i, x in enumerate(r.list("home_nodes", []))],
        drams=[_parse_dram(_Reader(x, f"{p}.drams.{i}")) for i, x in enumerate(r.list("drams", []))],
        gateways=[_coord(x, f"{p}.gateways.{i}", optional=True) for i, x in enumerate(r.list("gateways", []))],
        mem_ranges=[_parse_range(x, f"{p}.mem_ranges.{i}") for i, x in enumerate(r.list("mem_ranges", []))],
    )
    r.finish()
    place_nodes(d)
    return d


def _parse_link(r: _Reader) -> D2DLinkSpec:
    eps = r.list("endpoints")
    if len(eps) != 2:
        raise ConfigError(f"{r._p('endpoints')}: expected exactly 2 endpoints")
    parsed = []
    for i, e in enumerate(eps):
        er = _Reader(e, f"{r._p('endpoints')}.{i}")
        parsed.append(Endpoint(die=er.str("die"), gateway=_coord(er.get("gateway"), er._p("gateway"))))
        er.finish()
    link = D2DLinkSpec(
        id=r.str("id"),
        endpoints=(parsed[0], parsed[1]),
        bandwidth_bytes_per_ns=r.rational("bandwidth_bytes_per_ns", Fraction(32)),
        adapter_latency=r.int("adapter_latency", 10_000),
        flit_bytes=r.int("flit_bytes", 16),
    )
    r.finish()
    return link


def _parse_calibration(r: _Reader | None) -> CalibrationSpec:
    if r is None:
        return CalibrationSpec()
    targets_raw = r.get("target_latencies_s", {})
    if not isinstance(targets_raw, dict):
        raise ConfigError(f"{r._p('target_latencies_s')}: expected a mapping")
    targets = {}
    tr = _Reader(targets_raw, r._p("target_latencies_s"))
    for k in list(targets_raw):
        if k not in EXPERIMENTS:
            raise ConfigError(f"{tr._p(str(k))}: unknown key")
        targets[k] = float(tr.float(k))
    c = CalibrationSpec(
        noc_hop_latency_cycles=r.int("noc_hop_latency_cycles", 2),
        noc_clock_period=r.int("noc_clock_period", 1_000),
        noc_flit_bytes=r.int("noc_flit_bytes", 32),
        interleave_granularity_bytes=r.int("interleave_granularity_bytes", 4096),
        target_latencies_s=targets,
    )
    r.finish()
    return c


def _parse_flow(r: _Reader) -> FlowSpec:
    ar = r.sub("address_pattern")
    if ar is None:
        raise ConfigError(f"{r._p('address_pattern')}: missing required key")
    kind = ar.str("kind")
    if kind not in ("strided", "uniform"):
        raise ConfigError(f"{ar._p('kind')}: expected 'strided' or 'uniform', got {kind!r}")
    pattern = AddressPattern(
        kind=kind,
        footprint_bytes=ar.int("footprint_bytes"),
        base=ar.int("base", 0),
        stride_bytes=ar.int("stride_bytes") if kind == "strided" else None,
    )
    ar.finish()
    f = FlowSpec(
        id=r.int("id"),
        die=r.str("die"),
        cluster=r.str("cluster"),
        core=r.int("core", 0),
        address_pattern=pattern,
        n_groups=r.int("n_groups", 2000),
        compute_cycles_per_group=r.int("compute_cycles_per_group", 8),
        mem_ratio=float(r.float("mem_ratio", 0.3)),
        read_fraction=float(r.float("read_fraction", 0.8)),
    )
    r.finish()
    return f


def _parse_workload(r: _Reader | None) -> WorkloadSpec:
    if r is None:
        return WorkloadSpec()
    w = WorkloadSpec(
        flows=[_parse_flow(_Reader(x, f"{r.path}.flows.{i}")) for i, x in enumerate(r.list("flows", []))],
        seed=r.int("seed", 0),
    )
    r.finish()
    return w


def _parse_power(r: _Reader | None) -> PowerSpec:
    if r is None:
        return PowerSpec()
    static = default_static_mw()
    sr = r.sub("static_mw")
    if sr is not None:
        for k in list(sr.node):
            if k not in STATIC_CLASSES:
                raise ConfigError(f"{sr._p(str(k))}: unknown key")
            static[k] = sr.float(k)
    energy = default_energy_pj()
    er = r.sub("energy_pj")
    if er is not None:
        for k in list(er.node):
            if k not in ENERGY_CLASSES:
                raise ConfigError(f"{er._p(str(k))}: unknown key")
            energy[k] = er.int(k)
    p = PowerSpec(window=r.int("window", 100_000), static_mw=static, energy_pj=energy)
    r.finish()
    return p


def spec_from_dict(doc: Any) -> SystemSpec:
    """Build a SystemSpec from an already-loaded document tree (no validation)."""
    r = _Reader(doc, "")
    spec = SystemSpec(
        dies=[_parse_die(_Reader(x, f"dies.{i}")) for i, x in enumerate(r.list("dies"))],
        d2d_links=[_parse_link(_Reader(x, f"d2d_links.{i}")) for i, x in enumerate(r.list("d2d_links", []))],
        calibration=_parse_calibration(r.sub("calibration")),
        workload=_parse_workload(r.sub("workload")),
        power=_parse_power(r.sub("power")),
    )
    r.finish()
    return spec


def load_document(text: str) -> Any:
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "unknown position"
        problem = getattr(exc, "problem", None) or str(exc)
        raise ConfigError(f"syntax error at {where}: {problem}") from None


def parse_config(text: str, check: bool = True) -> SystemSpec:
    """Parse a YAML system description.

    Omitted optional fields take their defaults and unplaced mesh nodes are
    laid out row-major. With ``check`` the result is also validated and any
    diagnostics are raised as a ConfigError.
    """
    spec = spec_from_dict(load_document(text))
    if check:
        diags = validate(spec)
        if diags:
            raise ConfigError("; ".join(str(d) for d in diags), diags)
    return spec


# ---------------------------------------------------------------------------
# Mesh placement
# ---------------------------------------------------------------------------


def place_nodes(die: DieSpec) -> None:
    """Fill in omitted mesh dimensions and node coordinates in place.

    Dimensions default to the smallest near-square grid holding every node
    (and every explicitly given coordinate). Nodes without a coordinate are
    placed row-major into the free cells, in declaration order.
    """
    nodes = die.node_coords()
    given = [c for _, c in nodes if c is not None]
    if die.mesh_cols is None or die.mesh_rows is None:
        n = max(len(nodes), 1)
        if len(given) == len(nodes):
            cols = max([x for x, _ in given] + [0]) + 1
            rows = max([y for _, y in given] + [0]) + 1
        else:
            cols = math.ceil(math.sqrt(n))
            rows = math.ceil(n / cols)
            cols = max([cols] + [x + 1 for x, _ in given])
            rows = max([rows] + [y + 1 for _, y in given])
            while cols * rows - len(given) < len(nodes) - len(given):
                rows += 1
        if die.mesh_cols is None:
            die.mesh_cols = cols
        if die.mesh_rows is None:
            die.mesh_rows = rows
    if len(given) == len(nodes):
        return
    taken = set(given)
    free = [
        (x, y)
        for y in range(die.mesh_rows)
        for x in range(die.mesh_cols)
        if (x, y) not in taken
    ]
    it = iter(free)

    def nxt() -> Coord | None:
        return next(it, None)

    for c in die.clusters:
        if c.coord is None:
            c.coord = nxt()
    die.home_nodes = [c if c is not None else nxt() for c in die.home_nodes]
    for d in die.drams:
        if d.coord is None:
            d.coord = nxt()
    die.gateways = [c if c is not None else nxt() for c in die.gateways]


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _frac_out(v: Fraction) -> int | str:
    return v.numerator if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def _cache_dict(c: CacheSpec) -> dict:
    return {
        "capacity_bytes": c.capacity_bytes,
        "line_bytes": c.line_bytes,
        "associativity": c.associativity,
        "hit_latency_cycles": c.hit_latency_cycles,
    }


def _coord_out(c: Coord | None) -> list[int] | None:
    return None if c is None else [c[0], c[1]]


def spec_to_dict(spec: SystemSpec) -> dict:
    dies = []
    for d in spec.dies:
        dies.append(
            {
                "id": d.id,
                "mesh_cols": d.mesh_cols,
                "mesh_rows": d.mesh_rows,
                "clusters": [
                    {
                        "id": c.id,
                        "coord": _coord_out(c.coord),
                        "cores": c.cores,
                        "clock_period": c.clock_period,
                        "l1i": _cache_dict(c.l1i),
                        "l1d": _cache_dict(c.l1d),
                        "l2": _cache_dict(c.l2),
                        "l3": _cache_dict(c.l3),
                    }
                    for c in d.clusters
                ],
                "home_nodes": [_coord_out(c) for c in d.home_nodes],
                "drams": [
                    {
                        "id": m.id,
                        "coord": _coord_out(m.coord),
                        "access_latency": m.access_latency,
                        "bandwidth_bytes_per_ns": _frac_out(m.bandwidth_bytes_per_ns),
                        "queue_capacity": m.queue_capacity,
                    }
                    for m in d.drams
                ],
                "gateways": [_coord_out(c) for c in d.gateways],
                "mem_ranges": [[b, s] for b, s in d.mem_ranges],
            }
        )
    links = [
        {
            "id": l.id,
            "endpoints": [{"die": e.die, "gateway": _coord_out(e.gateway)} for e in l.endpoints],
            "bandwidth_bytes_per_ns": _frac_out(l.bandwidth_bytes_per_ns),
            "adapter_latency": l.adapter_latency,
            "flit_bytes": l.flit_bytes,
        }
        for l in spec.d2d_links
    ]
    cal = spec.calibration
    flows = []
    for f in spec.workload.flows:
        ap: dict[str, Any] = {"kind": f.address_pattern.kind}
        if f.address_pattern.kind == "strided":
            ap["stride_bytes"] = f.address_pattern.stride_bytes
        ap["footprint_bytes"] = f.address_pattern.footprint_bytes
        ap["base"] = f.address_pattern.base
        flows.append(
            {
                "id": f.id,
                "die": f.die,
                "cluster": f.cluster,
                "core": f.core,
                "n_groups": f.n_groups,
                "compute_cycles_per_group": f.compute_cycles_per_group,
                "mem_ratio": f.mem_ratio,
                "read_fraction": f.read_fraction,
                "address_pattern": ap,
            }
        )
    return {
        "dies": dies,
        "d2d_links": links,
        "calibration": {
            "noc_hop_latency_cycles": cal.noc_hop_latency_cycles,
            "noc_clock_period": cal.noc_clock_period,
            "noc_flit_bytes": cal.noc_flit_bytes,
            "interleave_granularity_bytes": cal.interleave_granularity_bytes,
            "target_latencies_s": dict(cal.target_latencies_s),
        },
        "workload": {"seed": spec.workload.seed, "flows": flows},
        "power": {
            "window": spec.power.window,
            "static_mw": dict(spec.power.static_mw),
            "energy_pj": dict(spec.power.energy_pj),
        },
    }


def serialize_config(spec: SystemSpec) -> str:
    return yaml.safe_dump(spec_to_dict(spec), sort_keys=False, default_flow_style=None, width=100)


def config_hash(spec: SystemSpec) -> str:
    return hashlib.sha256(serialize_config(spec).encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def _pow2(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


def _in_bounds(c: Coord, die: DieSpec) -> bool:
    return 0 <= c[0] < (die.mesh_cols or 0) and 0 <= c[1] < (die.mesh_rows or 0)


def _validate_cache(c: CacheSpec, path: str, out: list[Diagnostic]) -> None:
    if c.associativity < 1:
        out.append(Diagnostic("E_CACHE_GEOMETRY", f"{path}.associativity", "associativity must be >= 1"))
        return
    if not _pow2(c.line_bytes):
        out.append(Diagnostic("E_NOT_POW2", f"{path}.line_bytes", "line size must be a power of two"))
        return
    if c.capacity_bytes <= 0 or c.capacity_bytes % (c.line_bytes * c.associativity):
        out.append(
            Diagnostic(
                "E_CACHE_GEOMETRY",
                f"{path}.capacity_bytes",
                "capacity must be a positive multiple of line_bytes * associativity",
            )
        )
    if c.hit_latency_cycles < 0:
        out.append(Diagnostic("E_NEGATIVE", f"{path}.hit_latency_cycles", "must be >= 0"))


def die_of_address(spec: SystemSpec, addr: int) -> DieSpec | None:
    """The die whose DRAMs serve ``addr``, or None if unmapped."""
    with_dram = [d for d in spec.dies if d.drams]
    if len(with_dram) == 1 and not with_dram[0].mem_ranges:
        return with_dram[0]
    for d in with_dram:
        for base, size in d.mem_ranges:
            if base <= addr < base + size:
                return d
    return None


def _footprint_unmapped(spec: SystemSpec, lo: int, hi: int) -> bool:
    with_dram = [d for d in spec.dies if d.drams]
    if not with_dram:
        return True
    if len(with_dram) == 1 and not with_dram[0].mem_ranges:
        return False
    ranges = sorted((b, b + s) for d in with_dram for b, s in d.mem_ranges)
    cur = lo
    for b, e in ranges:
        if b > cur:
            break
        cur = max(cur, e)
        if cur >= hi:
            return False
    return cur < hi


def validate(spec: SystemSpec) -> list[Diagnostic]:
    """Check every structural invariant; one diagnostic per violation."""
    out: list[Diagnostic] = []
    if not spec.dies:
        out.append(Diagnostic("E_NO_DIE", "dies", "at least one die is required"))
    seen_ids: dict[str, str] = {}

    def claim(cid: str, path: str) -> None:
        if cid in seen_ids:
            out.append(Diagnostic("E_DUP_ID", path, f"id {cid!r} already used at {seen_ids[cid]}"))
        else:
            seen_ids[cid] = path

    line_sizes: set[int] = set()
    for di, die in enumerate(spec.dies):
        dp = f"dies.{di}"
        claim(die.id, dp)
        if not die.mesh_cols or die.mesh_cols < 1 or not die.mesh_rows or die.mesh_rows < 1:
            out.append(Diagnostic("E_MESH_DIMS", dp, "mesh_cols and mesh_rows must be positive"))
        occupied: dict[Coord, str] = {}
        for npath, c in die.node_coords():
            full = f"{dp}.{npath}"
            if c is None:
                out.append(Diagnostic("E_OUT_OF_BOUNDS", full, "node has no mesh coordinate"))
                continue
            if not _in_bounds(c, die):
                out.append(Diagnostic("E_OUT_OF_BOUNDS", full, f"coordinate {list(c)} outside the mesh"))
            if c in occupied:
                out.append(Diagnostic("E_COORD_CLASH", full, f"coordinate {list(c)} also used by {occupied[c]}"))
            else:
                occupied[c] = full
        if die.drams and not die.home_nodes:
            out.append(Diagnostic("E_NO_HOME_NODE", f"{dp}.home_nodes", "a die with DRAM needs a home node"))
        for ci, cl in enumerate(die.clusters):
            cp = f"{dp}.clusters.{ci}"
            claim(f"{die.id}.{cl.id}", cp)
            if cl.cores < 1:
                out.append(Diagnostic("E_RANGE", f"{cp}.cores", "cores must be >= 1"))
            if cl.clock_period < 1:
                out.append(Diagnostic("E_RANGE", f"{cp}.clock_period", "clock_period must be >= 1"))
            levels = [("l1i", cl.l1i), ("l1d", cl.l1d), ("l2", cl.l2), ("l3", cl.l3)]
            for name, cs in levels:
                _validate_cache(cs, f"{cp}.{name}", out)
                line_sizes.add(cs.line_bytes)
            if len({cs.line_bytes for _, cs in levels}) > 1:
                out.append(Diagnostic("E_LINE_MISMATCH", cp, "cache line sizes differ between levels"))
            if not (
                max(cl.l1i.capacity_bytes, cl.l1d.capacity_bytes) <= cl.l2.capacity_bytes <= cl.l3.capacity_bytes
            ):
                out.append(Diagnostic("E_CACHE_ORDER", cp, "capacities must satisfy L1 <= L2 <= L3"))
        for mi, m in enumerate(die.drams):
            mp = f"{dp}.drams.{mi}"
            claim(f"{die.id}.{m.id}", mp)
            if m.access_latency < 0:
                out.append(Diagnostic("E_NEGATIVE", f"{mp}.access_latency", "access_latency must be >= 0"))
            if m.bandwidth_bytes_per_ns <= 0:
                out.append(Diagnostic("E_RANGE", f"{mp}.bandwidth_bytes_per_ns", "bandwidth must be > 0"))
            if m.queue_capacity < 1:
                out.append(Diagnostic("E_RANGE", f"{mp}.queue_capacity", "queue_capacity must be >= 1"))
        for ri, (base, size) in enumerate(die.mem_ranges):
            if base < 0 or size <= 0:
                out.append(Diagnostic("E_RANGE", f"{dp}.mem_ranges.{ri}", "range needs base >= 0 and size > 0"))
        if die.mem_ranges and not die.drams:
            out.append(Diagnostic("E_ADDR_MAP", f"{dp}.mem_ranges", "a die without DRAM cannot serve addresses"))

    all_ranges = sorted(
        (b, b + s, f"dies.{di}.mem_ranges.{ri}")
        for di, d in enumerate(spec.dies)
        for ri, (b, s) in enumerate(d.mem_ranges)
    )
    for (b0, e0, p0), (b1, e1, p1) in zip(all_ranges, all_ranges[1:]):
        if b1 < e0:
            out.append(Diagnostic("E_RANGE_OVERLAP", p1, f"overlaps {p0}"))
    dram_dies = [d for d in spec.dies if d.drams]
    if len(dram_dies) > 1:
        for di, d in enumerate(spec.dies):
            if d.drams and not d.mem_ranges:
                out.append(
                    Diagnostic("E_ADDR_MAP", f"dies.{di}.mem_ranges", "required when several dies have DRAM")
                )

    die_ids = {d.id: d for d in spec.dies}
    adjacency: dict[str, set[str]] = {d.id: set() for d in spec.dies}
    for li, link in enumerate(spec.d2d_links):
        lp = f"d2d_links.{li}"
        claim(link.id, lp)
        ends_ok = True
        for ei, ep in enumerate(link.endpoints):
            die = die_ids.get(ep.die)
            if die is None:
                out.append(Diagnostic("E_BAD_ENDPOINT", f"{lp}.endpoints.{ei}", f"unknown die {ep.die!r}"))
                ends_ok = False
            elif ep.gateway not in die.gateways:
                out.append(
                    Diagnostic("E_BAD_ENDPOINT", f"{lp}.endpoints.{ei}", f"{list(ep.gateway)} is not a gateway of {ep.die!r}")
                )
                ends_ok = False
        if link.endpoints[0].die == link.endpoints[1].die:
            out.append(Diagnostic("E_BAD_ENDPOINT", f"{lp}.endpoints", "a link must join two distinct dies"))
            ends_ok = False
        if ends_ok:
            a, b = link.endpoints[0].die, link.endpoints[1].die
            adjacency[a].add(b)
            adjacency[b].add(a)
        if link.bandwidth_bytes_per_ns <= 0:
            out.append(Diagnostic("E_RANGE", f"{lp}.bandwidth_bytes_per_ns", "bandwidth must be > 0"))
        if link.adapter_latency < 0:
            out.append(Diagnostic("E_NEGATIVE", f"{lp}.adapter_latency", "adapter_latency must be >= 0"))
        if not _pow2(link.flit_bytes):
            out.append(Diagnostic("E_NOT_POW2", f"{lp}.flit_bytes", "flit_bytes must be a power of two"))
    if len(spec.dies) > 1:
        start = spec.dies[0].id
        reach, stack = {start}, [start]
        while stack:
            for nb in adjacency[stack.pop()]:
                if nb not in reach:
                    reach.add(nb)
                    stack.append(nb)
        if len(reach) != len(adjacency):
            out.append(Diagnostic("E_DISCONNECTED", "d2d_links", "die-to-die links do not connect every die"))

    cal = spec.calibration
    if cal.noc_hop_latency_cycles < 0:
        out.append(Diagnostic("E_NEGATIVE", "calibration.noc_hop_latency_cycles", "must be >= 0"))
    if cal.noc_clock_period < 1:
        out.append(Diagnostic("E_RANGE", "calibration.noc_clock_period", "must be >= 1"))
    if not _pow2(cal.noc_flit_bytes):
        out.append(Diagnostic("E_NOT_POW2", "calibration.noc_flit_bytes", "must be a power of two"))
    g = cal.interleave_granularity_bytes
    if not _pow2(g) or any(g < ls for ls in line_sizes):
        out.append(
            Diagnostic(
                "E_GRANULARITY",
                "calibration.interleave_granularity_bytes",
                "must be a power of two no smaller than the cache line",
            )
        )
    for k, v in cal.target_latencies_s.items():
        if not v > 0:
            out.append(Diagnostic("E_RANGE", f"calibration.target_latencies_s.{k}", "target must be > 0"))

    flow_ids: set[int] = set()
    bound: set[tuple[str, str, int]] = set()
    line = min(line_sizes) if line_sizes else 64
    for fi, f in enumerate(spec.workload.flows):
        fp = f"workload.flows.{fi}"
        if f.id in flow_ids:
            out.append(Diagnostic("E_DUP_ID", f"{fp}.id", f"flow id {f.id} already used"))
        flow_ids.add(f.id)
        if not 0 <= f.id < 2**64:
            out.append(Diagnostic("E_RANGE", f"{fp}.id", "flow id must fit in 64 unsigned bits"))
        die = die_ids.get(f.die)
        cluster = None if die is None else next((c for c in die.clusters if c.id == f.cluster), None)
        if cluster is None or not 0 <= f.core < cluster.cores:
            out.append(Diagnostic("E_FLOW_BINDING", fp, f"no core {f.core} in cluster {f.cluster!r} of die {f.die!r}"))
        elif (f.die, f.cluster, f.core) in bound:
            out.append(Diagnostic("E_FLOW_BINDING", fp, "core already runs another flow"))
        bound.add((f.die, f.cluster, f.core))
        if f.n_groups < 1:
            out.append(Diagnostic("E_RANGE", f"{fp}.n_groups", "n_groups must be >= 1"))
        if f.compute_cycles_per_group < 0:
            out.append(Diagnostic("E_NEGATIVE", f"{fp}.compute_cycles_per_group", "must be >= 0"))
        for name in ("mem_ratio", "read_fraction"):
            v = getattr(f, name)
            if not 0.0 <= v <= 1.0:
                out.append(Diagnostic("E_RANGE", f"{fp}.{name}", "must lie in [0, 1]"))
        ap = f.address_pattern
        if ap.footprint_bytes < line:
            out.append(Diagnostic("E_FOOTPRINT", f"{fp}.address_pattern.footprint_bytes", "footprint smaller than a line"))
        if ap.base < 0 or ap.base % line:
            out.append(Diagnostic("E_FOOTPRINT", f"{fp}.address_pattern.base", "base must be a non-negative line-aligned address"))
        if ap.kind == "strided" and (ap.stride_bytes is None or ap.stride_bytes < 1):
            out.append(Diagnostic("E_RANGE", f"{fp}.address_pattern.stride_bytes", "stride must be >= 1"))
        if f.mem_ratio > 0 and ap.footprint_bytes >= line and ap.base >= 0:
            if _footprint_unmapped(spec, ap.base, ap.base + ap.footprint_bytes):
                out.append(
                    Diagnostic("E_UNMAPPED_ADDR", f"{fp}.address_pattern", "footprint not fully served by any die's DRAM")
                )

    pw = spec.power
    if pw.window < 1:
        out.append(Diagnostic("E_RANGE", "power.window", "window must be > 0"))
    for k, v in pw.static_mw.items():
        if v < 0:
            out.append(Diagnostic("E_NEGATIVE", f"power.static_mw.{k}", "must be >= 0"))
    for k, v in pw.energy_pj.items():
        if v < 0:
            out.append(Diagnostic("E_NEGATIVE", f"power.energy_pj.{k}", "must be >= 0"))
    return out
