"""The three reference topologies.

``build_preset`` constructs a topology from a set of tunable constants;
``preset`` loads the shipped (calibrated) YAML files. The layouts follow the
block diagrams: exp1 is one die with both CPUs above a single home node and
both DRAMs below it; exp2 splits that into two dies joined by one UCIe link,
each with its own DRAM; exp3 doubles exp2 to two clusters and two DRAMs per
die, each CPU/DRAM pair sitting on its own home-node crosspoint.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from fractions import Fraction
from importlib import resources

from .config import (
    EXPERIMENTS,
    AddressPattern,
    CalibrationSpec,
    ClusterSpec,
    ConfigError,
    D2DLinkSpec,
    DieSpec,
    DramSpec,
    Endpoint,
    FlowSpec,
    PowerSpec,
    SystemSpec,
    WorkloadSpec,
    parse_config,
)

MIB = 1 << 20
TARGET_LATENCIES_S = {"exp1": 1.17e-5, "exp2": 1.14e-5, "exp3": 1.16e-5}


@dataclass(frozen=True)
class Constants:
    """Free model constants shared by every preset."""

    n_groups: int = 2000
    compute_cycles: int = 8
    mem_ratio: float = 0.3
    read_fraction: float = 0.8
    dram_access_latency: int = 50_000
    dram_bandwidth: Fraction = Fraction(16)
    dram_queue: int = 8
    core_clock_period: int = 500
    noc_clock_period: int = 1_000
    noc_hop_cycles: int = 2
    d2d_adapter_latency: int = 10_000
    d2d_bandwidth: Fraction = Fraction(32)
    d2d_flit_bytes: int = 16
    interleave: int = 4096
    footprint: int = MIB
    # Walks the footprint in eighths so every flow reaches its remote-homed tail early.
    stride: int = (1 << 17) + 4096 + 64
    # Share of each flow's buffer homed on the other die (multi-die presets).
    remote_share: Fraction = Fraction(1, 32)

    def replace(self, **kw) -> "Constants":
        vals = {f.name: getattr(self, f.name) for f in fields(self)}
        vals.update(kw)
        return Constants(**vals)


def _cluster(cid: str, coord, k: Constants) -> ClusterSpec:
    return ClusterSpec(id=cid, coord=coord, cores=1, clock_period=k.core_clock_period)


def _dram(mid: str, coord, k: Constants) -> DramSpec:
    return DramSpec(
        id=mid,
        coord=coord,
        access_latency=k.dram_access_latency,
        bandwidth_bytes_per_ns=k.dram_bandwidth,
        queue_capacity=k.dram_queue,
    )


def _flow(fid: int, die: str, cluster: str, k: Constants) -> FlowSpec:
    return FlowSpec(
        id=fid,
        die=die,
        cluster=cluster,
        core=0,
        n_groups=k.n_groups,
        compute_cycles_per_group=k.compute_cycles,
        mem_ratio=k.mem_ratio,
        read_fraction=k.read_fraction,
        address_pattern=AddressPattern("strided", k.footprint, base=fid * k.footprint, stride_bytes=k.stride),
    )


def _link(a: str, ga, b: str, gb, k: Constants) -> D2DLinkSpec:
    return D2DLinkSpec(
        id="ucie0",
        endpoints=(Endpoint(a, ga), Endpoint(b, gb)),
        bandwidth_bytes_per_ns=k.d2d_bandwidth,
        adapter_latency=k.d2d_adapter_latency,
        flit_bytes=k.d2d_flit_bytes,
    )


def _split_ranges(flow_dies: list[int], n_dies: int, k: Constants) -> list[list[tuple[int, int]]]:
    """Per-die address ranges: each flow's buffer lives on its own die except a
    ``remote_share`` tail that is homed on the next die."""
    remote = int(k.footprint * k.remote_share)
    local = k.footprint - remote
    ranges: list[list[tuple[int, int]]] = [[] for _ in range(n_dies)]
    for i, d in enumerate(flow_dies):
        base = i * k.footprint
        ranges[d].append((base, local))
        if remote:
            ranges[(d + 1) % n_dies].append((base + local, remote))
    for r in ranges:
        r.sort()
    return ranges


def _common(k: Constants) -> tuple[CalibrationSpec, PowerSpec]:
    cal = CalibrationSpec(
        noc_hop_latency_cycles=k.noc_hop_cycles,
        noc_clock_period=k.noc_clock_period,
        noc_flit_bytes=32,
        interleave_granularity_bytes=k.interleave,
        target_latencies_s=dict(TARGET_LATENCIES_S),
    )
    return cal, PowerSpec()


def build_exp1(k: Constants) -> SystemSpec:
    die = DieSpec(
        id="d0",
        mesh_cols=3,
        mesh_rows=3,
        clusters=[_cluster("c0", (0, 0), k), _cluster("c1", (2, 0), k)],
        home_nodes=[(1, 1)],
        drams=[_dram("m0", (0, 2), k), _dram("m1", (2, 2), k)],
        gateways=[],
    )
    cal, pw = _common(k)
    flows = [_flow(0, "d0", "c0", k), _flow(1, "d0", "c1", k)]
    return SystemSpec([die], [], cal, WorkloadSpec(flows, seed=1), pw)


def build_exp2(k: Constants) -> SystemSpec:
    ranges = _split_ranges([0, 1], 2, k)
    d0 = DieSpec(
        id="d0", mesh_cols=2, mesh_rows=3,
        clusters=[_cluster("c0", (0, 0), k)],
        home_nodes=[(0, 1)],
        drams=[_dram("m0", (0, 2), k)],
        gateways=[(1, 1)],
        mem_ranges=ranges[0],
    )
    d1 = DieSpec(
        id="d1", mesh_cols=2, mesh_rows=3,
        clusters=[_cluster("c0", (1, 0), k)],
        home_nodes=[(1, 1)],
        drams=[_dram("m0", (1, 2), k)],
        gateways=[(0, 1)],
        mem_ranges=ranges[1],
    )
    cal, pw = _common(k)
    flows = [_flow(0, "d0", "c0", k), _flow(1, "d1", "c0", k)]
    return SystemSpec([d0, d1], [_link("d0", (1, 1), "d1", (0, 1), k)], cal, WorkloadSpec(flows, seed=1), pw)


def build_exp3(k: Constants) -> SystemSpec:
    ranges = _split_ranges([0, 0, 1, 1], 2, k)
    d0 = DieSpec(
        id="d0", mesh_cols=3, mesh_rows=4,
        clusters=[_cluster("c0", (0, 1), k), _cluster("c1", (0, 2), k)],
        home_nodes=[(1, 1), (1, 2)],
        drams=[_dram("m0", (1, 0), k), _dram("m1", (1, 3), k)],
        gateways=[(2, 1)],
        mem_ranges=ranges[0],
    )
    d1 = DieSpec(
        id="d1", mesh_cols=3, mesh_rows=4,
        clusters=[_cluster("c0", (2, 1), k), _cluster("c1", (2, 2), k)],
        home_nodes=[(1, 1), (1, 2)],
        drams=[_dram("m0", (1, 0), k), _dram("m1", (1, 3), k)],
        gateways=[(0, 1)],
        mem_ranges=ranges[1],
    )
    cal, pw = _common(k)
    flows = [
        _flow(0, "d0", "c0", k),
        _flow(1, "d0", "c1", k),
        _flow(2, "d1", "c0", k),
        _flow(3, "d1", "c1", k),
    ]
    return SystemSpec([d0, d1], [_link("d0", (2, 1), "d1", (0, 1), k)], cal, WorkloadSpec(flows, seed=1), pw)


BUILDERS = {"exp1": build_exp1, "exp2": build_exp2, "exp3": build_exp3}


def build_preset(name: str, constants: Constants | None = None) -> SystemSpec:
    if name not in BUILDERS:
        raise ConfigError(f"unknown preset {name!r}; valid presets: {'|'.join(EXPERIMENTS)}")
    return BUILDERS[name](constants or Constants())


def preset_text(name: str) -> str:
    if name not in BUILDERS:
        raise ConfigError(f"unknown preset {name!r}; valid presets: {'|'.join(EXPERIMENTS)}")
    return resources.files("chiplet_sim").joinpath("presets", f"{name}.yaml").read_text(encoding="utf-8")


def preset(name: str) -> SystemSpec:
    """The shipped, calibrated preset ``name``."""
    return parse_config(preset_text(name))
