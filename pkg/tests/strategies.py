"""Hypothesis strategies for random SystemSpecs (some deliberately invalid)."""

from fractions import Fraction

from hypothesis import strategies as st

from chiplet_sim.config import (
    AddressPattern, CacheSpec, CalibrationSpec, ClusterSpec, D2DLinkSpec, DieSpec, DramSpec, Endpoint,
    FlowSpec, PowerSpec, SystemSpec, WorkloadSpec,
)

MIB = 1 << 20


@st.composite
def caches(draw):
    line = 64
    l1 = 1 << draw(st.integers(10, 13))
    l2 = l1 << draw(st.integers(1, 3))
    l3 = l2 << draw(st.integers(1, 2))
    ways = [1 << draw(st.integers(0, 2)) for _ in range(3)]
    lat = sorted(draw(st.lists(st.integers(1, 40), min_size=3, max_size=3, unique=True)))
    l1c = CacheSpec(l1, line, ways[0], lat[0])
    return l1c, l1c, CacheSpec(l2, line, ways[1], lat[1]), CacheSpec(l3, line, ways[2], lat[2])


@st.composite
def dies(draw, idx, slack):
    cols, rows = draw(st.integers(3, 4)), draw(st.integers(3, 4))
    cells = [(x, y) for x in range(cols + slack) for y in range(rows)]
    n_cl = draw(st.integers(1, 2))
    n_hn = draw(st.integers(1, 2))
    n_m = draw(st.integers(1, 2))
    need = n_cl + n_hn + n_m + 1
    picks = draw(st.lists(st.sampled_from(cells), min_size=need, max_size=need,
                          unique=not draw(st.booleans()) if slack else True))
    l1i, l1d, l2, l3 = draw(caches())
    clusters = [ClusterSpec(f"c{i}", picks[i], cores=draw(st.integers(1, 2)),
                            clock_period=draw(st.sampled_from([250, 500, 1000])),
                            l1i=l1i, l1d=l1d, l2=l2, l3=l3) for i in range(n_cl)]
    hns = picks[n_cl:n_cl + n_hn]
    drams = [DramSpec(f"m{i}", picks[n_cl + n_hn + i],
                      access_latency=draw(st.integers(1_000, 100_000)),
                      bandwidth_bytes_per_ns=Fraction(draw(st.integers(1, 64)), draw(st.integers(1, 3))),
                      queue_capacity=draw(st.integers(1, 8))) for i in range(n_m)]
    return DieSpec(f"d{idx}", cols, rows, clusters, hns, drams, [picks[-1]], [(idx * MIB, MIB)])


@st.composite
def system_specs(draw, slack=0):
    n = draw(st.integers(1, 2))
    ds = [draw(dies(i, slack)) for i in range(n)]
    links = []
    if n == 2:
        links.append(D2DLinkSpec("l0", (Endpoint("d0", ds[0].gateways[0]), Endpoint("d1", ds[1].gateways[0])),
                                 bandwidth_bytes_per_ns=Fraction(draw(st.integers(1, 64))),
                                 adapter_latency=draw(st.integers(0, 20_000)),
                                 flit_bytes=draw(st.sampled_from([8, 16, 32]))))
    else:
        ds[0].gateways = []
    flows = []
    fid = 0
    for d in ds:
        for c in d.clusters:
            for core in range(c.cores):
                if draw(st.booleans()):
                    continue
                kind = draw(st.sampled_from(["strided", "uniform"]))
                home = draw(st.integers(0, n - 1))
                flows.append(FlowSpec(
                    fid, d.id, c.id, core,
                    AddressPattern(kind, 64 * draw(st.integers(1, 64)), base=home * MIB,
                                   stride_bytes=64 * draw(st.integers(1, 8)) if kind == "strided" else None),
                    n_groups=draw(st.integers(1, 12)),
                    compute_cycles_per_group=draw(st.integers(0, 16)),
                    mem_ratio=draw(st.sampled_from([0.0, 0.25, 0.5, 1.0])),
                    read_fraction=draw(st.sampled_from([0.0, 0.5, 1.0])),
                ))
                fid += 1
    cal = CalibrationSpec(draw(st.integers(1, 4)), draw(st.sampled_from([500, 1000])),
                          draw(st.sampled_from([16, 32])), draw(st.sampled_from([64, 4096])))
    power = PowerSpec(window=draw(st.sampled_from([10_000, 100_000])))
    return SystemSpec(ds, links, cal, WorkloadSpec(flows, seed=draw(st.integers(0, 2**64 - 1))), power)
