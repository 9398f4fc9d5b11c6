import textwrap

import pytest

from chiplet_sim.config import parse_config
from chiplet_sim.kernel import SimulationError
from chiplet_sim.presets import preset
from chiplet_sim.system import build_system, simulate

from conftest import micro_spec_text

# default constants, all in picoseconds
PROBES = (2 + 10 + 30) * 500
HOP = 2 * 1000
NOC = 1000
DRAM = 50_000 + 64 * 1000 // 16


def two_die_text(remote: bool) -> str:
    near, far = ("[1048576, 1048576]", "[0, 1048576]") if remote else ("[0, 1048576]", "[1048576, 1048576]")
    return textwrap.dedent(f"""
    dies:
      - id: d0
        mesh_cols: 2
        mesh_rows: 3
        clusters: [{{id: c0, coord: [0, 0]}}]
        home_nodes: [[0, 1]]
        drams: [{{id: m0, coord: [0, 2]}}]
        gateways: [[1, 1]]
        mem_ranges: [{near}]
      - id: d1
        mesh_cols: 2
        mesh_rows: 3
        clusters: [{{id: c0, coord: [1, 0]}}]
        home_nodes: [[1, 1]]
        drams: [{{id: m0, coord: [1, 2]}}]
        gateways: [[0, 1]]
        mem_ranges: [{far}]
    d2d_links:
      - id: ucie0
        endpoints: [{{die: d0, gateway: [1, 1]}}, {{die: d1, gateway: [0, 1]}}]
    workload:
      flows:
        - id: 0
          die: d0
          cluster: c0
          core: 0
          n_groups: 1
          mem_ratio: 1.0
          read_fraction: 1.0
          address_pattern: {{kind: strided, stride_bytes: 64, footprint_bytes: 4096, base: 0}}
    """)


def test_compute_group_advances_by_cycles():
    res = simulate(parse_config(micro_spec_text(n_groups=1, mem_ratio=0.0, compute=10)))
    assert res.records[0].latency == 10 * 500


def test_two_read_micro_config_to_the_tick():
    per_read = PROBES + HOP + NOC + HOP + DRAM + (2 * HOP + 2 * NOC)
    assert per_read == 86_000
    res = simulate(parse_config(micro_spec_text()))
    assert res.records[0].latency == 2 * per_read


def test_core_blocks_until_response():
    inst = build_system(parse_config(micro_spec_text()))
    inst.run()
    first, second = sorted(inst.completed_txns, key=lambda t: t.id)
    assert second.issue_time == first.completion_time


def test_remote_read_timing_and_path():
    local = simulate(parse_config(two_die_text(remote=False))).records[0].latency
    inst = build_system(parse_config(two_die_text(remote=True)))
    remote = inst.run().records[0].latency
    assert local == PROBES + HOP + NOC + HOP + DRAM + 2 * HOP + 2 * NOC
    req_d2d = 10_000 + 16 * 1000 // 32
    dat_d2d = 10_000 + 80 * 1000 // 32
    assert remote == (PROBES + 2 * HOP + req_d2d + HOP + NOC + HOP + DRAM
                      + (2 * HOP + 2 * NOC) + dat_d2d + (2 * HOP + 2 * NOC))
    assert remote > local
    (txn,) = inst.completed_txns
    assert txn.path == ["d0.c0.core0", "d0.c0.l1d.0", "d0.c0.l2", "d0.c0.l3",
                        "d0.mesh", "ucie0", "d1.mesh", "d1.hn0", "d1.mesh", "d1.m0",
                        "d1.mesh", "ucie0", "d0.mesh"]


def test_dram_backpressure_reaches_home_node():
    # same-set stores: every miss after warm-up evicts a dirty line, so a
    # write-back and a read reach the single-slot DRAM together
    text = micro_spec_text(n_groups=40, mem_ratio=1.0, read_fraction=0.0, stride=32768)
    text = text.replace("bandwidth_bytes_per_ns: 16", "bandwidth_bytes_per_ns: 16\n        queue_capacity: 1")
    inst = build_system(parse_config(text))
    res = inst.run()
    assert res.summary["transactions_issued"] == res.summary["transactions_completed"]
    assert res.summary["drams"]["d0.m0"]["max_queue"] == 1
    assert inst.home_nodes["d0"][0].stalls > 0


def test_until_stops_early_without_invariant_check():
    res = simulate(preset("exp1"), until=1_000_000)
    assert res.final_clock == 1_000_000 and not res.summary["drained"]


@pytest.mark.parametrize("name", ["exp1", "exp2", "exp3"])
def test_presets_drain_and_conserve(name):
    res = simulate(preset(name))
    s = res.summary
    assert s["drained"] and s["transactions_issued"] == s["transactions_completed"] > 0
    for comp in s["messages"].values():
        assert comp["injected"] == comp["delivered"]


def test_exp2_uses_the_link_and_exp1_has_none():
    s2 = simulate(preset("exp2")).summary["messages"]
    assert s2["ucie0"]["bytes"] > 0
    assert "ucie0" not in simulate(preset("exp1")).summary["messages"]


def test_invariant_violation_is_reported():
    inst = build_system(parse_config(micro_spec_text()))
    inst.run()
    inst.issued += 1
    with pytest.raises(SimulationError):
        inst.check_invariants()
