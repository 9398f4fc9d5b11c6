import textwrap

import pytest

from chiplet_sim.config import parse_config

MINIMAL = """
dies:
  - id: d0
    clusters:
      - id: c0
    home_nodes: [null]
    drams:
      - id: m0
"""


def micro_spec_text(n_groups=2, mem_ratio=1.0, read_fraction=1.0, stride=4096, compute=8, extra_die=""):
    """One die laid out as a 3x1 row: cluster, home node, DRAM."""
    return textwrap.dedent(f"""
    dies:
      - id: d0
        mesh_cols: 3
        mesh_rows: 1
        clusters:
          - id: c0
            coord: [0, 0]
        home_nodes: [[1, 0]]
        drams:
          - id: m0
            coord: [2, 0]
            access_latency: 50000
            bandwidth_bytes_per_ns: 16
    workload:
      seed: 3
      flows:
        - id: 0
          die: d0
          cluster: c0
          core: 0
          n_groups: {n_groups}
          compute_cycles_per_group: {compute}
          mem_ratio: {mem_ratio}
          read_fraction: {read_fraction}
          address_pattern: {{kind: strided, stride_bytes: {stride}, footprint_bytes: 1048576, base: 0}}
    """)


@pytest.fixture
def minimal_spec():
    return parse_config(MINIMAL)


@pytest.fixture
def micro_spec():
    return parse_config(micro_spec_text())


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")
    config._criteria = {}


def pytest_runtest_logreport(report):
    crit = getattr(report, "criterion", None)
    if crit is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        report.config_ref._criteria[crit] = report.outcome


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        rep.criterion = mark.args
        rep.config_ref = item.config


def pytest_terminal_summary(terminalreporter, config):
    crits = getattr(config, "_criteria", {})
    if not crits:
        return
    terminalreporter.section("acceptance criteria")
    for (n, title), outcome in sorted(crits.items()):
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if outcome == 'passed' else 'FAIL'}  {title}")
