import random
from collections import deque
from fractions import Fraction

import pytest

from chiplet_sim.config import D2DLinkSpec, Endpoint
from chiplet_sim.interconnect import D2DLink, Mesh, MeshMessage, home_node_for, payload_bytes, xy_route
from chiplet_sim.kernel import Kernel


def bfs_distance(src, dst, cols, rows):
    dist = {src: 0}
    q = deque([src])
    while q:
        x, y = q.popleft()
        for n in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
            if 0 <= n[0] < cols and 0 <= n[1] < rows and n not in dist:
                dist[n] = dist[(x, y)] + 1
                q.append(n)
    return dist[dst]


def test_identity_route_is_empty():
    assert xy_route((0, 0), (0, 0), 3, 3) == []


def test_x_then_y():
    assert xy_route((0, 0), (2, 1), 3, 2) == [((0, 0), (1, 0)), ((1, 0), (2, 0)), ((2, 0), (2, 1))]


def test_out_of_bounds_is_an_error():
    with pytest.raises(ValueError):
        xy_route((0, 0), (3, 0), 3, 3)


def test_route_hops_are_adjacent_and_connected():
    path = xy_route((3, 0), (0, 2), 4, 3)
    assert path[0][0] == (3, 0) and path[-1][1] == (0, 2)
    for (a, b), (c, _) in zip(path, path[1:]):
        assert b == c
    assert all(abs(a[0] - b[0]) + abs(a[1] - b[1]) == 1 for a, b in path)


def test_xy_length_matches_bfs_on_4x4():
    nodes = [(x, y) for x in range(4) for y in range(4)]
    for s in nodes:
        for d in nodes:
            assert len(xy_route(s, d, 4, 4)) == bfs_distance(s, d, 4, 4)


def test_single_home_node():
    assert all(home_node_for(a, [(1, 1)], 4096) == (1, 1) for a in range(0, 1 << 20, 4096 - 64))


def test_home_interleave():
    homes = [(0, 0), (1, 0)]
    assert [home_node_for(a, homes, 4096) for a in (0, 4096, 8192)] == [(0, 0), (1, 0), (0, 0)]


def test_home_interleave_is_balanced():
    homes = [(0, 0), (1, 0), (2, 0), (3, 0)]
    rng = random.Random(42)
    counts = dict.fromkeys(homes, 0)
    n = 1_000_000
    for _ in range(n):
        counts[home_node_for(rng.randrange(1 << 40), homes, 4096)] += 1
    assert all(abs(c / n - 0.25) <= 0.01 for c in counts.values())


def make_mesh(cols=4, rows=4):
    k = Kernel()
    return k, Mesh(k, "mesh", cols, rows, hop_cycles=2, clock_period=1000, flit_bytes=32)


def test_local_delivery_costs_one_cycle():
    k, mesh = make_mesh()
    got = []
    mesh.send(MeshMessage("REQ", 16, (1, 1), (1, 1)), 500, lambda m, t: got.append(t))
    k.run_until()
    assert got == [1500]


def test_three_hop_line_transfer():
    k, mesh = make_mesh()
    got = []
    assert payload_bytes("DAT_RSP", 64) == 80
    mesh.send(MeshMessage("DAT_RSP", 80, (0, 0), (3, 0)), 1000, lambda m, t: got.append(t))
    k.run_until()
    assert got == [1000 + 3 * 2000 + (3 - 1) * 1000]


def test_same_cycle_contention_adds_one_cycle():
    k, mesh = make_mesh()
    got = []
    for tag in "ab":
        mesh.send(MeshMessage("REQ", 16, (0, 0), (1, 0)), 0, lambda m, t, tag=tag: got.append((tag, t)))
    k.run_until()
    assert got == [("a", 2000), ("b", 3000)]
    mesh.check_link_capacity()


def link(bw=32, flit=16):
    k = Kernel()
    spec = D2DLinkSpec("l", (Endpoint("d0", (1, 1)), Endpoint("d1", (0, 1))),
                       bandwidth_bytes_per_ns=Fraction(bw), adapter_latency=10_000, flit_bytes=flit)
    return k, D2DLink(k, spec)


def test_d2d_transfer():
    _, l = link()
    assert l.transfer_time(80, 0, 0) == 12_500


def test_d2d_zero_byte_probe():
    _, l = link()
    assert l.transfer_time(0, 700, 0) == 700 + 10_000


def test_d2d_back_to_back():
    _, l = link()
    a = l.transfer_time(80, 0, 0)
    b = l.transfer_time(80, 0, 0)
    assert b - a == 2_500


def test_d2d_directions_are_independent():
    _, l = link()
    assert l.transfer_time(80, 0, 0) == l.transfer_time(80, 0, 1) == 12_500


def test_d2d_pads_to_flits():
    _, l = link(flit=64)
    assert l.wire_bytes(80) == 128
    assert l.transfer_time(80, 0, 0) == 10_000 + 4_000


def test_d2d_send_delivers_through_kernel():
    k, l = link()
    got = []
    l.send(MeshMessage("DAT_RSP", 80, (1, 1), (0, 1)), "d1", 100, lambda m, t: got.append(t))
    k.run_until()
    assert got == [12_600]
    assert l.bytes_moved == 80 and l.delivered == 1
