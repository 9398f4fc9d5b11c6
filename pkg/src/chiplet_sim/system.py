"""Instantiate a SystemSpec as a graph of kernel components and run it."""

from __future__ import annotations

import copy
from collections import deque
from dataclasses import dataclass, field
from typing import Callable

from .cache import ClusterCaches, Complete, MemTransaction
from .config import Coord, ConfigError, SystemSpec, die_of_address, validate
from .interconnect import D2DLink, Mesh, MeshMessage, home_node_for, payload_bytes
from .kernel import Event, Kernel, SimulationError
from .memory import Dram, dram_target_for
from .power import EnergyLedger, PowerSample, power_series
from .workload import FlowLatencyRecord, MemAccess, flow_rng, gen_access_stream

Location = tuple[str, Coord]  # (die id, mesh coordinate)


class Core:
    """Blocking in-order core executing one flow's group stream."""

    def __init__(self, system: "SystemInstance", comp_id: str, die: str, cluster: str, index: int,
                 clock_period: int, flow, stream: list[tuple[int, MemAccess | None]]):
        self.system = system
        self.id = comp_id
        self.die = die
        self.cluster = cluster
        self.index = index
        self.clock_period = clock_period
        self.flow = flow
        self.stream = stream
        self.next_group = 0
        self.waiting: MemTransaction | None = None
        self.start = 0
        system.kernel.register(self)

    def handle(self, ev: Event) -> None:
        if ev.kind == "group":
            self._run_group(ev.time)
        elif ev.kind == "escalate":
            self.system.escalate(ev.data, ev.time)
        else:
            raise SimulationError(f"core got unexpected event {ev.kind!r}")

    def _run_group(self, t: int) -> None:
        sys_ = self.system
        if self.waiting is not None:
            raise SimulationError(f"{self.id} ran a group while blocked on memory")
        if self.next_group == len(self.stream):
            sys_.records.append(FlowLatencyRecord(self.flow.id, self.id, self.start, t))
            self.next_group += 1
            return
        _, access = self.stream[self.next_group]
        self.next_group += 1
        cluster_comp = f"{self.die}.{self.cluster}"
        if access is None:
            cycles = self.flow.compute_cycles_per_group
            sys_.energy(cluster_comp, "core_cycle", t, cycles)
            sys_.kernel.schedule(t + cycles * self.clock_period, self.id, "group")
            return
        txn = MemTransaction(
            id=sys_.new_txn_id(),
            origin=(self.die, self.cluster, self.index),
            addr=access.addr,
            is_read=access.is_read,
            bytes=access.bytes,
            issue_time=t,
            path=[self.id],
        )
        caches = sys_.caches[(self.die, self.cluster)]
        res = caches.lookup(txn, sys_.new_txn_id)
        probed = len(txn.path) - 1
        if isinstance(res, Complete):
            sys_.energy(cluster_comp, "cache_miss", t, probed - 1)
            sys_.energy(cluster_comp, f"{res.level[:2]}_hit", t, 1)
            txn.complete(t + res.total_latency)
            sys_.kernel.schedule(t + res.total_latency, self.id, "group")
            return
        sys_.energy(cluster_comp, "cache_miss", t, probed)
        self.waiting = txn
        sys_.issued += 1
        depart = t + res.accumulated_latency
        for wb in res.writebacks:
            wb.issue_time = depart
            sys_.issued += 1
        sys_.kernel.schedule(depart, self.id, "escalate", (txn, res.writebacks))

    def resume(self, txn: MemTransaction, t: int) -> None:
        if self.waiting is not txn:
            raise SimulationError(f"{self.id} got a response for a transaction it is not waiting on")
        self.waiting = None
        self.system.kernel.schedule(t, self.id, "group")


class HomeNode:
    """Serializes requests (one lookup per NoC cycle) and forwards them to DRAM."""

    def __init__(self, system: "SystemInstance", comp_id: str, die: str, coord: Coord, lookup: int):
        self.system = system
        self.id = comp_id
        self.die = die
        self.coord = coord
        self.lookup = lookup
        self.busy_until = 0
        self.stalled: deque[MemTransaction] = deque()
        self.waiting_on: Dram | None = None
        self.handled = 0
        self.stalls = 0
        system.kernel.register(self)

    def arrive(self, txn: MemTransaction, t: int) -> None:
        txn.path.append(self.id)
        start = max(t, self.busy_until)
        self.busy_until = start + self.lookup
        self.system.kernel.schedule(self.busy_until, self.id, "forward", txn)

    def handle(self, ev: Event) -> None:
        self.handled += 1
        self.stalled.append(ev.data)
        if self.waiting_on is None:
            self._drain(ev.time)

    def _drain(self, t: int) -> None:
        while self.stalled:
            txn = self.stalled[0]
            dram = self.system.dram_for(txn.addr, self.die)
            if not dram.try_reserve():
                self.stalls += 1
                self.waiting_on = dram
                dram.wait_for_slot(lambda: self._slot_freed())
                return
            self.stalled.popleft()
            self.system.to_dram(txn, self, dram, t)

    def _slot_freed(self) -> None:
        self.waiting_on = None
        self._drain(self.system.kernel.now())


@dataclass
class RunResult:
    records: list[FlowLatencyRecord]
    final_clock: int
    ledger: EnergyLedger
    summary: dict = field(default_factory=dict)
    trace: list[tuple[int, int, str]] | None = None

    def power(self) -> list[PowerSample]:
        return power_series(self.ledger, self.final_clock)


class SystemInstance:
    """Component graph for one SystemSpec bound to a fresh kernel."""

    def __init__(self, spec: SystemSpec, trace: bool = False):
        self.spec = spec
        self.kernel = Kernel(trace=trace)
        self.ledger = EnergyLedger(spec.power)
        cal = spec.calibration
        self.granularity = cal.interleave_granularity_bytes
        self.records: list[FlowLatencyRecord] = []
        self.issued = 0
        self.completed = 0
        self._txn_seq = 0
        self.caches: dict[tuple[str, str], ClusterCaches] = {}
        self.cluster_coord: dict[tuple[str, str], Coord] = {}
        self.meshes: dict[str, Mesh] = {}
        self.home_nodes: dict[str, list[HomeNode]] = {}
        self.drams: dict[str, list[Dram]] = {}
        self.dram_coord: dict[str, Coord] = {}
        self.links: list[D2DLink] = []
        self.cores: list[Core] = []
        self.core_by_origin: dict[tuple[str, str, int], Core] = {}
        self.completed_txns: list[MemTransaction] = []

        for die in spec.dies:
            for cl in die.clusters:
                self.caches[(die.id, cl.id)] = ClusterCaches(
                    die.id, cl.id, cl.cores, cl.clock_period, cl.l1i, cl.l1d, cl.l2, cl.l3
                )
                self.cluster_coord[(die.id, cl.id)] = cl.coord
                self.ledger.add_component(f"{die.id}.{cl.id}", "cluster")
            for m in die.drams:
                self.ledger.add_component(f"{die.id}.{m.id}", "dram")
            self.ledger.add_component(f"{die.id}.mesh", "mesh")
        for link in spec.d2d_links:
            self.ledger.add_component(link.id, "d2d")

        line = self._line_bytes()
        self.line_bytes = line
        for die in spec.dies:
            self.meshes[die.id] = Mesh(
                self.kernel, f"{die.id}.mesh", die.mesh_cols, die.mesh_rows,
                cal.noc_hop_latency_cycles, cal.noc_clock_period, cal.noc_flit_bytes, self.energy,
            )
            self.home_nodes[die.id] = [
                HomeNode(self, f"{die.id}.hn{i}", die.id, c, cal.noc_clock_period)
                for i, c in enumerate(die.home_nodes)
            ]
            self.drams[die.id] = []
            for m in die.drams:
                comp = f"{die.id}.{m.id}"
                self.drams[die.id].append(Dram(self.kernel, comp, m, line, self._dram_done, self.energy))
                self.dram_coord[comp] = m.coord
        for link in spec.d2d_links:
            self.links.append(D2DLink(self.kernel, link, self.energy))
        self._die_next_link = self._die_routes()

        wl = spec.workload
        for flow in wl.flows:
            die = spec.die(flow.die)
            cl = next(c for c in die.clusters if c.id == flow.cluster)
            stream = gen_access_stream(flow, flow_rng(wl.seed, flow.id), cl.l1d.line_bytes)
            core = Core(self, f"{die.id}.{cl.id}.core{flow.core}", die.id, cl.id, flow.core,
                        cl.clock_period, flow, stream)
            self.cores.append(core)
            self.core_by_origin[(die.id, cl.id, flow.core)] = core
            self.kernel.schedule(0, core.id, "group")

    def _line_bytes(self) -> int:
        for die in self.spec.dies:
            for cl in die.clusters:
                return cl.l1d.line_bytes
        return 64

    def _die_routes(self) -> dict[tuple[str, str], D2DLink]:
        """First link to take from die a toward die b (BFS, declaration order)."""
        adj: dict[str, list[tuple[str, D2DLink]]] = {d.id: [] for d in self.spec.dies}
        for link in self.links:
            a, b = link.ends[0][0], link.ends[1][0]
            adj[a].append((b, link))
            adj[b].append((a, link))
        routes = {}
        for src in adj:
            first: dict[str, D2DLink | None] = {src: None}
            q = deque([src])
            while q:
                cur = q.popleft()
                for nb, link in adj[cur]:
                    if nb not in first:
                        first[nb] = link if cur == src else first[cur]
                        q.append(nb)
            for dst, link in first.items():
                if link is not None:
                    routes[(src, dst)] = link
        return routes

    # -- plumbing ---------------------------------------------------------

    def energy(self, component: str, event_class: str, time: int, count: int = 1) -> None:
        if count:
            self.ledger.record(component, event_class, time, count)

    def new_txn_id(self) -> int:
        self._txn_seq += 1
        return self._txn_seq

    def home_die(self, addr: int) -> str:
        die = die_of_address(self.spec, addr)
        if die is None:
            raise SimulationError(f"address {addr:#x} is not served by any die")
        return die.id

    def dram_for(self, addr: int, die_id: str) -> Dram:
        mods = self.drams[die_id]
        return mods[dram_target_for(addr, len(mods), self.granularity)]

    def send(self, msg_class: str, src: Location, dst: Location, depart: int, txn: MemTransaction,
             on_arrival: Callable[[int], None]) -> None:
        """Move one message from ``src`` to ``dst``, crossing dies through gateways."""
        nbytes = payload_bytes(msg_class, self.line_bytes)
        src_die, src_coord = src
        dst_die, dst_coord = dst
        if src_die == dst_die:
            msg = MeshMessage(msg_class, nbytes, src_coord, dst_coord, txn)
            txn.path.append(f"{src_die}.mesh")
            self.meshes[src_die].send(msg, depart, lambda m, t: on_arrival(t))
            return
        link = self._die_next_link[(src_die, dst_die)]
        direction = link.direction_from(src_die)
        gateway = link.ends[direction][1]
        far_die, far_gateway = link.far_end(direction)

        def at_gateway(m: MeshMessage, t: int) -> None:
            txn.path.append(link.id)
            crossing = MeshMessage(msg_class, nbytes, gateway, far_gateway, txn)
            link.send(crossing, src_die, t, lambda m2, t2: self.send(msg_class, (far_die, far_gateway), dst, t2, txn, on_arrival))

        txn.path.append(f"{src_die}.mesh")
        self.meshes[src_die].send(MeshMessage(msg_class, nbytes, src_coord, gateway, txn), depart, at_gateway)

    # -- transaction lifecycle ------------------------------------------

    def escalate(self, data, t: int) -> None:
        txn, writebacks = data
        for w in [txn] + list(writebacks):
            self._to_home(w, t)

    def _to_home(self, txn: MemTransaction, t: int) -> None:
        die, cluster, _ = txn.origin
        hdie = self.home_die(txn.addr)
        hn = home_node_for_component(self.home_nodes[hdie], txn.addr, self.granularity)
        cls = "WB" if txn.kind == "writeback" else "REQ"
        self.send(cls, (die, self.cluster_coord[(die, cluster)]), (hdie, hn.coord), t, txn,
                  lambda ta: hn.arrive(txn, ta))

    def to_dram(self, txn: MemTransaction, hn: HomeNode, dram: Dram, t: int) -> None:
        cls = "WB" if txn.kind == "writeback" else "REQ"
        self.send(cls, (hn.die, hn.coord), (hn.die, self.dram_coord[dram.id]), t, txn,
                  lambda ta: self._dram_arrive(dram, txn, ta))

    def _dram_arrive(self, dram: Dram, txn: MemTransaction, t: int) -> None:
        txn.path.append(dram.id)
        dram.arrive(txn, t)

    def _dram_done(self, txn: MemTransaction, t: int) -> None:
        if txn.kind == "writeback":
            txn.complete(t)
            self._finish(txn)
            return
        dram_die = self.home_die(txn.addr)
        dram = self.dram_for(txn.addr, dram_die)
        die, cluster, _ = txn.origin
        self.send("DAT_RSP", (dram_die, self.dram_coord[dram.id]), (die, self.cluster_coord[(die, cluster)]),
                  t, txn, lambda ta: self._response(txn, ta))

    def _response(self, txn: MemTransaction, t: int) -> None:
        txn.complete(t)
        self._finish(txn)
        die, cluster, core = txn.origin
        c = self.core_by_origin.get((die, cluster, core))
        if c is None:
            raise SimulationError(f"response for unknown core {txn.origin}")
        c.resume(txn, t)

    def _finish(self, txn: MemTransaction) -> None:
        self.completed += 1
        self.completed_txns.append(txn)

    # -- running ----------------------------------------------------------

    def run(self, until: int | None = None) -> RunResult:
        stats = self.kernel.run_until(until)
        drained = self.kernel.pending() == 0
        if drained:
            self.check_invariants()
        return RunResult(
            records=sorted(self.records, key=lambda r: r.flow_id),
            final_clock=stats.clock,
            ledger=self.ledger,
            summary=self.summary(stats.events, stats.clock, drained),
            trace=self.kernel.trace,
        )

    def check_invariants(self) -> None:
        if self.issued != self.completed:
            raise SimulationError(f"{self.issued} transactions issued but {self.completed} completed")
        for mesh in self.meshes.values():
            mesh.check_link_capacity()
            if mesh.injected != mesh.delivered:
                raise SimulationError(f"{mesh.id}: {mesh.injected} messages injected, {mesh.delivered} delivered")
        for link in self.links:
            if link.injected != link.delivered:
                raise SimulationError(f"{link.id}: {link.injected} messages injected, {link.delivered} delivered")
        if len(self.records) != len(self.cores):
            raise SimulationError("a flow did not complete")
        if sum(e for *_, e in self.ledger.log) != self.ledger.total_energy():
            raise SimulationError("energy log and accumulators disagree")

    def summary(self, events: int, clock: int, drained: bool) -> dict:
        return {
            "events": events,
            "final_clock_ps": clock,
            "drained": drained,
            "transactions_issued": self.issued,
            "transactions_completed": self.completed,
            "messages": {
                **{m.id: {"injected": m.injected, "delivered": m.delivered, "flit_hops": m.flit_hops}
                   for m in self.meshes.values()},
                **{l.id: {"injected": l.injected, "delivered": l.delivered, "bytes": l.bytes_moved}
                   for l in self.links},
            },
            "caches": {f"{d}.{c}": cc.stats() for (d, c), cc in self.caches.items()},
            "drams": {
                m.id: {"served": m.state.served, "busy_ps": m.state.busy_time, "max_queue": m.state.max_depth}
                for mods in self.drams.values() for m in mods
            },
            "energy_pj": dict(self.ledger.cumulative),
        }


def home_node_for_component(nodes: list[HomeNode], addr: int, granularity: int) -> HomeNode:
    coord = home_node_for(addr, [n.coord for n in nodes], granularity)
    return next(n for n in nodes if n.coord == coord)


def build_system(spec: SystemSpec, trace: bool = False) -> SystemInstance:
    diags = validate(spec)
    if diags:
        raise ConfigError("cannot build an invalid system: " + "; ".join(str(d) for d in diags), diags)
    return SystemInstance(spec, trace=trace)


def simulate(spec: SystemSpec, seed: int | None = None, until: int | None = None,
             trace: bool = False) -> RunResult:
    if seed is not None:
        spec = copy.deepcopy(spec)
        spec.workload.seed = seed
    return build_system(spec, trace=trace).run(until)
