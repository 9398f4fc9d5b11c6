"""Timing-level cache hierarchy.

Each level is a set-associative, LRU, write-back, write-allocate cache that
tracks tags and dirty bits only. A cluster owns per-core L1I/L1D, one L2 and
one L3 slice shared by its cores; levels are probed serially and their hit
latencies add up.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass, field

from .config import CacheSpec


@dataclass(frozen=True)
class Hit:
    latency: int


@dataclass(frozen=True)
class Miss:
    evicted: int | None = None  # line address of a dirty victim


@dataclass
class MemTransaction:
    id: int
    origin: tuple[str, str, int]  # (die, cluster, core)
    addr: int
    is_read: bool
    bytes: int
    issue_time: int
    kind: str = "access"  # "access" gets a response, "writeback" does not
    completion_time: int | None = None
    path: list[str] = field(default_factory=list)

    def complete(self, time: int) -> None:
        if time < self.issue_time:
            raise ValueError("completion before issue")
        self.completion_time = time


class CacheState:
    """One cache level: per-set LRU tag lists with dirty bits."""

    def __init__(self, spec: CacheSpec, clock_period: int = 1, name: str = ""):
        self.spec = spec
        self.name = name
        self.clock_period = clock_period
        self.line_bytes = spec.line_bytes
        self.n_sets = spec.capacity_bytes // (spec.line_bytes * spec.associativity)
        self.ways = spec.associativity
        # set index -> OrderedDict(tag -> dirty), least recent first
        self.sets: list[OrderedDict[int, bool]] = [OrderedDict() for _ in range(self.n_sets)]
        self.hits = 0
        self.misses = 0
        self.hit_latency = spec.hit_latency_cycles * clock_period
        self._hit = Hit(self.hit_latency)

    def _locate(self, addr: int) -> tuple[int, int]:
        line = addr // self.line_bytes
        return line % self.n_sets, line // self.n_sets

    def contains(self, addr: int) -> bool:
        s, tag = self._locate(addr)
        return tag in self.sets[s]

    def access(self, addr: int, is_read: bool) -> Hit | Miss:
        line = addr // self.line_bytes
        s = line % self.n_sets
        tag = line // self.n_sets
        ways = self.sets[s]
        if tag in ways:
            ways.move_to_end(tag)
            if not is_read:
                ways[tag] = True
            self.hits += 1
            return self._hit
        self.misses += 1
        victim = ways.popitem(last=False) if len(ways) >= self.ways else None
        ways[tag] = not is_read
        if victim is not None and victim[1]:
            return Miss((victim[0] * self.n_sets + s) * self.line_bytes)
        return CLEAN_MISS


CLEAN_MISS = Miss()


def cache_access(level: CacheState, addr: int, is_read: bool) -> Hit | Miss:
    return level.access(addr, is_read)


@dataclass(frozen=True)
class Complete:
    total_latency: int
    level: str


@dataclass(frozen=True)
class EscalateToMesh:
    txn: MemTransaction
    accumulated_latency: int
    writebacks: list[MemTransaction]


class ClusterCaches:
    """Cache hierarchy of one cluster."""

    def __init__(self, die_id: str, cluster_id: str, cores: int, clock_period: int,
                 l1i: CacheSpec, l1d: CacheSpec, l2: CacheSpec, l3: CacheSpec):
        self.die_id = die_id
        self.cluster_id = cluster_id
        self.l1i = [CacheState(l1i, clock_period, "l1i") for _ in range(cores)]
        self.l1d = [CacheState(l1d, clock_period, "l1d") for _ in range(cores)]
        self.l2 = CacheState(l2, clock_period, "l2")
        self.l3 = CacheState(l3, clock_period, "l3")
        self.line_bytes = l1d.line_bytes
        self._levels = [[self.l1d[c], self.l2, self.l3] for c in range(cores)]
        # per core: (level, path name, result of a hit there); the total
        # latency of a hit at a given depth is fixed, so results are reused
        self._probe = []
        self._miss_latency = []
        for c, levels in enumerate(self._levels):
            names = [f"{die_id}.{cluster_id}.l1d.{c}", f"{die_id}.{cluster_id}.l2", f"{die_id}.{cluster_id}.l3"]
            acc, probe = 0, []
            for lvl, name in zip(levels, names):
                acc += lvl.hit_latency
                probe.append((lvl, name, Complete(acc, lvl.name)))
            self._probe.append(probe)
            self._miss_latency.append(acc)

    def levels_for(self, core: int) -> list[CacheState]:
        return self._levels[core]

    def lookup(self, txn: MemTransaction, next_txn_id) -> Complete | EscalateToMesh:
        """Probe L1D, L2, L3 in order.

        Every probed level allocates the line on a miss, so a response fill is
        already reflected in the tags. Only the L1 sees the store; deeper
        levels are filled clean. Dirty victims become write-back transactions.
        ``next_txn_id`` is called to mint ids for them.
        """
        core = txn.origin[2]
        append = txn.path.append
        addr = txn.addr
        is_read = txn.is_read
        writebacks: list[MemTransaction] = []
        for level, name, done in self._probe[core]:
            append(name)
            res = level.access(addr, is_read)
            if res is level._hit:
                return done
            is_read = True  # deeper levels fill clean
            if res.evicted is not None:
                writebacks.append(
                    MemTransaction(
                        id=next_txn_id(),
                        origin=txn.origin,
                        addr=res.evicted,
                        is_read=False,
                        bytes=self.line_bytes,
                        issue_time=txn.issue_time,
                        kind="writeback",
                        path=[name],
                    )
                )
        return EscalateToMesh(txn, self._miss_latency[core], writebacks)

    def stats(self) -> dict[str, dict[str, int]]:
        return {
            "l1i": {"hits": sum(c.hits for c in self.l1i), "misses": sum(c.misses for c in self.l1i)},
            "l1d": {"hits": sum(c.hits for c in self.l1d), "misses": sum(c.misses for c in self.l1d)},
            "l2": {"hits": self.l2.hits, "misses": self.l2.misses},
            "l3": {"hits": self.l3.hits, "misses": self.l3.misses},
        }
