"""Stepped simulation of ant-driven job dispatch.

Each step runs, in this order:

1. spawn new ants (owner scheduler drawn uniformly);
2. every searching ant, by ascending id, picks a server and tries to take a
   slot; a successful take deposits one quantum on ``(owner, server)``;
3. every job whose service time has elapsed is released, deposits a second
   quantum on the same edge on the way back, and is killed;
4. all trails evaporate once.

Randomness comes from numpy's PCG64. The run seed feeds a ``SeedSequence``
whose first child drives spawning and second child drives server selection,
so every policy sees the same workload for the same seed.
"""

from __future__ import annotations

import enum
import json
from collections.abc import Iterable, Iterator
from dataclasses import asdict, dataclass, field, replace
from typing import IO, NamedTuple

import numpy as np

from .aco import AcoParams, PheromoneTable
from .cluster import (
    Ant,
    AntState,
    ClusterState,
    Outcome,
    candidate_set,
    kill,
    release,
    try_acquire,
)
from .policies import Policy, RoundRobinCursors, pick, select_server

__all__ = [
    "EventKind",
    "SimConfig",
    "Simulation",
    "TraceEvent",
    "read_trace",
    "run_simulation",
    "select_server",
    "spawn_ants",
    "write_trace",
]

TRACE_FIELDS = ("step", "kind", "ant", "scheduler", "server", "value")
VALUE_DECIMALS = 10


class EventKind(str, enum.Enum):
    SPAWN = "spawn"
    SELECT = "select"
    ACQUIRE = "acquire"
    REFUSE = "refuse"
    DEPOSIT = "deposit"
    EVAPORATE = "evaporate"
    RETURN = "return"
    KILL = "kill"
    FAIL = "fail"


class TraceEvent(NamedTuple):
    step: int
    kind: EventKind
    ant: int | None = None
    scheduler: int | None = None
    server: int | None = None
    value: float | None = None

    def as_record(self) -> dict:
        value = None if self.value is None else round(self.value, VALUE_DECIMALS)
        return {
            "step": self.step,
            "kind": self.kind.value,
            "ant": self.ant,
            "scheduler": self.scheduler,
            "server": self.server,
            "value": value,
        }

    @classmethod
    def from_record(cls, rec: dict) -> TraceEvent:
        return cls(
            rec["step"], EventKind(rec["kind"]), rec["ant"], rec["scheduler"], rec["server"], rec["value"]
        )


@dataclass(frozen=True)
class SimConfig:
    num_schedulers: int = 10
    num_servers: int = 44
    num_ants: int = 1000
    spawn_rate: int | None = None  # None: all ants at step 0
    aco: AcoParams = field(default_factory=AcoParams)
    capacity: int = 10
    service_time: int = 5
    service_time_max: int | None = None  # set for uniform service times in [service_time, max]
    max_retry_rounds: int = 10
    max_steps: int = 10_000
    seed: int = 0
    policy: Policy = Policy.ACO

    def __post_init__(self) -> None:
        object.__setattr__(self, "policy", Policy.parse(self.policy))
        for name in ("num_schedulers", "num_servers", "capacity", "service_time", "max_steps"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.num_ants < 0:
            raise ValueError(f"num_ants must be non-negative, got {self.num_ants}")
        if self.spawn_rate is not None and self.spawn_rate < 1:
            raise ValueError(f"spawn_rate must be positive, got {self.spawn_rate}")
        if self.service_time_max is not None and self.service_time_max < self.service_time:
            raise ValueError(
                f"service_time_max ({self.service_time_max}) below service_time ({self.service_time})"
            )
        if self.max_retry_rounds < 0:
            raise ValueError(f"max_retry_rounds must be non-negative, got {self.max_retry_rounds}")
        if self.max_steps < self.service_time:
            raise ValueError(f"max_steps ({self.max_steps}) below service_time ({self.service_time})")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    def with_(self, **changes) -> SimConfig:
        return replace(self, **changes)

    def as_flat_dict(self) -> dict:
        flat = {k: v for k, v in asdict(self).items() if k != "aco"}
        flat.update(asdict(self.aco))
        flat["policy"] = self.policy.value
        return flat


def make_rngs(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    spawn_seq, select_seq = np.random.SeedSequence(seed).spawn(2)
    return np.random.Generator(np.random.PCG64(spawn_seq)), np.random.Generator(np.random.PCG64(select_seq))


def spawn_ants(
    config: SimConfig, rng: np.random.Generator, now: int, count: int, first_id: int = 0
) -> list[Ant]:
    """Create ``count`` searching ants, each owned by a uniformly drawn scheduler."""
    owners = rng.integers(0, config.num_schedulers, size=count)
    if config.service_time_max is None:
        times = np.full(count, config.service_time)
    else:
        times = rng.integers(config.service_time, config.service_time_max + 1, size=count)
    return [
        Ant(id=first_id + k, owner=int(owners[k]), service_time=int(times[k]), spawned_at=now)
        for k in range(count)
    ]


class Simulation:
    """Mutable state of a single run; drive it with :meth:`step` or :meth:`run`."""

    def __init__(self, config: SimConfig):
        self.config = config
        self.spawn_rng, self.select_rng = make_rngs(config.seed)
        self.table = PheromoneTable(config.num_schedulers, config.num_servers, config.aco)
        self.cluster = ClusterState.build(config.num_schedulers, config.num_servers, config.capacity)
        self.cursors = RoundRobinCursors(config.num_schedulers, config.num_servers)
        self.trace: list[TraceEvent] = []
        self.spawned = 0
        self._searching: list[Ant] = []
        self._acquired: dict[int, Ant] = {}

    @property
    def now(self) -> int:
        return self.table.step

    @property
    def finished(self) -> bool:
        return self.spawned == self.config.num_ants and not self._searching and not self._acquired

    def _emit(self, kind: EventKind, ant: Ant | None = None, server=None, value=None) -> None:
        if ant is None:
            self.trace.append(TraceEvent(self.now, kind, None, None, server, value))
        else:
            self.trace.append(TraceEvent(self.now, kind, ant.id, ant.owner, server, value))

    def _spawn(self) -> None:
        remaining = self.config.num_ants - self.spawned
        if remaining <= 0:
            return
        count = remaining if self.config.spawn_rate is None else min(self.config.spawn_rate, remaining)
        for ant in spawn_ants(self.config, self.spawn_rng, self.now, count, first_id=self.spawned):
            self.cluster.ants[ant.id] = ant
            self.cluster.schedulers[ant.owner].pending.append(ant)
            self._searching.append(ant)
            self._emit(EventKind.SPAWN, ant)
        self.spawned += count

    def _search(self) -> None:
        cfg = self.config
        still_searching = []
        for ant in self._searching:
            if not candidate_set(ant, self.cluster):
                if ant.retry_rounds >= cfg.max_retry_rounds:
                    ant.state = AntState.FAILED
                    ant.finished_at = self.now
                    self.cluster.schedulers[ant.owner].pending.remove(ant)
                    self._emit(EventKind.FAIL, ant)
                    continue
                ant.tabu.clear()
                ant.retry_rounds += 1
            j, prob = pick(cfg.policy, ant, self.table, self.cluster, cfg.aco, self.select_rng, self.cursors)
            self._emit(EventKind.SELECT, ant, j, prob)
            if try_acquire(ant, self.cluster.servers[j], self.now) is Outcome.ACQUIRED:
                self._emit(EventKind.ACQUIRE, ant, j)
                self._emit(EventKind.DEPOSIT, ant, j, self.table.deposit(ant.owner, j))
                self.cluster.schedulers[ant.owner].pending.remove(ant)
                self._acquired[ant.id] = ant
            else:
                self._emit(EventKind.REFUSE, ant, j)
                still_searching.append(ant)
        self._searching = still_searching

    def _release(self) -> None:
        for ant_id in sorted(self._acquired):
            ant = self._acquired[ant_id]
            j = ant.server
            if self.cluster.servers[j].busy_until[ant.id] > self.now:
                continue
            release(ant, self.cluster, self.now)
            self._emit(EventKind.RETURN, ant, j)
            self._emit(EventKind.DEPOSIT, ant, j, self.table.deposit(ant.owner, j))
            kill(ant, self.now)
            self._emit(EventKind.KILL, ant, j)
            del self._acquired[ant_id]

    def step(self) -> list[TraceEvent]:
        """Advance one step and return the events it produced."""
        if self.now >= self.config.max_steps:
            raise RuntimeError(f"max_steps={self.config.max_steps} already reached")
        start = len(self.trace)
        self._spawn()
        self._search()
        self._release()
        self.table.evaporate()
        self._emit(EventKind.EVAPORATE, value=self.table.max_edge())
        self.table.step += 1
        return self.trace[start:]

    def run(self):
        from .metrics import collect_metrics

        while not self.finished and self.now < self.config.max_steps:
            self.step()
        return collect_metrics(self.trace, self.table, self.cluster, self.config)


def run_simulation(config: SimConfig):
    """Run ``config`` to completion; returns ``(report, trace, table)``."""
    sim = Simulation(config)
    report = sim.run()
    return report, sim.trace, sim.table


def write_trace(trace: Iterable[TraceEvent], fh: IO[str]) -> None:
    """One JSON object per line with keys ``step, kind, ant, scheduler, server, value``."""
    for ev in trace:
        fh.write(json.dumps(ev.as_record(), separators=(",", ":")))
        fh.write("\n")


def read_trace(fh: IO[str]) -> Iterator[TraceEvent]:
    for line in fh:
        if line.strip():
            yield TraceEvent.from_record(json.loads(line))
