"""Schedulers, capacity-bounded web servers and the jobs (ants) moving between them."""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field

import numpy as np


class ContractError(RuntimeError):
    """An operation was called on an ant or server in the wrong state."""


class AntState(enum.Enum):
    SEARCHING = "searching"
    ACQUIRED = "acquired"
    RETURNING = "returning"
    DEAD = "dead"
    FAILED = "failed"


class Outcome(enum.Enum):
    ACQUIRED = "acquired"
    REFUSED = "refused"


@dataclass
class Ant:
    id: int
    owner: int
    service_time: int
    spawned_at: int = 0
    state: AntState = AntState.SEARCHING
    server: int | None = None
    tabu: set[int] = field(default_factory=set)
    retry_rounds: int = 0
    finished_at: int | None = None

    @property
    def live(self) -> bool:
        return self.state in (AntState.SEARCHING, AntState.ACQUIRED, AntState.RETURNING)


@dataclass
class WebServer:
    id: int
    capacity: int
    busy_until: dict[int, int] = field(default_factory=dict)

    @property
    def load(self) -> int:
        return len(self.busy_until)

    @property
    def full(self) -> bool:
        return len(self.busy_until) >= self.capacity


@dataclass
class JobScheduler:
    id: int
    pending: deque[Ant] = field(default_factory=deque)
    completed_count: int = 0


@dataclass
class ClusterState:
    servers: list[WebServer]
    schedulers: list[JobScheduler]
    ants: dict[int, Ant] = field(default_factory=dict)

    @classmethod
    def build(cls, num_schedulers: int, num_servers: int, capacity: int) -> ClusterState:
        if capacity < 1:
            raise ValueError(f"capacity must be positive, got {capacity}")
        return cls(
            servers=[WebServer(j, capacity) for j in range(num_servers)],
            schedulers=[JobScheduler(i) for i in range(num_schedulers)],
        )

    @property
    def num_servers(self) -> int:
        return len(self.servers)

    def loads(self) -> np.ndarray:
        return np.array([s.load for s in self.servers], dtype=np.int64)

    def live_ants(self) -> list[Ant]:
        return [a for a in self.ants.values() if a.live]


def heuristic_values(cluster: ClusterState) -> np.ndarray:
    """Load-inverse desirability ``1 / (1 + load)`` for every server."""
    return 1.0 / (1.0 + cluster.loads())


def candidate_set(ant: Ant, cluster: ClusterState) -> set[int]:
    return {j for j in range(cluster.num_servers) if j not in ant.tabu}


def try_acquire(ant: Ant, server: WebServer, now: int) -> Outcome:
    if ant.state is not AntState.SEARCHING:
        raise ContractError(f"ant {ant.id} is {ant.state.value}, cannot acquire")
    if server.id in ant.tabu:
        raise ContractError(f"server {server.id} is in the tabu set of ant {ant.id}")
    if server.full:
        ant.tabu.add(server.id)
        return Outcome.REFUSED
    server.busy_until[ant.id] = now + ant.service_time
    ant.state = AntState.ACQUIRED
    ant.server = server.id
    return Outcome.ACQUIRED


def release(ant: Ant, cluster: ClusterState, now: int) -> ClusterState:
    """Free the ant's slot and send it back to its scheduler.

    The ant is left ``RETURNING``; the engine deposits the return trail and
    then calls :func:`kill`.
    """
    if ant.state is not AntState.ACQUIRED or ant.server is None:
        raise ContractError(f"ant {ant.id} is {ant.state.value}, nothing to release")
    server = cluster.servers[ant.server]
    due = server.busy_until.get(ant.id)
    if due is None:
        raise ContractError(f"server {ant.server} holds no job for ant {ant.id}")
    if due > now:
        raise ContractError(f"ant {ant.id} busy until step {due}, released at {now}")
    del server.busy_until[ant.id]
    ant.state = AntState.RETURNING
    cluster.schedulers[ant.owner].completed_count += 1
    return cluster


def kill(ant: Ant, now: int) -> None:
    if ant.state is not AntState.RETURNING:
        raise ContractError(f"ant {ant.id} is {ant.state.value}, cannot be killed")
    ant.state = AntState.DEAD
    ant.finished_at = now
