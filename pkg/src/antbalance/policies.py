"""Server selection: the pheromone rule plus three non-ACO baselines.

Every policy only ever returns a server outside the ant's tabu set, and
every policy raises :class:`NoCandidates` when that set covers all servers,
so the engine can reset the tabu memory the same way for all of them.
"""

from __future__ import annotations

import enum

import numpy as np

from .aco import AcoParams, PheromoneTable, transition_probabilities
from .cluster import Ant, ClusterState, candidate_set, heuristic_values


class NoCandidates(LookupError):
    """Every server is in the ant's tabu set."""


class Policy(str, enum.Enum):
    ACO = "aco"
    RANDOM = "random"
    ROUND_ROBIN = "round_robin"
    LEAST_LOADED = "least_loaded"

    @classmethod
    def parse(cls, value: str | Policy) -> Policy:
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_")
        aliases = {"roundrobin": "round_robin", "leastloaded": "least_loaded", "rr": "round_robin"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            choices = ", ".join(p.value for p in cls)
            raise ValueError(f"unknown policy {value!r}; expected one of {choices}") from None


def roulette(probs: np.ndarray, u: float) -> int:
    """Index of the cumulative bin containing ``u`` in ``[0, 1)``.

    Bins are half-open, ``[c_{k-1}, c_k)``, so zero-mass entries are never hit.
    """
    cum = np.cumsum(probs)
    total = cum[-1]
    k = int(np.searchsorted(cum, u * total, side="right"))
    if k >= len(probs):
        # u * total landed on the float tail of the last bin
        k = int(np.flatnonzero(probs > 0)[-1])
    return k


def select_server(
    ant: Ant,
    table: PheromoneTable,
    cluster: ClusterState,
    params: AcoParams,
    rng: np.random.Generator,
) -> tuple[int, float]:
    """Sample a server for ``ant`` from its owner's pheromone row.

    Consumes exactly one uniform draw. Returns the server and the probability
    it was sampled with.
    """
    cands = candidate_set(ant, cluster)
    if not cands:
        raise NoCandidates(f"ant {ant.id} has tried every server")
    probs = transition_probabilities(table.tau[ant.owner], heuristic_values(cluster), params, cands)
    j = roulette(probs, rng.random())
    return j, float(probs[j])


class RoundRobinCursors:
    """One wrap-around cursor per scheduler."""

    def __init__(self, num_schedulers: int, num_servers: int):
        self.num_servers = num_servers
        self.cursor = [0] * num_schedulers

    def next(self, scheduler: int, tabu: set[int]) -> int:
        n = self.num_servers
        start = self.cursor[scheduler]
        for offset in range(n):
            j = (start + offset) % n
            if j not in tabu:
                self.cursor[scheduler] = (j + 1) % n
                return j
        raise NoCandidates(f"scheduler {scheduler}: all servers in tabu")


def pick(
    policy: Policy,
    ant: Ant,
    table: PheromoneTable,
    cluster: ClusterState,
    params: AcoParams,
    rng: np.random.Generator,
    cursors: RoundRobinCursors | None = None,
) -> tuple[int, float]:
    """Dispatch ``ant`` according to ``policy``; returns ``(server, probability)``.

    The probability is the chance the chosen server had under the policy:
    ``1/len(candidates)`` for Random and 1.0 for the deterministic baselines.
    """
    if policy is Policy.ACO:
        return select_server(ant, table, cluster, params, rng)

    cands = candidate_set(ant, cluster)
    if not cands:
        raise NoCandidates(f"ant {ant.id} has tried every server")

    if policy is Policy.RANDOM:
        ordered = sorted(cands)
        k = min(int(rng.random() * len(ordered)), len(ordered) - 1)
        return ordered[k], 1.0 / len(ordered)
    if policy is Policy.ROUND_ROBIN:
        if cursors is None:
            raise ValueError("round robin needs cursors")
        return cursors.next(ant.owner, ant.tabu), 1.0
    if policy is Policy.LEAST_LOADED:
        loads = cluster.loads()
        return min(cands, key=lambda j: (loads[j], j)), 1.0
    raise ValueError(f"unhandled policy {policy!r}")
