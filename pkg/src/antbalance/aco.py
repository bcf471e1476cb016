"""Pheromone table and the ant transition rule.

Trail values live on (scheduler, server) edges and stay inside
``[tau_min, tau_max]`` after every update.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AcoParams:
    """Tunables of the pheromone model.

    ``alpha`` weights the trail, ``beta`` weights the heuristic value and
    ``pheromone_amount`` is a global multiplier on every candidate's score.
    """

    alpha: float = 1.0
    beta: float = 1.0
    pheromone_amount: float = 1.0
    evaporation_rate: float = 0.005
    deposit_quantum: float = 0.005
    tau_init: float = 0.01
    tau_min: float = 0.001
    tau_max: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.evaporation_rate < 1.0:
            raise ValueError(
                f"evaporation_rate must be in [0, 1), got {self.evaporation_rate}"
            )
        if not 0.0 < self.tau_min <= self.tau_init <= self.tau_max <= 1.0:
            raise ValueError(
                "need 0 < tau_min <= tau_init <= tau_max <= 1, got "
                f"tau_min={self.tau_min}, tau_init={self.tau_init}, tau_max={self.tau_max}"
            )
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if self.beta < 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        if self.pheromone_amount <= 0:
            raise ValueError(f"pheromone_amount must be > 0, got {self.pheromone_amount}")
        if self.deposit_quantum <= 0:
            raise ValueError(f"deposit_quantum must be > 0, got {self.deposit_quantum}")


class PheromoneTable:
    """Dense ``(num_schedulers, num_servers)`` matrix of trail intensities."""

    def __init__(self, num_schedulers: int, num_servers: int, params: AcoParams):
        if num_schedulers < 1 or num_servers < 1:
            raise ValueError("pheromone table needs at least one scheduler and one server")
        self.params = params
        self.tau = np.full((num_schedulers, num_servers), params.tau_init, dtype=np.float64)
        self.step = 0

    @property
    def shape(self) -> tuple[int, int]:
        return self.tau.shape

    def _clamp(self) -> None:
        np.clip(self.tau, self.params.tau_min, self.params.tau_max, out=self.tau)

    def evaporate(self) -> None:
        self.tau *= 1.0 - self.params.evaporation_rate
        self._clamp()

    def deposit(self, scheduler: int, server: int) -> float:
        """Add one deposit quantum to an edge and return the new trail value."""
        n_sched, n_serv = self.tau.shape
        if not (0 <= scheduler < n_sched and 0 <= server < n_serv):
            raise IndexError(f"edge ({scheduler}, {server}) outside table of shape {self.tau.shape}")
        p = self.params
        value = min(max(self.tau[scheduler, server] + p.deposit_quantum, p.tau_min), p.tau_max)
        self.tau[scheduler, server] = value
        return float(value)

    def max_edge(self) -> float:
        return float(self.tau.max())

    def copy(self) -> PheromoneTable:
        other = PheromoneTable.__new__(PheromoneTable)
        other.params = self.params
        other.tau = self.tau.copy()
        other.step = self.step
        return other


def evaporate(table: PheromoneTable, params: AcoParams | None = None) -> PheromoneTable:
    """Decay every trail by ``(1 - evaporation_rate)`` in place, then clamp."""
    if params is not None and params is not table.params:
        table.params = params
    table.evaporate()
    return table


def deposit(
    table: PheromoneTable, edge: tuple[int, int], params: AcoParams | None = None
) -> PheromoneTable:
    if params is not None and params is not table.params:
        table.params = params
    table.deposit(*edge)
    return table


def max_edge_pheromone(table: PheromoneTable) -> float:
    return table.max_edge()


def transition_probabilities(
    tau_row: np.ndarray,
    eta_row: np.ndarray,
    params: AcoParams,
    candidates: Iterable[int],
) -> np.ndarray:
    """Probability of moving to each server, zero outside ``candidates``.

    Each candidate scores ``tau**alpha * eta**beta * pheromone_amount`` and the
    scores are normalised over the candidate set. If every score is zero the
    distribution falls back to uniform over the candidates.
    """
    idx = np.fromiter(sorted(set(candidates)), dtype=np.intp)
    if idx.size == 0:
        raise ValueError("no candidates")
    tau_row = np.asarray(tau_row, dtype=np.float64)
    eta_row = np.asarray(eta_row, dtype=np.float64)

    scores = (tau_row[idx] ** params.alpha) * (eta_row[idx] ** params.beta) * params.pheromone_amount
    total = scores.sum()
    probs = np.zeros(tau_row.shape[0], dtype=np.float64)
    if total > 0.0 and np.isfinite(total):
        probs[idx] = scores / total
    else:
        logger.debug("all candidate scores are zero; using uniform distribution")
        probs[idx] = 1.0 / idx.size
    return probs
