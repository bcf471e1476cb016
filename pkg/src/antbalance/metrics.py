"""Per-run report: pheromone statistics, load dispersion and job counts.

Everything except the trail statistics is rebuilt from the trace, so a report
can be recomputed from an exported trace plus the final pheromone table.
"""

from __future__ import annotations

from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .aco import PheromoneTable
from .cluster import ClusterState

# flat fields written to CSV / json, in this order
REPORT_FIELDS = (
    "max_pheromone",
    "mean_pheromone",
    "top_scheduler",
    "top_server",
    "mean_load_stddev",
    "completed",
    "failed",
    "retries",
    "makespan",
)


@dataclass
class MetricsReport:
    max_pheromone: float
    mean_pheromone: float
    top_edge: tuple[int, int]
    mean_load_stddev: float
    completed: int
    failed: int
    retries: int
    makespan: int
    load_stddev_timeseries: list[float] = field(default_factory=list)

    def as_record(self, decimals: int = 10) -> dict:
        return {
            "max_pheromone": round(self.max_pheromone, decimals),
            "mean_pheromone": round(self.mean_pheromone, decimals),
            "top_scheduler": self.top_edge[0],
            "top_server": self.top_edge[1],
            "mean_load_stddev": round(self.mean_load_stddev, decimals),
            "completed": self.completed,
            "failed": self.failed,
            "retries": self.retries,
            "makespan": self.makespan,
        }


def load_stddev(cluster_or_loads: ClusterState | Sequence[int] | np.ndarray) -> float:
    """Population standard deviation of server loads."""
    if isinstance(cluster_or_loads, ClusterState):
        loads = cluster_or_loads.loads()
    else:
        loads = np.asarray(cluster_or_loads, dtype=np.float64)
    if loads.size == 0:
        raise ValueError("need at least one server")
    return float(np.std(loads))


def load_timeseries(trace, num_servers: int, num_steps: int) -> list[float]:
    """Load dispersion at the end of each step, replayed from acquire/return events."""
    from .engine import EventKind

    loads = np.zeros(num_servers, dtype=np.int64)
    out = []
    events = iter(trace)
    pending = next(events, None)
    for step in range(num_steps):
        while pending is not None and pending.step == step:
            if pending.kind is EventKind.ACQUIRE:
                loads[pending.server] += 1
            elif pending.kind is EventKind.RETURN:
                loads[pending.server] -= 1
            pending = next(events, None)
        out.append(float(np.std(loads)))
    return out


def deposit_counts(trace, shape: tuple[int, int]) -> np.ndarray:
    from .engine import EventKind

    counts = np.zeros(shape, dtype=np.int64)
    for ev in trace:
        if ev.kind is EventKind.DEPOSIT:
            counts[ev.scheduler, ev.server] += 1
    return counts


def collect_metrics(trace, table: PheromoneTable, cluster: ClusterState | None, config) -> MetricsReport:
    from .engine import EventKind

    kinds = Counter(ev.kind for ev in trace)
    tau = table.tau
    top = np.unravel_index(int(np.argmax(tau)), tau.shape)
    series = load_timeseries(trace, config.num_servers, table.step)
    hi = float(tau.max())
    # summation rounding can push the mean of a uniform table past its max
    mean = min(max(float(tau.mean()), float(tau.min())), hi)
    return MetricsReport(
        max_pheromone=hi,
        mean_pheromone=mean,
        top_edge=(int(top[0]), int(top[1])),
        mean_load_stddev=float(np.mean(series)) if series else 0.0,
        completed=kinds[EventKind.KILL],
        failed=kinds[EventKind.FAIL],
        retries=kinds[EventKind.REFUSE],
        makespan=table.step,
        load_stddev_timeseries=series,
    )
