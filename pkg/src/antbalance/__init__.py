"""Ant-colony load balancing over job schedulers and web servers."""

from .aco import (
    AcoParams,
    PheromoneTable,
    deposit,
    evaporate,
    max_edge_pheromone,
    transition_probabilities,
)
from .cluster import (
    Ant,
    AntState,
    ClusterState,
    ContractError,
    JobScheduler,
    Outcome,
    WebServer,
    candidate_set,
    heuristic_values,
    release,
    try_acquire,
)
from .engine import EventKind, SimConfig, Simulation, TraceEvent, run_simulation, spawn_ants
from .experiments import SweepRow, SweepSpec, compare_policies, paper_band, sweep_table1
from .metrics import MetricsReport, collect_metrics, load_stddev
from .policies import NoCandidates, Policy, pick, roulette, select_server

__version__ = "0.1.0"
