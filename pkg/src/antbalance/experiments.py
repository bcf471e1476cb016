"""Ant-count sweep against the published pheromone bands, and policy comparison."""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import IO

import numpy as np

from .engine import SimConfig, run_simulation
from .metrics import MetricsReport
from .policies import Policy

# (max ants in row, band low, band high)
TABLE1_BANDS = (
    (10, 0.01, 0.10),
    (20, 0.10, 0.15),
    (30, 0.15, 0.17),
    (50, 0.17, 0.19),
    (90, 0.20, 0.30),
    (100, 0.35, 0.45),
    (200, 0.50, 0.65),
    (300, 0.65, 0.75),
    (600, 0.75, 0.85),
    (1000, 0.85, 1.00),
)
DEFAULT_ANT_COUNTS = tuple(row[0] for row in TABLE1_BANDS)

SWEEP_HEADER = ("ants", "pheromone_mean", "pheromone_min", "pheromone_max", "band_low", "band_high", "in_band")
COMPARE_HEADER = ("policy", "seed", "mean_load_stddev", "retries", "failed", "makespan", "completed", "max_pheromone")
DECIMALS = 6


def paper_band(ants: int) -> tuple[float, float]:
    """Published pheromone band for the first row whose ant bound covers ``ants``."""
    if ants < 1:
        raise ValueError(f"ant count must be positive, got {ants}")
    for upper, low, high in TABLE1_BANDS:
        if ants <= upper:
            return low, high
    raise ValueError(f"ant count {ants} exceeds the largest tabulated row ({TABLE1_BANDS[-1][0]})")


@dataclass(frozen=True)
class SweepSpec:
    ant_counts: tuple[int, ...] = DEFAULT_ANT_COUNTS
    replicates: int = 30
    base: SimConfig = field(default_factory=SimConfig)

    def __post_init__(self) -> None:
        counts = tuple(int(n) for n in self.ant_counts)
        object.__setattr__(self, "ant_counts", counts)
        if not counts:
            raise ValueError("ant_counts is empty")
        if any(n < 1 for n in counts):
            raise ValueError("ant_counts must be positive")
        if any(b <= a for a, b in zip(counts, counts[1:])):
            raise ValueError(f"ant_counts must be strictly increasing, got {list(counts)}")
        for n in counts:
            paper_band(n)
        if self.replicates < 1:
            raise ValueError(f"replicates must be positive, got {self.replicates}")

    def configs(self) -> list[SimConfig]:
        return [
            self.base.with_(num_ants=n, seed=self.base.seed + r, policy=Policy.ACO)
            for n in self.ant_counts
            for r in range(self.replicates)
        ]


@dataclass(frozen=True)
class SweepRow:
    ants: int
    pheromone_mean: float
    pheromone_min: float
    pheromone_max: float
    band_low: float
    band_high: float

    @property
    def in_band(self) -> bool:
        return self.band_low <= self.pheromone_mean <= self.band_high

    def as_record(self) -> dict:
        return {
            "ants": self.ants,
            "pheromone_mean": round(self.pheromone_mean, DECIMALS),
            "pheromone_min": round(self.pheromone_min, DECIMALS),
            "pheromone_max": round(self.pheromone_max, DECIMALS),
            "band_low": self.band_low,
            "band_high": self.band_high,
            "in_band": self.in_band,
        }


def _report_only(config: SimConfig) -> MetricsReport:
    return run_simulation(config)[0]


def run_many(configs: list[SimConfig], jobs: int = 1) -> list[MetricsReport]:
    """Run configs, results in input order whatever the worker count."""
    if jobs <= 1 or len(configs) <= 1:
        return [_report_only(c) for c in configs]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_report_only, configs, chunksize=max(1, len(configs) // (4 * jobs))))


def aggregate_sweep(spec: SweepSpec, reports: list[MetricsReport]) -> list[SweepRow]:
    rows = []
    values = np.array([r.max_pheromone for r in reports]).reshape(len(spec.ant_counts), spec.replicates)
    for n, vals in zip(spec.ant_counts, values):
        low, high = paper_band(n)
        rows.append(SweepRow(n, float(np.mean(vals)), float(vals.min()), float(vals.max()), low, high))
    return rows


def sweep_table1(spec: SweepSpec | None = None, jobs: int = 1) -> list[SweepRow]:
    spec = spec or SweepSpec()
    return aggregate_sweep(spec, run_many(spec.configs(), jobs))


@dataclass
class PolicyComparison:
    seeds: list[int]
    reports: dict[Policy, list[MetricsReport]]

    def column(self, policy: Policy, name: str) -> list:
        return [getattr(r, name) for r in self.reports[Policy.parse(policy)]]

    def summary(self, policy: Policy) -> dict:
        reps = self.reports[Policy.parse(policy)]
        return {
            "policy": Policy.parse(policy).value,
            "mean_load_stddev": float(np.mean([r.mean_load_stddev for r in reps])),
            "retries": float(np.mean([r.retries for r in reps])),
            "failed": float(np.mean([r.failed for r in reps])),
            "makespan": float(np.mean([r.makespan for r in reps])),
        }


def compare_policies(base: SimConfig, seeds: list[int], jobs: int = 1) -> PolicyComparison:
    """Run the same workload under every policy for each seed, keeping per-seed pairing."""
    seeds = [int(s) for s in seeds]
    if len(seeds) < 2:
        raise ValueError("compare_policies needs at least two seeds")
    configs = [base.with_(policy=p, seed=s) for p in Policy for s in seeds]
    reports = run_many(configs, jobs)
    n = len(seeds)
    return PolicyComparison(seeds, {p: reports[k * n:(k + 1) * n] for k, p in enumerate(Policy)})


def write_sweep(rows: list[SweepRow], fh: IO[str], fmt: str = "csv") -> None:
    if fmt == "csv":
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SWEEP_HEADER)
        for row in rows:
            rec = row.as_record()
            writer.writerow([
                rec["ants"],
                f"{row.pheromone_mean:.{DECIMALS}f}",
                f"{row.pheromone_min:.{DECIMALS}f}",
                f"{row.pheromone_max:.{DECIMALS}f}",
                f"{row.band_low:.2f}",
                f"{row.band_high:.2f}",
                str(row.in_band).lower(),
            ])
    else:
        for row in rows:
            fh.write(json.dumps(row.as_record(), separators=(",", ":")) + "\n")


def write_plot_data(rows: list[SweepRow], fh: IO[str]) -> None:
    fh.write("ants,pheromone_mean\n")
    for row in rows:
        fh.write(f"{row.ants},{row.pheromone_mean:.{DECIMALS}f}\n")


def write_comparison(comp: PolicyComparison, fh: IO[str], fmt: str = "csv") -> None:
    if fmt == "csv":
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(COMPARE_HEADER)
        for policy in Policy:
            for seed, r in zip(comp.seeds, comp.reports[policy]):
                writer.writerow([
                    policy.value,
                    seed,
                    f"{r.mean_load_stddev:.{DECIMALS}f}",
                    r.retries,
                    r.failed,
                    r.makespan,
                    r.completed,
                    f"{r.max_pheromone:.{DECIMALS}f}",
                ])
        return
    for policy in Policy:
        reps = comp.reports[policy]
        rec = {k: round(v, DECIMALS) if isinstance(v, float) else v for k, v in comp.summary(policy).items()}
        rec["seeds"] = comp.seeds
        rec["per_seed"] = [
            {
                "mean_load_stddev": round(r.mean_load_stddev, DECIMALS),
                "retries": r.retries,
                "failed": r.failed,
                "makespan": r.makespan,
            }
            for r in reps
        ]
        fh.write(json.dumps(rec, separators=(",", ":")) + "\n")
