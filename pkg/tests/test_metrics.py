import io

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from antbalance.engine import EventKind, SimConfig, read_trace, run_simulation, write_trace
from antbalance.metrics import collect_metrics, load_stddev


def test_uniform_loads_have_zero_dispersion():
    assert load_stddev([3] * 44) == 0.0


def test_two_servers():
    assert load_stddev([0, 2]) == 1.0


def test_ten_loaded_servers_among_44():
    # statistics.pstdev([1..10] + [0]*34) = sqrt(385/44 - 1.25**2)
    assert load_stddev(list(range(1, 11)) + [0] * 34) == pytest.approx(2.680951323690902, abs=1e-12)


@given(st.lists(st.integers(0, 20), min_size=1, max_size=50))
def test_dispersion_non_negative_and_zero_iff_uniform(loads):
    v = load_stddev(loads)
    assert v >= 0
    assert (v == 0) == (len(set(loads)) == 1)


def test_empty_load_vector_rejected():
    with pytest.raises(ValueError):
        load_stddev([])


def test_single_completed_ant():
    report, trace, table = run_simulation(SimConfig(num_ants=1, seed=4))
    acq = next(e for e in trace if e.kind is EventKind.ACQUIRE)
    assert report.completed == 1
    assert report.top_edge == (acq.scheduler, acq.server)


@pytest.mark.parametrize("cfg", [
    SimConfig(num_ants=400, seed=9),
    SimConfig(num_ants=120, capacity=1, num_servers=5, max_retry_rounds=1, policy="round_robin"),
])
def test_report_rebuilt_from_exported_trace(cfg):
    report, trace, table = run_simulation(cfg)
    buf = io.StringIO()
    write_trace(trace, buf)
    buf.seek(0)
    rebuilt = collect_metrics(list(read_trace(buf)), table, None, cfg)
    assert rebuilt == report


def test_report_matches_trace_counts_and_bounds():
    cfg = SimConfig(num_ants=600, capacity=2, max_retry_rounds=2, seed=3)
    report, trace, table = run_simulation(cfg)
    kinds = [e.kind for e in trace]
    assert report.completed == kinds.count(EventKind.KILL)
    assert report.retries == kinds.count(EventKind.REFUSE)
    assert report.failed == kinds.count(EventKind.FAIL)
    assert report.completed + report.failed == cfg.num_ants
    p = cfg.aco
    assert p.tau_min <= report.mean_pheromone <= report.max_pheromone <= p.tau_max
    assert report.max_pheromone == table.max_edge()
    assert len(report.load_stddev_timeseries) == report.makespan
    assert report.mean_load_stddev == pytest.approx(np.mean(report.load_stddev_timeseries))
    assert min(report.load_stddev_timeseries) >= 0
