import io

import numpy as np
import pytest

from antbalance.aco import AcoParams
from antbalance.cluster import AntState
from antbalance.engine import (
    EventKind,
    SimConfig,
    Simulation,
    make_rngs,
    read_trace,
    run_simulation,
    spawn_ants,
    write_trace,
)
from antbalance.metrics import deposit_counts

from replay import check_deposits, check_phase_order, check_tabu, kind_counts


def test_single_scheduler_owns_everything():
    cfg = SimConfig(num_schedulers=1, num_ants=50)
    ants = spawn_ants(cfg, make_rngs(cfg.seed)[0], 0, 50)
    assert {a.owner for a in ants} == {0}
    assert all(a.state is AntState.SEARCHING and not a.tabu for a in ants)
    assert [a.id for a in ants] == list(range(50))


def test_spawn_is_seeded():
    cfg = SimConfig(seed=11)
    a = [x.owner for x in spawn_ants(cfg, make_rngs(11)[0], 0, 200)]
    b = [x.owner for x in spawn_ants(cfg, make_rngs(11)[0], 0, 200)]
    c = [x.owner for x in spawn_ants(cfg, make_rngs(12)[0], 0, 200)]
    assert a == b and a != c


def test_spawn_counts_with_default_seed():
    # recorded with seed 0: [112, 96, 95, 101, 92, 87, 110, 90, 100, 117]
    cfg = SimConfig()
    owners = [a.owner for a in spawn_ants(cfg, make_rngs(cfg.seed)[0], 0, 1000)]
    counts = np.bincount(owners, minlength=10)
    assert counts.tolist() == [112, 96, 95, 101, 92, 87, 110, 90, 100, 117]
    assert counts.min() >= 50 and counts.max() <= 150


def test_uniform_service_times_in_range():
    cfg = SimConfig(service_time=2, service_time_max=6, num_ants=300)
    times = {a.service_time for a in spawn_ants(cfg, make_rngs(3)[0], 0, 300)}
    assert times == {2, 3, 4, 5, 6}


def test_idle_step_only_evaporates():
    sim = Simulation(SimConfig(num_ants=0))
    events = sim.step()
    assert [e.kind for e in events] == [EventKind.EVAPORATE]
    assert np.allclose(sim.table.tau, 0.01 * 0.995)


def test_first_step_hand_trace():
    sim = Simulation(SimConfig(num_schedulers=1, num_servers=1, num_ants=1))
    events = sim.step()
    kinds = [e.kind for e in events]
    assert kinds == [EventKind.SPAWN, EventKind.SELECT, EventKind.ACQUIRE, EventKind.DEPOSIT, EventKind.EVAPORATE]
    # (0.01 + 0.005) * 0.995
    assert sim.table.tau[0, 0] == pytest.approx(0.014925, abs=1e-15)


def test_saturated_cluster_refuses():
    sim = Simulation(SimConfig(num_schedulers=1, num_servers=3, capacity=1, num_ants=4, service_time=5))
    events = sim.step()
    assert kind_counts(events)[EventKind.ACQUIRE] + kind_counts(events)[EventKind.REFUSE] == 4
    waiting = [a for a in sim.cluster.ants.values() if a.state is AntState.SEARCHING]
    assert all(s.full for s in sim.cluster.servers)
    (ant,) = waiting
    before = len(ant.tabu)
    events = sim.step()
    assert kind_counts(events)[EventKind.REFUSE] == 1
    assert len(ant.tabu) == before + 1


def test_zero_ant_run():
    report, trace, table = run_simulation(SimConfig(num_ants=0))
    assert report.completed == 0 and report.retries == 0
    assert report.max_pheromone == report.mean_pheromone == 0.01 * 0.995**report.makespan
    assert kind_counts(trace)[EventKind.DEPOSIT] == 0


def test_single_ant_deposits_twice():
    report, trace, _ = run_simulation(SimConfig(num_ants=1))
    deps = [e for e in trace if e.kind is EventKind.DEPOSIT]
    assert len(deps) == 2
    assert deps[0][2:5] == deps[1][2:5]
    assert report.completed == 1


def test_retry_exhaustion_fails_ant():
    cfg = SimConfig(num_schedulers=1, num_servers=2, capacity=1, num_ants=3, service_time=50, max_retry_rounds=1)
    report, trace, _ = run_simulation(cfg)
    assert report.failed == 1 and report.completed == 2
    fails = [e for e in trace if e.kind is EventKind.FAIL]
    # 2 refusals per round, two rounds, then failure at the start of the next search
    assert fails[0].step == 4
    assert report.retries == 4


def test_max_steps_stops_run():
    cfg = SimConfig(num_ants=100, service_time=30, max_steps=30, capacity=1, num_servers=2)
    report, trace, table = run_simulation(cfg)
    assert table.step == 30 == report.makespan
    assert report.completed + report.failed < 100


def test_config_validation():
    with pytest.raises(ValueError, match="num_servers"):
        SimConfig(num_servers=0)
    with pytest.raises(ValueError, match="max_steps"):
        SimConfig(max_steps=3, service_time=5)
    with pytest.raises(ValueError, match="seed"):
        SimConfig(seed=-1)
    with pytest.raises(ValueError, match="policy"):
        SimConfig(policy="bogus")


def trace_bytes(trace):
    buf = io.StringIO()
    write_trace(trace, buf)
    return buf.getvalue()


def test_deterministic_and_seed_sensitive():
    cfg = SimConfig(num_ants=150, seed=5)
    r1, t1, _ = run_simulation(cfg)
    r2, t2, _ = run_simulation(cfg)
    assert trace_bytes(t1) == trace_bytes(t2)
    assert r1 == r2
    _, t3, _ = run_simulation(cfg.with_(seed=6))
    assert trace_bytes(t1) != trace_bytes(t3)


def test_trace_roundtrip():
    _, trace, _ = run_simulation(SimConfig(num_ants=30))
    text = trace_bytes(trace)
    back = list(read_trace(io.StringIO(text)))
    assert trace_bytes(back) == text
    assert text.splitlines()[0].startswith('{"step":0,"kind":"spawn","ant":0,"scheduler":')


@pytest.mark.parametrize("policy", ["aco", "random", "round_robin", "least_loaded"])
@pytest.mark.parametrize("seed", [0, 1])
def test_trace_invariants(policy, seed):
    cfg = SimConfig(num_ants=300, capacity=3, num_servers=12, num_schedulers=4, spawn_rate=40, policy=policy, seed=seed)
    report, trace, _ = run_simulation(cfg)
    check_tabu(trace, cfg.num_servers)
    check_deposits(trace)
    check_phase_order(trace)
    counts = kind_counts(trace)
    assert counts[EventKind.DEPOSIT] == 2 * report.completed
    assert counts[EventKind.SPAWN] == 300 == report.completed + report.failed


def test_job_conservation_each_step():
    sim = Simulation(SimConfig(num_ants=200, spawn_rate=15, capacity=2, num_servers=8, max_retry_rounds=1))
    while not sim.finished:
        sim.step()
        states = [a.state for a in sim.cluster.ants.values()]
        live = sum(a.live for a in sim.cluster.ants.values())
        assert sim.spawned == states.count(AntState.DEAD) + states.count(AntState.FAILED) + live
        acquired = states.count(AntState.ACQUIRED)
        assert sum(s.load for s in sim.cluster.servers) == acquired
        assert len(sim.cluster.ants) == sim.spawned


def test_pending_queue_tracks_searching_ants():
    sim = Simulation(SimConfig(num_ants=500, num_servers=10, capacity=5))
    sim.step()
    pending = sum(len(s.pending) for s in sim.cluster.schedulers)
    searching = sum(a.state is AntState.SEARCHING for a in sim.cluster.ants.values())
    assert pending == searching == 450


def test_most_deposited_edge_has_top_trail():
    report, trace, table = run_simulation(SimConfig(num_ants=300, seed=2))
    counts = deposit_counts(trace, table.shape)
    assert counts[report.top_edge] == counts.max()


def test_random_policy_still_deposits():
    report, trace, table = run_simulation(SimConfig(num_ants=50, policy="random"))
    assert kind_counts(trace)[EventKind.DEPOSIT] == 100
    assert report.max_pheromone > AcoParams().tau_init * 0.995**report.makespan
