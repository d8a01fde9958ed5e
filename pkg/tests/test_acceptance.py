"""Cenários longos de aceitação; rode com `pytest --runslow`."""

import os
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
import pytest

from quarc_sim.calibration.grid import sweep_static_grid
from quarc_sim.config.run_config import build_graph, build_partition, build_schedule, load_config, load_thresholds
from quarc_sim.core.engine import QuarcSimulator, SimulationConfig, run_simulation
from quarc_sim.topology.network import make_waxman
from quarc_sim.topology.schedule import half_plane_schedule

pytestmark = pytest.mark.slow

JOBS = max(1, min(10, os.cpu_count() or 1))
CONFIGS = Path(__file__).resolve().parent.parent / "configs"

SHIFT_STATIC_BLOCKS = (1, 2, 4, 8, 16)


def test_optimal_static_configuration_depends_on_p():
    sweep = sweep_static_grid(8, 0.9, [0.5, 0.95], [2, 8], slots_per_point=2000, seeds=range(1, 11),
                              jobs=JOBS, qubits=4)
    small_high, whole_high = sweep.point(0.95, 2).estimate, sweep.point(0.95, 8).estimate
    small_low, whole_low = sweep.point(0.5, 2).estimate, sweep.point(0.5, 8).estimate
    assert small_high.above(whole_high)
    assert whole_low.above(small_low)


def _region_sizes(seed: int):
    graph = make_waxman(200, target_avg_degree=6.0, E_p=0.6, q=0.9, seed=seed)
    simulator = QuarcSimulator(
        graph, SimulationConfig(slots=0, epoch_length=500, seed=seed), schedule=half_plane_schedule(0.6, 0.3, 0.5),
    )
    profiles = [simulator.clustering.size_profile()]
    while simulator.epoch < 12:
        simulator.run_epoch()
        profiles.append(simulator.clustering.size_profile())
        if len(profiles) >= 4 and len(set(profiles[-4:])) == 1:
            break
    first = simulator.epoch
    for _ in range(3):
        simulator.run_epoch()
    records = [r for r in simulator.log.epochs if r.epoch >= first]
    lower = [r.size for r in records if r.centroid_y < 0.5]
    upper = [r.size for r in records if r.centroid_y >= 0.5]
    return float(np.mean(lower)) if lower else 0.0, float(np.mean(upper)) if upper else 0.0


def test_low_p_half_forms_larger_clusters():
    with ProcessPoolExecutor(max_workers=JOBS) as pool:
        results = list(pool.map(_region_sizes, range(1, 11)))
    wins = sum(1 for lower, upper in results if lower > upper)
    assert wins >= 8, results


def _phase_throughput(job):
    """Vazão média nas últimas 5 épocas de cada fase de 5000 slots."""
    name, seed = job
    config = load_config(str(CONFIGS / f"{name}.json")).with_overrides(seed=seed)
    graph = build_graph(config)
    thresholds = load_thresholds(config) if config.mode == 'adaptive' else None
    log = run_simulation(graph, config.simulation_config(), build_schedule(config), thresholds,
                         build_partition(config, graph))
    satisfied = [s.satisfied for s in log.slots]
    tail = 5 * config.epoch_length
    return name, seed, [float(np.mean(satisfied[end - tail:end])) for end in (5000, 10000)]


def test_adaptive_tracks_best_static_configuration_across_shift():
    names = ["shift-two-phase-16x16"] + [f"shift-two-phase-static-b{b}" for b in SHIFT_STATIC_BLOCKS]
    jobs = [(name, seed) for name in names for seed in (1, 2, 3)]
    with ProcessPoolExecutor(max_workers=JOBS) as pool:
        results = list(pool.map(_phase_throughput, jobs))

    per_config = {}
    for name, _, phases in results:
        per_config.setdefault(name, []).append(phases)
    means = {name: np.mean(values, axis=0) for name, values in per_config.items()}
    adaptive = means.pop("shift-two-phase-16x16")
    best_static = np.max(np.array(list(means.values())), axis=0)
    assert np.all(adaptive >= 0.8 * best_static), (adaptive, means)
