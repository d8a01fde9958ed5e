import pytest
from scipy import stats

from quarc_sim.calibration import topology as topology_calibration
from quarc_sim.calibration.grid import (Estimate, SweepPoint, SweepResult, batch_means, confidence_interval,
                                        derive_2d_thresholds, sweep_static_grid)
from quarc_sim.calibration.topology import (TopologyCalibrationSettings, derive_topology_thresholds, graph_at,
                                            nearest_rank_percentile, steady_state_rates)
from quarc_sim.clustering.thresholds import builtin_2d_table, threshold_lookup
from quarc_sim.exceptions import CalibrationInconclusiveError, DomainError
from quarc_sim.topology.network import make_grid

P_VALUES = [0.3, 0.4, 0.5, 0.6, 0.7]


def synthetic_sweep(big_means, small_means, half_width=0.01, big=4, small=1):
    big_rates = [0.8, 0.7, 0.6, 0.5, 0.4]
    small_rates = [0.1, 0.2, 0.3, 0.4, 0.5]
    sweep = SweepResult(side=8, q=0.9)
    for p, mean, rate in zip(P_VALUES, big_means, big_rates):
        sweep.points.append(SweepPoint(p, big, mean, mean - half_width, mean + half_width, rate, 10))
    for p, mean, rate in zip(P_VALUES, small_means, small_rates):
        sweep.points.append(SweepPoint(p, small, mean, mean - half_width, mean + half_width, rate, 10))
    return sweep


def test_confidence_interval_uses_student_t():
    estimate = confidence_interval([1.0, 2.0, 3.0])
    assert estimate.mean == pytest.approx(2.0)
    assert estimate.half_width == pytest.approx(stats.t.ppf(0.975, 2) / 3 ** 0.5)
    assert confidence_interval([4.0]) == Estimate(4.0, 0.0, 1)


def test_batch_means():
    estimate = batch_means([0.0, 1.0] * 50, batches=10)
    assert estimate.samples == 10
    assert estimate.mean == pytest.approx(0.5)
    assert estimate.half_width == pytest.approx(0.0)


def test_estimate_relations():
    a, b = Estimate(1.0, 0.1, 5), Estimate(1.15, 0.1, 5)
    assert a.overlaps(b)
    assert Estimate(2.0, 0.1, 5).above(a)
    assert not b.above(a)


def test_crossing_yields_split_and_merge_knots():
    sweep = synthetic_sweep([0.5, 0.45, 0.4, 0.3, 0.2], [0.2, 0.3, 0.35, 0.45, 0.6])
    assert [sweep.best_config(p) for p in P_VALUES] == [4, 4, 4, 1, 1]
    table = derive_2d_thresholds(sweep)
    layer = table.layers[0]
    assert layer.network_size == 64
    assert layer.split_points == ((16, pytest.approx(0.575)),)
    assert layer.merge_points == ((1, pytest.approx(0.325)),)
    assert table.source['crossings'] == [{'p': pytest.approx(0.525), 'small': 1, 'big': 4}]
    merge, split = threshold_lookup(table, 4, 64)
    assert merge <= split


def test_no_crossing_is_inconclusive():
    sweep = synthetic_sweep([0.5, 0.5, 0.5, 0.5, 0.5], [0.1, 0.1, 0.1, 0.1, 0.1])
    with pytest.raises(CalibrationInconclusiveError):
        derive_2d_thresholds(sweep)


def test_overlapping_intervals_are_inconclusive():
    sweep = synthetic_sweep([0.5, 0.45, 0.4, 0.3, 0.2], [0.2, 0.3, 0.35, 0.45, 0.6], half_width=0.5)
    with pytest.raises(CalibrationInconclusiveError):
        derive_2d_thresholds(sweep)


def test_ties_prefer_the_smaller_block():
    sweep = synthetic_sweep([0.3] * 5, [0.3] * 5)
    assert sweep.best_config(0.5) == 1


def test_sweep_csv(tmp_path):
    sweep = synthetic_sweep([0.5, 0.45, 0.4, 0.3, 0.2], [0.2, 0.3, 0.35, 0.45, 0.6])
    path = tmp_path / "sweep.csv"
    sweep.to_csv(str(path))
    assert path.read_text().splitlines()[0] == "p,config,cluster_size,mean,ci_low,ci_high,passing_rate,samples"
    assert SweepResult.from_csv(str(path)).point(0.6, 4).passing_rate == pytest.approx(0.5)


def test_small_static_sweep():
    sweep = sweep_static_grid(4, 0.9, [0.5, 0.9], [1, 2], slots_per_point=40, epoch_length=20)
    assert sweep.p_values() == [0.5, 0.9]
    assert sweep.configs() == [1, 2]
    for point in sweep.points:
        assert point.samples == 10
        assert point.ci_low <= point.mean <= point.ci_high
        assert point.cluster_size == point.config ** 2


def test_sweep_rejects_non_dividing_blocks():
    with pytest.raises(DomainError):
        sweep_static_grid(8, 0.9, [0.5], [3], slots_per_point=10)


def test_nearest_rank_percentile():
    values = [0.1 * i for i in range(10, 0, -1)]
    assert nearest_rank_percentile(values, 75) == pytest.approx(0.8)
    assert nearest_rank_percentile([0.4], 75) == 0.4
    assert nearest_rank_percentile([0.2, 0.9], 0) == 0.2
    with pytest.raises(CalibrationInconclusiveError):
        nearest_rank_percentile([], 75)


def test_graph_at_rescales_and_sets_q(grid4):
    graph = graph_at(grid4, 0.4, 0.7)
    assert graph.mean_channel_prob() == pytest.approx(0.4)
    assert {n.fusion_prob for n in graph.nodes.values()} == {0.7}


def test_steady_state_rates_are_rates():
    settings = TopologyCalibrationSettings(epoch_length=20, stable_epochs=2, collect_epochs=2, max_warmup_epochs=6)
    rates = steady_state_rates(make_grid(4, qubits_per_node=4, p=0.9, q=0.9), builtin_2d_table(), 3, settings)
    assert rates
    assert all(0.0 <= r <= 1.0 for r in rates)


def fake_compare(adaptive_offset=0.0, singleton_mean=0.5, half_width=0.01):
    def compare(graph, grid_table, E_p, q, seed, settings):
        return topology_calibration._Comparison(
            E_p,
            Estimate(E_p + adaptive_offset, half_width, 10),
            Estimate(singleton_mean, half_width, 10),
            0.4,
        )
    return compare


def test_topology_thresholds_from_bisection(monkeypatch, grid4):
    monkeypatch.setattr(topology_calibration, '_compare', fake_compare())
    monkeypatch.setattr(topology_calibration, 'steady_state_rates',
                        lambda graph, table, seed, settings: [0.1 * i for i in range(1, 11)])
    table = derive_topology_thresholds(grid4, builtin_2d_table(), q=0.9)
    assert table.source['kind'] == 'topology-specific'
    assert table.source['p_star'] == pytest.approx(0.5)
    assert table.source['iterations'] == 1
    assert table.source['G_t'] == pytest.approx(0.8)
    for size in (1, 4, 16, 64):
        merge, split = threshold_lookup(table, size, 64)
        assert split <= 0.8 + 1e-12
        assert merge <= 0.4 + 1e-12


def test_same_sign_gap_is_inconclusive(monkeypatch, grid4):
    monkeypatch.setattr(topology_calibration, '_compare', fake_compare(adaptive_offset=1.0))
    with pytest.raises(CalibrationInconclusiveError):
        derive_topology_thresholds(grid4, builtin_2d_table(), q=0.9)


def test_bisection_without_overlap_is_inconclusive(monkeypatch, grid4):
    monkeypatch.setattr(topology_calibration, '_compare', fake_compare(singleton_mean=0.51, half_width=0.0))
    settings = TopologyCalibrationSettings(max_iterations=3)
    with pytest.raises(CalibrationInconclusiveError):
        derive_topology_thresholds(grid4, builtin_2d_table(), q=0.9, settings=settings)
