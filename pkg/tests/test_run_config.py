import json
from pathlib import Path

import pytest

from quarc_sim.config.run_config import (build_graph, build_partition, build_schedule, default_document,
                                         load_config, load_thresholds, parse_config)
from quarc_sim.exceptions import ConfigError, ThresholdTableError


def test_defaults_are_filled():
    document = default_document()
    assert document['topology'] == {'kind': 'grid', 'side': 16, 'width': 1, 'qubits': None, 'p': 1.0, 'q': 1.0}
    assert document['slots'] == 10000
    assert document['epoch_length'] == 500
    assert document['k'] == 4
    assert document['requests']['queue_capacity'] == 10
    assert document['mode'] == 'adaptive'
    assert document['thresholds'] == {'source': 'builtin-2d'}
    assert parse_config(document).to_document() == document


@pytest.mark.parametrize("document, key", [
    ({}, 'topology'),
    ({'topology': {'kind': 'torus'}}, 'topology.kind'),
    ({'topology': {'kind': 'grid', 'side': 1}}, 'topology.side'),
    ({'topology': {'kind': 'grid', 'colour': 'blue'}}, 'topology.colour'),
    ({'topology': {'kind': 'grid'}, 'slots': -1}, 'slots'),
    ({'topology': {'kind': 'grid'}, 'slots': 2.5}, 'slots'),
    ({'topology': {'kind': 'grid'}, 'speed': 3}, 'speed'),
    ({'topology': {'kind': 'grid'}, 'k': 1}, 'k'),
    ({'topology': {'kind': 'grid'}, 'mode': 'static'}, 'partition'),
    ({'topology': {'kind': 'grid'}, 'mode': 'static', 'partition': {'kind': 'whole'},
      'thresholds': {'source': 'builtin-2d'}}, 'thresholds'),
    ({'topology': {'kind': 'waxman'}, 'partition': {'kind': 'grid-blocks', 'block': 2}}, 'partition.kind'),
    ({'topology': {'kind': 'waxman', 'E_p': 1.0}}, 'topology.E_p'),
    ({'topology': {'kind': 'grid'}, 'requests': {'distribution': 'zipf'}}, 'requests.distribution'),
    ({'topology': {'kind': 'grid'}, 'requests': {'queue_capacity': 0}}, 'requests.queue_capacity'),
    ({'topology': {'kind': 'grid'}, 'thresholds': {'source': 'file'}}, 'thresholds.path'),
    ({'topology': {'kind': 'grid'}, 'trace': 'verbose'}, 'trace'),
    ({'topology': {'kind': 'grid'}, 'schedule': {'preset': 'sawtooth'}}, 'schedule.preset'),
    ({'topology': {'kind': 'file'}}, 'topology.path'),
])
def test_invalid_documents_name_the_key(document, key):
    with pytest.raises(ConfigError) as info:
        parse_config(document)
    assert info.value.key == key


def test_overrides_revalidate():
    config = parse_config({'topology': {'kind': 'grid', 'side': 4}, 'seed': 1})
    assert config.with_overrides(seed=9, slots=None).seed == 9
    assert config.with_overrides() is config
    with pytest.raises(ConfigError):
        config.with_overrides(epoch_length=0)


def test_static_documents_survive_overrides():
    config = parse_config({'topology': {'kind': 'grid', 'side': 4}, 'mode': 'static',
                           'partition': {'kind': 'grid-blocks', 'block': 2}})
    assert config.with_overrides(seed=3).partition.block == 2


def test_builders(tmp_path):
    config = parse_config({
        'topology': {'kind': 'grid', 'side': 4, 'qubits': 2, 'p': 0.5},
        'schedule': {'preset': 'oscillation', 'period': 10},
        'mode': 'static',
        'partition': {'kind': 'explicit', 'parts': [[0, 1, 4, 5], [2, 3, 6, 7], list(range(8, 16))]},
        'slots': 30,
    })
    graph = build_graph(config)
    assert len(graph) == 16 and graph.nodes[0].qubit_capacity == 2
    assert build_schedule(config).change_points() == [0, 10, 20]
    assert len(build_partition(config, graph)) == 3
    sim = config.simulation_config()
    assert sim.mode == 'static' and sim.slots == 30


def test_broken_explicit_partition():
    config = parse_config({'topology': {'kind': 'grid', 'side': 4}, 'mode': 'static',
                           'partition': {'kind': 'explicit', 'parts': [[0, 15], list(range(1, 15))]}})
    with pytest.raises(ConfigError) as info:
        build_partition(config, build_graph(config))
    assert info.value.key == 'partition.parts'


def test_relative_files_resolve_against_the_document(tmp_path):
    (tmp_path / "t.json").write_text(json.dumps({'split': [[4, 0.9]], 'merge': [[1, 0.1]]}))
    (tmp_path / "run.json").write_text(json.dumps({
        'topology': {'kind': 'grid', 'side': 4}, 'thresholds': {'source': 'file', 'path': 't.json'},
    }))
    config = load_config(str(tmp_path / "run.json"))
    assert load_thresholds(config, str(tmp_path)).layers[0].split_points == ((4, 0.9),)

    (tmp_path / "bad.json").write_text("[1, 2")
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "bad.json"))

    config = parse_config({'topology': {'kind': 'grid'}, 'thresholds': {'source': 'file', 'path': 'bad.json'}})
    with pytest.raises(ThresholdTableError):
        load_thresholds(config, str(tmp_path))


def test_topology_specific_needs_calibration():
    config = parse_config({'topology': {'kind': 'grid', 'side': 4}, 'thresholds': {'source': 'topology-specific'}})
    assert load_thresholds(config) is None
    assert config.to_document()['thresholds'] == {'source': 'topology-specific', 'grid_path': None, 'q': None}


CONFIGS = Path(__file__).resolve().parent.parent / "configs"


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.json")), ids=lambda p: p.stem)
def test_shipped_configs_parse(path):
    config = load_config(str(path))
    assert parse_config(config.to_document()) == config


def test_two_phase_shift_configs_share_the_schedule():
    adaptive = load_config(str(CONFIGS / "shift-two-phase-16x16.json"))
    graph = build_graph(adaptive)
    schedule = build_schedule(adaptive)
    assert schedule.change_points() == [0, 5000]
    assert schedule.view(graph, 4999).mean_channel_prob() == pytest.approx(0.9)
    assert schedule.view(graph, 5000).mean_channel_prob() == pytest.approx(0.5)
    assert schedule.view(graph, 5000).fusion_prob(0) == pytest.approx(0.9)

    for block in (1, 2, 4, 8, 16):
        static = load_config(str(CONFIGS / f"shift-two-phase-static-b{block}.json"))
        assert static.mode == 'static'
        assert static.schedule == adaptive.schedule
        assert len(build_partition(static, graph)) == (16 // block) ** 2
