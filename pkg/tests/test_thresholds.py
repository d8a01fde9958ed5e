import json

import pytest

from quarc_sim.clustering.thresholds import ThresholdTable, builtin_2d_table, threshold_lookup
from quarc_sim.exceptions import ThresholdTableError


def test_builtin_lookup_on_a_layer():
    table = builtin_2d_table()
    assert table.network_sizes == [64, 256]
    assert threshold_lookup(table, 4, 64) == pytest.approx((0.45, 0.70))
    assert threshold_lookup(table, 4, 256) == pytest.approx((0.40, 0.65))


def test_lookup_interpolates_network_size():
    merge, split = threshold_lookup(builtin_2d_table(), 4, 160)
    assert merge == pytest.approx(0.425)
    assert split == pytest.approx(0.675)


def test_lookup_clamps_outside_the_knots():
    table = builtin_2d_table()
    assert threshold_lookup(table, 10_000, 256) == pytest.approx((0.75, 0.90))
    assert threshold_lookup(table, 1, 10) == threshold_lookup(table, 1, 64)


def test_simple_single_layer_document():
    table = ThresholdTable.from_document({'split': [[4, 0.8], [16, 0.9]], 'merge': [[1, 0.2], [16, 0.5]]})
    assert table.network_sizes == [None]
    merge, split = threshold_lookup(table, 10, 999)
    assert merge == pytest.approx(0.2 + 0.3 * 9 / 15)
    assert split == pytest.approx(0.85)


@pytest.mark.parametrize("document", [
    {'split': [[4, 0.3]], 'merge': [[4, 0.5]]},
    {'split': [[4, 0.8], [4, 0.9]], 'merge': [[1, 0.1]]},
    {'split': [[4, 1.2]], 'merge': [[1, 0.1]]},
    {'split': [], 'merge': [[1, 0.1]]},
    {'split': [[0, 0.5]], 'merge': [[1, 0.1]]},
    {'merge': [[1, 0.1]]},
    {'network_sizes': [64, 32], 'split': [[[4, 0.8]], [[4, 0.8]]], 'merge': [[[1, 0.1]], [[1, 0.1]]]},
])
def test_invalid_tables(document):
    with pytest.raises(ThresholdTableError):
        ThresholdTable.from_document(document)


def test_load_rejects_broken_json(tmp_path):
    path = tmp_path / "t.json"
    path.write_text("{not json")
    with pytest.raises(ThresholdTableError):
        ThresholdTable.load(str(path))


def test_save_and_load_keep_source(tmp_path):
    path = tmp_path / "t.json"
    builtin_2d_table().save(str(path))
    assert json.loads(path.read_text())['source'] == {'kind': 'builtin-2d'}
    assert ThresholdTable.load(str(path)) == builtin_2d_table()


def test_capped_keeps_merge_below_split():
    capped = builtin_2d_table().capped(split_cap=0.5, merge_cap=0.6, source={'kind': 'topology-specific'})
    assert capped.source['kind'] == 'topology-specific'
    for size in (1, 4, 16, 64, 256):
        for network in (64, 256):
            merge, split = threshold_lookup(capped, size, network)
            assert split <= 0.5 + 1e-12
            assert merge <= split + 1e-12


def test_capped_merge_cap_binds():
    capped = builtin_2d_table().capped(merge_cap=0.3)
    merge, split = threshold_lookup(capped, 64, 64)
    assert merge == pytest.approx(0.3)
    assert split == pytest.approx(0.90)
