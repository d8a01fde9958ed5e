import csv

import pytest

from quarc_sim.core.metrics import (CLUSTER_COLUMNS, REQUEST_COLUMNS, SLOT_COLUMNS, SNAPSHOT_COLUMNS,
                                   EpochClusterRecord, MetricsLog, RequestRecord, SlotRecord,
                                   allocation_bias, summarize)
from quarc_sim.exceptions import ConsistencyError, DomainError


@pytest.fixture
def log():
    log = MetricsLog(meta={'epoch_length': 5, 'split_y': 0.5})
    for slot in range(20):
        log.slots.append(SlotRecord(slot, 1, 1 if slot % 2 == 0 else 0, 0, 2))
    for rid, hop, arrival in [(0, 1, 0), (1, 1, 1), (2, 3, 0), (3, 3, 5)]:
        log.add_request(RequestRecord(rid, 0, 1, hop, arrival))
    for rid, attempts in [(0, 2), (1, 1), (2, 4), (3, 2)]:
        for _ in range(attempts):
            log.mark_attempt(rid)
    log.mark_satisfied(0, 2)
    log.mark_satisfied(1, 1)
    log.mark_satisfied(3, 9)
    log.add_epoch([
        EpochClusterRecord(0, 19, 0, 4, 10, 5, 0.5, 0.2),
        EpochClusterRecord(0, 19, 1, 8, 0, 0, 0.5, 0.8),
    ], {0: 0, 1: 1})
    return log


def test_throughput_windows(log):
    report = summarize(log)
    assert report['window'] == 5
    assert report['throughput']['total'] == 10
    assert report['throughput']['mean'] == pytest.approx(0.5)
    assert report['throughput']['series'] == pytest.approx([0.6, 0.4, 0.6, 0.4])
    assert summarize(log, window=20)['throughput']['series'] == pytest.approx([0.5])


def test_latency_and_starvation(log):
    report = summarize(log)
    assert report['latency']['count'] == 3
    assert report['latency']['mean'] == pytest.approx(2.0)
    assert report['latency']['median'] == pytest.approx(2.0)
    assert report['latency']['histogram'] == {0: 1, 2: 1, 4: 1}
    assert report['starvation'] == pytest.approx(0.25)


def test_per_distance_breakdown(log):
    by_hop = summarize(log)['by_hop_distance']
    assert by_hop[1] == {
        'generated': 2, 'satisfied': 2, 'attempts': 3, 'success_rate': pytest.approx(2 / 3),
        'starvation': 0.0, 'mean_latency': 1.0,
    }
    assert by_hop[3]['success_rate'] == pytest.approx(1 / 6)
    assert by_hop[3]['starvation'] == pytest.approx(0.5)


def test_cluster_sizes_by_region(log):
    report = summarize(log)
    assert report['clusters_per_epoch'] == [2]
    assert report['cluster_size_by_region'] == [{'epoch': 0, 'lower': 4.0, 'upper': 8.0}]
    assert summarize(log, split_y=0.9)['cluster_size_by_region'][0]['upper'] is None


def test_allocation_bias(log):
    baseline = {'by_hop_distance': {'1': {'success_rate': 1.0}, '3': {'success_rate': 1 / 3}}}
    report = summarize(log, baseline=baseline)
    assert report['allocation_bias'] == {1: pytest.approx(2 / 3), 3: pytest.approx(0.5)}
    assert allocation_bias(report, {'by_hop_distance': {}}) == {1: None, 3: None}


def test_run_without_successes():
    log = MetricsLog()
    log.slots.append(SlotRecord(0, 1, 0, 0, 1))
    log.add_request(RequestRecord(0, 0, 3, 3, 0, attempts=1))
    report = summarize(log, window=1)
    assert report['starvation'] == 1.0
    assert report['latency']['mean'] is None
    assert report['by_hop_distance'][3]['success_rate'] == 0.0


def test_invalid_window(log):
    with pytest.raises(DomainError):
        summarize(log, window=0)


def test_consistency_checks(log):
    with pytest.raises(ConsistencyError):
        log.mark_satisfied(0, 5)
    with pytest.raises(ConsistencyError):
        log.add_request(RequestRecord(1, 2, 3, 1, 0))
    log.add_request(RequestRecord(9, 2, 3, 1, 10))
    with pytest.raises(ConsistencyError):
        log.mark_satisfied(9, 4)
    with pytest.raises(ConsistencyError):
        log.add_epoch([EpochClusterRecord(1, 39, 0, 4, 1, 2, 0.0, 0.0)], {})


def test_csv_columns(log, tmp_path):
    paths = log.write_csv(str(tmp_path))
    expected = {'slots': SLOT_COLUMNS, 'requests': REQUEST_COLUMNS, 'clusters': CLUSTER_COLUMNS,
                'snapshots': SNAPSHOT_COLUMNS}
    for name, columns in expected.items():
        with open(paths[name], newline='') as f:
            rows = list(csv.reader(f))
        assert rows[0] == columns
    with open(paths['requests'], newline='') as f:
        unsatisfied = [row for row in csv.DictReader(f) if row['id'] == '2'][0]
    assert unsatisfied['satisfied_slot'] == '' and unsatisfied['latency'] == ''
    with open(paths['clusters'], newline='') as f:
        idle = [row for row in csv.DictReader(f) if row['cluster'] == '1'][0]
    assert idle['rate'] == ''
