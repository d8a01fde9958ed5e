import csv
import json

import pytest

from quarc_sim.cli.experiment import config_hash, parse_seeds
from quarc_sim.cli.main import EXIT_ERROR, EXIT_INCONCLUSIVE, EXIT_OK, QuarcCLI
from quarc_sim.config.run_config import default_document
from quarc_sim.exceptions import ConfigError

SMALL_RUN = {
    'topology': {'kind': 'grid', 'side': 4, 'qubits': 4, 'p': 0.9, 'q': 0.9},
    'slots': 40,
    'epoch_length': 20,
    'seed': 1,
}


@pytest.fixture
def cli(tmp_path, monkeypatch):
    monkeypatch.delenv('QUARC_SIM_OUT', raising=False)
    return QuarcCLI(config_file=str(tmp_path / "prefs.json"), registry_path=str(tmp_path / "runs.db"))


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "small.json"
    path.write_text(json.dumps(SMALL_RUN))
    return path


def test_defaults_prints_the_full_document(cli, capsys):
    assert cli.run(['defaults']) == EXIT_OK
    assert json.loads(capsys.readouterr().out) == default_document()


def test_defaults_write(cli, tmp_path):
    target = tmp_path / "d.json"
    assert cli.run(['defaults', '--write', str(target)]) == EXIT_OK
    assert json.loads(target.read_text()) == default_document()


def test_run_writes_artifacts(cli, small_config, tmp_path):
    out = tmp_path / "out"
    assert cli.run(['run', '--config', str(small_config), '--out', str(out)]) == EXIT_OK
    for name in ('slots.csv', 'requests.csv', 'clusters.csv', 'snapshots.csv', 'report.json',
                 'topology.json', 'manifest.json'):
        assert (out / name).is_file(), name
    assert not (out / 'trace.jsonl').exists()

    manifest = json.loads((out / 'manifest.json').read_text())
    assert manifest['seed'] == 1
    assert manifest['config_hash'] == config_hash(manifest['config'])
    assert {'numpy', 'networkx', 'scipy', 'python'} <= set(manifest['versions'])

    with open(out / 'slots.csv', newline='') as f:
        assert len(list(csv.DictReader(f))) == 40
    runs = cli.registry.get_runs()
    assert len(runs) == 1 and runs[0].config_hash == manifest['config_hash']


def test_same_seed_reproduces_csvs(cli, small_config, tmp_path):
    for name in ('a', 'b'):
        assert cli.run(['run', '--config', str(small_config), '--out', str(tmp_path / name)]) == EXIT_OK
    for name in ('slots.csv', 'requests.csv', 'clusters.csv', 'snapshots.csv'):
        assert (tmp_path / 'a' / name).read_bytes() == (tmp_path / 'b' / name).read_bytes()


def test_run_flags_override_the_document(cli, small_config, tmp_path):
    out = tmp_path / "out"
    status = cli.run(['run', '--config', str(small_config), '--out', str(out), '--seed', '5', '--slots', '10',
                      '--trace', 'routing', '--baseline'])
    assert status == EXIT_OK
    manifest = json.loads((out / 'manifest.json').read_text())
    assert manifest['seed'] == 5 and manifest['config']['slots'] == 10
    assert (out / 'trace.jsonl').is_file()
    assert (out / 'baseline_report.json').is_file()
    assert 'allocation_bias' in json.loads((out / 'report.json').read_text())


def test_document_output_dir_is_used(cli, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    path = tmp_path / "doc.json"
    path.write_text(json.dumps({**SMALL_RUN, 'output_dir': 'from-doc'}))
    assert cli.run(['run', '--config', str(path)]) == EXIT_OK
    assert (tmp_path / 'from-doc' / 'report.json').is_file()


def test_invalid_document_exits_with_error(cli, tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({**SMALL_RUN, 'slots': -1}))
    assert cli.run(['run', '--config', str(path)]) == EXIT_ERROR
    assert 'slots' in capsys.readouterr().out
    assert cli.run(['run', '--config', str(tmp_path / 'missing.json')]) == EXIT_ERROR


def test_inconclusive_calibration(cli, tmp_path):
    status = cli.run(['calibrate-grid', '--side', '4', '--configs', '2', '--p-values', '0.5', '0.9',
                      '--slots', '20', '--out', str(tmp_path / 'cal')])
    assert status == EXIT_INCONCLUSIVE
    assert (tmp_path / 'cal' / 'sweep.csv').is_file()
    assert not (tmp_path / 'cal' / 'thresholds.json').exists()
    assert cli.registry.get_runs()[0].status == 'inconclusive'


def test_sweep_aggregates_seeds(cli, small_config, tmp_path):
    other = tmp_path / "static.json"
    other.write_text(json.dumps({**SMALL_RUN, 'mode': 'static', 'partition': {'kind': 'grid-blocks', 'block': 2}}))
    out = tmp_path / "sweep"
    status = cli.run(['sweep', '--configs', str(small_config), str(other), '--seeds', '1..2', '--out', str(out)])
    assert status == EXIT_OK

    with open(out / 'aggregate.csv', newline='') as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 6
    throughput = {r['config']: r for r in rows if r['metric'] == 'throughput'}
    for name in ('small', 'static'):
        per_seed = [json.loads((out / name / f"seed-{s}" / 'report.json').read_text())['throughput']['mean']
                    for s in (1, 2)]
        assert float(throughput[name]['mean']) == pytest.approx(sum(per_seed) / 2)
        assert throughput[name]['seeds'] == '2'
    assert len(cli.registry.get_runs()) == 4


def test_config_and_history(cli, capsys):
    assert cli.run(['config', '--set', 'jobs', '3']) == EXIT_OK
    assert cli.config.get_jobs() == 3
    assert cli.run(['history']) == EXIT_OK
    assert 'Nenhuma execução registrada' in capsys.readouterr().out


def test_parse_seeds():
    assert parse_seeds(['1..3', '7,9']) == [1, 2, 3, 7, 9]
    assert parse_seeds(['4']) == [4]
    with pytest.raises(ConfigError):
        parse_seeds(['x'])
    with pytest.raises(ConfigError):
        parse_seeds([])


def test_config_hash_ignores_output_dir():
    document = default_document()
    assert config_hash(document) == config_hash({**document, 'output_dir': 'elsewhere'})
    assert config_hash(document) != config_hash({**document, 'seed': 1})
