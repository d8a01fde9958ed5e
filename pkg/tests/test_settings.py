import json

from quarc_sim.config.settings import ConfigManager
from quarc_sim.database.models import RunRecord, RunRegistry


def test_preferences_file_is_created_with_defaults(tmp_path):
    path = tmp_path / "prefs" / "config.json"
    manager = ConfigManager(str(path))
    assert json.loads(path.read_text()) == manager.get_all_settings()
    assert manager.get_jobs() == 1
    assert manager.get_log_level() == 'info'


def test_set_and_reset(tmp_path):
    path = str(tmp_path / "config.json")
    manager = ConfigManager(path)
    manager.set_setting('jobs', 4)
    manager.set_setting('plots.style', 'dark')
    reloaded = ConfigManager(path)
    assert reloaded.get_jobs() == 4
    assert reloaded.get_setting('plots.style') == 'dark'
    reloaded.reset_to_defaults()
    assert ConfigManager(path).get_setting('plots') is None


def test_invalid_values_fall_back(tmp_path):
    manager = ConfigManager(str(tmp_path / "config.json"))
    manager.set_setting('jobs', 0)
    manager.set_setting('log_level', 'loud')
    assert manager.get_jobs() == 1
    assert manager.get_log_level() == 'info'


def test_corrupt_file_uses_defaults(tmp_path):
    path = tmp_path / "config.json"
    path.write_text("{oops")
    assert ConfigManager(str(path)).get_jobs() == 1


def test_output_dir_precedence(tmp_path, monkeypatch):
    manager = ConfigManager(str(tmp_path / "config.json"))
    monkeypatch.delenv('QUARC_SIM_OUT', raising=False)
    assert manager.resolve_output_dir() == 'runs'
    manager.set_setting('output_dir', 'pref')
    assert manager.resolve_output_dir() == 'pref'
    monkeypatch.setenv('QUARC_SIM_OUT', 'env')
    assert manager.resolve_output_dir() == 'env'
    assert manager.resolve_output_dir(document_value='doc') == 'doc'
    assert manager.resolve_output_dir('flag', 'doc') == 'flag'


def test_registry(tmp_path):
    registry = RunRegistry(str(tmp_path / "runs.db"))
    first = registry.add_run(RunRecord(command='run', config_hash='a' * 64, seed=1, output_dir='out/1', throughput=0.5))
    registry.add_run(RunRecord(command='sweep', config_hash='b' * 64, seed=2, output_dir='out/2'))
    registry.add_run(RunRecord(command='calibrate-grid', config_hash='a' * 64, seed=3, output_dir='out/3',
                               status='inconclusive', message='sem cruzamento'))
    assert [r.seed for r in registry.get_runs()] == [3, 2, 1]
    assert [r.seed for r in registry.get_runs(config_hash='a' * 64)] == [3, 1]
    assert len(registry.get_runs(limit=1)) == 1
    run = registry.get_run(first)
    assert run.throughput == 0.5 and run.created_at is not None
    assert registry.get_run(999) is None
