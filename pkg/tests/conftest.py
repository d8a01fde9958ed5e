import pytest

from quarc_sim.topology.network import make_grid


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="roda os testes de aceitação lentos")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="use --runslow para rodar")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def grid4():
    """Grade 4x4 com canais e fusões perfeitos e qubits ilimitados."""
    return make_grid(4)


@pytest.fixture
def grid8():
    return make_grid(8, width=1, qubits_per_node=4, p=0.8, q=0.9)


@pytest.fixture
def isolated_home(tmp_path, monkeypatch):
    """HOME temporário para preferências e registro."""
    monkeypatch.setenv("HOME", str(tmp_path))
    monkeypatch.delenv("QUARC_SIM_OUT", raising=False)
    return tmp_path
