import numpy as np
import pytest

from nsgate.algebra.collective import collective_error_ops, four_qubit_code_basis
from nsgate.config import get_settings


@pytest.fixture(scope="session")
def basis():
    return four_qubit_code_basis()


@pytest.fixture(scope="session")
def ops():
    return collective_error_ops(4)


@pytest.fixture
def rng():
    return np.random.default_rng(7)


@pytest.fixture(autouse=True)
def isolated_settings(tmp_path, monkeypatch):
    """Point the ledger at a scratch file and drop any cached Settings."""
    monkeypatch.setenv("NSGATE_DB_PATH", str(tmp_path / "ledger.sqlite"))
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()
