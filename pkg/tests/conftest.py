import numpy as np
import pytest

from src.core.dense import as_dense
from src.generators.random_matrices import gaussian


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: corpus-scale checks (deselect with -m 'not slow')")


@pytest.fixture
def small_gaussian():
    return gaussian(8, 7, seed=11)


@pytest.fixture
def square_gaussian():
    return gaussian(12, 12, seed=3)


@pytest.fixture
def staircase():
    """``diag(1, ..., 6)``: from the leading 2x2 pivot the search needs several swaps."""
    return as_dense(np.diag(np.arange(1.0, 7.0)))


@pytest.fixture
def write_mtx(tmp_path):
    from src.matrix_market_io import save_matrix

    def _write(A, name="A.mtx"):
        return save_matrix(str(tmp_path / name), A)

    return _write
