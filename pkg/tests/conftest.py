import numpy as np
import pytest

from dqnn.linalg import haar_pure_state
from dqnn.network import QNN, TrainingPair


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_pairs(rng, n, n_in=2, n_out=2):
    return [TrainingPair(haar_pure_state(n_in, rng), haar_pure_state(n_out, rng)) for _ in range(n)]


def random_density(rng, d, rank=None):
    rank = d if rank is None else rank
    z = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = z @ z.conj().T
    return rho / np.trace(rho).real


def random_hermitian(rng, d):
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (z + z.conj().T) / 2


@pytest.fixture
def random_net(rng):
    return QNN.random(rng)


# acceptance criteria report one line each at the end of the session
ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def acceptance():
    def record(number: int, ok: bool, detail: str) -> None:
        ACCEPTANCE[number] = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
