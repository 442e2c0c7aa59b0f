import numpy as np
import pytest

from metropolis_epi import _backend
from metropolis_epi.fileio import bundled_data_path, load_dataset
from metropolis_epi.target import LogisticPosterior, Normal, Prior


@pytest.fixture(scope="session")
def leukemia():
    return load_dataset(bundled_data_path())


@pytest.fixture(scope="session")
def flat_target(leukemia):
    return LogisticPosterior(leukemia)


@pytest.fixture(scope="session")
def normal_target(leukemia):
    return LogisticPosterior(leukemia, Prior((Normal(0.0, 100.0), Normal(0.0, 0.5))))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


BACKENDS = ["python"] + (["compiled"] if _backend.HAVE_COMPILED else [])


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
