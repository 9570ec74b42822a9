import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from openset_ot import datagen
from openset_ot.ot_core import Dataset

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


def two_cluster(seed=0, n=200, far=(100.0, 100.0), var=0.1):
    """Source cluster at the origin; target = same cluster plus a far one."""
    rng = np.random.default_rng(seed)
    sd = np.sqrt(var)
    src = rng.normal(0.0, sd, (n, 2))
    tgt = np.vstack([rng.normal(0.0, sd, (n, 2)), rng.normal(far, sd, (n, 2))])
    truth = np.r_[np.zeros(n, bool), np.ones(n, bool)]
    return Dataset(src, np.ones(n, dtype=int)), Dataset(tgt), truth


@pytest.fixture
def cluster_pair():
    return two_cluster()


@pytest.fixture
def small_task():
    return datagen.open_set_task((1, 2), n_classes=3, n_per_class=60, noise=0.3, seed=3)
