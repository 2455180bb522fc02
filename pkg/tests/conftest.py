import numpy as np
import pytest

from srde.data_io import SyntheticSpec, generate


def two_gaussians(n_per_class, seed, means=((0.0, 0.0), (5.0, 5.0)), labels=("a", "b")):
    """Equal-size classes drawn from unit-covariance Gaussians, seeded per class."""
    pts, labs = [], []
    for i, (mu, lab) in enumerate(zip(means, labels)):
        data, _ = generate(SyntheticSpec("gaussian", len(mu), n_per_class, seed + i, mean=mu))
        pts.append(data.points)
        labs += [lab] * n_per_class
    return np.vstack(pts), np.array(labs)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
