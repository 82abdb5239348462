import warnings

import numpy as np
import pytest
from hypothesis import settings

warnings.filterwarnings("ignore", message=".*TBB threading layer.*")

from divcurl.grid import build_ball_domain  # noqa: E402

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


@pytest.fixture(scope="session")
def ball16():
    return build_ball_domain(1.0, 16)


@pytest.fixture(scope="session")
def ball24():
    return build_ball_domain(1.0, 24)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# one line per acceptance criterion, filled by test_acceptance and printed at the end
ACCEPTANCE_LINES: dict[str, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=lambda k: (int(k.rstrip("ab")), k)):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
