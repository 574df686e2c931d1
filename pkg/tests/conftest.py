import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", parent=settings.get_profile("default"), max_examples=200)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from helpers import Criterion
    if not Criterion.results:
        return
    terminalreporter.section("acceptance criteria")
    for tag, title, ok, detail in sorted(Criterion.results, key=lambda r: int(r[0][2:])):
        terminalreporter.write_line(f"{tag} {'PASS' if ok else 'FAIL'}  {title}: {detail}")
