import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from morsecomb.symspace import random_rotation

settings.register_profile(
    "default",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

seeds = st.integers(min_value=0, max_value=2**32 - 1)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def _logs(rng, d, radius):
    a = rng.standard_normal(d)
    a -= a.mean()
    return a * (radius * rng.random() / np.linalg.norm(a))


def spd(seed, d=3, radius=3.0):
    """Random point at distance <= radius from the identity."""
    rng = np.random.default_rng(seed)
    k = random_rotation(rng, d)
    return (k * np.exp(_logs(rng, d, radius))) @ k.T


def element(seed, d=3, radius=2.0):
    """Random k1 exp(a) k2 with |a| <= radius."""
    rng = np.random.default_rng(seed)
    k1, k2 = random_rotation(rng, d), random_rotation(rng, d)
    return (k1 * np.exp(_logs(rng, d, radius))) @ k2


def diag_point(*logs):
    return np.diag(np.exp(np.asarray(logs, dtype=float)))


# one line per acceptance criterion, shown at the end of every run
ACCEPTANCE = {}


def record_criterion(number, ok, detail):
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[number] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
