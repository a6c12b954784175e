"""Shared fixtures: the alphabets and environments the suite keeps reusing."""
import pytest
from hypothesis import HealthCheck, settings

from chainfrac import (
    EnvironmentSpec,
    IIDLaw,
    PeriodicLaw,
    lennard_jones,
    scaled_shifted,
)

settings.register_profile(
    "suite",
    max_examples=25,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def lj():
    return lennard_jones()


@pytest.fixture(scope="session")
def half_lj(lj):
    """Same well location, half the depth."""
    return scaled_shifted(lj, scale=1.0, depth_scale=0.5)


@pytest.fixture(scope="session")
def long_lj(lj):
    """Ground state stretched from 1 to 1.2."""
    return scaled_shifted(lj, scale=1.2, depth_scale=1.0)


@pytest.fixture(scope="session")
def homog_env(lj):
    return EnvironmentSpec(law=IIDLaw(weights=(1.0,)), alphabet=(lj,))


@pytest.fixture(scope="session")
def half_env(lj, half_lj):
    """Two letters, equal ground states, depths 1 and 0.5."""
    return EnvironmentSpec(law=IIDLaw(weights=(0.5, 0.5)), alphabet=(lj, half_lj))


@pytest.fixture(scope="session")
def mix_env(lj, long_lj):
    """Two letters with distinct ground states 1 and 1.2."""
    return EnvironmentSpec(law=IIDLaw(weights=(0.5, 0.5)), alphabet=(lj, long_lj))


@pytest.fixture(scope="session")
def periodic_env(lj, long_lj):
    """Deterministic alternation of the 1 / 1.2 ground-state letters."""
    return EnvironmentSpec(law=PeriodicLaw(pattern=(0, 1)), alphabet=(lj, long_lj))
