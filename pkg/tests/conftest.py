"""Shared fixtures: the calibrated trap and cached original states."""

import pytest

from app.config import get_settings
from app.services.pipeline import original_states

A = 2.2


@pytest.fixture(autouse=True)
def fresh_settings():
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture(scope="session")
def a() -> float:
    return A


@pytest.fixture(scope="session")
def states_at():
    """Both original states at gamma, solved once per session."""
    cache = {}

    def get(gamma: float):
        if gamma not in cache:
            cache[gamma] = original_states(gamma, A)
        return cache[gamma]

    return get
