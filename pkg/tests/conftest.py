import functools

import numpy as np
import pytest

from circspec import CircleMap, NoiseSpec, assemble, find_periodic_orbits

ACCEPTANCE_LINES = []


@functools.lru_cache(maxsize=None)
def operator_for(b, eps, n):
    return assemble(CircleMap.sine_circle(b), NoiseSpec.constant(1.0), eps, n)


@functools.lru_cache(maxsize=None)
def orbits_for(b, p_max):
    return tuple(find_periodic_orbits(CircleMap.sine_circle(b), p_max))


@pytest.fixture
def unit_noise():
    return NoiseSpec.constant(1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[0][2:])):
            terminalreporter.write_line(line)
