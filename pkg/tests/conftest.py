import json
from pathlib import Path

import numpy as np
import pytest

from reslab.spectral import GridSpec, SpectralField

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def frozen():
    """Regression values measured once from independent oracles and then frozen."""
    return json.loads((FIXTURES / "frozen.json").read_text())


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def g16():
    return GridSpec(16)


def single_mode(grid, k, value=1.0, components=1):
    c = np.zeros((components,) + grid.shape, dtype=complex)
    c[(slice(None),) + grid.index_of(np.array(k))] = value
    return SpectralField(grid, c)


def brute_dft(samples, n):
    """Direct O(n^6) evaluation of (2pi/n)^3 sum_j f(x_j) exp(-i x_j . xi)."""
    x = 2 * np.pi * np.arange(n) / n
    k = np.fft.fftfreq(n, 1.0 / n)
    e = np.exp(-1j * np.outer(k, x))
    return (2 * np.pi / n) ** 3 * np.einsum("ai,bj,ck,ijk->abc", e, e, e, samples)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
