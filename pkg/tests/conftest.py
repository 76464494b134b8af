import os
from pathlib import Path

import pytest

from fourier_interp.grids import PanelGrid
from fourier_interp.radial_basis import TableCache

# Basis tables are expensive; they persist across runs in the user cache unless
# FOURIER_INTERP_CACHE points elsewhere.
CACHE_DIR = Path(os.environ.get("FOURIER_INTERP_CACHE", Path.home() / ".cache" / "fourier_interp"))

SMALL_GRID = PanelGrid.uniform(8.0, 0.25, 12)
SMALL_N = 12


@pytest.fixture(scope="session")
def cache():
    return TableCache(CACHE_DIR)


@pytest.fixture(scope="session")
def small_tables(cache):
    """b tables for k = 1/2, 1, 2 with n <= 12 on [0, 8]."""
    return {(k, s): cache.get(k, s, SMALL_N, SMALL_GRID) for k in (0.5, 1.0, 2.0) for s in (1, -1)}


@pytest.fixture(scope="session")
def basis4(cache):
    """(a, a~) for d = 4, n <= 150 on [0, 16]."""
    from fourier_interp.interp_radial import RadialBasis

    return RadialBasis.load(4, 150, cache=cache)


@pytest.fixture(scope="session")
def harmonic3(cache):
    """Basis pairs in dimension 3 + 2m for m <= 6, n <= 8."""
    from fourier_interp.nonradial import HarmonicTables

    return HarmonicTables(3, 6, 8, cache=cache)


ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Records one PASS/FAIL line per criterion, printed at the end of the run."""
    lines = request.config.stash.setdefault(ACCEPTANCE_KEY, [])

    def record(number: int, title: str, passed: bool, detail: str):
        line = f"{'PASS' if passed else 'FAIL'} criterion {number:2d} {title}: {detail}"
        lines.append((number, line))
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
