import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fourier_interp.errors import ConfigError, GridCoverage
from fourier_interp.grids import PanelGrid, default_r_grid


def test_default_grid_size():
    g = default_r_grid()
    assert len(g) == g.nodes.size == 384 and g.r_max == 8.0


@settings(max_examples=30, deadline=None)
@given(deg=st.integers(0, 11), x=st.floats(0, 3))
def test_polynomials_interpolated_exactly(deg, x):
    g = PanelGrid.uniform(3.0, 0.5, 12)
    p = lambda r: (r - 1.1) ** deg
    assert g.interp(p(g.nodes), [x])[0] == pytest.approx(p(x), abs=1e-11)


def test_nodes_reproduced():
    g = PanelGrid.uniform(2.0, 0.5, 6)
    v = np.sin(g.nodes)
    assert np.array_equal(g.interp(v, g.nodes), v)


def test_weights_integrate():
    g = PanelGrid.uniform(4.0, 0.25, 12)
    assert g.weights @ np.exp(-g.nodes) == pytest.approx(1 - np.exp(-4.0), rel=1e-14)


@pytest.mark.parametrize("grid", [PanelGrid.uniform(16.0, 0.25, 12), PanelGrid((0.0, 0.3, 1.0, 2.5), 8)])
def test_text_round_trip(grid):
    assert PanelGrid.from_text(grid.to_text()) == grid


def test_validation():
    with pytest.raises(ConfigError):
        PanelGrid((0.0, 1.0, 0.5))
    with pytest.raises(ConfigError):
        PanelGrid((0.0, 1.0), order=1)
    with pytest.raises(ConfigError):
        PanelGrid.from_text("cheb:1:2")
    with pytest.raises(GridCoverage):
        PanelGrid.uniform(1.0, 0.5).interp_matrix([1.5])
