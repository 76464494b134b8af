import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fourier_interp.errors import ConfigError
from fourier_interp.function_spaces import RadialFunction
from fourier_interp.grids import PanelGrid
from fourier_interp.hup import HyperbolaCrossData
from fourier_interp.interp_radial import NodeData, PerturbationProfile
from fourier_interp.io import (read_basis_table, read_cross_data, read_node_data, read_profile,
                               read_radial_function, read_sphere_perturbation, write_basis_table,
                               write_cross_data, write_node_data, write_profile, write_radial_function,
                               write_sphere_perturbation)
from fourier_interp.nonradial import SpherePerturbation
from fourier_interp.radial_basis import BasisTable

GRID = PanelGrid.uniform(2.0, 0.5, 6)
finite = st.floats(-1e300, 1e300, allow_nan=False)


@settings(max_examples=20, deadline=None)
@given(vals=arrays(float, (3, len(GRID)), elements=finite), y=st.floats(1e-3, 2))
def test_basis_table_round_trip(tmp_path_factory, vals, y):
    path = tmp_path_factory.mktemp("io") / "b.txt"
    tab = BasisTable(1.5, -1, 2, GRID, vals, y, {"max_imag": 1e-12, "samples": 96})
    write_basis_table(tab, path)
    back = read_basis_table(path)
    assert np.array_equal(back.values, tab.values) and back.y == y
    assert back.k == 1.5 and back.sign == -1 and back.grid == GRID
    assert back.meta == tab.meta


def test_basis_table_header(tmp_path):
    path = tmp_path / "b.txt"
    write_basis_table(BasisTable(0.5, 1, 0, GRID, np.ones((1, len(GRID))), 0.5), path)
    assert path.read_text().startswith("# k=0.5 eps=+1 n_max=0 y=0.5")


def test_basis_table_bad_header(tmp_path):
    path = tmp_path / "b.txt"
    path.write_text("# k=0.5 n_max=0\n0 1\n")
    with pytest.raises(ConfigError):
        read_basis_table(path)


def test_radial_function_round_trip(tmp_path):
    f = RadialFunction.from_callable(3, lambda r: np.exp(-r**2), GRID, lambda r: np.cos(r) / 3)
    write_radial_function(f, tmp_path / "f.txt")
    g = read_radial_function(tmp_path / "f.txt")
    assert g.d == 3 and np.array_equal(g.values, f.values) and np.array_equal(g.hat_values, f.hat_values)


def test_profile_round_trip(tmp_path):
    p = PerturbationProfile.random(4, 1e-3, 20, seed=3)
    write_profile(p, tmp_path / "p.txt")
    q = read_profile(tmp_path / "p.txt")
    assert np.array_equal(p.eps, q.eps) and np.array_equal(p.eps_hat, q.eps_hat)
    assert (q.d, q.s, q.eta, q.delta) == (p.d, p.s, p.eta, p.delta)


def test_node_data_round_trip(tmp_path):
    n = NodeData(2, np.linspace(0, 1, 6), np.linspace(1, 2, 6), 5)
    write_node_data(n, tmp_path / "n.txt")
    m = read_node_data(tmp_path / "n.txt")
    assert m.d == 2 and np.array_equal(m.f_vals, n.f_vals) and np.array_equal(m.fhat_vals, n.fhat_vals)


def test_cross_round_trip(tmp_path):
    eps, eh = HyperbolaCrossData.perturbation(1e-3, 10, seed=2)
    c = HyperbolaCrossData(np.arange(11.0), -np.arange(11.0), eps, eh, 1e-3)
    write_cross_data(c, tmp_path / "c.txt")
    back = read_cross_data(tmp_path / "c.txt")
    assert np.array_equal(back.eps, eps) and np.array_equal(back.mu_hat_y, c.mu_hat_y)


def test_sphere_perturbation_round_trip(tmp_path):
    p = SpherePerturbation.random(3, 0.02, 4)
    write_sphere_perturbation(p, tmp_path / "s.txt")
    q = read_sphere_perturbation(tmp_path / "s.txt")
    assert np.array_equal(p.eps_coeffs, q.eps_coeffs) and np.array_equal(p.eps0_hat, q.eps0_hat)
    assert q.delta == p.delta and q.degree == p.degree


def test_kind_checked(tmp_path):
    write_profile(PerturbationProfile.zero(3), tmp_path / "p.txt")
    with pytest.raises(ConfigError):
        read_cross_data(tmp_path / "p.txt")
