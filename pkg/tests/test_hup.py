import numpy as np
import pytest
from scipy.integrate import quad

from fourier_interp.errors import (AccuracyNotReached, BudgetExceeded, ConfigError, ParityViolation,
                                   TotalIntegralNonzero)
from fourier_interp.function_spaces import RadialFunction, radial_fourier
from fourier_interp.grids import PanelGrid
from fourier_interp.hup import (HyperbolaCrossData, LineSamples, OddProfile, alpha, antiderivative_G, g_from_f,
                                hup_check, mu_hat_axis, node_values_from_cross, phi_by_parts, phi_eval,
                                phi_hat_eval)


@pytest.fixture(scope="module")
def pair():
    f = OddProfile.gaussian_pair()
    g = g_from_f(f)
    return f, g, antiderivative_G(g)


@pytest.fixture(scope="module")
def cross(pair):
    eps, eps_hat = HyperbolaCrossData.perturbation(1e-3, 150, seed=0)
    return HyperbolaCrossData.from_profile(pair[0], eps, eps_hat, 1e-3)


def analytic_g(f):
    a, b, c = f.meta["a"], f.meta["b"], f.meta["c"]
    return lambda t: alpha(t) * (t * np.exp(-a * t * t) - c * t * np.exp(-b * t * t))


def test_alpha():
    assert alpha(0.0) == 0.0
    assert alpha(2.0) == pytest.approx(2 * np.sqrt(17))
    assert alpha(-1.5) == -alpha(1.5)


def test_line_samples_need_odd_count():
    with pytest.raises(ConfigError):
        LineSamples(np.zeros(100))
    with pytest.raises(ConfigError):
        LineSamples(np.zeros(21))


def test_gaussian_pair_is_odd_and_balanced(pair):
    f, g, G = pair
    assert f.is_odd and g.parity_error(1) == 0
    assert abs(G.meta["total"]) <= 1e-8
    assert G.parity_error(-1) == 0 and G.values[G.values.size // 2] == 0


def test_parity_violation():
    p = OddProfile.from_callable(lambda t: t * np.exp(-t * t) + 0.1 * np.exp(-t * t))
    with pytest.raises(ParityViolation):
        g_from_f(p)


def test_unbalanced_profile_rejected():
    p = OddProfile.from_callable(lambda t: t * np.exp(-t * t))
    with pytest.raises(TotalIntegralNonzero):
        antiderivative_G(g_from_f(p))


def test_zero_pipeline():
    g = g_from_f(OddProfile.zero())
    G = antiderivative_G(g)
    assert not G.values.any()
    r = np.array([0.0, 0.5, 2.0])
    assert not np.any(phi_eval(G, r)) and not np.any(phi_hat_eval(G, r))
    assert not np.any(mu_hat_axis(g, "x", r)) and not np.any(mu_hat_axis(g, "y", r))


def test_antiderivative_matches_quadrature(pair):
    f, _, G = pair
    ga = analytic_g(f)
    for x in (-3.0, -0.7, 0.4, 2.2):
        ref = quad(ga, -np.inf, x, epsabs=1e-13, epsrel=1e-13)[0]
        assert G.at(x) == pytest.approx(ref, abs=1e-10)


@pytest.mark.parametrize("v", [0.0, 0.8, 1.0, 3.0, 7.5])
def test_mu_hat_x_axis_against_fourier_quadrature(pair, v):
    f, g, _ = pair
    ref = 2 * quad(analytic_g(f), 0, np.inf, weight="cos", wvar=np.pi * v)[0] if v else \
        2 * quad(analytic_g(f), 0, np.inf)[0]
    assert mu_hat_axis(g, "x", v)[0] == pytest.approx(ref, abs=1e-10)


@pytest.mark.parametrize("v", [0.5, 1.0, 3.0, 7.5, 40.0])
def test_mu_hat_y_axis_against_fourier_quadrature(pair, v):
    f, g, _ = pair
    ga = analytic_g(f)
    # u = 1 / tau turns e^{pi i v / tau} into a Fourier weight on the half-line
    integrand = lambda u: ga(1 / u) / u**2 if u > 0.05 else 0.0  # g(1/u) < e^-400 below
    ref = 2 * quad(integrand, 0, np.inf, weight="cos", wvar=np.pi * v, limlst=200)[0]
    assert mu_hat_axis(g, "y", v)[0] == pytest.approx(ref, abs=1e-9)


def test_mu_hat_axis_name():
    with pytest.raises(ConfigError):
        mu_hat_axis(g_from_f(OddProfile.zero()), "z", 1.0)


def test_phi_two_routes(pair):
    _, g, G = pair
    r = np.linspace(0, 6, 121)
    val, info = phi_eval(G, r, return_info=True)
    assert np.max(np.abs(val - info["fft"])) <= 1e-7
    parts = phi_by_parts(g, r[1:])
    assert np.max(np.abs(val[1:] - parts)) <= 1e-7


def test_phi_refuses_beyond_resolution(pair):
    with pytest.raises(AccuracyNotReached):
        phi_eval(pair[2], [14.0])


def test_phi_on_finer_grid(pair):
    fine = OddProfile.gaussian_pair(n_points=8193)
    Gf = antiderivative_G(g_from_f(fine))
    r = np.linspace(0, 4, 41)
    assert np.max(np.abs(phi_eval(pair[2], r) - phi_eval(Gf, r))) <= 1e-10


def test_phi_purely_imaginary(pair):
    r = np.linspace(0, 4, 41)
    assert not np.any(phi_eval(pair[2], r).real)
    assert not np.any(phi_hat_eval(pair[2], r).real)


def test_phi_hat_against_four_dimensional_transform(pair):
    _, g, G = pair
    grid = PanelGrid.uniform(8.0, 0.25, 12)
    psi = RadialFunction(4, grid, (-1j * phi_eval(G, grid.nodes)).real)
    hankel = radial_fourier(psi).values
    rho = grid.nodes
    direct, info = phi_hat_eval(G, rho, g=g, return_info=True)
    assert np.max(np.abs((-1j * direct).real - hankel)) <= 1e-5
    assert info["route_gap"] <= 1e-5


def test_cross_node_values_match_direct(pair, cross):
    G = pair[2]
    vx, vy = cross.nodes()
    psi, psih = node_values_from_cross(cross)
    assert psi[0] == 0 and psih[0] == 0
    assert np.max(np.abs(psi - (-1j * phi_eval(G, np.sqrt(vx))).real)) <= 1e-9
    assert np.max(np.abs(psih - (-1j * phi_hat_eval(G, np.sqrt(vy))).real)) <= 1e-9


def test_cross_data_validation():
    eps = np.array([0.0, 1e-3, 0.0])
    with pytest.raises(ConfigError):
        HyperbolaCrossData(np.zeros(3), np.zeros(3), eps, np.zeros(3), delta=1e-4)
    with pytest.raises(ConfigError):
        HyperbolaCrossData(np.zeros(3), np.zeros(3), np.array([1e-9, 0, 0]), np.zeros(3), delta=1.0)


def test_cross_profile_fits_radial_envelope(cross):
    cross.profile().validate(4)


def test_end_to_end_reconstruction(pair, cross, cache):
    rep = hup_check(cross, pair[0], cache=cache)
    assert rep.verdict == "reconstructed", rep.lines()
    assert rep.norms["discrepancy"] <= 1e-3


def test_zero_function_certified(cache):
    f = OddProfile.zero()
    eps, eps_hat = HyperbolaCrossData.perturbation(1e-3, 150, seed=1)
    rep = hup_check(HyperbolaCrossData.from_profile(f, eps, eps_hat, 1e-3), f, cache=cache)
    assert rep.verdict == "zero"
    assert max(rep.norms.values()) <= 1e-8


def test_forced_zero_data_flagged(pair, cross, cache):
    rep = hup_check(cross.zeroed(), pair[0], cache=cache)
    assert rep.verdict == "inconsistent" and not rep.passed
    assert rep.norms["discrepancy"] > 1e-3


def test_budget_cap(pair, cross, cache):
    with pytest.raises(BudgetExceeded):
        hup_check(cross, pair[0], cache=cache, max_budget=1e-3)
