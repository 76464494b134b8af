from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import eval_gegenbauer

from fourier_interp.errors import ConfigError, NotContracting, QuadratureDegreeInsufficient
from fourier_interp.nonradial import (HarmonicExpansion, HarmonicTables, SpherePerturbation, apply_T_sphere,
                                      budget_sphere, dim_harmonic, double_series_eval, gegenbauer, kernel_Kn,
                                      neumann_sphere, real_harmonics, series_from_samples, sphere_rule,
                                      uniqueness_harness, zonal_Z)


def unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


def gauss3(p):
    return np.exp(-np.pi * np.sum(p**2, -1))


def test_gegenbauer_seeds():
    t = np.linspace(-1, 1, 7)
    assert np.all(gegenbauer(0, 0.7, t) == 1)
    assert np.allclose(gegenbauer(1, 0.7, t), 1.4 * t)
    assert gegenbauer(2, 0.5, 1.0) == pytest.approx(1.0, abs=1e-15)


@settings(max_examples=40, deadline=None)
@given(m=st.integers(0, 12), lam=st.floats(0.05, 4), t=st.floats(-1, 1))
def test_gegenbauer_matches_scipy(m, lam, t):
    assert gegenbauer(m, lam, t) == pytest.approx(eval_gegenbauer(m, lam, t), rel=1e-11, abs=1e-11)


def test_gegenbauer_limit_at_zero_parameter():
    t = 0.3
    assert gegenbauer(3, 0.0, t) == pytest.approx(2 / 3 * np.cos(3 * np.arccos(t)), abs=1e-14)


def test_dim_harmonic():
    assert dim_harmonic(3, 0) == 1 and dim_harmonic(3, 2) == 5
    assert all(dim_harmonic(2, m) == 2 for m in range(1, 8))
    assert all(dim_harmonic(3, m) == 2 * m + 1 for m in range(8))
    with pytest.raises(ConfigError):
        dim_harmonic(1, 2)


@pytest.mark.parametrize("d", [2, 3])
def test_zonal_basic_values(d):
    rng = np.random.default_rng(3)
    zeta, x = unit(rng.normal(size=d)), rng.normal(size=(5, d))
    assert np.all(zonal_Z(d, 0, x, zeta) == 1)
    for m in range(5):
        assert zonal_Z(d, m, zeta[None], zeta)[0] == pytest.approx(dim_harmonic(d, m), rel=1e-13)
    w = unit(rng.normal(size=d))
    assert zonal_Z(d, 1, w[None], zeta)[0] == pytest.approx(d * w @ zeta, rel=1e-13)


@pytest.mark.parametrize("d,m_top", [(3, 6), (2, 10)])
def test_zonal_reproduces(d, m_top):
    rule = sphere_rule(d, 2 * m_top)
    rng = np.random.default_rng(0)
    w1, w2 = unit(rng.normal(size=d)), unit(rng.normal(size=d))
    worst = 0.0
    for m in range(m_top + 1):
        z1 = zonal_Z(d, m, rule.points, w1)
        for m2 in range(m_top + 1):
            val = rule.weights @ (z1 * zonal_Z(d, m2, rule.points, w2))
            expect = zonal_Z(d, m, w2[None], w1)[0] if m == m2 else 0.0
            worst = max(worst, abs(val - expect))
    assert worst <= 1e-8


@pytest.mark.parametrize("d", [2, 3])
def test_real_harmonics_orthonormal_and_addition(d):
    rule = sphere_rule(d, 12)
    for m in range(5):
        Y = real_harmonics(d, m, rule.points)
        assert np.allclose((Y * rule.weights) @ Y.T, np.eye(dim_harmonic(d, m)), atol=1e-12)
    w = unit(np.arange(1, d + 1))
    Y, Yw = real_harmonics(d, 3, rule.points), real_harmonics(d, 3, w[None])
    assert np.allclose(zonal_Z(d, 3, rule.points, w), (Yw.T @ Y)[0], atol=1e-12)


def test_sphere_rule_degree_guard():
    with pytest.raises(QuadratureDegreeInsufficient):
        sphere_rule(3, 4).require(6)
    with pytest.raises(ConfigError):
        sphere_rule(4, 4)


def test_zonal_rejects_non_unit():
    with pytest.raises(ConfigError):
        zonal_Z(3, 1, np.ones((1, 3)), np.ones(3))


def test_kernel_at_origin_only_degree_zero(harmonic3):
    K, Kt = kernel_Kn(3, 2, np.zeros((1, 3)), np.eye(3)[2], harmonic3, m_top=6)
    assert K[0] == pytest.approx(harmonic3.a(0, 2, 0.0), abs=1e-14)
    assert Kt[0] == pytest.approx(harmonic3.a_tilde(0, 2, 0.0), abs=1e-14)


@pytest.mark.parametrize("deg,poly", [
    (0, lambda p: np.ones(len(p))),
    (1, lambda p: p[:, 2]),
    (2, lambda p: p[:, 0] * p[:, 1]),
    (2, lambda p: p[:, 0] ** 2 - p[:, 2] ** 2),
])
def test_double_series_gaussian_times_solid_harmonic(harmonic3, deg, poly):
    f = lambda p: gauss3(p) * poly(p)
    fh = lambda p: (-1j) ** deg * gauss3(p) * poly(p)
    x = np.random.default_rng(1).normal(size=(20, 3))
    vals, _ = double_series_eval(f, fh, x, harmonic3, 6, 8)
    assert np.max(np.abs(vals - f(x))) <= 1e-4


def test_zero_samples_give_zero(harmonic3):
    rule = sphere_rule(3, 16)
    z = [np.zeros(len(rule.weights))] * 8
    out = series_from_samples(z, z, 0.0, 0.0, harmonic3, rule, 6)
    assert all(not c.any() for c in out.comps + out.hat_comps)


def test_zero_perturbation_keeps_f(harmonic3):
    f = HarmonicExpansion.project(3, lambda p: gauss3(p) * p[:, 2], lambda p: -1j * gauss3(p) * p[:, 2],
                                  harmonic3.grid, 6)
    Tf = apply_T_sphere(f, SpherePerturbation.zero(3, 8), harmonic3)
    assert (Tf - f).v1_norm() == 0.0


def test_T_of_zero_is_zero(harmonic3):
    pert = SpherePerturbation.random(3, 0.02, 8)
    z = HarmonicExpansion.zeros(3, 6, harmonic3.grid)
    assert apply_T_sphere(z, pert, harmonic3).v1_norm() == 0.0


def test_zero_perturbation_budget(harmonic3):
    assert budget_sphere(SpherePerturbation.zero(3, 8), harmonic3, 6).measured == 0.0


def test_perturbation_envelope(harmonic3):
    pert = SpherePerturbation.random(3, 0.02, 8)
    pert.validate()
    bigger = replace(pert, eps_coeffs=1.5 * pert.eps_coeffs)
    with pytest.raises(ConfigError):
        bigger.validate()


def test_neumann_sphere_refuses_noncontracting(harmonic3):
    z = HarmonicExpansion.zeros(3, 6, harmonic3.grid)
    with pytest.raises(NotContracting):
        neumann_sphere(z, SpherePerturbation.zero(3, 8), harmonic3, 1.2, sphere_rule(3, 16), 8)


def test_perturbed_sphere_reconstruction_d3(harmonic3):
    pert = SpherePerturbation.random(3, 0.02, 8)
    f = lambda p: gauss3(p) * p[:, 2]
    fh = lambda p: -1j * gauss3(p) * p[:, 2]
    pts = np.random.default_rng(2).normal(size=(20, 3))
    _, rep = uniqueness_harness(f, fh, pert, harmonic3, 6, pts)
    assert rep.budget < 0.5 and rep.converged
    assert rep.error <= 1e-3 and rep.zero_data_sup == 0.0


def test_perturbed_sphere_reconstruction_d2_radial(cache):
    tables = HarmonicTables(2, 4, 8, cache=cache)
    pert = SpherePerturbation.random(2, 0.02, 8)
    g = lambda p: np.exp(-np.pi * np.sum(p**2, -1))
    pts = np.random.default_rng(4).normal(size=(20, 2))
    _, rep = uniqueness_harness(g, g, pert, tables, 4, pts)
    assert rep.budget < 0.5 and rep.converged
    assert rep.error <= 1e-3 and rep.zero_data_sup == 0.0
