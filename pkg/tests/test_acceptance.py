"""Acceptance criteria, one test each, at the stated tolerances.

Every test records a single PASS/FAIL line, repeated in the terminal summary
under "acceptance criteria".
"""
import time

import numpy as np
import pytest

from fourier_interp import checks
from fourier_interp.grids import PanelGrid
from fourier_interp.hup import (HyperbolaCrossData, OddProfile, antiderivative_G, g_from_f, hup_check,
                                phi_by_parts, phi_eval, phi_hat_eval)
from fourier_interp.function_spaces import RadialFunction, radial_fourier
from fourier_interp.interp_radial import (NodeData, PerturbationProfile, RadialBasis, budget, interpolate,
                                          reconstruct, threshold_delta)
from fourier_interp.nonradial import (SpherePerturbation, double_series_eval, sphere_rule,
                                      uniqueness_harness, zonal_Z)
from fourier_interp.radial_basis import bound_report

pytestmark = pytest.mark.slow

KS = (0.5, 1.0, 1.5, 2.0, 2.5)
SIGNS = (1, -1)
R3 = np.linspace(0.0, 3.0, 301)


def worst(results):
    return max(results, key=lambda r: r.residual / r.tol)


def test_criterion_01_functional_equation(acceptance):
    t0 = time.perf_counter()
    res = [checks.functional_equation(k, s, tol=1e-8) for k in KS for s in SIGNS]
    secs = time.perf_counter() - t0
    w = worst(res)
    ok = all(r.passed for r in res) and secs <= 120
    acceptance(1, "functional equation", ok,
               f"max residual/(1+|F|)={max(r.residual for r in res):.2e} (tol 1e-8, worst {w.name}), "
               f"{len(res)} (k, eps) x 10 points x 5 radii, {secs:.1f}s (limit 120s)")
    assert ok


def test_criterion_02_periodicity_and_height(acceptance):
    per = [checks.periodicity(k, s, tol=1e-9) for k in KS for s in SIGNS]
    hgt = [checks.height_independence(k, s, tol=1e-8) for k in KS for s in SIGNS]
    ok = all(r.passed for r in per + hgt)
    acceptance(2, "two-periodicity and height independence", ok,
               f"periodicity max={max(r.residual for r in per):.2e} (tol 1e-9); "
               f"heights 1.5 vs 2.5, n<=2 max={max(r.residual for r in hgt):.2e} (tol 1e-8)")
    assert ok


def test_criterion_03_kronecker_structure(acceptance, small_tables):
    literal = [checks.kronecker_d1(small_tables[0.5, 1], small_tables[0.5, -1], n_top=8, m_from=0)]
    literal += [checks.single_node(small_tables[k, s], n_top=6, m_top=12, m_from=0)
                for k in (1.0, 2.0) for s in SIGNS]
    away = [checks.kronecker_d1(small_tables[0.5, 1], small_tables[0.5, -1], n_top=8, m_from=1)]
    away += [checks.single_node(small_tables[k, s], n_top=6, m_top=12, m_from=1)
             for k in (1.0, 2.0) for s in SIGNS]
    ok = all(r.passed for r in literal)
    failing = ", ".join(f"{r.name} ({r.detail})" for r in literal if not r.passed)
    acceptance(3, "Kronecker and single-node structure", ok,
               f"0<=m: max={max(r.residual for r in literal):.2e} (tol 1e-6)"
               + (f", fails for {failing}" if failing else "")
               + f"; 1<=m: max={max(r.residual for r in away):.2e}")
    assert ok


def test_criterion_04_eigenfunctions(acceptance, small_tables):
    t0 = time.perf_counter()
    res = [checks.eigenfunction(small_tables[k, s], n_top=6, r_max=6.0, tol=1e-5)
           for k in (0.5, 1.0, 2.0) for s in SIGNS]
    secs = time.perf_counter() - t0
    ok = all(r.passed for r in res) and secs <= 300
    acceptance(4, "eigenfunctions of the radial transform", ok,
               f"d in 1,2,4, n<=6, r<=6: max={max(r.residual for r in res):.2e} (tol 1e-5), {secs:.1f}s")
    assert ok


def test_criterion_05_radial_interpolation(acceptance, cache):
    errs = {}
    for d in (1, 2, 3, 4):
        basis = RadialBasis.load(d, 150, cache=cache)
        for t in (1.0, 1.3):
            f = lambda r: np.exp(-np.pi * t * r**2)
            fh = lambda r: t ** (-d / 2) * np.exp(-np.pi * r**2 / t)
            data = NodeData.sample(d, f, fh, n_max=150)
            errs[d, t] = float(np.max(np.abs(interpolate(data, basis, R3) - f(R3))))
    w = max(errs, key=errs.get)
    ok = max(errs.values()) <= 1e-5
    acceptance(5, "radial interpolation exactness", ok,
               f"n_max=150, r<=3: max error={errs[w]:.2e} at d={w[0]} t={w[1]:g} (tol 1e-5)")
    assert ok


def test_criterion_06_realness_and_vanishing(acceptance, small_tables, cache):
    tables = list(small_tables.values())
    grid = RadialBasis.load(4, 150, cache=cache).grid
    tables += [cache.get(d / 2, s, 150, grid) for d in (1, 2, 3, 4) for s in SIGNS]
    res = [r for t in tables for r in checks.realness(t, tol=1e-9)]
    imag = max(r.residual for r in res if r.suite == "realness")
    below = max(r.residual for r in res if r.suite == "vanishing")
    ok = all(r.passed for r in res)
    acceptance(6, "realness and vanishing below nu", ok,
               f"{len(tables)} tables: max imaginary residue={imag:.2e}, max |b_n| for n<nu={below:.2e} (tol 1e-9)")
    assert ok


def test_criterion_07_decay_bounds(acceptance, cache):
    grid = PanelGrid.uniform(12.0, 0.25, 12)
    parts, ok = [], True
    for k in (0.5, 1.0, 2.0):
        plus, minus = cache.get(k, 1, 10, grid), cache.get(k, -1, 10, grid)
        for beta in (2 * k + 2, 2 * k + 4):
            rep = bound_report(k, beta, plus, minus, n_check=10)
            rates = np.concatenate([rep.rate[s][:7] for s in rep.rate])
            rates = rates[np.isfinite(rates)]
            good = rep.dominated and rates.size > 0 and bool(np.all(rates > 0))
            ok &= good
            parts.append(f"k={k:g} beta={beta:g} flagged={rep.flagged or 'none'} min c={rates.min():.3g}")
    acceptance(7, "decay bounds", ok, "; ".join(parts))
    assert ok


def test_criterion_08_perturbed_reconstruction(acceptance, basis4):
    t0 = time.perf_counter()
    shape = PerturbationProfile.alternating(4, 1e-3, 150, s=1.0, eta=0.5)
    delta = 0.5 * threshold_delta(shape, basis4)
    prof = shape.scaled(delta)
    q = budget(prof, basis4).value
    f = lambda r: np.exp(-np.pi * r**2)
    data = NodeData.sample(4, f, f, prof, 150)
    x, log = reconstruct(data, prof, basis4, q=q)
    err = float(np.max(np.abs(x(R3) - f(R3))))
    ratios = [r for r in log.ratios if np.isfinite(r)]
    top = max(ratios) if ratios else 0.0
    secs = time.perf_counter() - t0
    ok = log.converged and top <= q + 0.05 and err <= 1e-4 and secs <= 600
    acceptance(8, "perturbed radial reconstruction", ok,
               f"delta={delta:.3e} budget={q:.3f} max ratio={top:.3f} (<= budget+0.05), "
               f"{len(log.diffs)} steps, sup error={err:.2e} (tol 1e-4), {secs:.1f}s")
    assert ok


def test_criterion_09_nonradial(acceptance, harmonic3):
    d, m_top = 3, 6
    rule = sphere_rule(d, 2 * m_top)
    rng = np.random.default_rng(0)
    w1, w2 = (v / np.linalg.norm(v) for v in rng.normal(size=(2, d)))
    repro = 0.0
    for m in range(m_top + 1):
        z1 = zonal_Z(d, m, rule.points, w1)
        for m2 in range(m_top + 1):
            val = rule.weights @ (z1 * zonal_Z(d, m2, rule.points, w2))
            expect = zonal_Z(d, m, w2[None], w1)[0] if m == m2 else 0.0
            repro = max(repro, abs(val - expect))

    gauss = lambda p: np.exp(-np.pi * np.sum(p**2, -1))
    polys = [(0, lambda p: np.ones(len(p))), (1, lambda p: p[:, 2]),
             (2, lambda p: p[:, 0] * p[:, 1]), (2, lambda p: p[:, 0] ** 2 - p[:, 2] ** 2)]
    x = rng.normal(size=(20, 3))
    series = 0.0
    for deg, poly in polys:
        f = lambda p, P=poly: gauss(p) * P(p)
        fh = lambda p, P=poly, m=deg: (-1j) ** m * gauss(p) * P(p)
        vals, _ = double_series_eval(f, fh, x, harmonic3, m_top, 8)
        series = max(series, float(np.max(np.abs(vals - f(x)))))

    pert = SpherePerturbation.random(3, 0.02, 8)
    f = lambda p: gauss(p) * p[:, 2]
    fh = lambda p: -1j * gauss(p) * p[:, 2]
    _, rep = uniqueness_harness(f, fh, pert, harmonic3, m_top, rng.normal(size=(20, 3)))
    ok = repro <= 1e-8 and series <= 1e-4 and rep.error <= 1e-3 and rep.budget < 0.5 and rep.converged
    acceptance(9, "non-radial machinery", ok,
               f"reproducing kernel={repro:.2e} (tol 1e-8); double series={series:.2e} (tol 1e-4); "
               f"perturbed spheres error={rep.error:.2e} (tol 1e-3) at budget={rep.budget:.3f} (< 0.5)")
    assert ok


def test_criterion_10_hyperbola_pipeline(acceptance, cache, basis4):
    t0 = time.perf_counter()
    f = OddProfile.gaussian_pair()
    g = g_from_f(f)
    G = antiderivative_G(g)
    r = np.linspace(0.0, 6.0, 121)
    direct, info = phi_eval(G, r, return_info=True)
    routes = max(float(np.max(np.abs(direct - info["fft"]))),
                 float(np.max(np.abs(direct[1:] - phi_by_parts(g, r[1:])))))

    grid = PanelGrid.uniform(8.0, 0.25, 12)
    psi = RadialFunction(4, grid, (-1j * phi_eval(G, grid.nodes)).real)
    hankel = radial_fourier(psi).values
    transform_gap = float(np.max(np.abs((-1j * phi_hat_eval(G, grid.nodes)).real - hankel)))

    eps, eps_hat = HyperbolaCrossData.perturbation(1e-3, 150, seed=0)
    rep = hup_check(HyperbolaCrossData.from_profile(f, eps, eps_hat, 1e-3), f, basis=basis4)
    zero_f = OddProfile.zero()
    zrep = hup_check(HyperbolaCrossData.from_profile(zero_f, eps, eps_hat, 1e-3), zero_f, basis=basis4)
    zero_sup = max(zrep.norms.values())
    secs = time.perf_counter() - t0
    ok = (routes <= 1e-7 and transform_gap <= 1e-5 and rep.verdict == "reconstructed"
          and rep.norms["discrepancy"] <= 1e-3 and zrep.verdict == "zero" and zero_sup <= 1e-8 and secs <= 600)
    acceptance(10, "hyperbola uniqueness pipeline", ok,
               f"Phi routes={routes:.2e} (tol 1e-7); transform vs d=4 Hankel={transform_gap:.2e} (tol 1e-5); "
               f"reconstruction discrepancy={rep.norms['discrepancy']:.2e} (tol 1e-3); "
               f"zero data sup={zero_sup:.1e} (tol 1e-8), verdict={zrep.verdict}; {secs:.1f}s")
    assert ok
