"""Named numerical checks shared by ``fourier-interp verify`` and the test-suite.

Each check returns CheckResult records: a measured residual against a tolerance.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .function_spaces import RadialFunction, radial_fourier
from .generating import F_any, F_eval, F_eval_shifted, cocycle_rhs, slash_factor
from .grids import PanelGrid
from .kernels import nu_mu
from .radial_basis import BasisTable, assemble_a, coefficients


@dataclass
class CheckResult:
    suite: str
    name: str
    residual: float
    tol: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.residual) and self.residual <= self.tol)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        extra = f" {self.detail}" if self.detail else ""
        return f"{tag} {self.suite}/{self.name} residual={self.residual:.3e} tol={self.tol:.1e}{extra}"


FE_RADII = (0.0, 0.7, 1.0, float(np.sqrt(2)), 2.3)


def fe_points(count: int = 10) -> np.ndarray:
    """Points of the fundamental domain spread along its width, some near the arc."""
    x = np.linspace(-0.9, 0.9, count)
    return x + 1j * (np.sqrt(1 - x**2) + 0.15 + 0.25 * (np.arange(count) % 3))


def functional_equation(k, sign: int, taus=None, radii=FE_RADII, tol: float = 1e-8) -> CheckResult:
    """F(tau) - sign (tau/i)^-k F(-1/tau) against phi_r(tau) - sign (tau/i)^-k phi_r(-1/tau).

    F(tau) uses the arc contour and F(-1/tau) the shifted box contour, so the two
    sides come from different quadratures.
    """
    taus = fe_points() if taus is None else np.asarray(taus)
    r = np.asarray(radii, dtype=float)
    worst = 0.0
    for tau in taus:
        w = -1 / tau
        lhs = F_eval(k, sign, tau, r, kind="arc")
        other = F_eval_shifted(k, sign, w, r, y=tau.imag + 0.5)
        res = lhs - slash_factor(k, sign, tau) * other - cocycle_rhs(k, sign, tau, r)
        worst = max(worst, float(np.max(np.abs(res) / (1 + np.abs(lhs)))))
    return CheckResult("functional-equation", f"k={float(k):g} eps={sign:+d}", worst, tol,
                       f"points={len(taus)} radii={len(r)}")


def periodicity(k, sign: int, radii=FE_RADII, tol: float = 1e-9) -> CheckResult:
    """F(tau + 2) = F(tau) for pairs that reduce through different words."""
    r = np.asarray(radii, dtype=float)
    pairs = [-1 + 1.3j, -1 + 0.6j, -1.5 + 0.4j, -0.3 + 0.25j, 0.2 + 0.9j]
    worst = 0.0
    for tau in pairs:
        a, b = F_any(k, sign, tau, r), F_any(k, sign, tau + 2, r)
        worst = max(worst, float(np.max(np.abs(a - b) / (1 + np.abs(a)))))
    return CheckResult("periodicity", f"k={float(k):g} eps={sign:+d}", worst, tol, f"pairs={len(pairs)}")


def height_independence(k, eps: int, n_top: int = 2, heights=(1.5, 2.5), tol: float = 1e-8,
                        r_max: float = 3.0) -> CheckResult:
    """b_n extracted at two contour heights, n <= n_top.

    Sampling noise is amplified by e^{pi n y}; at y = 2.5 double precision leaves
    about 1e-9 at n = 2 and 1e-6 at n = 3.
    """
    grid = PanelGrid.uniform(r_max, 0.25, 12)
    tabs = [coefficients(k, eps, grid, n_top, y=y) for y in heights]
    res = float(np.max(np.abs(tabs[0].values - tabs[1].values)))
    return CheckResult("height-independence", f"k={float(k):g} eps={eps:+d}", res, tol,
                       f"heights={heights[0]:g},{heights[1]:g} n<={n_top}")


def realness(table: BasisTable, tol: float = 1e-9) -> list[CheckResult]:
    name = f"k={table.k:g} eps={table.sign:+d}"
    nu = nu_mu(table.k).nu(-table.sign)
    below = max(table.meta.get("below_nu_residual", 0.0), float(np.abs(table.values[:nu]).max()) if nu else 0.0)
    return [
        CheckResult("realness", name, float(table.meta.get("max_imag", np.nan)), tol),
        CheckResult("vanishing", name, below, tol, f"nu={nu}"),
    ]


def node_matrix(table: BasisTable, n_top: int, m_top: int) -> np.ndarray:
    """V[n, m] = b_n(sqrt m)."""
    m = np.arange(m_top + 1)
    return np.array([table(n, np.sqrt(m)) for n in range(n_top + 1)])


def kronecker_d1(plus: BasisTable, minus: BasisTable, n_top: int = 8, m_from: int = 0,
                 tol: float = 1e-6) -> CheckResult:
    """max |a_{1/2,n}(sqrt m) - delta_nm| over n <= n_top, m_from <= m <= n_top."""
    a, _ = assemble_a(plus, minus)
    V = node_matrix(a, n_top, n_top)
    res = np.abs(V - np.eye(n_top + 1))[:, m_from:]
    i, j = np.unravel_index(np.argmax(res), res.shape)
    return CheckResult("kronecker", f"d=1 m>={m_from}", float(res.max()), tol,
                       f"worst n={i} m={j + m_from}")


def single_node(table: BasisTable, n_top: int = 6, m_top: int = 12, m_from: int = 0,
                tol: float = 1e-6) -> CheckResult:
    """Each b_n with n >= nu is (numerically) nonzero at exactly one node sqrt m.

    The residual is the largest value at the other nodes; the detail line names
    the indices that break the pattern.
    """
    nu = nu_mu(table.k).nu(-table.sign)
    V = np.abs(node_matrix(table, n_top, m_top))[:, m_from:]
    worst, bad = 0.0, []
    for n in range(nu, n_top + 1):
        row = V[n].copy()
        top = int(np.argmax(row))
        row[top] = 0.0
        worst = max(worst, float(row.max()))
        if row.max() > tol:
            bad.append(n)
    detail = "breaks at n=" + ",".join(map(str, bad)) if bad else f"n={nu}..{n_top}"
    return CheckResult("single-node", f"k={table.k:g} eps={table.sign:+d} m>={m_from}", worst, tol, detail)


def eigenfunction(table: BasisTable, n_top: int = 6, r_max: float = 6.0, tol: float = 1e-5) -> CheckResult:
    """|| Hankel_d(b_n) - eps b_n ||_inf on [0, r_max]."""
    d = table.d
    r = table.r_grid
    sel = r <= r_max
    worst = 0.0
    for n in range(min(n_top, table.n_max) + 1):
        f = RadialFunction(d, table.grid, table.values[n], provenance="table")
        hat = radial_fourier(f, check_tail=False)
        worst = max(worst, float(np.max(np.abs(hat.values[sel] - table.sign * table.values[n][sel]))))
    return CheckResult("eigenfunction", f"d={d} eps={table.sign:+d}", worst, tol, f"n<={n_top}")
