"""Radial functions on panel grids, their d-dimensional Fourier transforms,
V^s norms and tail-decay checks.

With the normalization f^(xi) = int f(x) e^{-2 pi i <x, xi>} dx, a radial
function has radial transform

    f^(rho) = 2 pi rho^{1-d/2} int_0^inf f(r) J_{d/2-1}(2 pi r rho) r^{d/2} dr.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import gamma, jv

from .errors import ConfigError, GridTooShort, OscillationBudgetExceeded, TailNotNegligible
from .grids import PanelGrid

PROVENANCE = ("analytic", "table", "reconstructed")


def sphere_area(d: int) -> float:
    """Surface area of the unit sphere S^{d-1} (2 for d = 1)."""
    return float(2 * np.pi ** (d / 2) / gamma(d / 2))


@dataclass
class VsParams:
    s: float = 1.0
    d: int = 1

    def __post_init__(self):
        if self.s < 1:
            raise ConfigError("V^s needs s >= 1")
        if int(self.d) != self.d or self.d < 1:
            raise ConfigError("dimension must be a positive integer")


@dataclass
class RadialFunction:
    d: int
    grid: PanelGrid
    values: np.ndarray
    hat_values: np.ndarray | None = None
    provenance: str = "analytic"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ConfigError("dimension must be a positive integer")
        if self.provenance not in PROVENANCE:
            raise ConfigError(f"provenance must be one of {PROVENANCE}")
        self.values = np.asarray(self.values)
        if self.values.shape != (len(self.grid),):
            raise ConfigError("values do not match the grid")
        if self.hat_values is not None:
            self.hat_values = np.asarray(self.hat_values)
            if self.hat_values.shape != (len(self.grid),):
                raise ConfigError("hat_values do not match the grid")

    @classmethod
    def from_callable(cls, d, fn, grid: PanelGrid, hat_fn=None, provenance="analytic"):
        r = grid.nodes
        return cls(d, grid, fn(r), None if hat_fn is None else hat_fn(r), provenance)

    @property
    def r(self) -> np.ndarray:
        return self.grid.nodes

    def __call__(self, x) -> np.ndarray:
        return self.grid.interp(self.values, x)

    def hat(self, x) -> np.ndarray:
        if self.hat_values is None:
            raise ConfigError("transform values not available")
        return self.grid.interp(self.hat_values, x)

    def swapped(self) -> "RadialFunction":
        """The function f^ with transform f (radial functions are even)."""
        if self.hat_values is None:
            raise ConfigError("transform values not available")
        return replace(self, values=self.hat_values, hat_values=self.values)

    def with_hat(self, **kw) -> "RadialFunction":
        if self.hat_values is not None:
            return self
        return replace(self, hat_values=radial_fourier(self, **kw).values)

    def __add__(self, other: "RadialFunction") -> "RadialFunction":
        _check_same(self, other)
        hat = None
        if self.hat_values is not None and other.hat_values is not None:
            hat = self.hat_values + other.hat_values
        return RadialFunction(self.d, self.grid, self.values + other.values, hat, "reconstructed")

    def __sub__(self, other: "RadialFunction") -> "RadialFunction":
        return self + (-1.0) * other

    def __rmul__(self, c) -> "RadialFunction":
        hat = None if self.hat_values is None else c * self.hat_values
        return replace(self, values=c * self.values, hat_values=hat)

    def sup(self, r_max: float | None = None) -> float:
        mask = slice(None) if r_max is None else self.r <= r_max
        return float(np.max(np.abs(self.values[mask])))


def _check_same(f: RadialFunction, g: RadialFunction):
    if f.d != g.d or f.grid != g.grid:
        raise ConfigError("radial functions live on different grids or dimensions")


def bessel_ratio(nu: float, x) -> np.ndarray:
    """x^{-nu} J_nu(x), continuous at x = 0."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-6
    xs = np.where(small, 1.0, x)
    val = jv(nu, xs) / xs**nu
    lead = 1 / (2**nu * gamma(nu + 1))
    return np.where(small, lead * (1 - x**2 / (4 * (nu + 1))), val)


def tail_estimate(f_vals: np.ndarray, r: np.ndarray, d: int, fraction: float = 0.1) -> float:
    """Bound on |S^{d-1}| int_R^inf |f| r^{d-1} dr by an exponential fit to the last samples.

    Contributes to error bars only.
    """
    m = max(4, int(len(r) * fraction))
    rr, ff = r[-m:], np.abs(f_vals[-m:])
    R = r[-1]
    if np.all(ff < 1e-300):
        return 0.0
    env = np.maximum.accumulate(ff[::-1])[::-1]
    env = np.maximum(env, 1e-300)
    slope, icpt = np.polyfit(rr, np.log(env), 1)
    if slope >= 0:
        return np.inf
    c = -slope
    a = np.exp(icpt)
    # int_R^inf a e^{-c r} r^{d-1} dr <= a e^{-cR} R^{d-1} / c * (1 + (d-1)/(cR))^{d-1}
    bound = a * np.exp(-c * R) * R ** (d - 1) / c * (1 + (d - 1) / (c * R)) ** max(d - 1, 0)
    return sphere_area(d) * float(bound)


def _refined_nodes(grid: PanelGrid, split: int):
    """Gauss-Legendre nodes of ``grid.order`` + 4 points on each panel cut into ``split`` parts."""
    b = np.asarray(grid.breaks)
    sub = (b[:-1, None] + np.diff(b)[:, None] * np.arange(split + 1)[None, :] / split)
    br = np.unique(sub.ravel())
    x, w = np.polynomial.legendre.leggauss(grid.order + 4)
    lo, hi = br[:-1, None], br[1:, None]
    h = 0.5 * (hi - lo)
    return (lo + h * (x + 1)).ravel(), (h * w).ravel()


def radial_fourier(f: RadialFunction, out_r=None, tol: float = 1e-9, max_split: int = 64,
                   check_tail: bool = True) -> RadialFunction:
    """Radial d-dimensional Fourier transform, sampled on f's grid (or at ``out_r``).

    f is carried to a refined Gauss-Legendre rule by panel interpolation; panels
    are split until each sub-panel covers at most half an oscillation of the
    Bessel kernel at the largest output radius.
    """
    d = f.d
    nu = d / 2 - 1
    rho = f.r if out_r is None else np.asarray(out_r, dtype=float)
    tail = tail_estimate(f.values, f.r, d)
    if check_tail and tail > tol:
        raise TailNotNegligible(f"mass beyond r={f.grid.r_max:g} estimated at {tail:.2e}")
    width = max(np.diff(f.grid.breaks))
    split = max(1, int(np.ceil(2 * rho.max() * width)))
    if split > max_split:
        raise OscillationBudgetExceeded(f"needs {split} sub-panels per panel (max {max_split})")
    x, w = _refined_nodes(f.grid, split)
    fx = f.grid.interp(f.values, x)
    # f^(rho) = 2 pi int f(r) r^{d-1} (2 pi)^nu (2 pi r rho)^{-nu} J_nu(2 pi r rho) dr
    kern = bessel_ratio(nu, 2 * np.pi * rho[:, None] * x[None, :])
    out = 2 * np.pi * (2 * np.pi) ** nu * (kern @ (w * fx * x ** (d - 1)))
    if np.isrealobj(f.values):
        out = out.real
    if out_r is not None:
        return out
    res = RadialFunction(d, f.grid, out, f.values, f.provenance)
    res.meta["tail_error"] = tail
    return res


def weighted_l1(values: np.ndarray, grid: PanelGrid, d: int, s: float) -> float:
    """|S^{d-1}| int |g(r)| (1 + r^s) r^{d-1} dr by the grid rule."""
    r = grid.nodes
    return sphere_area(d) * float(np.sum(grid.weights * np.abs(values) * (1 + r**s) * r ** (d - 1)))


def vs_norm(f: RadialFunction, p: VsParams | None = None, with_error: bool = False, **kw):
    """||f m_s||_1 + ||f^ m_s||_1 with m_s(x) = 1 + |x|^s, integrals in polar form."""
    p = p or VsParams(1.0, f.d)
    if p.d != f.d:
        raise ConfigError("VsParams dimension differs from the function's")
    g = f.with_hat(**kw)
    val = weighted_l1(g.values, g.grid, g.d, p.s) + weighted_l1(g.hat_values, g.grid, g.d, p.s)
    if not with_error:
        return val
    R = g.grid.r_max
    err = (tail_estimate(g.values, g.r, g.d) + tail_estimate(g.hat_values, g.r, g.d)) * (1 + R**p.s)
    if not np.isfinite(err):
        raise TailNotNegligible("V^s tail does not decay on the grid")
    return val, err


@dataclass
class DecayReport:
    s: float
    d: int
    required: float
    exponent_f: float
    exponent_hat: float
    passed: bool

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return (f"{tag} decay s={self.s:g} d={self.d} required>={self.required:.4g} "
                f"measured f={self.exponent_f:.4g} hat={self.exponent_hat:.4g}")


def tail_exponent(r: np.ndarray, values: np.ndarray, floor: float = 1e-13, window: float = 0.5) -> float:
    """Fitted a in |g| ~ r^{-a} over the outer part of the grid; inf for super-polynomial decay."""
    env = np.maximum.accumulate(np.abs(values)[::-1])[::-1]
    peak = env.max()
    if peak == 0:
        return np.inf
    outer = r >= window * r[-1]
    sel = outer & (env > floor * peak) & (r > 0)
    if sel.sum() < 4:
        # decayed below the floor inside the grid: faster than any fitted power
        if env[outer].max() <= floor * peak:
            return np.inf
        raise GridTooShort("too few resolved tail samples for a power fit")
    slope = np.polyfit(np.log(r[sel]), np.log(env[sel]), 1)[0]
    return float(-slope)


def decay_check(f: RadialFunction, p: VsParams | None = None, slack: float = 0.1) -> DecayReport:
    """Compare the tail decay of |f| and |f^| with the power r^{-s/(d+1)}."""
    p = p or VsParams(1.0, f.d)
    if not np.any(f.values != 0):
        raise ConfigError("decay check needs a nonzero function")
    if f.grid.r_max < 4:
        raise GridTooShort("grid too short for a tail fit")
    g = f.with_hat(check_tail=False) if f.hat_values is None else f
    req = p.s / (p.d + 1)
    ef = tail_exponent(g.r, g.values)
    eh = tail_exponent(g.r, g.hat_values)
    return DecayReport(p.s, p.d, req, ef, eh, bool(min(ef, eh) >= req - slack))
