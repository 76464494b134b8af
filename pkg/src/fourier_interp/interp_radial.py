"""Radial interpolation from square-root nodes, the perturbed sampling operator T
and its Neumann inversion.

Every function produced here lies in the span of the basis functions a_n and
a~_n.  Since the transform of a_n is a~_n and vice versa, the transform of such a
combination is obtained by swapping the two coefficient sequences, so f and f^
are both carried exactly on the grid without numerical Hankel transforms.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import (
    ConfigError,
    GridCoverage,
    NotContracting,
    Stagnation,
    TableRangeExceeded,
)
from .function_spaces import RadialFunction, VsParams, weighted_l1
from .grids import PanelGrid
from .kernels import nu_mu
from .radial_basis import BasisTable, TableCache


def reconstruction_grid() -> PanelGrid:
    """[0, 16] in 64 panels: covers every node sqrt(n + eps_n) for n <= 150 and the
    tails of a_n, a~_n for those n."""
    return PanelGrid.uniform(16.0, 0.25, 12)


@dataclass
class RadialBasis:
    """The pair (a_{d/2,n}, a~_{d/2,n}) on a common panel grid."""

    d: int
    a: np.ndarray  # (n_max + 1, len(grid))
    a_tilde: np.ndarray
    grid: PanelGrid
    meta: dict = field(default_factory=dict)

    @property
    def n_max(self) -> int:
        return self.a.shape[0] - 1

    @classmethod
    def from_tables(cls, a: BasisTable, a_tilde: BasisTable) -> "RadialBasis":
        if not isinstance(a.grid, PanelGrid):
            raise ConfigError("basis tables need a panel grid")
        return cls(a.d, a.values, a_tilde.values, a.grid, {"y": a.y})

    @classmethod
    def load(cls, d: int, n_max: int = 150, grid: PanelGrid | None = None,
             cache: TableCache | None = None) -> "RadialBasis":
        cache = cache or TableCache()
        grid = grid or reconstruction_grid()
        return cls.from_tables(*cache.pair(d / 2, n_max, grid))

    def truncated(self, n_max: int) -> "RadialBasis":
        if n_max > self.n_max:
            raise TableRangeExceeded(f"tables stop at n={self.n_max}, requested {n_max}")
        return RadialBasis(self.d, self.a[: n_max + 1], self.a_tilde[: n_max + 1], self.grid, self.meta)

    def combine(self, c: np.ndarray, c_tilde: np.ndarray, provenance="reconstructed") -> RadialFunction:
        """sum c_n a_n + c~_n a~_n together with its transform."""
        c = np.asarray(c, dtype=float)
        ct = np.asarray(c_tilde, dtype=float)
        if c.size > self.n_max + 1 or ct.size > self.n_max + 1:
            raise TableRangeExceeded("more coefficients than tabulated basis functions")
        vals = c @ self.a[: c.size] + ct @ self.a_tilde[: ct.size]
        hat = c @ self.a_tilde[: c.size] + ct @ self.a[: ct.size]
        return RadialFunction(self.d, self.grid, vals, hat, provenance)


@dataclass
class PerturbationProfile:
    eps: np.ndarray
    eps_hat: np.ndarray
    s: float = 1.0
    eta: float = 0.5
    delta: float = 0.0
    d: int | None = None

    def __post_init__(self):
        self.eps = np.asarray(self.eps, dtype=float)
        self.eps_hat = np.asarray(self.eps_hat, dtype=float)
        if self.eps.shape != self.eps_hat.shape or self.eps.ndim != 1:
            raise ConfigError("eps and eps_hat must be 1-d arrays of equal length")
        if self.s < 1 or self.eta <= 0 or self.delta < 0:
            raise ConfigError("need s >= 1, eta > 0, delta >= 0")
        n = np.arange(1, self.eps.size)
        if np.any(n + self.eps[1:] < 0) or np.any(n + self.eps_hat[1:] < 0):
            raise ConfigError("perturbed radii must be real: n + eps_n >= 0")
        if self.d is not None:
            self.validate(self.d)

    @property
    def n_max(self) -> int:
        return self.eps.size - 1

    def exponent(self, d: int) -> float:
        return d + self.s / 2 + 2 + self.eta

    def envelope(self, d: int, n=None) -> np.ndarray:
        n = np.arange(self.eps.size) if n is None else np.asarray(n, dtype=float)
        return self.delta * (1 + n) ** (-self.exponent(d))

    def validate(self, d: int) -> None:
        size = np.abs(self.eps) + np.abs(self.eps_hat)
        if np.any(size > self.envelope(d) * (1 + 1e-12)):
            bad = int(np.argmax(size - self.envelope(d)))
            raise ConfigError(f"|eps_n| + |eps^_n| exceeds delta (1+n)^-(d+s/2+2+eta) at n={bad}")

    @classmethod
    def zero(cls, n_max: int, s: float = 1.0, eta: float = 0.5, d: int | None = None):
        z = np.zeros(n_max + 1)
        return cls(z, z.copy(), s, eta, 0.0, d)

    @classmethod
    def alternating(cls, d: int, delta: float, n_max: int = 150, s: float = 1.0, eta: float = 0.5):
        """Extremal profile: each of eps_n, eps^_n takes half the allowed size, with
        alternating signs (eps_n = (-1)^n env_n / 2, eps^_n = -eps_n)."""
        n = np.arange(n_max + 1)
        env = delta * (1 + n) ** (-(d + s / 2 + 2 + eta))
        e = 0.5 * env * (-1.0) ** n
        return cls(e, -e, s, eta, delta, d)

    @classmethod
    def random(cls, d: int, delta: float, n_max: int = 150, s: float = 1.0, eta: float = 0.5,
               seed: int = 0):
        rng = np.random.default_rng(seed)
        n = np.arange(n_max + 1)
        env = delta * (1 + n) ** (-(d + s / 2 + 2 + eta))
        share = rng.uniform(0, 1, n.size)
        e = env * share * rng.choice([-1.0, 1.0], n.size)
        eh = env * (1 - share) * rng.choice([-1.0, 1.0], n.size)
        return cls(e, eh, s, eta, delta, d)

    def scaled(self, delta: float) -> "PerturbationProfile":
        f = delta / self.delta if self.delta > 0 else 0.0
        return PerturbationProfile(self.eps * f, self.eps_hat * f, self.s, self.eta, delta, self.d)

    def radii(self, n_max: int | None = None):
        """Sample radii (r_n, r^_n): |eps_0| for n = 0 and sqrt(n + eps_n) for n >= 1."""
        n_max = self.n_max if n_max is None else n_max
        if n_max > self.n_max:
            raise TableRangeExceeded("profile shorter than the requested truncation")
        n = np.arange(n_max + 1)
        r = np.sqrt(np.maximum(n + self.eps[: n_max + 1], 0.0))
        rh = np.sqrt(np.maximum(n + self.eps_hat[: n_max + 1], 0.0))
        r[0], rh[0] = abs(self.eps[0]), abs(self.eps_hat[0])
        return r, rh


@dataclass
class NodeData:
    d: int
    f_vals: np.ndarray
    fhat_vals: np.ndarray
    n_max: int

    def __post_init__(self):
        self.f_vals = np.asarray(self.f_vals, dtype=float)
        self.fhat_vals = np.asarray(self.fhat_vals, dtype=float)
        if self.f_vals.shape != (self.n_max + 1,) or self.fhat_vals.shape != (self.n_max + 1,):
            raise ConfigError("node data lengths must equal n_max + 1")

    @classmethod
    def sample(cls, d: int, f, fhat, profile: PerturbationProfile | None = None, n_max: int = 150):
        """Sample callables f, f^ (functions of the radius) at the (perturbed) nodes."""
        profile = profile or PerturbationProfile.zero(n_max)
        r, rh = profile.radii(n_max)
        return cls(d, f(r), fhat(rh), n_max)

    def __add__(self, other: "NodeData") -> "NodeData":
        return NodeData(self.d, self.f_vals + other.f_vals, self.fhat_vals + other.fhat_vals, self.n_max)

    def __rmul__(self, c) -> "NodeData":
        return NodeData(self.d, c * self.f_vals, c * self.fhat_vals, self.n_max)


def _check_dim(d: int, basis: RadialBasis):
    if d != basis.d:
        raise ConfigError(f"dimension {d} does not match the basis (d={basis.d})")


def interpolate(data: NodeData, basis: RadialBasis, x=None):
    """sum_n f(sqrt n) a_n + f^(sqrt n) a~_n, up to data.n_max.

    Returns a RadialFunction on the basis grid, or values at radii ``x``.  The
    truncation-tail estimate in ``meta`` extrapolates the last terms geometrically.
    """
    _check_dim(data.d, basis)
    if data.n_max > basis.n_max:
        raise TableRangeExceeded(f"tables stop at n={basis.n_max}, data reaches {data.n_max}")
    out = basis.combine(data.f_vals, data.fhat_vals)
    terms = (np.abs(data.f_vals) + np.abs(data.fhat_vals)) * np.maximum(
        np.abs(basis.a[: data.n_max + 1]).max(1), np.abs(basis.a_tilde[: data.n_max + 1]).max(1)
    )
    out.meta["truncation_tail"] = _geometric_tail(terms)
    if x is None:
        return out
    return out(x)


def _geometric_tail(terms: np.ndarray, window: int = 8) -> float:
    t = terms[-window:]
    if t.size < 2 or t[-1] == 0:
        return 0.0
    ratio = np.exp(np.polyfit(np.arange(t.size), np.log(np.maximum(t, 1e-300)), 1)[0])
    if ratio >= 1:
        return np.inf
    return float(t[-1] * ratio / (1 - ratio))


def sample_function(f: RadialFunction, radii, sampler: str = "panel", hat: bool = False):
    """Values (or transform values) of f at arbitrary radii inside its grid."""
    vals = f.hat_values if hat else f.values
    if vals is None:
        raise ConfigError("transform values not available")
    radii = np.asarray(radii, dtype=float)
    if radii.size and radii.max() > f.grid.r_max * (1 + 1e-12):
        raise GridCoverage(f"radius {radii.max():.4g} beyond grid end {f.grid.r_max:.4g}")
    if sampler == "panel":
        return f.grid.interp(vals, radii)
    if sampler == "pchip":
        with np.errstate(over="ignore", divide="ignore"):  # underflowed tails give zero slopes
            return PchipInterpolator(f.r, vals, extrapolate=True)(radii)
    raise ConfigError(f"unknown sampler {sampler!r}")


def apply_T(f: RadialFunction, profile: PerturbationProfile, basis: RadialBasis,
            n_max: int | None = None, sampler: str = "panel") -> RadialFunction:
    """T f = sum f(r_n) a_n + f^(r^_n) a~_n with the perturbed radii of ``profile``."""
    _check_dim(f.d, basis)
    if f.grid != basis.grid:
        raise ConfigError("function and basis live on different grids")
    if f.hat_values is None:
        raise ConfigError("apply_T needs the transform values of f")
    n_max = min(profile.n_max, basis.n_max) if n_max is None else n_max
    if n_max > basis.n_max:
        raise TableRangeExceeded(f"tables stop at n={basis.n_max}")
    r, rh = profile.radii(n_max)
    c = sample_function(f, r, sampler)
    ct = sample_function(f, rh, sampler, hat=True)
    out = basis.combine(c, ct)
    if sampler == "pchip":
        alt = sample_function(f, r, "panel"), sample_function(f, rh, "panel", hat=True)
        out.meta["sample_error"] = float(max(np.abs(c - alt[0]).max(), np.abs(ct - alt[1]).max()))
    return out


def v_norm(f: RadialFunction, s: float = 1.0) -> float:
    """V^s norm from the carried values and transform values."""
    return weighted_l1(f.values, f.grid, f.d, s) + weighted_l1(f.hat_values, f.grid, f.d, s)


@dataclass
class BudgetReport:
    value: float
    measured: float
    tail: float
    norms: np.ndarray  # ||a_n||_{V^s}, n <= n_max
    tail_constant: float

    def __float__(self) -> float:
        return self.value


def basis_norms(basis: RadialBasis, s: float) -> np.ndarray:
    """||a_n||_{V^s} = ||a_n m_s||_1 + ||a~_n m_s||_1 (the same number for a~_n)."""
    return np.array([
        weighted_l1(basis.a[n], basis.grid, basis.d, s) + weighted_l1(basis.a_tilde[n], basis.grid, basis.d, s)
        for n in range(basis.n_max + 1)
    ])


def budget(profile: PerturbationProfile, basis: RadialBasis, p: VsParams | None = None,
           norms: np.ndarray | None = None, n_tail: int = 10**6) -> BudgetReport:
    """Upper bound q for ||T f - f||_{V^s} <= q ||f||_{V^s}.

    Each sample moves by |r_n - sqrt n|, and a gradient of f is bounded by
    2 pi ||f||_{V^s} (s >= 1), so q = 2 pi sum_n (|dr_n| + |dr^_n|) ||a_n||_{V^s}.
    Indices beyond the tables use the envelope of the profile and a power law
    C (1+n)^{d+s/2+3/2} fitted to the last measured norms.
    """
    d = basis.d
    p = p or VsParams(profile.s, d)
    n_max = min(profile.n_max, basis.n_max)
    norms = basis_norms(basis, p.s)[: n_max + 1] if norms is None else norms[: n_max + 1]
    r, rh = profile.radii(n_max)
    n = np.arange(n_max + 1)
    dr = np.abs(r - np.sqrt(n))
    drh = np.abs(rh - np.sqrt(n))
    measured = 2 * np.pi * float(np.sum((dr + drh) * norms))
    growth = d + p.s / 2 + 1.5
    last = slice(max(1, n_max - 19), n_max + 1)
    cst = float(np.max(norms[last] / (1 + n[last]) ** growth)) if n_max >= 1 else 0.0
    tail = 0.0
    if profile.delta > 0 and n_tail > n_max:
        m = np.arange(n_max + 1, n_tail + 1, dtype=float)
        # |sqrt(m + e) - sqrt m| <= |e| / sqrt(m) for |e| <= m
        env = profile.delta * (1 + m) ** (-profile.exponent(d))
        tail = 2 * np.pi * float(np.sum(env / np.sqrt(m) * cst * (1 + m) ** growth))
        ex = profile.exponent(d) + 0.5 - growth
        tail += 2 * np.pi * profile.delta * cst * np.sqrt(2) * (1 + n_tail) ** (1 - ex) / (ex - 1)
    return BudgetReport(measured + tail, measured, tail, norms, cst)


def threshold_delta(shape: PerturbationProfile, basis: RadialBasis, target: float = 0.5,
                    p: VsParams | None = None, rel_tol: float = 1e-6) -> float:
    """delta at which the budget of ``shape.scaled(delta)`` equals ``target`` (bisection)."""
    p = p or VsParams(shape.s, basis.d)
    norms = basis_norms(basis, p.s)
    q = lambda dl: budget(shape.scaled(dl), basis, p, norms).value
    lo, hi = 0.0, max(shape.delta, 1e-6)
    while q(hi) < target:
        lo, hi = hi, 2 * hi
        if hi > 1e3:
            raise ConfigError("budget never reaches the target")
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if q(mid) < target else (lo, mid)
    return 0.5 * (lo + hi)


@dataclass
class NeumannLog:
    diffs: list = field(default_factory=list)
    ratios: list = field(default_factory=list)
    budget: float = 0.0
    converged: bool = False

    def lines(self) -> list[str]:
        out = [f"budget={self.budget:.6g} converged={self.converged}"]
        for j, dv in enumerate(self.diffs):
            ratio = self.ratios[j - 1] if j >= 1 else float("nan")
            out.append(f"step={j + 1} diff={dv:.6e} ratio={ratio:.4f}")
        return out


def neumann(D: RadialFunction, profile: PerturbationProfile, basis: RadialBasis,
            q: float, j_max: int = 60, tol: float = 1e-12, slack: float = 0.05,
            floor: float = 1e-11, sampler: str = "panel"):
    """Solve T x = D by x_{j+1} = D + x_j - T x_j, logging V^1 step sizes."""
    if q >= 1:
        raise NotContracting(f"contraction budget {q:.4g} is not below 1")
    log = NeumannLog(budget=q)
    x = D
    scale = max(v_norm(D), 1e-300)
    for j in range(j_max):
        nxt = D + x - apply_T(x, profile, basis, sampler=sampler)
        diff = v_norm(nxt - x)
        log.diffs.append(diff)
        x = nxt
        if len(log.diffs) >= 2 and log.diffs[-2] > floor * scale:
            ratio = diff / log.diffs[-2]
            log.ratios.append(ratio)
            if len(log.diffs) >= 3 and ratio > q + slack:
                raise Stagnation(f"step ratio {ratio:.3f} exceeds budget {q:.3f} at step {j + 1}")
        elif len(log.diffs) >= 2:
            log.ratios.append(float("nan"))
        # q = 0 means T is the identity: one step, the diff only measures table consistency
        if diff <= tol * scale or scale == 1e-300 or q == 0:
            log.converged = True
            break
    x.provenance = "reconstructed"
    x.meta["neumann"] = log
    return x, log


def reconstruct(data: NodeData, profile: PerturbationProfile, basis: RadialBasis,
                j_max: int = 60, tol: float = 1e-12, p: VsParams | None = None,
                q: float | None = None, sampler: str = "panel"):
    """Recover f from samples at perturbed nodes; returns (function, log)."""
    _check_dim(data.d, basis)
    profile.validate(data.d)
    if data.n_max > profile.n_max:
        raise TableRangeExceeded("profile shorter than the data")
    q = budget(profile, basis, p).value if q is None else q
    D = basis.combine(data.f_vals, data.fhat_vals)
    return neumann(D, profile, basis, q, j_max, tol, sampler=sampler)


def basis_h(basis: RadialBasis, profile: PerturbationProfile, n: int, tilde: bool = False,
            j_max: int = 60, tol: float = 1e-12, p: VsParams | None = None, q: float | None = None):
    """h_n = T^{-1} a_n (or h~_n = T^{-1} a~_n)."""
    if n > basis.n_max:
        raise TableRangeExceeded(f"n={n} beyond tables")
    e = np.zeros(n + 1)
    e[n] = 1.0
    z = np.zeros(n + 1)
    D = basis.combine(z, e) if tilde else basis.combine(e, z)
    if n < nu_mu(basis.d / 2).nu_minus:
        D.meta["neumann"] = NeumannLog(converged=True)
        return D, D.meta["neumann"]
    q = budget(profile, basis, p).value if q is None else q
    return neumann(D, profile, basis, q, j_max, tol)
