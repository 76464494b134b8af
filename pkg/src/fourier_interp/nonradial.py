"""Spherical harmonics, the finite kernels K_n, K~_n and the perturbed-sphere
operator in dimensions 2 and 3.

A function on R^d is stored through its harmonic components: f(r w) =
sum_{m,j} g_{m,j}(r) Y_{m,j}(w), where the Y_{m,j} are real and orthonormal for
the probability measure on the sphere and g_{m,j}(r) = r^m h_{m,j}(r).  The
transform of h(|x|) |x|^m Y(x/|x|) is i^{-m} h^(|x|) |x|^m Y(x/|x|), with h^
the radial transform in dimension d + 2m.  Since a_{d/2+m,n} and a~_{d/2+m,n}
are transforms of each other in that dimension, every kernel term has a known
transform and both f and f^ are carried exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np
from scipy.special import eval_chebyt, sph_harm_y

from .errors import ConfigError, NotContracting, QuadratureDegreeInsufficient, TableRangeExceeded, TruncationBudget
from .function_spaces import sphere_area
from .grids import PanelGrid
from .interp_radial import RadialBasis
from .kernels import nu_mu
from .radial_basis import TableCache


def gegenbauer(m: int, lam: float, t) -> np.ndarray:
    """C_m^lam(t) by the three-term recurrence; lam = 0 uses the limit (2/m) T_m(t)."""
    if m < 0 or lam <= -0.5:
        raise ConfigError("need m >= 0 and lam > -1/2")
    t = np.asarray(t, dtype=float)
    if m == 0:
        return np.ones_like(t)
    if lam == 0:
        return 2.0 / m * eval_chebyt(m, t)
    c0, c1 = np.ones_like(t), 2 * lam * t
    for j in range(2, m + 1):
        c0, c1 = c1, (2 * t * (j + lam - 1) * c1 - (j + 2 * lam - 2) * c0) / j
    return c1


def dim_harmonic(d: int, m: int) -> int:
    """Dimension of the space of degree-m spherical harmonics on S^{d-1}."""
    if d < 2 or m < 0:
        raise ConfigError("need d >= 2 and m >= 0")
    return comb(d + m - 1, d - 1) - (comb(d + m - 3, d - 1) if m >= 2 else 0)


def zonal_Z(d: int, m: int, x, zeta) -> np.ndarray:
    """|x|^m dim(H_m) C_m(<x/|x|, zeta>) / C_m(1): the reproducing kernel of degree-m
    harmonics (probability measure), extended as a solid harmonic in x.

    ``x`` has shape (..., d); ``zeta`` is a unit vector of shape (d,).
    """
    x = np.asarray(x, dtype=float)
    zeta = np.asarray(zeta, dtype=float)
    if abs(np.linalg.norm(zeta) - 1) > 1e-12:
        raise ConfigError("zeta must be a unit vector")
    if m == 0:
        return np.ones(x.shape[:-1])
    r = np.linalg.norm(x, axis=-1)
    safe = np.where(r > 0, r, 1.0)
    t = np.clip((x @ zeta) / safe, -1, 1)
    lam = (d - 2) / 2
    val = dim_harmonic(d, m) * gegenbauer(m, lam, t) / gegenbauer(m, lam, 1.0)
    return np.where(r > 0, r**m * val, 0.0)


@dataclass(frozen=True)
class SphereRule:
    """Quadrature for the probability measure on S^{d-1}, exact up to ``degree``."""

    d: int
    points: np.ndarray  # (Q, d)
    weights: np.ndarray
    degree: int

    def require(self, degree: int):
        if degree > self.degree:
            raise QuadratureDegreeInsufficient(f"rule exact to degree {self.degree}, need {degree}")


@lru_cache(maxsize=32)
def sphere_rule(d: int, degree: int) -> SphereRule:
    if d == 2:
        q = degree + 1
        th = 2 * np.pi * np.arange(q) / q
        pts = np.stack([np.cos(th), np.sin(th)], -1)
        return SphereRule(2, pts, np.full(q, 1.0 / q), degree)
    if d == 3:
        nt = degree // 2 + 1
        nphi = degree + 1
        ct, wt = np.polynomial.legendre.leggauss(nt)
        phi = 2 * np.pi * np.arange(nphi) / nphi
        st = np.sqrt(1 - ct**2)
        pts = np.stack([
            (st[:, None] * np.cos(phi)[None, :]).ravel(),
            (st[:, None] * np.sin(phi)[None, :]).ravel(),
            np.repeat(ct, nphi),
        ], -1)
        w = (wt[:, None] / 2 / nphi * np.ones(nphi)[None, :]).ravel()
        return SphereRule(3, pts, w, degree)
    raise ConfigError("sphere quadrature is implemented for d = 2 and d = 3")


def real_harmonics(d: int, m: int, pts) -> np.ndarray:
    """Orthonormal real harmonics of degree m at unit vectors ``pts``: shape (dim, Q)."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    if d == 2:
        th = np.arctan2(pts[:, 1], pts[:, 0])
        if m == 0:
            return np.ones((1, len(pts)))
        return np.sqrt(2) * np.stack([np.cos(m * th), np.sin(m * th)])
    if d == 3:
        polar = np.arccos(np.clip(pts[:, 2], -1, 1))
        az = np.arctan2(pts[:, 1], pts[:, 0])
        rows = []
        for j in range(-m, m + 1):
            y = sph_harm_y(m, abs(j), polar, az) * np.sqrt(4 * np.pi)
            if j == 0:
                rows.append(y.real)
            elif j > 0:
                rows.append(np.sqrt(2) * (-1) ** j * y.real)
            else:
                rows.append(np.sqrt(2) * (-1) ** j * y.imag)
        return np.array(rows)
    raise ConfigError("real harmonic basis is implemented for d = 2 and d = 3")


def _unit(pts):
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    r = np.linalg.norm(pts, axis=-1)
    u = pts / np.where(r > 0, r, 1.0)[:, None]
    u[r == 0] = np.eye(pts.shape[1])[0]
    return r, u


class HarmonicTables:
    """Basis pairs (a_{d/2+m,n}, a~_{d/2+m,n}) for m = 0..m_max on one grid."""

    def __init__(self, d: int, m_max: int, n_max: int, grid: PanelGrid | None = None,
                 cache: TableCache | None = None, pairs: dict | None = None):
        self.d, self.m_max, self.n_max = d, m_max, n_max
        self.grid = grid or PanelGrid.uniform(10.0, 0.25, 12)
        self._cache = cache
        self._pairs = dict(pairs or {})

    def pair(self, m: int) -> RadialBasis:
        if m > self.m_max:
            raise TableRangeExceeded(f"harmonic degree {m} beyond tables (m_max={self.m_max})")
        if m not in self._pairs:
            k = self.d / 2 + m
            if self.n_max < nu_mu(k).nu_minus:
                z = np.zeros((self.n_max + 1, len(self.grid)))
                self._pairs[m] = RadialBasis(self.d + 2 * m, z, z.copy(), self.grid)
            else:
                cache = self._cache or TableCache()
                self._pairs[m] = RadialBasis.load(self.d + 2 * m, self.n_max, self.grid, cache)
        return self._pairs[m]

    def a(self, m: int, n: int, r) -> np.ndarray:
        if n > self.n_max:
            raise TableRangeExceeded(f"n={n} beyond tables (n_max={self.n_max})")
        return self.grid.interp(self.pair(m).a[n], r)

    def a_tilde(self, m: int, n: int, r) -> np.ndarray:
        if n > self.n_max:
            raise TableRangeExceeded(f"n={n} beyond tables (n_max={self.n_max})")
        return self.grid.interp(self.pair(m).a_tilde[n], r)


def kernel_Kn(d: int, n: int, x, zeta, tables: HarmonicTables, m_top: int | None = None):
    """(K_n(x, zeta), K~_n(x, zeta)) summed over m <= m_top (default 4n + 1)."""
    if n < 1:
        raise ConfigError("kernel index n starts at 1")
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if n < nu_mu(d / 2).nu_minus:
        z = np.zeros(x.shape[0], complex)
        return z, z.copy()
    m_top = 4 * n + 1 if m_top is None else m_top
    r = np.linalg.norm(x, axis=-1)
    K = np.zeros(x.shape[0], complex)
    Kt = np.zeros(x.shape[0], complex)
    for m in range(m_top + 1):
        z = zonal_Z(d, m, x, zeta) * n ** (-m / 2)
        K += tables.a(m, n, r) * z
        Kt += 1j**m * tables.a_tilde(m, n, r) * z
    return K, Kt


@dataclass
class HarmonicExpansion:
    """Components g_{m,j}(r) of f and of its transform on a radial panel grid."""

    d: int
    grid: PanelGrid
    comps: list  # comps[m]: complex array (dim_harmonic(d, m), len(grid))
    hat_comps: list
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.comps) != len(self.hat_comps):
            raise ConfigError("f and transform components differ in degree range")
        for m, (c, ch) in enumerate(zip(self.comps, self.hat_comps)):
            shape = (dim_harmonic(self.d, m), len(self.grid))
            if c.shape != shape or ch.shape != shape:
                raise ConfigError(f"degree-{m} components must have shape {shape}")

    @property
    def m_max(self) -> int:
        return len(self.comps) - 1

    @classmethod
    def zeros(cls, d: int, m_max: int, grid: PanelGrid) -> "HarmonicExpansion":
        z = [np.zeros((dim_harmonic(d, m), len(grid)), complex) for m in range(m_max + 1)]
        return cls(d, grid, z, [c.copy() for c in z])

    @classmethod
    def project(cls, d: int, f, fhat, grid: PanelGrid, m_max: int, rule: SphereRule | None = None):
        """Components of callables f, f^ (arrays of points (N, d) -> values)."""
        rule = rule or sphere_rule(d, 2 * m_max + 8)
        r = grid.nodes
        pts = (r[:, None, None] * rule.points[None, :, :]).reshape(-1, d)
        fv = np.asarray(f(pts), complex).reshape(r.size, -1)
        hv = np.asarray(fhat(pts), complex).reshape(r.size, -1)
        comps, hats = [], []
        for m in range(m_max + 1):
            Y = real_harmonics(d, m, rule.points) * rule.weights
            comps.append(Y @ fv.T)
            hats.append(Y @ hv.T)
        return cls(d, grid, comps, hats)

    def _eval(self, comps, x) -> np.ndarray:
        r, u = _unit(x)
        P = self.grid.interp_matrix(r)
        out = np.zeros(r.size, complex)
        for m, c in enumerate(comps):
            out += np.sum((P @ c.T) * real_harmonics(self.d, m, u).T, axis=1)
        return out

    def __call__(self, x) -> np.ndarray:
        return self._eval(self.comps, x)

    def hat(self, x) -> np.ndarray:
        return self._eval(self.hat_comps, x)

    def projections(self, rule: SphereRule | None = None) -> "HarmonicExpansion":
        """Re-project point values onto the harmonic basis (consistency check)."""
        return HarmonicExpansion.project(self.d, self, self.hat, self.grid, self.m_max, rule)

    def __add__(self, other: "HarmonicExpansion") -> "HarmonicExpansion":
        if other.d != self.d or other.grid != self.grid or other.m_max != self.m_max:
            raise ConfigError("expansions differ in dimension, grid or degree range")
        return HarmonicExpansion(self.d, self.grid, [a + b for a, b in zip(self.comps, other.comps)],
                                 [a + b for a, b in zip(self.hat_comps, other.hat_comps)])

    def __rmul__(self, c) -> "HarmonicExpansion":
        return HarmonicExpansion(self.d, self.grid, [c * a for a in self.comps], [c * a for a in self.hat_comps])

    def __sub__(self, other: "HarmonicExpansion") -> "HarmonicExpansion":
        return self + (-1.0) * other

    def v1_norm(self, s: float = 1.0, degree: int = 24) -> float:
        """Discretized ||f m_s||_1 + ||f^ m_s||_1 (grid rule times a sphere rule)."""
        rule = sphere_rule(self.d, degree)
        r = self.grid.nodes
        total = 0.0
        for comps in (self.comps, self.hat_comps):
            vals = np.zeros((r.size, len(rule.weights)), complex)
            for m, c in enumerate(comps):
                vals += c.T @ real_harmonics(self.d, m, rule.points)
            ang = np.abs(vals) @ rule.weights
            total += sphere_area(self.d) * float(np.sum(self.grid.weights * ang * (1 + r**s) * r ** (self.d - 1)))
        return total


def _n_zero_pieces(tables: HarmonicTables):
    pair = tables.pair(0)
    return pair.a[0], pair.a_tilde[0]


def series_from_samples(f_samples, fhat_samples, f0, fhat0, tables: HarmonicTables,
                        rule: SphereRule, m_max: int | None = None) -> HarmonicExpansion:
    """a_{d/2,0} f0 + a~_{d/2,0} f^0 + sum_n int K_n(x, z) u_n(z) + K~_n(x, z) v_n(z) dz.

    ``f_samples[n-1]`` and ``fhat_samples[n-1]`` hold u_n, v_n at the rule's nodes
    for n = 1..N.  Kernel degrees are capped at min(4n + 1, m_max).
    """
    d = tables.d
    m_max = tables.m_max if m_max is None else m_max
    grid = tables.grid
    r = grid.nodes
    out = HarmonicExpansion.zeros(d, m_max, grid)
    a0, at0 = _n_zero_pieces(tables)
    out.comps[0][0] += f0 * a0 + fhat0 * at0
    out.hat_comps[0][0] += f0 * at0 + fhat0 * a0
    Ys = [real_harmonics(d, m, rule.points) * rule.weights for m in range(m_max + 1)]
    for n, (u, v) in enumerate(zip(f_samples, fhat_samples), start=1):
        if n > tables.n_max:
            raise TableRangeExceeded(f"samples reach n={n}, tables stop at {tables.n_max}")
        for m in range(min(4 * n + 1, m_max) + 1):
            if n < nu_mu(d / 2 + m).nu_minus:
                continue
            pair = tables.pair(m)
            cu, cv = Ys[m] @ u, Ys[m] @ v
            rad = r**m * n ** (-m / 2)
            a, at = pair.a[n] * rad, pair.a_tilde[n] * rad
            out.comps[m] += np.outer(cu, a) + np.outer(cv, 1j**m * at)
            out.hat_comps[m] += np.outer(cu, (-1j) ** m * at) + np.outer(cv, a)
    return out


@dataclass
class SpherePerturbation:
    """Radial displacements eps_n(z), eps^_n(z) on the spheres sqrt(n) S^{d-1}, given by
    harmonic coefficients up to ``degree``, plus displacement vectors at the origin."""

    d: int
    eps_coeffs: np.ndarray  # (N, n_coef): row n-1 describes eps_n
    eps_hat_coeffs: np.ndarray
    eps0: np.ndarray
    eps0_hat: np.ndarray
    degree: int = 4
    delta: float = 0.0
    c5: float = 1.0

    def __post_init__(self):
        self.eps_coeffs = np.atleast_2d(np.asarray(self.eps_coeffs, dtype=float))
        self.eps_hat_coeffs = np.atleast_2d(np.asarray(self.eps_hat_coeffs, dtype=float))
        self.eps0 = np.asarray(self.eps0, dtype=float)
        self.eps0_hat = np.asarray(self.eps0_hat, dtype=float)
        ncoef = sum(dim_harmonic(self.d, m) for m in range(self.degree + 1))
        if self.eps_coeffs.shape[1:] != (ncoef,) or self.eps_hat_coeffs.shape != self.eps_coeffs.shape:
            raise ConfigError(f"perturbation coefficients need {ncoef} columns per n")
        if self.eps0.shape != (self.d,) or self.eps0_hat.shape != (self.d,):
            raise ConfigError("origin displacements must be vectors in R^d")

    @property
    def n_max(self) -> int:
        return self.eps_coeffs.shape[0]

    def _basis(self, pts):
        return np.concatenate([real_harmonics(self.d, m, pts) for m in range(self.degree + 1)])

    def eps_fn(self, n: int, pts, hat: bool = False) -> np.ndarray:
        coef = (self.eps_hat_coeffs if hat else self.eps_coeffs)[n - 1]
        return coef @ self._basis(pts)

    @property
    def sigma(self) -> np.ndarray:
        """sigma_0 = |eps0| + |eps0^| and sigma_n = sup|eps_n| + sup|eps^_n| (sampled)."""
        pts = sphere_rule(self.d, 60).points
        B = self._basis(pts)
        sup = np.abs(self.eps_coeffs @ B).max(1) + np.abs(self.eps_hat_coeffs @ B).max(1)
        return np.concatenate([[np.linalg.norm(self.eps0) + np.linalg.norm(self.eps0_hat)], sup])

    def envelope(self, n=None) -> np.ndarray:
        n = np.arange(self.n_max + 1) if n is None else np.asarray(n, dtype=float)
        return self.delta * (1 + n) ** (-10 * n - 2.5 * self.d - self.c5 - 1.1)

    def validate(self) -> None:
        if np.any(self.sigma > self.envelope() * (1 + 1e-9)):
            raise ConfigError("sigma_n exceeds delta (1+n)^(-10n-5d/2-c5-1.1)")

    @classmethod
    def zero(cls, d: int, n_max: int, degree: int = 4):
        ncoef = sum(dim_harmonic(d, m) for m in range(degree + 1))
        z = np.zeros((n_max, ncoef))
        return cls(d, z, z.copy(), np.zeros(d), np.zeros(d), degree)

    @classmethod
    def random(cls, d: int, delta: float, n_max: int, c5: float = 1.0, degree: int = 4,
               fill: float = 0.9, seed: int = 0):
        """Random smooth displacements scaled to ``fill`` times the allowed sigma_n."""
        rng = np.random.default_rng(seed)
        ncoef = sum(dim_harmonic(d, m) for m in range(degree + 1))
        proto = cls(d, rng.normal(size=(n_max, ncoef)), rng.normal(size=(n_max, ncoef)),
                    rng.normal(size=d), rng.normal(size=d), degree, delta, c5)
        sig = proto.sigma
        scale = fill * proto.envelope() / sig
        return cls(d, proto.eps_coeffs * scale[1:, None], proto.eps_hat_coeffs * scale[1:, None],
                   proto.eps0 * scale[0], proto.eps0_hat * scale[0], degree, delta, c5)

    def scaled(self, factor: float) -> "SpherePerturbation":
        return SpherePerturbation(self.d, self.eps_coeffs * factor, self.eps_hat_coeffs * factor,
                                  self.eps0 * factor, self.eps0_hat * factor, self.degree,
                                  self.delta * factor, self.c5)


def _sphere_samples(f: HarmonicExpansion, n: int, rule: SphereRule, eps=None, hat: bool = False):
    """Values of f (or f^) at (sqrt n + eps(z)) z over the rule's nodes."""
    rad = np.sqrt(n) + (0.0 if eps is None else eps)
    pts = rule.points * np.broadcast_to(rad, (len(rule.weights),))[:, None]
    return f.hat(pts) if hat else f(pts)


def _difference_samples(f: HarmonicExpansion, pert: SpherePerturbation, rule: SphereRule, n_top: int):
    """f(sqrt n z) - f((sqrt n + eps_n(z)) z) and the transform analogue, n = 1..n_top."""
    du, dv = [], []
    for n in range(1, n_top + 1):
        e = pert.eps_fn(n, rule.points)
        eh = pert.eps_fn(n, rule.points, hat=True)
        du.append(_sphere_samples(f, n, rule) - _sphere_samples(f, n, rule, e))
        dv.append(_sphere_samples(f, n, rule, hat=True) - _sphere_samples(f, n, rule, eh, hat=True))
    origin = np.zeros((1, f.d))
    d0 = f(origin)[0] - f(pert.eps0[None])[0]
    dh0 = f.hat(origin)[0] - f.hat(pert.eps0_hat[None])[0]
    return du, dv, d0, dh0


def _default_rule(d: int, m_max: int, pert_degree: int = 4) -> SphereRule:
    return sphere_rule(d, 2 * m_max + pert_degree)


def apply_T_sphere(f: HarmonicExpansion, pert: SpherePerturbation, tables: HarmonicTables,
                   rule: SphereRule | None = None, n_top: int | None = None) -> HarmonicExpansion:
    """T f = f - (correction series built from sample differences on the perturbed spheres)."""
    m_max = f.m_max
    rule = rule or _default_rule(f.d, m_max, pert.degree)
    rule.require(2 * m_max)
    n_top = min(pert.n_max, tables.n_max) if n_top is None else n_top
    du, dv, d0, dh0 = _difference_samples(f, pert, rule, n_top)
    corr = series_from_samples(du, dv, d0, dh0, tables, rule, m_max)
    return f - corr


def double_series_eval(f, fhat, x, tables: HarmonicTables, m_max: int, n_max: int,
                       rule: SphereRule | None = None, trunc_tol: float = 1e-6):
    """The double series (m outer, n inner) from sphere integrals of f and f^ at radii sqrt n.

    Returns (values at x, report) where report['term_size'][m][n] is the sup over x of
    the n-th inner term; TruncationBudget is raised when the last inner terms are
    not below ``trunc_tol`` times the partial sum.
    """
    d = tables.d
    rule = rule or sphere_rule(d, 2 * m_max + 8)
    x = np.atleast_2d(np.asarray(x, dtype=float))
    r, u = _unit(x)
    origin = np.zeros((1, d))
    f0, fh0 = complex(np.asarray(f(origin))[0]), complex(np.asarray(fhat(origin))[0])
    a0 = tables.grid.interp(tables.pair(0).a[0], r)
    at0 = tables.grid.interp(tables.pair(0).a_tilde[0], r)
    total = f0 * a0 + fh0 * at0
    sizes = []
    for m in range(m_max + 1):
        Yx = real_harmonics(d, m, u)
        Yq = real_harmonics(d, m, rule.points) * rule.weights
        row = []
        for n in range(1, n_max + 1):
            if n < nu_mu(d / 2 + m).nu_minus:
                row.append(0.0)
                continue
            pts = np.sqrt(n) * rule.points
            cu = Yq @ np.asarray(f(pts), complex)
            cv = Yq @ np.asarray(fhat(pts), complex)
            zx = (cu @ Yx) * r**m * n ** (-m / 2)
            zv = (cv @ Yx) * r**m * n ** (-m / 2)
            term = tables.a(m, n, r) * zx + 1j**m * tables.a_tilde(m, n, r) * zv
            total = total + term
            row.append(float(np.abs(term).max()))
        sizes.append(row)
    scale = max(float(np.abs(total).max()), 1e-300)
    tail = max((row[-1] for row in sizes if row), default=0.0)
    report = {"term_size": sizes, "last_term": tail, "scale": scale}
    if tail > trunc_tol * scale:
        raise TruncationBudget(f"last inner term {tail:.2e} exceeds {trunc_tol:.0e} of the sum")
    return total, report


def kernel_norms(n: int, tables: HarmonicTables, m_max: int | None = None, s: float = 1.0,
                 degree: int = 40):
    """(||K_n(., z)||_{V^s}, ||K~_n(., z)||_{V^s}); rotation invariance makes them
    independent of z, so z is the last basis vector."""
    d = tables.d
    m_max = tables.m_max if m_max is None else m_max
    rule = sphere_rule(d, degree)
    zeta = np.eye(d)[-1]
    r = tables.grid.nodes
    K = np.zeros((r.size, len(rule.weights)), complex)
    Kh, Kt, Kth = K.copy(), K.copy(), K.copy()
    for m in range(min(4 * n + 1, m_max) + 1):
        if n < nu_mu(d / 2 + m).nu_minus:
            continue
        pair = tables.pair(m)
        ang = zonal_Z(d, m, rule.points, zeta)[None, :] * (r**m * n ** (-m / 2))[:, None]
        a, at = pair.a[n][:, None], pair.a_tilde[n][:, None]
        K += a * ang
        Kh += (-1j) ** m * at * ang
        Kt += 1j**m * at * ang
        Kth += a * ang
    radial = sphere_area(d) * tables.grid.weights * (1 + r**s) * r ** (d - 1)
    norm = lambda F: float(radial @ (np.abs(F) @ rule.weights))
    return norm(K) + norm(Kh), norm(Kt) + norm(Kth)


@dataclass
class SphereBudget:
    measured: float
    analytic: float
    kernel_norms: np.ndarray  # row n: (||K_n||, ||K~_n||); row 0 holds the origin term
    shape_constant: float

    def __float__(self) -> float:
        return self.measured


def budget_sphere(pert: SpherePerturbation, tables: HarmonicTables, m_max: int | None = None,
                  n_calibrate: int = 4) -> SphereBudget:
    """2 pi [sigma_0 N_0 + sum_n sigma_n (||K_n|| + ||K~_n||)] with measured kernel norms.

    N_0 is the V^1 norm of a_{d/2,0} (equal to that of a~_{d/2,0}).  The analytic
    comparison replaces the measured norms by C n^{10n + 5d/2 + c5}, with C the
    smallest constant dominating the measured norms for n <= n_calibrate.
    """
    d = tables.d
    n_top = min(pert.n_max, tables.n_max)
    sig = pert.sigma[: n_top + 1]
    pair = tables.pair(0)
    r = tables.grid.nodes
    radial = sphere_area(d) * tables.grid.weights * (1 + r) * r ** (d - 1)
    n0 = float(radial @ np.abs(pair.a[0]) + radial @ np.abs(pair.a_tilde[0]))
    norms = np.zeros((n_top + 1, 2))
    norms[0] = n0
    for n in range(1, n_top + 1):
        norms[n] = kernel_norms(n, tables, m_max)
    per_n = norms.sum(1)
    per_n[0] = n0
    measured = 2 * np.pi * float(sig @ per_n)
    n = np.arange(1, n_top + 1)
    shape = n ** (10.0 * n + 2.5 * d + pert.c5)
    cal = slice(0, min(n_calibrate, n_top))
    cst = float(np.max(per_n[1:][cal] / shape[cal])) if n_top else 0.0
    analytic = 2 * np.pi * float(sig[0] * n0 + sig[1:] @ (cst * shape))
    return SphereBudget(measured, analytic, norms, cst)


@dataclass
class HarnessReport:
    budget: float
    diffs: list
    ratios: list
    error: float
    zero_data_sup: float
    converged: bool

    def lines(self) -> list[str]:
        out = [f"budget={self.budget:.6g} converged={self.converged} error={self.error:.3e} "
               f"zero_data_sup={self.zero_data_sup:.3e}"]
        for j, dv in enumerate(self.diffs):
            out.append(f"step={j + 1} diff={dv:.6e}")
        return out


def perturbed_data(f, fhat, pert: SpherePerturbation, rule: SphereRule, n_top: int):
    """Samples of callables f, f^ on the perturbed spheres and at the displaced origins."""
    us, vs = [], []
    for n in range(1, n_top + 1):
        e = pert.eps_fn(n, rule.points)
        eh = pert.eps_fn(n, rule.points, hat=True)
        us.append(np.asarray(f((np.sqrt(n) + e)[:, None] * rule.points), complex))
        vs.append(np.asarray(fhat((np.sqrt(n) + eh)[:, None] * rule.points), complex))
    f0 = complex(np.asarray(f(pert.eps0[None]))[0])
    fh0 = complex(np.asarray(fhat(pert.eps0_hat[None]))[0])
    return us, vs, f0, fh0


def neumann_sphere(D: HarmonicExpansion, pert: SpherePerturbation, tables: HarmonicTables,
                   q: float, rule: SphereRule, n_top: int, j_max: int = 40, tol: float = 1e-10):
    if q >= 1:
        raise NotContracting(f"sphere budget {q:.4g} is not below 1")
    x = D
    scale = max(D.v1_norm(), 1e-300)
    diffs = []
    converged = False
    for _ in range(j_max):
        nxt = D + x - apply_T_sphere(x, pert, tables, rule, n_top)
        diffs.append((nxt - x).v1_norm())
        x = nxt
        if diffs[-1] <= tol * scale or scale == 1e-300:
            converged = True
            break
    return x, diffs, converged


def uniqueness_harness(f, fhat, pert: SpherePerturbation, tables: HarmonicTables, m_max: int,
                       test_points, j_max: int = 40, tol: float = 1e-10,
                       q: float | None = None) -> tuple[HarmonicExpansion, HarnessReport]:
    """Reconstruct f from its values on the perturbed spheres and check that all-zero
    data reconstructs to the zero function."""
    d = tables.d
    rule = _default_rule(d, m_max, pert.degree)
    n_top = min(pert.n_max, tables.n_max)
    q = budget_sphere(pert, tables, m_max).measured if q is None else q
    us, vs, f0, fh0 = perturbed_data(f, fhat, pert, rule, n_top)
    D = series_from_samples(us, vs, f0, fh0, tables, rule, m_max)
    x, diffs, conv = neumann_sphere(D, pert, tables, q, rule, n_top, j_max, tol)
    pts = np.atleast_2d(np.asarray(test_points, dtype=float))
    err = float(np.max(np.abs(x(pts) - np.asarray(f(pts)))))
    zu = [np.zeros_like(u) for u in us]
    Z = series_from_samples(zu, zu, 0.0, 0.0, tables, rule, m_max)
    z, _, _ = neumann_sphere(Z, pert, tables, q, rule, n_top, j_max, tol)
    zsup = float(np.max(np.abs(z(pts))))
    ratios = [b / a for a, b in zip(diffs, diffs[1:]) if a > 0]
    return x, HarnessReport(q, diffs, ratios, err, zsup, conv)
