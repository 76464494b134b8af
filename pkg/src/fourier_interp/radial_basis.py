"""Interpolation basis functions b_{k,n}^eps, a_{k,n}, a~_{k,n} on radial grids.

The coefficients are read off from the expansion F_k^{-eps}(tau, r) =
sum_n b_{k,n}^{eps}(r) e^{pi i n tau} by sampling F on a horizontal segment
im(tau) = y and taking a discrete Fourier transform in re(tau).
"""
from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import AliasingSuspected, ConfigError, GridMismatch, GridTooShort
from .generating import (
    DEFAULT_QUAD,
    QuadratureConfig,
    _eval_rule,
    arc_rule,
    choose_rule,
    cocycle_rhs,
    slash_factor,
)
from .grids import PanelGrid, default_r_grid
from .kernels import as_half_integer, kernel_from_factors, nu_mu, tau_factors, z_factors
from .modular import reduce_to_fd


@dataclass
class BasisTable:
    k: float
    sign: int
    n_max: int
    grid: PanelGrid | np.ndarray
    values: np.ndarray  # shape (n_max + 1, len(r_grid))
    y: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.n_max + 1, len(self.r_grid)):
            raise GridMismatch("table values do not match (n_max + 1, len(r_grid))")

    @property
    def r_grid(self) -> np.ndarray:
        return self.grid.nodes if isinstance(self.grid, PanelGrid) else np.asarray(self.grid)

    @property
    def d(self) -> int:
        return int(round(2 * self.k))

    def __call__(self, n: int, r) -> np.ndarray:
        """b_n at arbitrary radii (panel interpolation)."""
        if not isinstance(self.grid, PanelGrid):
            raise ConfigError("interpolation needs a panel grid")
        return self.grid.interp(self.values[n], r)

    def same_layout(self, other: "BasisTable") -> bool:
        return (
            abs(self.k - other.k) < 1e-12
            and self.n_max == other.n_max
            and len(self.r_grid) == len(other.r_grid)
            and np.array_equal(self.r_grid, other.r_grid)
        )


def default_height(n_max: int) -> float:
    """Sampling height y = min(1/2, 1/n_max): keeps e^{pi n y} <= e^pi for n <= n_max."""
    return min(0.5, 1.0 / max(1, n_max))


def sample_count(n_max: int, y: float, r_max: float = 0.0) -> int:
    """FFT length: at least 8 n_max, and large enough that the spectrum of F,
    which peaks near mode r^2, has decayed by e^{-14} past mode M."""
    need = max(8 * n_max, int(np.ceil(r_max**2 + 14.0 / y)), 64)
    return min(2**a * 3**b for a in range(0, 24) for b in range(0, 3) if 2**a * 3**b >= need)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("FOURIER_INTERP_THREADS", "1")))
    except ValueError:
        return 1


def sample_F_segment(k, F_sign: int, y: float, M: int, r, quad: QuadratureConfig = DEFAULT_QUAD,
                     far_distance: float = 0.25):
    """F_k^{F_sign}(x + iy, r) for x = -1 + 2j/M, j = 0..M-1; shape (M, len(r))."""
    r = np.asarray(r, dtype=float)
    x = -1 + 2 * np.arange(M) / M
    acc = np.zeros((M, r.size), complex)
    fac = np.ones(M, complex)
    w = np.empty(M, complex)
    for j, xx in enumerate(x):
        red = reduce_to_fd(complex(xx, y))
        z = complex(xx, y)
        for letter in red.word:
            if letter == "S":
                acc[j] += fac[j] * cocycle_rhs(k, F_sign, z, r)
                fac[j] *= slash_factor(k, F_sign, z)
                z = -1 / z
            else:
                z = z + (2 if letter == "T2" else -2)
        w[j] = red.z.z
    poles = np.stack([w, w - 2, w + 2, -1 / w, -1 / (w - 2), -1 / (w + 2)])
    dist = np.abs(np.abs(poles) - 1).min(0)
    far = dist >= far_distance
    vals = np.empty((M, r.size), complex)
    if far.any():
        shared = arc_rule(2j, quad)  # far from every pole: only cusp grading matters
        zd = z_factors(k, F_sign, shared.z, quad.qcfg)
        log_b, log_jw = tau_factors(k, F_sign, w[far], quad.qcfg)
        kern = kernel_from_factors(zd, log_b, log_jw, rel_tol=1e-15)
        vals[far] = (kern * shared.weight[None, :]) @ shared.basis(r)
    near = np.flatnonzero(~far)

    def one(j):
        rule = choose_rule(w[j], quad)
        return _eval_rule(k, F_sign, w[j], rule, r, quad.qcfg)

    n_thr = _threads()
    if n_thr > 1 and near.size > 1:
        with ThreadPoolExecutor(n_thr) as ex:
            res = list(ex.map(one, near))
    else:
        res = [one(j) for j in near]
    for j, v in zip(near, res):
        vals[j] = v
    return acc + fac[:, None] * vals, {"n_near": int(near.size), "min_pole_distance": float(dist.min())}


def coefficients(k, eps: int, grid=None, n_max: int = 150, y: float | None = None,
                 quad: QuadratureConfig = DEFAULT_QUAD, M: int | None = None,
                 alias_tol: float = 1e-9) -> BasisTable:
    """Table of b_{k,n}^{eps}(r), 0 <= n <= n_max, over the radial grid."""
    kf = float(as_half_integer(k))
    if eps not in (1, -1):
        raise ConfigError("eps must be +1 or -1")
    if n_max < 0:
        raise ConfigError("n_max must be nonnegative")
    grid = default_r_grid() if grid is None else grid
    r = grid.nodes if isinstance(grid, PanelGrid) else np.asarray(grid, dtype=float)
    if r.size == 0:
        raise ConfigError("empty radial grid")
    y = default_height(n_max) if y is None else float(y)
    if y <= 0:
        raise ConfigError("height must be positive")
    M = sample_count(n_max, y, float(r.max())) if M is None else int(M)
    if M < 2 * (n_max + 1):
        raise ConfigError("too few samples for the requested n_max")
    t0 = time.perf_counter()
    samples, info = sample_F_segment(kf, -eps, y, M, r, quad)
    c = np.fft.fft(samples, axis=0) / M
    n = np.arange(M)
    # F has only nonnegative powers of q, so mode m of the transform also carries
    # b_{m+M} q^{m+M}.  The top quarter of the spectrum must still be decaying;
    # carrying its level down by the remaining factor q^{M/4} bounds the wrap-around.
    spectrum = np.abs(c)
    peak = np.where(spectrum.max(0) > 0, spectrum.max(0), 1.0)
    top = spectrum[(3 * M) // 4 :].max(0) / peak
    mid = spectrum[M // 2 : (3 * M) // 4].max(0) / peak
    alias = float(np.max(top * np.exp(np.pi * y * (n_max - M / 4))))
    stalled = (top > 0.5 * mid) & (top > 1e-12)
    if alias > alias_tol or stalled.any():
        raise AliasingSuspected(
            f"spectrum tail not decaying (wrap-around estimate {alias:.2e}, "
            f"{int(stalled.sum())} stalled radii)"
        )
    b = c[: n_max + 1] * ((-1.0) ** n[: n_max + 1] * np.exp(np.pi * n[: n_max + 1] * y))[:, None]
    nu = nu_mu(kf).nu(-eps)
    meta = {
        "max_imag": float(np.abs(b.imag).max()),
        "below_nu_residual": float(np.abs(b[:nu]).max()) if nu > 0 else 0.0,
        "alias_level": alias,
        "samples": M,
        "near_points": info["n_near"],
        "min_pole_distance": info["min_pole_distance"],
        "seconds": round(time.perf_counter() - t0, 3),
        "nodes_per_panel": quad.nodes_per_panel,
        "h_max": quad.h_max,
        "cusp_h_min": quad.cusp_h_min,
        "nu_start": nu,
    }
    values = b.real.copy()
    values[:nu] = 0.0
    return BasisTable(kf, eps, n_max, grid, values, y, meta)


def assemble_a(table_plus: BasisTable, table_minus: BasisTable):
    """(a, a~) = ((b+ + b-)/2, (b+ - b-)/2), returned as tables with sign 0."""
    if table_plus.sign != 1 or table_minus.sign != -1:
        raise ConfigError("expected a (+) table and a (-) table")
    if not table_plus.same_layout(table_minus):
        raise GridMismatch("b+ and b- tables differ in k, n_max or grid")
    a = 0.5 * (table_plus.values + table_minus.values)
    at = 0.5 * (table_plus.values - table_minus.values)
    meta = {"from": "assemble_a"}
    mk = lambda v: BasisTable(table_plus.k, 0, table_plus.n_max, table_plus.grid, v,
                              table_plus.y, dict(meta))
    return mk(a), mk(at)


class TableCache:
    """Directory cache of basis tables keyed by (k, eps, n_max, grid, y)."""

    def __init__(self, root: str | os.PathLike | None = None):
        root = root or os.environ.get("FOURIER_INTERP_CACHE") or Path.home() / ".cache" / "fourier_interp"
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._mem: dict = {}

    def _key(self, k, eps, n_max, grid, y):
        gtxt = grid.to_text() if isinstance(grid, PanelGrid) else f"pts{len(grid)}"
        gtxt = gtxt.replace(":", "_").replace(",", "_")[:80]
        return f"b_k{float(k):g}_e{eps:+d}_n{n_max}_y{y:.6g}_{gtxt}"

    def get(self, k, eps, n_max=150, grid=None, y=None, quad: QuadratureConfig = DEFAULT_QUAD):
        from .io import read_basis_table, write_basis_table

        grid = default_r_grid() if grid is None else grid
        y = default_height(n_max) if y is None else y
        key = self._key(k, eps, n_max, grid, y)
        if key in self._mem:
            return self._mem[key]
        path = self.root / f"{key}.txt"
        if path.exists():
            tab = read_basis_table(path)
        else:
            tab = coefficients(k, eps, grid, n_max, y, quad)
            write_basis_table(tab, path)
        self._mem[key] = tab
        return tab

    def pair(self, k, n_max=150, grid=None, y=None):
        """(a, a~) tables for dimension parameter k."""
        return assemble_a(self.get(k, 1, n_max, grid, y), self.get(k, -1, n_max, grid, y))


def g_tilde(beta: float) -> float:
    """max(1, (beta / (2 pi e))^{beta/2})."""
    return max(1.0, (beta / (2 * np.pi * np.e)) ** (beta / 2))


def bound_shape(k, beta: float, n) -> np.ndarray:
    """(1+n)^{beta/2+k+1} Gamma(beta/2-k+1) g~(beta): the n-dependence of the sup bound."""
    from scipy.special import gamma

    n = np.asarray(n, dtype=float)
    return (1 + n) ** (beta / 2 + float(k) + 1) * gamma(beta / 2 - float(k) + 1) * g_tilde(beta)


@dataclass
class BoundReport:
    k: float
    beta: float
    g_tilde: float
    n: np.ndarray
    measured: dict  # sign -> sup_r (1 + r^beta)|b_n(r)|
    shape: np.ndarray
    constant: float
    rate: dict  # sign -> fitted c in |b| <= C (n+1)^{k+1} exp(-c r / sqrt(n+1))
    flagged: list

    @property
    def dominated(self) -> bool:
        return not self.flagged

    def lines(self) -> list[str]:
        out = [f"k={self.k:g} beta={self.beta:g} g_tilde={self.g_tilde:.17g} constant={self.constant:.6g}"]
        for i, n in enumerate(self.n):
            parts = [f"n={n}", f"shape={self.shape[i]:.6g}"]
            for sgn in sorted(self.measured, reverse=True):
                parts.append(f"sup{sgn:+d}={self.measured[sgn][i]:.6g} rate{sgn:+d}={self.rate[sgn][i]:.4g}")
            out.append(" ".join(parts))
        out.append("flagged=" + (",".join(map(str, self.flagged)) or "none"))
        return out


def tail_rate(r: np.ndarray, values: np.ndarray, n: int, floor: float = 1e-12, top: float = 1e-2) -> float:
    """Fitted c in |b(r)| ~ C exp(-c r / sqrt(n+1)) over the decaying tail.

    Uses the right-to-left running maximum as envelope, so sign changes of b do
    not spoil the fit.
    """
    env = np.maximum.accumulate(np.abs(values)[::-1])[::-1]
    peak = env[0]
    if peak == 0:
        return np.nan
    sel = (env <= top * peak) & (env >= floor * peak) & (r > r[np.argmax(np.abs(values))])
    if sel.sum() < 4:
        raise GridTooShort(f"tail of b_{n} not resolved on the grid")
    slope = np.polyfit(r[sel], np.log(env[sel]), 1)[0]
    return float(-slope * np.sqrt(n + 1))


def bound_report(k, beta: float, table_plus: BasisTable, table_minus: BasisTable | None = None,
                 n_check: int = 10, n_calibrate: int = 2, edge_fraction: float = 1e-3) -> BoundReport:
    """Measured weighted sups against the polynomial-in-n bound shape.

    The single constant is calibrated on the first ``n_calibrate`` nonzero indices
    and then tested on every n <= n_check; indices where the measured sup exceeds
    constant * shape are flagged.
    """
    kf = float(as_half_integer(k))
    if beta < 2 * kf + 2:
        raise ConfigError("beta must be at least 2k + 2")
    tables = [t for t in (table_plus, table_minus) if t is not None]
    for t in tables:
        if abs(t.k - kf) > 1e-12:
            raise GridMismatch("table k does not match")
    n_top = min(n_check, *(t.n_max for t in tables))
    ns = np.arange(n_top + 1)
    shape = bound_shape(kf, beta, ns)
    measured, rate = {}, {}
    for t in tables:
        r = t.r_grid
        w = (1 + r**beta)[None, :] * np.abs(t.values[: n_top + 1])
        sup = w.max(1)
        edge = w[:, -1]
        if np.any(edge > edge_fraction * np.maximum(sup, 1e-300)) or np.any(w.argmax(1)[sup > 0] == r.size - 1):
            raise GridTooShort("weighted sup not attained inside the grid; extend r_max")
        measured[t.sign] = sup
        rate[t.sign] = np.array([tail_rate(r, t.values[n], n) if sup[n] > 0 else np.nan for n in ns])
    sup_all = np.max(np.stack(list(measured.values())), 0)
    nonzero = np.flatnonzero(sup_all > 0)
    cal = nonzero[:n_calibrate]
    constant = float(np.max(sup_all[cal] / shape[cal])) if cal.size else 0.0
    flagged = [int(n) for n in ns if sup_all[n] > constant * shape[n] * (1 + 1e-12)]
    return BoundReport(kf, float(beta), g_tilde(beta), ns, measured, shape, constant, rate, flagged)
