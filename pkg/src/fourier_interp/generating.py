"""The generating functions F_k^eps(tau, r) as contour integrals of the kernel.

Two contours are available for a point ``w`` of the closed fundamental domain:

* the unit semicircle from -1 to 1 (``arc``), and
* the box -1 -> -1+iY -> 1+iY -> 1 (``box``), whose two vertical sides combine
  by two-periodicity into a single sine-weighted integral; deforming the arc up
  to the box crosses the pole at z = w, contributing exp(pi i w r^2).

Poles of the kernel sit on the theta-group orbit of ``w``; after modular
reduction they can come close to either contour, so quadrature uses composite
Gauss-Legendre panels graded geometrically toward the cusps and toward the
contour point nearest each nearby pole.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AccuracyNotReached, ConfigError, PoleProximity
from .kernels import as_half_integer, kernel_from_factors, tau_factors, z_factors
from .modular import QSeriesConfig, reduce_to_fd


@dataclass(frozen=True)
class QuadratureConfig:
    nodes_per_panel: int = 20
    h_max: float = 0.25
    cusp_h_min: float = 2e-3
    pole_fraction: float = 0.5
    standoff: float = 1e-9
    target: float = 1e-11
    pole_radius: float = 0.6
    qcfg: QSeriesConfig = field(default_factory=QSeriesConfig)

    def __post_init__(self):
        if self.nodes_per_panel < 4 or self.h_max <= 0 or self.standoff <= 0:
            raise ConfigError("invalid QuadratureConfig")

    def coarser(self) -> "QuadratureConfig":
        return QuadratureConfig(
            nodes_per_panel=max(4, (2 * self.nodes_per_panel) // 3),
            h_max=self.h_max,
            cusp_h_min=self.cusp_h_min,
            pole_fraction=self.pole_fraction,
            standoff=self.standoff,
            target=self.target,
            pole_radius=self.pole_radius,
            qcfg=self.qcfg,
        )


DEFAULT_QUAD = QuadratureConfig()


def graded_breakpoints(a: float, b: float, attractors, h_max: float) -> np.ndarray:
    """Panel breakpoints on [a, b] refined geometrically toward each attractor.

    ``attractors`` is an iterable of (point, smallest panel size).
    """
    pts = [a, b]
    for p, h in attractors:
        h = max(h, 1e-14)
        if p > a and p < b:
            pts.append(p)
        step = h
        while step < 2 * h_max:
            pts.extend((p - step, p + step))
            step *= 2
    pts = np.unique(np.clip(np.asarray(pts, dtype=float), a, b))
    out = [pts[0]]
    for x in pts[1:]:
        gap = x - out[-1]
        if gap <= 1e-15 * max(1.0, abs(x)):
            continue
        if gap > h_max:
            m = int(np.ceil(gap / h_max))
            out.extend(out[-1] + gap * np.arange(1, m) / m)
        out.append(x)
    return np.asarray(out)


def composite_gauss(breaks: np.ndarray, m: int):
    x, w = np.polynomial.legendre.leggauss(m)
    lo, hi = breaks[:-1, None], breaks[1:, None]
    half = 0.5 * (hi - lo)
    nodes = (lo + half * (x + 1)).ravel()
    weights = (half * w).ravel()
    return nodes, weights


def _orbit_neighbours(w: complex) -> np.ndarray:
    base = np.array([w, w - 2, w + 2])
    return np.concatenate([base, -1 / base])


@dataclass
class ContourRule:
    """Nodes z_l and weights so that F(w, r) = sum_l weight_l K(w, z_l) E_l(r) + residue."""

    kind: str  # "arc" or "box"
    z: np.ndarray
    weight: np.ndarray
    vertical: np.ndarray  # True where E_l(r) = sin(pi r^2) exp(-pi t_l r^2)
    t: np.ndarray  # parameter on the vertical side (0 where unused)
    residue: bool
    min_distance: float

    def basis(self, r) -> np.ndarray:
        """E_l(r) as an array of shape (len(z), len(r))."""
        r2 = np.asarray(r, dtype=float) ** 2
        e = np.exp(1j * np.pi * self.z[:, None] * r2[None, :])
        if self.vertical.any():
            v = self.vertical
            e[v] = np.sin(np.pi * r2)[None, :] * np.exp(-np.pi * self.t[v, None] * r2[None, :])
        return e


def arc_rule(w: complex, quad: QuadratureConfig = DEFAULT_QUAD) -> ContourRule:
    poles = _orbit_neighbours(w)
    dist = np.abs(np.abs(poles) - 1)
    attract = [(0.0, quad.cusp_h_min), (np.pi, quad.cusp_h_min)]
    near = dist < quad.pole_radius
    for p, d in zip(poles[near], dist[near]):
        s = np.pi - np.angle(p)
        attract.append((float(s), quad.pole_fraction * max(d, 1e-14)))
    breaks = graded_breakpoints(0.0, np.pi, attract, quad.h_max)
    s, ws = composite_gauss(breaks, quad.nodes_per_panel)
    z = np.exp(1j * (np.pi - s))
    weight = 0.5 * ws * (-1j * z)
    zero = np.zeros(s.shape, bool)
    return ContourRule("arc", z, weight, zero, np.zeros_like(s), False, float(dist.min()))


def box_rule(w: complex, height: float, quad: QuadratureConfig = DEFAULT_QUAD) -> ContourRule:
    poles = _orbit_neighbours(w)
    # vertical side re z = 1, parameter t in [0, height]; poles near re z = -1
    # appear here through their translates by 2, which are in the neighbour set
    tproj = np.clip(poles.imag, 0, height)
    dv = np.abs(poles - (1 + 1j * tproj))
    att_v = [(0.0, quad.cusp_h_min)]
    for tp, d in zip(tproj, dv):
        if d < quad.pole_radius:
            att_v.append((float(tp), quad.pole_fraction * max(d, 1e-14)))
    bv = graded_breakpoints(0.0, height, att_v, quad.h_max)
    tv, wv = composite_gauss(bv, quad.nodes_per_panel)
    # horizontal top, x in [-1, 1]
    xproj = np.clip(poles.real, -1, 1)
    dh = np.abs(poles - (xproj + 1j * height))
    att_h = []
    for xp, d in zip(xproj, dh):
        if d < quad.pole_radius:
            att_h.append((float(xp), quad.pole_fraction * max(d, 1e-14)))
    bh = graded_breakpoints(-1.0, 1.0, att_h, quad.h_max)
    xh, wh = composite_gauss(bh, quad.nodes_per_panel)
    z = np.concatenate([1 + 1j * tv, xh + 1j * height])
    weight = np.concatenate([wv, 0.5 * wh]).astype(complex)
    vertical = np.concatenate([np.ones(tv.shape, bool), np.zeros(xh.shape, bool)])
    t = np.concatenate([tv, np.zeros_like(xh)])
    d = float(min(np.min(dv), np.min(dh)))
    return ContourRule("box", z, weight, vertical, t, True, d)


def _box_height(w: complex) -> float:
    return max(1.5, w.imag + 1.0)


def choose_rule(w: complex, quad: QuadratureConfig = DEFAULT_QUAD, kind: str = "auto") -> ContourRule:
    if kind == "arc":
        rule = arc_rule(w, quad)
    elif kind == "box":
        rule = box_rule(w, _box_height(w), quad)
    else:
        a = arc_rule(w, quad)
        rule = a if a.min_distance >= 0.25 else max(
            (a, box_rule(w, _box_height(w), quad)), key=lambda c: c.min_distance
        )
    if rule.min_distance < quad.standoff:
        raise PoleProximity(f"kernel pole within {rule.min_distance:.2e} of the contour")
    return rule


def _eval_rule(k, sign, w, rule: ContourRule, r, cfg: QSeriesConfig) -> np.ndarray:
    zd = z_factors(k, sign, rule.z, cfg)
    log_b, log_jw = tau_factors(k, sign, w, cfg)
    kern = kernel_from_factors(zd, log_b, log_jw, rel_tol=1e-15)
    out = (rule.weight * kern) @ rule.basis(r)
    if rule.residue:
        out = out + np.exp(1j * np.pi * w * np.asarray(r, dtype=float) ** 2)
    return out


def _check_sign(sign):
    if sign not in (1, -1):
        raise ConfigError("sign must be +1 or -1")


def F_eval(k, sign: int, tau, r, quad: QuadratureConfig = DEFAULT_QUAD, kind: str = "auto",
           with_error: bool = False):
    """F_k^sign(tau, r) for tau in the closed fundamental domain.

    Returns values for each radius in ``r`` (scalar in, scalar out).  With
    ``with_error`` an estimate from a coarser rule is returned as well.
    """
    as_half_integer(k)
    _check_sign(sign)
    w = complex(getattr(tau, "z", tau))
    rr = np.atleast_1d(np.asarray(r, dtype=float))
    rule = choose_rule(w, quad, kind)
    val = _eval_rule(k, sign, w, rule, rr, quad.qcfg)
    err = None
    if with_error or quad.target is not None:
        coarse = _eval_rule(k, sign, w, choose_rule(w, quad.coarser(), rule.kind), rr, quad.qcfg)
        err = float(np.max(np.abs(coarse - val)))
        if err > quad.target * max(1.0, float(np.max(np.abs(val)))):
            raise AccuracyNotReached(f"F quadrature error estimate {err:.2e} exceeds target")
    out = val[0] if np.ndim(r) == 0 else val
    return (out, err) if with_error else out


def F_eval_shifted(k, sign: int, tau, r, y: float, quad: QuadratureConfig = DEFAULT_QUAD):
    """F via the box contour at height ``y``.

    Valid for tau in the fundamental domain and, by analytic continuation, for
    tau just below the unit arc as long as y exceeds the height of -1/tau.
    """
    as_half_integer(k)
    _check_sign(sign)
    w = complex(getattr(tau, "z", tau))
    if not (y > max(w.imag, 1.0) and abs(w.real) < 1):
        raise ConfigError("box height must exceed max(im tau, 1) with |re tau| < 1")
    if abs(w) < 1 and not y > (-1 / w).imag:
        raise ConfigError("box height must exceed im(-1/tau) below the arc")
    rr = np.atleast_1d(np.asarray(r, dtype=float))
    rule = box_rule(w, y, quad)
    if rule.min_distance < quad.standoff:
        raise PoleProximity("kernel pole too close to the shifted contour")
    val = _eval_rule(k, sign, w, rule, rr, quad.qcfg)
    return val[0] if np.ndim(r) == 0 else val


def slash_factor(k, sign: int, tau: complex) -> complex:
    """sign * (tau/i)^{-k} with the principal branch."""
    return sign * np.exp(-float(k) * np.log(complex(tau) / 1j))


def cocycle_rhs(k, sign: int, tau: complex, r) -> np.ndarray:
    """phi_r(tau) - sign (tau/i)^{-k} phi_r(-1/tau)."""
    r2 = np.asarray(r, dtype=float) ** 2
    return np.exp(1j * np.pi * tau * r2) - slash_factor(k, sign, tau) * np.exp(-1j * np.pi / tau * r2)


def reduce_with_cocycle(k, sign: int, tau: complex, r):
    """Express F(tau) = c(r) + A * F(w) with w in the closed fundamental domain."""
    red = reduce_to_fd(tau)
    z = complex(tau)
    r = np.asarray(r, dtype=float)
    acc = np.zeros(r.shape, complex)
    factor = 1.0 + 0j
    for letter in red.word:
        if letter == "S":
            acc = acc + factor * cocycle_rhs(k, sign, z, r)
            factor = factor * slash_factor(k, sign, z)
            z = -1 / z
        elif letter == "T2":
            z = z + 2
        else:
            z = z - 2
    return acc, factor, red.z.z


def F_any(k, sign: int, tau, r, quad: QuadratureConfig = DEFAULT_QUAD):
    """F at an arbitrary point of the upper half-plane via the functional equation."""
    rr = np.atleast_1d(np.asarray(r, dtype=float))
    acc, factor, w = reduce_with_cocycle(k, sign, complex(getattr(tau, "z", tau)), rr)
    val = acc + factor * F_eval(k, sign, w, rr, quad)
    return val[0] if np.ndim(r) == 0 else val
