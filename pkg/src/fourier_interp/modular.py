"""Jacobi theta functions, the lambda invariant and the Hauptmodul J on the
upper half-plane.

All three thetas are carried as logarithms.  Points with small imaginary part
are moved into the standard SL2(Z) fundamental domain by the S and T
generators, which permute (Theta2, Theta3, Theta4) among themselves, so the
q-series is only ever summed where it converges in a handful of terms.  The
logarithms use the determination that vanishes at i*infinity (for Theta2 the
factor 2 q^{1/4} is split off first), which makes every transformation rule an
exact identity between analytic functions and keeps odd powers of theta
single-valued.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import BranchTrackingFailure, ConfigError, IterationLimit, NonConvergence

LOG2 = np.log(2.0)


@dataclass(frozen=True)
class HalfPlanePoint:
    re: float
    im: float

    def __post_init__(self):
        if not (np.isfinite(self.re) and np.isfinite(self.im)) or self.im <= 0:
            raise ConfigError(f"point must lie in the upper half-plane, got im={self.im}")

    @classmethod
    def from_complex(cls, z: complex) -> "HalfPlanePoint":
        return cls(float(np.real(z)), float(np.imag(z)))

    @property
    def z(self) -> complex:
        return complex(self.re, self.im)

    @property
    def q(self) -> complex:
        return np.exp(1j * np.pi * self.z)


@dataclass(frozen=True)
class QSeriesConfig:
    target_abs_error: float = 1e-17
    max_terms: int = 64
    min_im_direct: float = 0.5

    def __post_init__(self):
        if self.target_abs_error <= 0 or self.max_terms < 1 or self.min_im_direct <= 0:
            raise ConfigError("invalid QSeriesConfig")

    def n_terms(self, im_min: float) -> int:
        n = int(np.ceil(np.sqrt(-np.log(self.target_abs_error) / (np.pi * im_min)))) + 1
        if n > self.max_terms:
            raise NonConvergence(
                f"q-series needs {n} terms at im={im_min:.3g} (max_terms={self.max_terms})"
            )
        return n


DEFAULT_CFG = QSeriesConfig()


def _as_complex_array(z) -> np.ndarray:
    if isinstance(z, HalfPlanePoint):
        z = z.z
    arr = np.asarray(z, dtype=complex)
    if np.any(~(arr.imag > 0)):
        raise ConfigError("all points must have positive imaginary part")
    return arr


def _log_thetas_direct(z: np.ndarray, cfg: QSeriesConfig):
    """Logs of (Theta2, Theta3, Theta4) by q-series; requires moderate im(z)."""
    if z.size == 0:
        e = np.empty_like(z)
        return e, e.copy(), e.copy()
    n_terms = cfg.n_terms(float(z.imag.min()))
    n = np.arange(1, n_terms + 1)
    qn2 = np.exp(1j * np.pi * z[..., None] * n**2)
    sign = (-1.0) ** n
    t3 = 1 + 2 * qn2.sum(-1)
    t4 = 1 + 2 * (sign * qn2).sum(-1)
    m = np.arange(0, n_terms + 1)
    t2r = np.exp(1j * np.pi * z[..., None] * (m * (m + 1))).sum(-1)
    l2 = LOG2 + 1j * np.pi * z / 4 + np.log(t2r)
    return l2, np.log(t3), np.log(t4)


def log_thetas(z, cfg: QSeriesConfig = DEFAULT_CFG, max_steps: int = 200):
    """Return (log Theta2, log Theta3, log Theta4) at the point(s) ``z``.

    Points with im(z) < cfg.min_im_direct are first carried into the SL2(Z)
    fundamental domain; the logarithms are then transported back step by step.
    """
    z = _as_complex_array(z)
    shape = z.shape
    z = z.ravel().copy()
    out2 = np.empty_like(z)
    out3 = np.empty_like(z)
    out4 = np.empty_like(z)

    direct = z.imag >= cfg.min_im_direct
    if direct.any():
        out2[direct], out3[direct], out4[direct] = _log_thetas_direct(z[direct], cfg)
    idx = np.flatnonzero(~direct)
    if idx.size:
        w = z[idx].copy()
        shifts, inverted, pre_s = [], [], []
        for _ in range(max_steps):
            n = np.round(w.real)
            w = w - n
            inv = np.abs(w) < 1 - 1e-15
            shifts.append(n.astype(np.int64))
            inverted.append(inv)
            pre_s.append(w.copy())
            if not inv.any():
                break
            w = np.where(inv, -1 / w, w)
        else:
            raise IterationLimit("SL2(Z) reduction did not terminate")
        l2, l3, l4 = _log_thetas_direct(w, cfg)
        for n, inv, u in zip(reversed(shifts), reversed(inverted), reversed(pre_s)):
            # undo S: value at u = -1/w from value at w
            half = 0.5 * np.log(-1j * np.where(inv, w, 1j))
            n2, n3, n4 = half + l4, half + l3, half + l2
            l2 = np.where(inv, n2, l2)
            l3 = np.where(inv, n3, l3)
            l4 = np.where(inv, n4, l4)
            w = u
            # undo translation by n
            l2 = l2 + 1j * np.pi * n / 4
            odd = (n % 2) != 0
            l3, l4 = np.where(odd, l4, l3), np.where(odd, l3, l4)
            w = w + n
        out2[idx], out3[idx], out4[idx] = l2, l3, l4
    return out2.reshape(shape), out3.reshape(shape), out4.reshape(shape)


_THETA_INDEX = {
    "2": 0, "θ2": 0, "theta2": 0,
    "3": 1, "θ3": 1, "theta3": 1, "theta": 1,
    "4": 2, "θ4": 2, "theta4": 2,
}


def theta(which: str, z, cfg: QSeriesConfig = DEFAULT_CFG):
    """Theta2, Theta3 (= theta) or Theta4 evaluated at ``z``."""
    key = _THETA_INDEX.get(str(which).lower())
    if key is None:
        raise ConfigError(f"unknown theta function {which!r}")
    val = np.exp(log_thetas(z, cfg)[key])
    return val[()] if np.ndim(val) == 0 else val


def log_lambda_J(z, cfg: QSeriesConfig = DEFAULT_CFG):
    """Return (log lambda, log J) with J = 16 Theta3^8 / (Theta2^4 Theta4^4)."""
    l2, l3, l4 = log_thetas(z, cfg)
    return 4 * (l2 - l3), LOG2 * 4 + 8 * l3 - 4 * l2 - 4 * l4


def lambda_J(z, cfg: QSeriesConfig = DEFAULT_CFG, check: bool = True):
    """Return (lambda, J, J_minus) at ``z``; J_minus = 1 - 2 lambda."""
    log_lam, log_j = log_lambda_J(z, cfg)
    lam = np.exp(log_lam)
    jj = np.exp(log_j)
    jm = 1 - 2 * lam
    if check:
        ok = np.isfinite(jj) & np.isfinite(lam)
        resid = np.abs(jj * lam * (1 - lam) - 16)
        if np.any(resid[ok] > 1e-9 * np.maximum(np.abs(jj[ok]), 16.0)):
            raise NonConvergence("lambda/J consistency check failed")
    if np.ndim(lam) == 0:
        return lam[()], jj[()], jm[()]
    return lam, jj, jm


def log_theta_pow(z, two_k: int, cfg: QSeriesConfig = DEFAULT_CFG):
    """log theta^{2k}(z) under the determination vanishing at i*infinity."""
    if int(two_k) != two_k or two_k < 1:
        raise ConfigError("two_k must be a positive integer")
    val = two_k * log_thetas(z, cfg)[1]
    return val[()] if np.ndim(val) == 0 else val


@dataclass(frozen=True)
class ReductionResult:
    z: HalfPlanePoint
    word: tuple[str, ...] = field(default_factory=tuple)
    log_j_theta: complex = 0j

    def apply_word(self, w: complex | None = None) -> complex:
        """Map the reduced point back through the inverse word."""
        w = self.z.z if w is None else w
        for letter in reversed(self.word):
            if letter == "S":
                w = -1 / w
            elif letter == "T2":
                w = w - 2
            elif letter == "T-2":
                w = w + 2
        return w


def reduce_to_fd(tau, max_steps: int = 10_000) -> ReductionResult:
    """Carry ``tau`` into the closure of {|z| > 1, -1 < re z < 1} using S and T^{+-2}.

    ``log_j_theta`` accumulates log(theta(z_out)/theta(tau)), i.e. the sum of
    (1/2) Log(z/i) over the S steps, so that
    log theta^{2k}(tau) = 2k * (log theta(z_out) - log_j_theta).
    """
    z = complex(tau.z if isinstance(tau, HalfPlanePoint) else tau)
    if not z.imag > 0:
        raise ConfigError("tau must lie in the upper half-plane")
    word: list[str] = []
    acc = 0j
    for _ in range(max_steps):
        while z.real >= 1:
            z -= 2
            word.append("T-2")
        while z.real < -1:
            z += 2
            word.append("T2")
        if abs(z) < 1 - 1e-15:
            step = 0.5 * np.log(z / 1j)
            if abs(step.imag) > np.pi / 4 + 1e-12:
                raise BranchTrackingFailure("S-step factor left the principal half-plane")
            acc += step
            z = -1 / z
            word.append("S")
            continue
        return ReductionResult(HalfPlanePoint.from_complex(z), tuple(word), acc)
    raise IterationLimit(f"reduction of {tau} did not terminate in {max_steps} steps")


def log_theta_pow_via_reduction(tau, two_k: int, cfg: QSeriesConfig = DEFAULT_CFG) -> complex:
    """Independent route to log theta^{2k}: theta-group reduction plus automorphy factor."""
    red = reduce_to_fd(tau)
    return two_k * (complex(log_thetas(red.z.z, cfg)[1]) - red.log_j_theta)


def dJ(z, cfg: QSeriesConfig = DEFAULT_CFG):
    """J'(z) from the closed form J' = -pi i J_minus J theta^4."""
    lam, jj, jm = lambda_J(z, cfg, check=False)
    return -1j * np.pi * jm * jj * np.exp(4 * log_thetas(z, cfg)[1])


def in_fundamental_domain(z, closed: bool = True, tol: float = 1e-12) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    if closed:
        return (np.abs(z) >= 1 - tol) & (z.real >= -1 - tol) & (z.real <= 1 + tol) & (z.imag > 0)
    return (np.abs(z) > 1) & (np.abs(z.real) < 1) & (z.imag > 0)


__all__: Sequence[str] = [
    "HalfPlanePoint",
    "QSeriesConfig",
    "ReductionResult",
    "theta",
    "log_thetas",
    "lambda_J",
    "log_lambda_J",
    "log_theta_pow",
    "log_theta_pow_via_reduction",
    "reduce_to_fd",
    "dJ",
    "in_fundamental_domain",
]
