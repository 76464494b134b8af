"""Index bookkeeping and the modular kernels K^+ and K^- on the upper half-plane."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ConfigError, PoleProximity
from .modular import DEFAULT_CFG, LOG2, QSeriesConfig, log_thetas


def as_half_integer(k) -> Fraction:
    """Validate ``k`` as a positive half-integer and return it exactly."""
    frac = Fraction(k).limit_denominator(2) if not isinstance(k, Fraction) else k
    if frac.denominator not in (1, 2) or frac <= 0 or abs(float(frac) - float(k)) > 1e-12:
        raise ConfigError(f"k must be a positive half-integer, got {k!r}")
    return frac


@dataclass(frozen=True)
class NuMu:
    k: float
    nu_minus: int
    nu_plus: int
    mu_minus: float
    mu_plus: float

    def nu(self, sign: int) -> int:
        return self.nu_plus if sign > 0 else self.nu_minus


def nu_mu(k) -> NuMu:
    kf = as_half_integer(k)
    a, b = (kf + 2) / 4, (kf + 4) / 4
    fa, fb = a.numerator // a.denominator, b.numerator // b.denominator
    return NuMu(float(kf), fa, fb, -float(a - fa), -float(b - fb))


def _log_one_minus_two(log_lam: np.ndarray) -> np.ndarray:
    """log(1 - 2 lambda) without overflow when |lambda| is huge (any branch)."""
    big = log_lam.real > 30
    lam = np.exp(np.where(big, 0, log_lam))
    small_branch = np.log(1 - 2 * lam + 0j)
    big_branch = LOG2 + 1j * np.pi + log_lam + np.log1p(-0.5 * np.exp(-np.where(big, log_lam, 0)))
    return np.where(big, big_branch, small_branch)


@dataclass
class ContourData:
    """Precomputed z-dependent factors of the kernel on a set of contour nodes.

    ``log_a`` holds log of -J_minus(z) J(z)^nu theta(z)^{4-2k} (sign +) or of
    -J(z)^nu theta(z)^{4-2k} (sign -); ``log_j`` holds log J(z).  Everything is
    kept in log form because J underflows near the cusps +-1.
    """

    z: np.ndarray
    log_a: np.ndarray
    log_j: np.ndarray


def z_factors(k, sign: int, z, cfg: QSeriesConfig = DEFAULT_CFG) -> ContourData:
    kf = float(as_half_integer(k))
    nu = nu_mu(kf).nu(sign)
    z = np.asarray(z, dtype=complex)
    l2, l3, l4 = log_thetas(z, cfg)
    log_lam = 4 * (l2 - l3)
    log_j = 4 * LOG2 + 8 * l3 - 4 * l2 - 4 * l4
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        log_a = 1j * np.pi + nu * log_j + (4 - 2 * kf) * l3
        if sign > 0:
            log_a = log_a + _log_one_minus_two(log_lam)
    return ContourData(z, log_a, log_j)


def tau_factors(k, sign: int, tau, cfg: QSeriesConfig = DEFAULT_CFG):
    """Return (log B(tau), log J(tau)) where B = theta^{2k} J^{1-nu} [J_minus]."""
    kf = float(as_half_integer(k))
    nu = nu_mu(kf).nu(sign)
    tau = np.asarray(tau, dtype=complex)
    l2, l3, l4 = log_thetas(tau, cfg)
    log_lam = 4 * (l2 - l3)
    log_j = 4 * LOG2 + 8 * l3 - 4 * l2 - 4 * l4
    with np.errstate(divide="ignore"):
        log_b = 2 * kf * l3 + (1 - nu) * log_j
        if sign < 0:
            log_b = log_b + _log_one_minus_two(log_lam)
    return log_b, log_j


def log_j_difference(log_jz, log_jt):
    """log(J(z) - J(tau)) and |1 - J_small/J_large| from the two logarithms."""
    big_z = log_jz.real >= log_jt.real
    hi = np.where(big_z, log_jz, log_jt)
    lo = np.where(big_z, log_jt, log_jz)
    rel = -np.expm1(lo - hi)
    with np.errstate(divide="ignore"):
        log_den = hi + np.log(rel) + np.where(big_z, 0, 1j * np.pi)
    return log_den, np.abs(rel)


def kernel_from_factors(zd: ContourData, log_b, log_j_tau, rel_tol: float = 1e-12) -> np.ndarray:
    """Kernel values K(tau_i, z_l) as an array of shape tau.shape + z.shape."""
    log_b = np.asarray(log_b)[..., None]
    log_jt = np.asarray(log_j_tau)[..., None]
    log_den, rel = log_j_difference(zd.log_j, log_jt)
    if np.any(rel <= rel_tol):
        raise PoleProximity("J(z) and J(tau) coincide to working precision")
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        val = np.exp(zd.log_a + log_b - log_den)
    return np.where(np.isneginf(zd.log_a.real + np.real(log_b)), 0, val)


def kernel_K(k, sign: int, tau, z, cfg: QSeriesConfig = DEFAULT_CFG):
    """The kernel K_k^sign(tau, z) (scalar or broadcast over arrays of z)."""
    if sign not in (1, -1):
        raise ConfigError("sign must be +1 or -1")
    zd = z_factors(k, sign, np.atleast_1d(z), cfg)
    log_b, log_jt = tau_factors(k, sign, complex(tau), cfg)
    val = kernel_from_factors(zd, log_b, log_jt)
    return val[0] if np.ndim(z) == 0 else val


def kernel_K_direct(k, sign: int, tau, z, cfg: QSeriesConfig = DEFAULT_CFG) -> complex:
    """Textbook evaluation with explicit theta powers and J' (for cross-checks)."""
    kf = float(as_half_integer(k))
    nu = nu_mu(kf).nu(sign)
    l2z, l3z, l4z = (complex(v) for v in log_thetas(complex(z), cfg))
    l2t, l3t, l4t = (complex(v) for v in log_thetas(complex(tau), cfg))
    th_z = np.exp(l3z)
    lam_z = np.exp(4 * (l2z - l3z))
    lam_t = np.exp(4 * (l2t - l3t))
    jz, jt = 16 / (lam_z * (1 - lam_z)), 16 / (lam_t * (1 - lam_t))
    jmz, jmt = 1 - 2 * lam_z, 1 - 2 * lam_t
    djz = -1j * np.pi * jmz * jz * th_z**4
    ratio = np.exp(2 * kf * l3t) / np.exp(2 * kf * l3z)
    val = djz / (jz - jt) / (1j * np.pi) * ratio * jz ** (nu - 1) / jt ** (nu - 1)
    if sign < 0:
        val *= jmt / jmz
    return complex(val)
