"""Uniqueness for measures on the hyperbola x1 x2 = 1 from a perturbed lattice cross.

Pipeline: an odd profile f gives the density g(t) = t sqrt(1 + t^4) f(t), its
antiderivative G (which needs int g = 0), and the radial function on R^4

    Phi(r) = int G(tau) e^{pi i tau r^2} dtau,
    F_4 Phi(rho) = -int G(tau) tau^{-2} e^{-pi i rho^2 / tau} dtau.

Values of mu_f^ on the two axes are values of Phi and F_4 Phi at square-root
radii, so cross data feed the four-dimensional radial reconstruction.

g even and G odd make Phi and F_4 Phi purely imaginary; the reconstruction
works with the real function Psi = -i Phi.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import mpmath
import numpy as np
from scipy.special import comb

from .errors import AccuracyNotReached, ConfigError, ParityViolation, TotalIntegralNonzero

HALF_WIDTH = 12.0
N_POINTS = 4097  # odd, so t = 0 is a node
ORDER = 12  # local interpolation stencil


def alpha(t):
    """Density factor t sqrt(1 + t^4) (= t^3 sqrt(1 + t^-4))."""
    t = np.asarray(t, dtype=float)
    return t * np.sqrt(1 + t**4)


@lru_cache(maxsize=None)
def _bary(order: int) -> np.ndarray:
    k = np.arange(order)
    return (-1.0) ** k * comb(order - 1, k)


def _local_interp(values: np.ndarray, t0: float, h: float, x, order: int = ORDER) -> np.ndarray:
    """Piecewise Lagrange interpolation of uniform samples with a centred stencil."""
    x = np.asarray(x, dtype=float)
    n = values.shape[0]
    pos = (x - t0) / h
    start = np.clip(np.floor(pos).astype(int) - order // 2 + 1, 0, n - order)
    s = pos - start
    diff = s[..., None] - np.arange(order)
    exact = diff == 0
    diff = np.where(exact, 1.0, diff)
    w = _bary(order) / diff
    hit = exact.any(axis=-1)
    w = np.where(hit[..., None], exact.astype(float), w)
    idx = start[..., None] + np.arange(order)
    return np.sum(w * values[idx], axis=-1) / np.sum(w, axis=-1)


@lru_cache(maxsize=None)
def _interval_weights(order: int) -> np.ndarray:
    """W[o, k] = int_o^{o+1} l_k(s) ds for the Lagrange basis on nodes 0..order-1."""
    xq, wq = np.polynomial.legendre.leggauss(order)
    nodes = np.arange(order)
    W = np.zeros((order - 1, order))
    for o in range(order - 1):
        s = o + 0.5 * (xq + 1)
        for k in range(order):
            others = np.delete(nodes, k)
            lk = np.prod((s[:, None] - others) / (k - others), axis=1)
            W[o, k] = 0.5 * np.sum(wq * lk)
    return W


def _interval_integrals(values: np.ndarray, h: float, order: int = ORDER) -> np.ndarray:
    """Integrals over each grid interval of the local interpolant."""
    n = values.shape[0]
    j = np.arange(n - 1)
    start = np.clip(j - order // 2 + 1, 0, n - order)
    off = j - start
    idx = start[:, None] + np.arange(order)
    return h * np.sum(_interval_weights(order)[off] * values[idx], axis=1)


@dataclass
class LineSamples:
    """Samples on the symmetric uniform grid t_j = -T + j h, j < n."""

    values: np.ndarray
    half_width: float = HALF_WIDTH
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1 or self.values.size < 4 * ORDER or self.values.size % 2 == 0:
            raise ConfigError("need an odd number (>= 48) of samples so that t = 0 is a node")
        if self.half_width <= 0:
            raise ConfigError("half width must be positive")

    @property
    def h(self) -> float:
        return 2 * self.half_width / (self.values.size - 1)

    @property
    def t(self) -> np.ndarray:
        return np.linspace(-self.half_width, self.half_width, self.values.size)

    def at(self, x) -> np.ndarray:
        return _local_interp(self.values, -self.half_width, self.h, x)

    def parity_error(self, sign: int) -> float:
        """max |v(-t) - sign v(t)|."""
        return float(np.max(np.abs(self.values[::-1] - sign * self.values)))

    def trapezoid_phase(self, omega, trig: str = "cos") -> np.ndarray:
        """sum_j h v_j trig(omega t_j) (spectrally accurate for decayed samples)."""
        omega = np.atleast_1d(np.asarray(omega, dtype=float))
        fn = np.cos if trig == "cos" else np.sin
        t, hv = self.t, self.h * self.values
        out = np.empty(omega.shape)
        for sl in _chunks(omega.size, max(1, 2**22 // t.size)):
            out[sl] = fn(np.outer(omega[sl], t)) @ hv
        return out


def _chunks(n: int, size: int):
    for i in range(0, n, size):
        yield slice(i, min(n, i + size))


@dataclass
class OddProfile(LineSamples):
    """Odd real profile f with a declared regularity class s0 (not certified)."""

    s0: float = 1.0

    @classmethod
    def from_callable(cls, fn, half_width: float = HALF_WIDTH, n_points: int = N_POINTS,
                      s0: float = 1.0) -> "OddProfile":
        t = np.linspace(-half_width, half_width, n_points)
        return cls(fn(t), half_width, {}, s0)

    @classmethod
    def zero(cls, half_width: float = HALF_WIDTH, n_points: int = N_POINTS) -> "OddProfile":
        return cls(np.zeros(n_points), half_width)

    @classmethod
    def gaussian_pair(cls, a: float = 1.0, b: float = 2.0, half_width: float = HALF_WIDTH,
                      n_points: int = N_POINTS, s0: float = 1.0) -> "OddProfile":
        """f(t) = t e^{-a t^2} - c t e^{-b t^2} with c chosen so that int alpha f = 0 on the grid."""
        if a <= 0 or b <= 0 or a == b:
            raise ConfigError("need distinct positive Gaussian rates")
        t = np.linspace(-half_width, half_width, n_points)
        u, v = t * np.exp(-a * t**2), t * np.exp(-b * t**2)
        wa = alpha(t)
        c = np.sum(wa * u) / np.sum(wa * v)
        prof = cls(u - c * v, half_width, {"a": a, "b": b, "c": float(c)}, s0)
        return prof

    @property
    def is_odd(self) -> bool:
        return self.parity_error(-1) <= 1e-12 * max(1.0, float(np.abs(self.values).max()))


def g_from_f(p: OddProfile, parity_tol: float = 1e-9) -> LineSamples:
    """Even density g = alpha f, symmetrized; the parity defect of f is recorded."""
    scale = max(1.0, float(np.abs(p.values).max()))
    err = p.parity_error(-1)
    if err > parity_tol * scale:
        raise ParityViolation(f"f is not odd: max |f(-t) + f(t)| = {err:.2e}")
    g = alpha(p.t) * p.values
    g = 0.5 * (g + g[::-1])
    return LineSamples(g, p.half_width, {"parity_error": err})


def _edge_tail(values: np.ndarray, h: float, m: int = 16) -> float:
    """Estimate of the integral beyond the last sample by an exponential fit."""
    tail = np.abs(values[-m:])
    if tail[-1] == 0:
        return 0.0
    rate = -np.polyfit(np.arange(m) * h, np.log(np.maximum(tail, 1e-300)), 1)[0]
    if rate <= 0:
        return np.inf
    return float(values[-1] / rate)


def antiderivative_G(g: LineSamples, total_tol: float = 1e-8) -> LineSamples:
    """G(x) = int_{-inf}^x g, from the left and as -int_x^inf g from the right.

    The two cumulative sums differ by int g; their mean is made odd, which
    pins G(0) = 0 for even g.
    """
    pieces = _interval_integrals(g.values, g.h)
    left_tail = _edge_tail(g.values[::-1], g.h)
    right_tail = _edge_tail(g.values, g.h)
    total = float(pieces.sum()) + left_tail + right_tail
    if not np.isfinite(total) or abs(total) > total_tol:
        raise TotalIntegralNonzero(f"int g = {total:.3e} (tolerance {total_tol:.1e})")
    left = left_tail + np.concatenate([[0.0], np.cumsum(pieces)])
    right = -right_tail - np.concatenate([np.cumsum(pieces[::-1])[::-1], [0.0]])
    G = 0.5 * (left + right)
    G = 0.5 * (G - G[::-1])
    meta = {"total": total, "discrepancy": float(np.max(np.abs(left - right))),
            "edge_tails": (left_tail, right_tail)}
    return LineSamples(G, g.half_width, meta)


def _small_t_model(s: LineSamples, powers, t_fit: float = 0.25) -> np.ndarray:
    """Least-squares coefficients of v(t) ~ sum c_p t^p on 0 < t <= t_fit."""
    t = s.t
    sel = (t > 0) & (t <= t_fit)
    x = t[sel] / t_fit
    A = x[:, None] ** np.asarray(powers)[None, :]
    c = np.linalg.lstsq(A, s.values[sel], rcond=None)[0]
    return c / t_fit ** np.asarray(powers, dtype=float)


def _gl_panels(a: float, b: float, width: float, order: int = 20):
    n = max(1, int(np.ceil((b - a) / width)))
    br = np.linspace(a, b, n + 1)
    x, w = np.polynomial.legendre.leggauss(order)
    h = 0.5 * np.diff(br)[:, None]
    return (br[:-1, None] + h * (x + 1)).ravel(), (h * w).ravel()


def _power_tail(q: int, U: float, omega: float) -> complex:
    """int_U^inf u^{-q} e^{i omega u} du = U^{1-q} E_q(-i omega U)."""
    if omega == 0:
        return U ** (1 - q) / (q - 1)
    return complex(U ** (1 - q) * mpmath.expint(q, -1j * omega * U))


def inverse_phase_integral(s: LineSamples, omega, weight_power: int, model_powers,
                           cutoff: float = 50.0) -> np.ndarray:
    """J(omega) = int_0^inf v(tau) tau^w e^{i omega / tau} dtau for sampled v.

    tau >= 1 by Gauss-Legendre panels; tau < 1 through u = 1/tau, which turns the
    accumulating oscillation at 0 into e^{i omega u} with a decaying amplitude.
    Beyond u = cutoff, v is replaced by its small-tau power model and the tail is
    summed in closed form with exponential integrals.
    """
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    if np.any(omega < 0):
        raise ConfigError("frequencies must be non-negative")
    w_max = float(omega.max()) if omega.size else 0.0
    width = min(0.25, 2 * np.pi / max(w_max, 1e-300))
    T = s.half_width
    tau, wt = _gl_panels(1.0, T, width)
    amp_a = wt * s.at(tau) * tau**weight_power
    u, wu = _gl_panels(1.0, cutoff, width)
    # dtau = du / u^2, tau^w = u^{-w}
    amp_b = wu * s.at(1 / u) * u ** (-weight_power - 2)
    coef = _small_t_model(s, model_powers)
    out = np.empty(omega.shape, dtype=complex)
    for sl in _chunks(omega.size, max(1, 2**22 // (tau.size + u.size))):
        om = omega[sl]
        out[sl] = np.exp(1j * np.outer(om, 1 / tau)) @ amp_a + np.exp(1j * np.outer(om, u)) @ amp_b
    for i, om in enumerate(omega):
        out[i] += sum(c * _power_tail(p + weight_power + 2, cutoff, float(om))
                      for c, p in zip(coef, model_powers))
    return out


G_MODEL = (3, 5, 7, 9, 11)  # odd G vanishing to third order at 0
g_MODEL = (2, 4, 6, 8, 10)


def _check_routes(a, b, tol: float, what: str) -> float:
    gap = float(np.max(np.abs(a - b))) if np.size(a) else 0.0
    scale = max(1.0, float(np.max(np.abs(a))) if np.size(a) else 1.0)
    if gap > tol * scale:
        raise AccuracyNotReached(f"{what}: two evaluation routes differ by {gap:.2e}")
    return gap


def _fft_route(G: LineSamples, xi: np.ndarray, pad: int = 8) -> np.ndarray:
    """F_1 G(xi) from a zero-padded FFT, interpolated in frequency."""
    n = G.values.size
    L = pad * n
    spectrum = np.fft.fft(G.values, L)
    spectrum = np.fft.fftshift(spectrum)
    df = 1 / (L * G.h)
    f0 = -(L // 2) * df
    # F_1 G(xi) = h e^{-2 pi i xi t_0} sum_j G_j e^{-2 pi i xi j h}
    re = _local_interp(spectrum.real, f0, df, xi)
    im = _local_interp(spectrum.imag, f0, df, xi)
    return G.h * np.exp(2j * np.pi * xi * G.half_width) * (re + 1j * im)


def phi_eval(G: LineSamples, r, return_info: bool = False, route_tol: float = 1e-6):
    """Phi(r) = int G(tau) e^{pi i tau r^2} dtau = F_1 G(-r^2/2).

    Direct trapezoidal quadrature (G odd: 2i sum G sin) checked against a padded
    FFT of G read off at -r^2/2.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r < 0):
        raise ConfigError("radii must be non-negative")
    xi = -0.5 * r**2
    nyq = 0.5 / G.h
    if r.size and np.max(np.abs(xi)) > 0.95 * nyq:
        raise AccuracyNotReached(f"r = {r.max():.3g} needs frequency beyond the grid's {nyq:.3g}")
    direct = 1j * G.trapezoid_phase(np.pi * r**2, "sin")
    fft = _fft_route(G, xi)
    gap = _check_routes(direct, fft, route_tol, "Phi")
    if return_info:
        return direct, {"route_gap": gap, "fft": fft}
    return direct


def phi_by_parts(g: LineSamples, r) -> np.ndarray:
    """(i / (pi r^2)) int g(tau) e^{pi i tau r^2} dtau, for r > 0."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r <= 0):
        raise ConfigError("integration by parts needs r > 0")
    w = np.pi * r**2
    return 1j / w * g.trapezoid_phase(w, "cos")


def phi_hat_eval(G: LineSamples, rho, g: LineSamples | None = None, return_info: bool = False,
                 route_tol: float = 1e-5, by_parts_from: float = 0.5):
    """F_4 Phi(rho) = -int G(tau) tau^{-2} e^{-pi i rho^2 / tau} dtau.

    For odd G this is 2i int_0^inf G tau^{-2} sin(pi rho^2 / tau) dtau.  When g is
    given, the integrated-by-parts form (1 / (pi i rho^2)) int g e^{-pi i rho^2/tau}
    is evaluated for rho >= by_parts_from as a cross-check.
    """
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    if np.any(rho < 0):
        raise ConfigError("radii must be non-negative")
    w = np.pi * rho**2
    direct = 2j * inverse_phase_integral(G, w, -2, G_MODEL).imag
    info = {"route_gap": None}
    if g is not None:
        sel = rho >= by_parts_from
        if sel.any():
            other = 2 * inverse_phase_integral(g, w[sel], 0, g_MODEL).real / (1j * w[sel])
            info["route_gap"] = _check_routes(direct[sel], other, route_tol, "F_4 Phi")
            info["by_parts"] = other
    return (direct, info) if return_info else direct


def mu_hat_axis(g: LineSamples, axis: str, value) -> np.ndarray:
    """mu_f^ on an axis of the cross (normalization e^{pi i <x, xi>}).

    x-axis: int g(tau) e^{pi i tau v} dtau; y-axis: int g(tau) e^{pi i v / tau} dtau.
    Both are real for even g.
    """
    v = np.atleast_1d(np.asarray(value, dtype=float))
    if axis == "x":
        return g.trapezoid_phase(np.pi * v, "cos")
    if axis == "y":
        # even g: twice the half-line integral, which is even in v
        w = np.pi * np.abs(v)
        return 2 * inverse_phase_integral(g, w, 0, g_MODEL).real
    raise ConfigError(f"axis must be 'x' or 'y', got {axis!r}")


CROSS_EXPONENT = 7  # |eps_n| + |eps^_n| <= delta n^-7


@dataclass
class HyperbolaCrossData:
    """Values of mu_f^ at (n + eps_n, 0) and (0, n + eps^_n), n = 0..n_max."""

    mu_hat_x: np.ndarray
    mu_hat_y: np.ndarray
    eps: np.ndarray
    eps_hat: np.ndarray
    delta: float = 0.0

    def __post_init__(self):
        for name in ("mu_hat_x", "mu_hat_y", "eps", "eps_hat"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))
        n1 = self.eps.size
        if n1 < 2 or any(a.shape != (n1,) for a in (self.mu_hat_x, self.mu_hat_y, self.eps_hat)):
            raise ConfigError("cross data arrays must share one length >= 2")
        if self.eps[0] != 0 or self.eps_hat[0] != 0:
            raise ConfigError("the cross must contain the origin: eps_0 = eps^_0 = 0")
        n = np.arange(1, n1)
        size = np.abs(self.eps[1:]) + np.abs(self.eps_hat[1:])
        bad = size > self.delta * n ** (-float(CROSS_EXPONENT)) * (1 + 1e-12)
        if np.any(bad):
            raise ConfigError(f"|eps_n| + |eps^_n| exceeds delta n^-7 at n={int(n[bad][0])}")

    @property
    def n_max(self) -> int:
        return self.eps.size - 1

    def nodes(self):
        n = np.arange(self.n_max + 1)
        return n + self.eps, n + self.eps_hat

    def profile(self):
        """The same perturbation as a four-dimensional radial profile (s = 1, eta = 1/2).

        n^-7 <= 2^7 (1 + n)^-7 for n >= 1, so delta is rescaled by 2^7.
        """
        from .interp_radial import PerturbationProfile

        return PerturbationProfile(self.eps, self.eps_hat, 1.0, 0.5, 2.0**CROSS_EXPONENT * self.delta, 4)

    @staticmethod
    def perturbation(delta: float, n_max: int = 150, seed: int = 0):
        """Random (eps, eps^) with eps_0 = eps^_0 = 0 filling the n^-7 envelope up to 90%."""
        rng = np.random.default_rng(seed)
        n = np.arange(n_max + 1, dtype=float)
        env = np.zeros(n_max + 1)
        env[1:] = 0.9 * delta * n[1:] ** (-float(CROSS_EXPONENT))
        share = rng.uniform(0, 1, n_max + 1)
        eps = env * share * rng.choice([-1.0, 1.0], n_max + 1)
        eps_hat = env * (1 - share) * rng.choice([-1.0, 1.0], n_max + 1)
        return eps, eps_hat

    @classmethod
    def from_profile(cls, f: OddProfile, eps, eps_hat, delta: float) -> "HyperbolaCrossData":
        """Honest data: mu_f^ evaluated at the perturbed cross."""
        g = g_from_f(f)
        eps, eps_hat = np.asarray(eps, dtype=float), np.asarray(eps_hat, dtype=float)
        n = np.arange(eps.size)
        return cls(mu_hat_axis(g, "x", n + eps), mu_hat_axis(g, "y", n + eps_hat), eps, eps_hat, delta)

    def zeroed(self) -> "HyperbolaCrossData":
        return HyperbolaCrossData(0 * self.mu_hat_x, 0 * self.mu_hat_y, self.eps, self.eps_hat, self.delta)


def node_values_from_cross(data: HyperbolaCrossData):
    """Psi = -i Phi and its transform at sqrt(n + eps_n), sqrt(n + eps^_n).

    Psi(sqrt v) = mu^(v, 0) / (pi v) and Psi^(sqrt v) = -mu^(0, v) / (pi v) for v > 0;
    at the origin both vanish because G is odd.
    """
    vx, vy = data.nodes()
    psi = np.zeros_like(vx)
    psih = np.zeros_like(vy)
    psi[1:] = data.mu_hat_x[1:] / (np.pi * vx[1:])
    psih[1:] = -data.mu_hat_y[1:] / (np.pi * vy[1:])
    return psi, psih


@dataclass
class HupReport:
    verdict: str  # zero | reconstructed | inconsistent | mismatch
    tol: float
    zero_tol: float
    norms: dict
    budget: float
    neumann: list = field(default_factory=list)
    compare_r: float = 3.0

    @property
    def passed(self) -> bool:
        return self.verdict in ("zero", "reconstructed")

    def lines(self) -> list[str]:
        out = [f"verdict={self.verdict}", f"tol={self.tol:.3g} zero_tol={self.zero_tol:.3g}",
               f"budget={self.budget:.6g} compare_r_max={self.compare_r:g}"]
        out += [f"{k}={v:.6e}" for k, v in self.norms.items()]
        return out + self.neumann


def hup_check(data: HyperbolaCrossData, f: OddProfile, basis=None, cache=None, tol: float = 1e-3,
              zero_tol: float = 1e-8, compare_r: float = 3.0, max_budget: float = 1.0) -> HupReport:
    """Reconstruct Psi = -i Phi from the cross data and compare with Psi computed from f.

    Verdicts: ``zero`` when the data vanish and so does everything derived from f;
    ``reconstructed`` when the reconstruction matches Psi to ``tol`` on
    [0, compare_r]; ``inconsistent`` when vanishing data are contradicted by a
    nonzero f; ``mismatch`` otherwise.
    """
    from .errors import BudgetExceeded
    from .interp_radial import NodeData, RadialBasis, budget, reconstruct

    profile = data.profile()
    g = g_from_f(f)
    G = antiderivative_G(g)
    vx, vy = data.nodes()
    psi_nodes, psih_nodes = node_values_from_cross(data)

    if basis is None:
        basis = RadialBasis.load(4, max(150, data.n_max), cache=cache)
    if basis.d != 4:
        raise ConfigError("the cross pipeline runs on four-dimensional tables")
    basis = basis.truncated(min(basis.n_max, data.n_max))
    q = budget(profile, basis).value
    if q >= max_budget:
        raise BudgetExceeded(f"contraction budget {q:.4g} >= {max_budget:g}")

    # Psi from f, at the nodes (equivalence check) and on the comparison interval
    direct_nodes = (-1j * phi_eval(G, np.sqrt(vx))).real
    directh_nodes = (-1j * phi_hat_eval(G, np.sqrt(vy))).real
    rr = np.linspace(0.0, compare_r, 301)
    direct = (-1j * phi_eval(G, rr)).real

    nd = NodeData(4, psi_nodes, psih_nodes, data.n_max)
    x, log = reconstruct(nd, profile, basis, q=q)
    recon = x(rr)
    norms = {
        "f_sup": float(np.abs(f.values).max()),
        "g_sup": float(np.abs(g.values).max()),
        "G_sup": float(np.abs(G.values).max()),
        "total_integral": abs(G.meta["total"]),
        "data_sup": float(max(np.abs(data.mu_hat_x).max(), np.abs(data.mu_hat_y).max())),
        "node_residual": float(max(np.abs(direct_nodes - psi_nodes).max(),
                                   np.abs(directh_nodes - psih_nodes).max())),
        "direct_sup": float(np.abs(direct).max()),
        "reconstructed_sup": float(np.abs(recon).max()),
        "discrepancy": float(np.abs(recon - direct).max()),
    }
    data_zero = norms["data_sup"] <= zero_tol
    if data_zero and max(norms["direct_sup"], norms["reconstructed_sup"], norms["G_sup"]) <= zero_tol:
        verdict = "zero"
    elif norms["discrepancy"] <= tol:
        verdict = "reconstructed"
    elif data_zero:
        verdict = "inconsistent"
    else:
        verdict = "mismatch"
    return HupReport(verdict, tol, zero_tol, norms, q, log.lines(), compare_r)
