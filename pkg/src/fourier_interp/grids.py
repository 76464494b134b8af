"""Composite Gauss-Legendre grids on [0, R] with spectral interpolation."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigError, GridCoverage


@dataclass(frozen=True)
class PanelGrid:
    """Gauss-Legendre nodes of a fixed order on each panel [breaks[i], breaks[i+1]]."""

    breaks: tuple[float, ...]
    order: int = 12

    def __post_init__(self):
        b = np.asarray(self.breaks)
        if b.ndim != 1 or b.size < 2 or np.any(np.diff(b) <= 0) or b[0] < 0:
            raise ConfigError("panel breaks must be increasing and nonnegative")
        if self.order < 2:
            raise ConfigError("panel order must be at least 2")

    @classmethod
    def uniform(cls, r_max: float = 8.0, width: float = 0.25, order: int = 12) -> "PanelGrid":
        m = max(1, int(round(r_max / width)))
        return cls(tuple(np.linspace(0.0, r_max, m + 1)), order)

    @cached_property
    def _ref(self):
        x, w = np.polynomial.legendre.leggauss(self.order)
        # barycentric weights for Legendre points
        bw = np.array([1 / np.prod(x[j] - np.delete(x, j)) for j in range(self.order)])
        return x, w, bw

    @cached_property
    def nodes(self) -> np.ndarray:
        x = self._ref[0]
        b = np.asarray(self.breaks)
        lo, hi = b[:-1, None], b[1:, None]
        return (lo + 0.5 * (hi - lo) * (x + 1)).ravel()

    @cached_property
    def weights(self) -> np.ndarray:
        w = self._ref[1]
        b = np.asarray(self.breaks)
        return (0.5 * np.diff(b)[:, None] * w).ravel()

    @property
    def r_max(self) -> float:
        return float(self.breaks[-1])

    def __len__(self) -> int:
        return (len(self.breaks) - 1) * self.order

    def interp_matrix(self, x) -> np.ndarray:
        """Dense matrix P with P @ values = interpolant at ``x`` (panelwise Lagrange)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        b = np.asarray(self.breaks)
        tol = 1e-12 * max(1.0, b[-1])
        if np.any(x < b[0] - tol) or np.any(x > b[-1] + tol):
            raise GridCoverage(
                f"points outside grid [{b[0]:.4g}, {b[-1]:.4g}]: range [{x.min():.4g}, {x.max():.4g}]"
            )
        ref, _, bw = self._ref
        p = np.clip(np.searchsorted(b, x, side="right") - 1, 0, len(b) - 2)
        t = 2 * (x - b[p]) / (b[p + 1] - b[p]) - 1
        diff = t[:, None] - ref[None, :]
        exact = np.isclose(diff, 0, atol=1e-15)
        diff = np.where(exact, 1.0, diff)
        c = bw[None, :] / diff
        c = c / c.sum(1, keepdims=True)
        hit = exact.any(1)
        c[hit] = exact[hit].astype(float)
        out = np.zeros((x.size, len(self)))
        cols = p[:, None] * self.order + np.arange(self.order)[None, :]
        np.put_along_axis(out, cols, c, axis=1)
        return out

    def interp(self, values, x) -> np.ndarray:
        values = np.asarray(values)
        return self.interp_matrix(x) @ values

    def to_text(self) -> str:
        b = np.asarray(self.breaks)
        if np.allclose(np.diff(b), b[1] - b[0], rtol=1e-12):
            return f"gl-uniform:{float(b[-1])!r}:{float(b[1] - b[0])!r}:{self.order}"
        return "gl-breaks:" + ",".join(repr(float(v)) for v in b) + f":{self.order}"

    @classmethod
    def from_text(cls, text: str) -> "PanelGrid":
        kind, rest = text.split(":", 1)
        if kind == "gl-uniform":
            r_max, width, order = rest.split(":")
            return cls.uniform(float(r_max), float(width), int(order))
        if kind == "gl-breaks":
            br, order = rest.rsplit(":", 1)
            return cls(tuple(float(v) for v in br.split(",")), int(order))
        raise ConfigError(f"unknown grid description {text!r}")


def default_r_grid() -> PanelGrid:
    """About 400 nodes on [0, 8]: 32 panels of 12 Gauss-Legendre points."""
    return PanelGrid.uniform(8.0, 0.25, 12)
