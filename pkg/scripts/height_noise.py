"""Height dependence of extracted coefficients: max |b_n(y1) - b_n(y2)| per n.

Shows the growth of rounding noise like e^{pi n y} that limits the two-height
comparison to small n in double precision.
"""
import argparse
from dataclasses import dataclass

import numpy as np

from fourier_interp.grids import PanelGrid
from fourier_interp.radial_basis import coefficients


@dataclass
class Config:
    k: float = 2.0
    eps: int = 1
    heights: tuple = (1.5, 2.5)
    n_top: int = 5
    r_max: float = 3.0


def main(cfg: Config) -> None:
    grid = PanelGrid.uniform(cfg.r_max, 0.25, 12)
    tabs = [coefficients(cfg.k, cfg.eps, grid, cfg.n_top, y=y) for y in cfg.heights]
    print(f"# k={cfg.k:g} eps={cfg.eps:+d} heights={cfg.heights}")
    print("# n max_diff rounding_scale e^(pi n y_max) * 1e-16")
    for n in range(cfg.n_top + 1):
        diff = np.max(np.abs(tabs[0].values[n] - tabs[1].values[n]))
        print(f"{n} {diff:.3e} {1e-16 * np.exp(np.pi * n * max(cfg.heights)):.3e}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--k", type=float, default=2.0)
    p.add_argument("--eps", type=int, default=1)
    p.add_argument("--n-top", type=int, default=5)
    a = p.parse_args()
    main(Config(a.k, a.eps, n_top=a.n_top))
