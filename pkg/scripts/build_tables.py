"""Precompute the basis tables used by the tests and the CLI into the table cache."""
import argparse
import time
from dataclasses import dataclass

from fourier_interp.grids import PanelGrid
from fourier_interp.interp_radial import RadialBasis
from fourier_interp.nonradial import HarmonicTables
from fourier_interp.radial_basis import TableCache


@dataclass
class Config:
    cache: str | None = None
    dims: tuple = (1, 2, 3, 4)
    n_max: int = 150


def main(cfg: Config) -> None:
    cache = TableCache(cfg.cache)
    jobs = [(f"radial d={d} n<={cfg.n_max}", lambda d=d: RadialBasis.load(d, cfg.n_max, cache=cache))
            for d in cfg.dims]
    small = PanelGrid.uniform(8.0, 0.25, 12)
    wide = PanelGrid.uniform(12.0, 0.25, 12)
    for k in (0.5, 1.0, 2.0):
        jobs.append((f"k={k:g} n<=12 on [0,8]", lambda k=k: [cache.get(k, s, 12, small) for s in (1, -1)]))
        jobs.append((f"k={k:g} n<=10 on [0,12]", lambda k=k: [cache.get(k, s, 10, wide) for s in (1, -1)]))
    for d, m_max in ((3, 6), (2, 4)):
        tabs = HarmonicTables(d, m_max, 8, cache=cache)
        jobs.append((f"harmonic d={d} m<={m_max}", lambda t=tabs: [t.pair(m) for m in range(t.m_max + 1)]))
    for name, job in jobs:
        t0 = time.perf_counter()
        job()
        print(f"{name}: {time.perf_counter() - t0:.1f}s", flush=True)


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--cache")
    p.add_argument("--n-max", type=int, default=150)
    a = p.parse_args()
    main(Config(a.cache, n_max=a.n_max))
