"""Hyperbola cross pipeline for a range of perturbation sizes delta.

Prints the contraction budget, the reconstruction discrepancy and the verdict.
"""
import argparse
from dataclasses import dataclass

from fourier_interp.errors import FourierInterpError
from fourier_interp.hup import HyperbolaCrossData, OddProfile, hup_check
from fourier_interp.interp_radial import RadialBasis
from fourier_interp.radial_basis import TableCache


@dataclass
class Config:
    deltas: tuple = (0.0, 1e-4, 1e-3, 3e-3, 1e-2, 3e-2)
    n_max: int = 150
    seed: int = 0
    cache: str | None = None


def main(cfg: Config) -> None:
    basis = RadialBasis.load(4, cfg.n_max, cache=TableCache(cfg.cache))
    f = OddProfile.gaussian_pair()
    print("# delta budget discrepancy verdict")
    for delta in cfg.deltas:
        eps, eps_hat = HyperbolaCrossData.perturbation(delta, cfg.n_max, cfg.seed)
        data = HyperbolaCrossData.from_profile(f, eps, eps_hat, delta)
        try:
            rep = hup_check(data, f, basis=basis)
        except FourierInterpError as exc:
            print(f"{delta:g} - - {type(exc).__name__}")
            continue
        print(f"{delta:g} {rep.budget:.4g} {rep.norms['discrepancy']:.3e} {rep.verdict}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cache")
    a = p.parse_args()
    main(Config(seed=a.seed, cache=a.cache))
