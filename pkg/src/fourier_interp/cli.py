"""Command-line front end: ``fourier-interp {basis,verify,reconstruct,hup,bounds}``.

Exit status: 0 success, 1 failed verification, 2 configuration error,
3 numerical failure.  Errors are also printed to stderr as one JSON record.
Reports are deterministic apart from a final ``# generated`` footer line.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import ConfigError, FourierInterpError
from .grids import PanelGrid
from .kernels import as_half_integer

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


@dataclass
class RunConfig:
    command: str
    out: Path
    ks: list = field(default_factory=list)
    signs: tuple = (1, -1)
    n_min: int = 0
    n_max: int | None = None
    grid: PanelGrid | None = None
    y: float | None = None
    d: int = 4
    profile: Path | None = None
    suites: list = field(default_factory=list)
    tol_scale: float = 1.0
    table_dir: Path | None = None
    cache: Path | None = None
    beta: float | None = None
    delta: float | None = None
    shape: str = "alternating"
    t: float = 1.0
    f_kind: str = "gaussian"
    zero_data: bool = False
    seed: int = 0


# -- parsing and validation ---------------------------------------------------

def _parse_ks(text: str) -> list:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if tok:
            try:
                val = Fraction(tok)
            except (ValueError, ZeroDivisionError):
                raise ConfigError(f"--k {tok!r} is not a number") from None
            try:
                out.append(float(as_half_integer(val)))
            except ConfigError:
                raise ConfigError(f"--k {tok}: k must be a positive half-integer") from None
    if not out:
        raise ConfigError("--k needs at least one value")
    return out


def _parse_signs(text: str) -> tuple:
    table = {"+1": (1,), "1": (1,), "-1": (-1,), "both": (1, -1)}
    if text not in table:
        raise ConfigError("--eps-sign must be +1, -1 or both")
    return table[text]


def _parse_grid(text: str | None):
    """``r_max:width[:order]`` for a uniform panel grid."""
    if text is None:
        return None
    try:
        parts = [float(x) for x in text.split(":")]
    except ValueError:
        raise ConfigError(f"--grid {text!r}: expected r_max:width[:order]") from None
    if len(parts) not in (2, 3) or parts[0] <= 0 or parts[1] <= 0:
        raise ConfigError(f"--grid {text!r}: expected positive r_max:width[:order]")
    order = int(parts[2]) if len(parts) == 3 else 12
    if abs(parts[0] / parts[1] - round(parts[0] / parts[1])) > 1e-9 or order < 2:
        raise ConfigError("--grid width must divide r_max and order must be >= 2")
    return PanelGrid.uniform(parts[0], parts[1], order)


SUITES = ("functional-equation", "periodicity", "height-independence", "realness", "kronecker",
          "single-node", "eigenfunction", "kronecker-origin")
DEFAULT_SUITES = SUITES[:-1]


def _parse_suites(text: str | None) -> list:
    if not text:
        return list(DEFAULT_SUITES)
    chosen = []
    for tok in text.split(","):
        tok = tok.strip()
        hits = [tok] if tok in SUITES else [s for s in SUITES if tok and tok in s]
        if not hits:
            raise ConfigError(f"--suite {tok!r} matches none of {', '.join(SUITES)}")
        chosen += [h for h in hits if h not in chosen]
    return chosen


def build_config(args) -> RunConfig:
    cfg = RunConfig(args.command, Path(args.out))
    if args.tol_scale <= 0:
        raise ConfigError("--tol-scale must be positive")
    cfg.tol_scale = args.tol_scale
    cfg.grid = _parse_grid(args.grid)
    cfg.cache = Path(args.cache) if args.cache else None
    if args.n_max is not None and args.n_max < 0:
        raise ConfigError("--n-max must be nonnegative")
    cfg.n_max = args.n_max
    if args.k is not None:
        cfg.ks = _parse_ks(args.k)
    cfg.signs = _parse_signs(args.eps_sign)
    if args.profile is not None:
        cfg.profile = Path(args.profile)
        if not cfg.profile.is_file():
            raise ConfigError(f"--profile {args.profile}: no such file")
    cmd = args.command
    if cmd == "basis":
        if not cfg.ks or cfg.n_max is None:
            raise ConfigError("basis needs --k and --n-max")
        cfg.n_min = args.n_min
        if args.y is not None and args.y <= 0:
            raise ConfigError("--y must be positive")
        cfg.y = args.y
    elif cmd == "verify":
        cfg.suites = _parse_suites(args.suite)
        cfg.ks = cfg.ks or [0.5, 1.0, 1.5, 2.0, 2.5]
        cfg.n_max = 12 if cfg.n_max is None else cfg.n_max
        if args.table_dir:
            cfg.table_dir = Path(args.table_dir)
            if not cfg.table_dir.is_dir():
                raise ConfigError(f"--table-dir {args.table_dir}: not a directory")
    elif cmd == "reconstruct":
        if args.d not in (1, 2, 3, 4):
            raise ConfigError("--d must be 1, 2, 3 or 4")
        cfg.d = args.d
        cfg.n_max = 150 if cfg.n_max is None else cfg.n_max
        if args.delta is not None and args.delta < 0:
            raise ConfigError("--delta must be nonnegative")
        cfg.delta, cfg.shape, cfg.t, cfg.seed = args.delta, args.shape, args.t, args.seed
        if cfg.t <= 0:
            raise ConfigError("--t must be positive")
        if cfg.profile is not None:
            from .io import read_profile

            prof = read_profile(cfg.profile)
            if prof.n_max < cfg.n_max:
                raise ConfigError(f"profile has n_max={prof.n_max} < --n-max {cfg.n_max}")
    elif cmd == "hup":
        cfg.n_max = 150 if cfg.n_max is None else cfg.n_max
        cfg.delta = 1e-3 if args.delta is None else args.delta
        if cfg.delta < 0:
            raise ConfigError("--delta must be nonnegative")
        cfg.f_kind, cfg.zero_data, cfg.seed = args.f, args.zero_data, args.seed
        if cfg.profile is not None:
            from .io import read_cross_data

            read_cross_data(cfg.profile)
    elif cmd == "bounds":
        if not cfg.ks:
            raise ConfigError("bounds needs --k")
        cfg.n_max = 10 if cfg.n_max is None else cfg.n_max
        cfg.beta = args.beta
        for k in cfg.ks:
            beta = 2 * k + 2 if cfg.beta is None else cfg.beta
            if beta < 2 * k + 2:
                raise ConfigError(f"--beta {beta:g} below 2k + 2 = {2 * k + 2:g}")
    return cfg


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--k", help="comma-separated half-integers, e.g. 1/2,1,2")
    common.add_argument("--d", type=int, default=4)
    common.add_argument("--eps-sign", default="both", help="+1, -1 or both")
    common.add_argument("--n-max", type=int)
    common.add_argument("--grid", help="r_max:width[:order] panel grid")
    common.add_argument("--profile", help="profile / data file")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--suite", help="comma-separated suite filter")
    common.add_argument("--tol-scale", type=float, default=1.0)
    common.add_argument("--cache", help="basis table cache directory")
    p = argparse.ArgumentParser(prog="fourier-interp", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    b = sub.add_parser("basis", parents=[common], help="generate basis tables")
    b.add_argument("--n-min", type=int, default=0, help="first index of the |b| plot data")
    b.add_argument("--y", type=float, help="contour height")
    v = sub.add_parser("verify", parents=[common], help="run verification suites")
    v.add_argument("--table-dir", help="use basis tables from this directory")
    r = sub.add_parser("reconstruct", parents=[common], help="perturbed radial reconstruction")
    r.add_argument("--delta", type=float, help="perturbation size (default: half the threshold)")
    r.add_argument("--shape", choices=("alternating", "random", "zero"), default="alternating")
    r.add_argument("--t", type=float, default=1.0, help="Gaussian target exp(-pi t r^2)")
    r.add_argument("--seed", type=int, default=0)
    h = sub.add_parser("hup", parents=[common], help="hyperbola cross pipeline")
    h.add_argument("--delta", type=float)
    h.add_argument("--f", choices=("gaussian", "zero"), default="gaussian")
    h.add_argument("--zero-data", action="store_true", help="replace the cross data by zeros")
    h.add_argument("--seed", type=int, default=0)
    bd = sub.add_parser("bounds", parents=[common], help="decay bound report")
    bd.add_argument("--beta", type=float)
    return p


# -- output helpers -------------------------------------------------------------

def _footer() -> str:
    stamp = _dt.datetime.now(_dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    return f"# generated {stamp}"


def write_report(path: Path, lines: list[str], echo: bool = True) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n" + _footer() + "\n")
    if echo:
        print("\n".join(lines))


def write_columns(path: Path, header: str, cols) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, np.column_stack(cols), fmt="%.17g", header=header, comments="# ")


def _cache(cfg: RunConfig):
    from .radial_basis import TableCache

    return TableCache(cfg.cache)


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


# -- commands -------------------------------------------------------------------

def cmd_basis(cfg: RunConfig) -> int:
    from .grids import default_r_grid
    from .io import write_basis_table
    from .radial_basis import coefficients

    if cfg.n_min > cfg.n_max:
        _warn(f"empty index range {cfg.n_min}..{cfg.n_max}; nothing written")
        return EXIT_OK
    grid = cfg.grid or default_r_grid()
    cfg.out.mkdir(parents=True, exist_ok=True)
    lines = [f"# basis n_max={cfg.n_max} grid={grid.to_text()}"]
    for k in cfg.ks:
        for s in cfg.signs:
            tab = coefficients(k, s, grid, cfg.n_max, cfg.y)
            tab.meta.pop("seconds", None)  # keeps reruns byte-identical
            stem = f"b_k{k:g}_e{s:+d}_n{cfg.n_max}"
            write_basis_table(tab, cfg.out / f"{stem}.txt")
            ns = range(cfg.n_min, cfg.n_max + 1)
            write_columns(cfg.out / f"{stem}_abs.txt", "r " + " ".join(f"|b_{n}|" for n in ns),
                          [tab.r_grid] + [np.abs(tab.values[n]) for n in ns])
            m = tab.meta
            lines.append(f"{stem}.txt k={k:g} eps={s:+d} y={tab.y:.6g} samples={m['samples']} "
                         f"max_imag={m['max_imag']:.3e} alias={m['alias_level']:.3e} nu={m['nu_start']}")
    write_report(cfg.out / "basis_report.txt", lines)
    return EXIT_OK


def _verify_tables(cfg: RunConfig):
    from .io import read_basis_table

    loaded = {}
    if cfg.table_dir is not None:
        for path in sorted(cfg.table_dir.glob("*.txt")):
            with open(path) as fh:
                if "eps=" not in fh.readline():
                    continue
            tab = read_basis_table(path)
            if tab.sign in (1, -1):
                loaded[(tab.k, tab.sign)] = tab
    cache = _cache(cfg)
    grid = cfg.grid or PanelGrid.uniform(8.0, 0.25, 12)

    def get(k, s):
        if (k, s) not in loaded:
            loaded[(k, s)] = cache.get(k, s, cfg.n_max, grid)
        return loaded[(k, s)]

    return loaded, get


def cmd_verify(cfg: RunConfig) -> int:
    from . import checks

    sc = cfg.tol_scale
    results = []
    if cfg.n_max < 8 and set(cfg.suites) & {"kronecker", "kronecker-origin", "single-node", "eigenfunction"}:
        raise ConfigError("table-based suites need --n-max >= 8")
    loaded, get = _verify_tables(cfg)
    for suite in cfg.suites:
        if suite == "functional-equation":
            results += [checks.functional_equation(k, s, tol=1e-8 * sc) for k in cfg.ks for s in cfg.signs]
        elif suite == "periodicity":
            results += [checks.periodicity(k, s, tol=1e-9 * sc) for k in cfg.ks for s in cfg.signs]
        elif suite == "height-independence":
            results += [checks.height_independence(k, s, tol=1e-8 * sc) for k in cfg.ks for s in cfg.signs]
        elif suite == "kronecker":
            results.append(checks.kronecker_d1(get(0.5, 1), get(0.5, -1), m_from=1, tol=1e-6 * sc))
        elif suite == "kronecker-origin":
            # includes the node m = 0, where the data are not independent
            results.append(checks.kronecker_d1(get(0.5, 1), get(0.5, -1), m_from=0, tol=1e-6 * sc))
            results += [checks.single_node(get(k, s), m_from=0, tol=1e-6 * sc) for k in (1.0, 2.0) for s in (1, -1)]
        elif suite == "single-node":
            results += [checks.single_node(get(k, s), m_from=1, tol=1e-6 * sc) for k in (1.0, 2.0) for s in (1, -1)]
        elif suite == "eigenfunction":
            results += [checks.eigenfunction(get(k, s), tol=1e-5 * sc) for k in (0.5, 1.0, 2.0) for s in (1, -1)]
    if "realness" in cfg.suites:
        if not loaded:
            for k in (0.5, 1.0, 2.0):
                for s in (1, -1):
                    get(k, s)
        for key in sorted(loaded):
            results += checks.realness(loaded[key], tol=1e-9 * sc)
    failed = sum(not r.passed for r in results)
    lines = [r.line() for r in results]
    lines.append(f"# checks={len(results)} passed={len(results) - failed} failed={failed} tol_scale={sc:g}")
    write_report(cfg.out / "verify_report.txt", lines)
    return EXIT_OK if failed == 0 else EXIT_FAIL


def cmd_reconstruct(cfg: RunConfig) -> int:
    from .errors import NonConvergence
    from .interp_radial import (NodeData, PerturbationProfile, RadialBasis, budget, reconstruct,
                                threshold_delta)
    from .io import read_profile

    d, n_max = cfg.d, cfg.n_max
    basis = RadialBasis.load(d, n_max, cache=_cache(cfg))
    if cfg.profile is not None:
        prof = read_profile(cfg.profile)
        source = str(cfg.profile)
    elif cfg.shape == "zero":
        prof = PerturbationProfile.zero(n_max, d=d)
        source = "zero"
    else:
        make = PerturbationProfile.alternating if cfg.shape == "alternating" else (
            lambda d_, dl, n: PerturbationProfile.random(d_, dl, n, seed=cfg.seed))
        delta = cfg.delta
        if delta is None:
            delta = 0.5 * threshold_delta(make(d, 1e-3, n_max), basis)
        prof = make(d, delta, n_max)
        source = f"{cfg.shape} delta={delta:.6g}"
    q = budget(prof, basis)
    t = cfg.t
    f = lambda r: np.exp(-np.pi * t * r**2)
    fhat = lambda r: t ** (-d / 2) * np.exp(-np.pi * r**2 / t)
    data = NodeData.sample(d, f, fhat, prof, n_max)
    x, log = reconstruct(data, prof, basis, q=q.value)
    rr = np.linspace(0.0, 3.0, 301)
    vals = x(rr)
    err = np.abs(vals - f(rr))
    ratios = [v for v in log.ratios if np.isfinite(v)]
    lines = [f"# reconstruct d={d} n_max={n_max} target=exp(-pi*{t:g}*r^2) profile={source}",
             f"budget={q.value:.6g} measured={q.measured:.6g} tail={q.tail:.3e}",
             f"iterations={len(log.diffs)} converged={log.converged}",
             f"max_ratio={max(ratios) if ratios else float('nan'):.4g}",
             f"sup_error_r<=3={err.max():.3e}"]
    write_report(cfg.out / "reconstruct_report.txt", lines)
    steps = np.arange(1, len(log.diffs) + 1)
    ratio_col = np.array([np.nan] + list(log.ratios))[: steps.size]
    write_columns(cfg.out / "neumann_log.txt", "step diff_V1 ratio", [steps, log.diffs, ratio_col])
    write_columns(cfg.out / "reconstruction.txt", "r reconstructed exact abs_error", [rr, vals, f(rr), err])
    if not log.converged:
        raise NonConvergence(f"Neumann iteration stopped after {len(log.diffs)} steps")
    return EXIT_OK


def cmd_hup(cfg: RunConfig) -> int:
    from .hup import HyperbolaCrossData, OddProfile, hup_check
    from .io import read_cross_data, write_cross_data

    f = OddProfile.gaussian_pair() if cfg.f_kind == "gaussian" else OddProfile.zero()
    if cfg.profile is not None:
        data = read_cross_data(cfg.profile)
    else:
        eps, eps_hat = HyperbolaCrossData.perturbation(cfg.delta, cfg.n_max, cfg.seed)
        data = HyperbolaCrossData.from_profile(f, eps, eps_hat, cfg.delta)
    if cfg.zero_data:
        data = data.zeroed()
    rep = hup_check(data, f, cache=_cache(cfg))
    cfg.out.mkdir(parents=True, exist_ok=True)
    write_cross_data(data, cfg.out / "cross_data.txt")
    head = [f"# hup f={cfg.f_kind} n_max={data.n_max} delta={data.delta:.6g} zero_data={cfg.zero_data}"]
    write_report(cfg.out / "hup_report.txt", head + rep.lines())
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_bounds(cfg: RunConfig) -> int:
    from .radial_basis import bound_report

    grid = cfg.grid or PanelGrid.uniform(12.0, 0.25, 12)
    cache = _cache(cfg)
    lines, ok = [], True
    for k in cfg.ks:
        beta = 2 * k + 2 if cfg.beta is None else cfg.beta
        tabs = [cache.get(k, s, cfg.n_max, grid) for s in cfg.signs]
        rep = bound_report(k, beta, *tabs, n_check=cfg.n_max)
        ok &= rep.dominated
        lines += rep.lines()
        signs = sorted(rep.measured, reverse=True)
        cols = [rep.n, rep.constant * rep.shape] + [rep.measured[s] for s in signs] + [rep.rate[s] for s in signs]
        head = "n bound " + " ".join(f"sup{s:+d}" for s in signs) + " " + " ".join(f"rate{s:+d}" for s in signs)
        write_columns(cfg.out / f"bounds_k{k:g}_beta{beta:g}.txt", head, cols)
    write_report(cfg.out / "bounds_report.txt", lines)
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {"basis": cmd_basis, "verify": cmd_verify, "reconstruct": cmd_reconstruct,
            "hup": cmd_hup, "bounds": cmd_bounds}


def _error_record(exc: Exception, code: int) -> int:
    rec = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    print(json.dumps(rec, sort_keys=True), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        cfg = build_config(args)
        return COMMANDS[cfg.command](cfg)
    except FourierInterpError as exc:
        return _error_record(exc, exc.exit_code)
    except OSError as exc:
        return _error_record(exc, EXIT_CONFIG)


if __name__ == "__main__":
    sys.exit(main())
