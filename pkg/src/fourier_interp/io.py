"""Plain-text formats.

Columnar files (basis tables, radial functions) carry a ``#`` header of
``key=value`` tokens.  Record files (perturbation profiles, node data, cross
data, sphere perturbations) are ``# kind=<kind>`` followed by ``key=value``
lines for scalars and ``key[]=v0 v1 ...`` lines for arrays (``key[r,c]=`` for
matrices).  All floats are written with 17 significant digits.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .grids import PanelGrid

FMT = "%.17g"


def _parse_header(line: str) -> dict:
    if not line.startswith("#"):
        raise ConfigError("missing '#' header line")
    out = {}
    for tok in line[1:].split():
        if "=" not in tok:
            raise ConfigError(f"malformed header token {tok!r}")
        key, val = tok.split("=", 1)
        out[key] = val
    return out


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".meta")


def write_sidecar(path, meta: dict) -> None:
    with open(sidecar_path(path), "w") as fh:
        for key, val in meta.items():
            fh.write(f"{key}={json.dumps(val)}\n")


def read_sidecar(path) -> dict:
    p = sidecar_path(path)
    if not p.exists():
        return {}
    meta = {}
    for line in p.read_text().splitlines():
        if line.strip():
            key, val = line.split("=", 1)
            meta[key] = json.loads(val)
    return meta


def write_basis_table(table, path) -> None:
    """Header ``# k= eps= n_max= y=`` then rows ``r b_0(r) ... b_N(r)``."""
    sign = table.sign
    head = f"# k={table.k!r} eps={sign:+d} n_max={table.n_max} y={float(table.y)!r}"
    if isinstance(table.grid, PanelGrid):
        head += f" grid={table.grid.to_text()}"
    rows = np.column_stack([table.r_grid, table.values.T])
    with open(path, "w") as fh:
        fh.write(head + "\n")
        np.savetxt(fh, rows, fmt=FMT)
    write_sidecar(path, table.meta)


def read_basis_table(path):
    from .radial_basis import BasisTable

    with open(path) as fh:
        head = _parse_header(fh.readline())
        data = np.loadtxt(fh, ndmin=2)
    try:
        k, eps, n_max, y = float(head["k"]), int(head["eps"]), int(head["n_max"]), float(head["y"])
    except KeyError as exc:
        raise ConfigError(f"basis table header lacks {exc}") from None
    grid = PanelGrid.from_text(head["grid"]) if "grid" in head else data[:, 0]
    if isinstance(grid, PanelGrid) and not np.allclose(grid.nodes, data[:, 0], rtol=0, atol=1e-14):
        raise ConfigError("grid description does not match the radius column")
    return BasisTable(k, eps, n_max, grid, data[:, 1:].T, y, read_sidecar(path))


def write_radial_function(f, path) -> None:
    """Header ``# d=<d> kind=radial-function grid=...`` then rows ``r f(r) [f^(r)]``."""
    head = f"# d={f.d} kind=radial-function provenance={f.provenance} grid={f.grid.to_text()}"
    cols = [f.r, f.values] + ([] if f.hat_values is None else [f.hat_values])
    with open(path, "w") as fh:
        fh.write(head + "\n")
        np.savetxt(fh, np.column_stack(cols), fmt=FMT)


def read_radial_function(path):
    from .function_spaces import RadialFunction

    with open(path) as fh:
        head = _parse_header(fh.readline())
        data = np.loadtxt(fh, ndmin=2)
    if head.get("kind") != "radial-function" or "d" not in head or "grid" not in head:
        raise ConfigError("not a radial-function file")
    grid = PanelGrid.from_text(head["grid"])
    hat = data[:, 2] if data.shape[1] > 2 else None
    return RadialFunction(int(head["d"]), grid, data[:, 1], hat, head.get("provenance", "table"))


def _fmt_array(a) -> str:
    return " ".join(FMT % v for v in np.ravel(a))


def write_record(path, kind: str, scalars: dict, arrays: dict) -> None:
    with open(path, "w") as fh:
        fh.write(f"# kind={kind}\n")
        for key, val in scalars.items():
            fh.write(f"{key}={json.dumps(val)}\n")
        for key, val in arrays.items():
            a = np.asarray(val, dtype=float)
            tag = "[]" if a.ndim == 1 else f"[{a.shape[0]},{a.shape[1]}]"
            fh.write(f"{key}{tag}={_fmt_array(a)}\n")


def read_record(path, kind: str):
    """Returns (scalars, arrays); raises ConfigError for a different kind."""
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise ConfigError(f"{path}: empty file")
    head = _parse_header(lines[0])
    if head.get("kind") != kind:
        raise ConfigError(f"{path}: expected kind={kind}, found {head.get('kind')}")
    scalars, arrays = {}, {}
    for line in lines[1:]:
        if not line.strip() or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}: malformed line {line[:40]!r}")
        key, val = line.split("=", 1)
        if "[" in key:
            name, shape = key[:-1].split("[")
            a = np.array(val.split(), dtype=float)
            if shape:
                a = a.reshape(tuple(int(x) for x in shape.split(",")))
            arrays[name] = a
        else:
            scalars[key] = json.loads(val)
    return scalars, arrays


def _need(d: dict, keys, path):
    missing = [k for k in keys if k not in d]
    if missing:
        raise ConfigError(f"{path}: missing {', '.join(missing)}")


def write_profile(profile, path) -> None:
    write_record(path, "perturbation-profile",
                 {"d": profile.d, "s": profile.s, "eta": profile.eta, "delta": profile.delta},
                 {"eps": profile.eps, "eps_hat": profile.eps_hat})


def read_profile(path):
    from .interp_radial import PerturbationProfile

    sc, ar = read_record(path, "perturbation-profile")
    _need(sc, ("s", "eta", "delta"), path)
    _need(ar, ("eps", "eps_hat"), path)
    return PerturbationProfile(ar["eps"], ar["eps_hat"], sc["s"], sc["eta"], sc["delta"], sc.get("d"))


def write_node_data(data, path) -> None:
    write_record(path, "node-data", {"d": data.d, "n_max": data.n_max},
                 {"f_vals": data.f_vals, "fhat_vals": data.fhat_vals})


def read_node_data(path):
    from .interp_radial import NodeData

    sc, ar = read_record(path, "node-data")
    _need(sc, ("d", "n_max"), path)
    _need(ar, ("f_vals", "fhat_vals"), path)
    return NodeData(sc["d"], ar["f_vals"], ar["fhat_vals"], sc["n_max"])


def write_cross_data(data, path) -> None:
    write_record(path, "hyperbola-cross", {"delta": data.delta, "n_max": data.n_max},
                 {"eps": data.eps, "eps_hat": data.eps_hat,
                  "mu_hat_x": data.mu_hat_x, "mu_hat_y": data.mu_hat_y})


def read_cross_data(path):
    from .hup import HyperbolaCrossData

    sc, ar = read_record(path, "hyperbola-cross")
    _need(sc, ("delta",), path)
    _need(ar, ("eps", "eps_hat", "mu_hat_x", "mu_hat_y"), path)
    return HyperbolaCrossData(ar["mu_hat_x"], ar["mu_hat_y"], ar["eps"], ar["eps_hat"], sc["delta"])


def write_sphere_perturbation(p, path) -> None:
    write_record(path, "sphere-perturbation",
                 {"d": p.d, "degree": p.degree, "delta": p.delta, "c5": p.c5},
                 {"eps_coeffs": p.eps_coeffs, "eps_hat_coeffs": p.eps_hat_coeffs,
                  "eps0": p.eps0, "eps0_hat": p.eps0_hat})


def read_sphere_perturbation(path):
    from .nonradial import SpherePerturbation

    sc, ar = read_record(path, "sphere-perturbation")
    _need(sc, ("d", "degree"), path)
    _need(ar, ("eps_coeffs", "eps_hat_coeffs", "eps0", "eps0_hat"), path)
    return SpherePerturbation(sc["d"], ar["eps_coeffs"], ar["eps_hat_coeffs"], ar["eps0"],
                              ar["eps0_hat"], sc["degree"], sc.get("delta", 0.0), sc.get("c5", 1.0))
