import json

import numpy as np
import pytest

from conftest import CACHE_DIR
from fourier_interp.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_OK, main
from fourier_interp.io import read_basis_table, write_basis_table


def run(*args):
    return main(list(args) + ["--cache", str(CACHE_DIR)])


def body(path):
    """Report text without the generated-at footer."""
    return [ln for ln in path.read_text().splitlines() if not ln.startswith("# generated")]


@pytest.fixture(scope="module")
def d1_tables(tmp_path_factory):
    out = tmp_path_factory.mktemp("basis")
    assert run("basis", "--k", "1/2", "--n-max", "8", "--out", str(out)) == EXIT_OK
    return out


def test_basis_writes_tables(d1_tables):
    names = {p.name for p in d1_tables.iterdir()}
    for s in ("+1", "-1"):
        assert {f"b_k0.5_e{s}_n8.txt", f"b_k0.5_e{s}_n8.txt.meta", f"b_k0.5_e{s}_n8_abs.txt"} <= names
    assert "basis_report.txt" in names


def test_basis_tables_pass_kronecker(d1_tables, tmp_path):
    code = run("verify", "--suite", "kronecker", "--table-dir", str(d1_tables), "--out", str(tmp_path))
    assert code == EXIT_OK
    lines = body(tmp_path / "verify_report.txt")
    assert lines[0].startswith("PASS kronecker/d=1")


def test_basis_deterministic(d1_tables, tmp_path):
    assert run("basis", "--k", "1/2", "--n-max", "8", "--out", str(tmp_path)) == EXIT_OK
    for name in ("b_k0.5_e+1_n8.txt", "b_k0.5_e-1_n8.txt.meta", "b_k0.5_e+1_n8_abs.txt"):
        assert (tmp_path / name).read_bytes() == (d1_tables / name).read_bytes()
    assert body(tmp_path / "basis_report.txt") == body(d1_tables / "basis_report.txt")


def test_empty_range_warns(tmp_path, capsys):
    out = tmp_path / "empty"
    assert run("basis", "--k", "1", "--n-max", "2", "--n-min", "5", "--out", str(out)) == EXIT_OK
    assert "warning" in capsys.readouterr().err
    assert not out.exists()


@pytest.mark.parametrize("k", ["1/3", "0", "x"])
def test_invalid_k_rejected(tmp_path, capsys, k):
    assert run("basis", "--k", k, "--n-max", "4", "--out", str(tmp_path)) == EXIT_CONFIG
    rec = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert rec["exit_code"] == EXIT_CONFIG and rec["error"] == "ConfigError"
    assert not any(tmp_path.iterdir())


def test_corrupted_table_fails(d1_tables, tmp_path):
    bad = tmp_path / "bad"
    bad.mkdir()
    for s in ("+1", "-1"):
        tab = read_basis_table(d1_tables / f"b_k0.5_e{s}_n8.txt")
        if s == "+1":
            tab.values[3] += 1e-3 * np.exp(-tab.r_grid)
        write_basis_table(tab, bad / f"b_k0.5_e{s}_n8.txt")
    assert run("verify", "--suite", "kronecker", "--table-dir", str(bad), "--out", str(tmp_path)) == EXIT_FAIL
    assert body(tmp_path / "verify_report.txt")[0].startswith("FAIL kronecker")


def test_suite_filter(tmp_path):
    assert run("verify", "--suite", "functional-equation", "--k", "1/2", "--eps-sign", "+1",
               "--out", str(tmp_path)) == EXIT_OK
    lines = [ln for ln in body(tmp_path / "verify_report.txt") if not ln.startswith("#")]
    assert len(lines) == 1 and lines[0].startswith("PASS functional-equation/k=0.5 eps=+1")


def test_unknown_suite(tmp_path):
    assert run("verify", "--suite", "nonsense", "--out", str(tmp_path)) == EXIT_CONFIG


def test_reconstruct_zero_profile(tmp_path):
    assert run("reconstruct", "--d", "4", "--shape", "zero", "--out", str(tmp_path)) == EXIT_OK
    assert "iterations=1 converged=True" in (tmp_path / "reconstruct_report.txt").read_text()
    log = np.loadtxt(tmp_path / "neumann_log.txt", ndmin=2)
    assert log.shape[0] == 1


def test_reconstruct_default_profile(tmp_path):
    assert run("reconstruct", "--d", "4", "--out", str(tmp_path)) == EXIT_OK
    rec = np.loadtxt(tmp_path / "reconstruction.txt")
    assert rec[:, 3].max() <= 1e-4


def test_reconstruct_bad_dimension(tmp_path):
    assert run("reconstruct", "--d", "5", "--out", str(tmp_path)) == EXIT_CONFIG


def test_hup_zero_function(tmp_path):
    assert run("hup", "--f", "zero", "--out", str(tmp_path)) == EXIT_OK
    assert "verdict=zero" in (tmp_path / "hup_report.txt").read_text()
    assert (tmp_path / "cross_data.txt").exists()


def test_hup_forced_zero_data(tmp_path):
    assert run("hup", "--zero-data", "--out", str(tmp_path)) == EXIT_FAIL
    assert "verdict=inconsistent" in (tmp_path / "hup_report.txt").read_text()


def test_bounds_half_beta3(tmp_path):
    assert run("bounds", "--k", "1/2", "--beta", "3", "--out", str(tmp_path)) == EXIT_OK
    text = (tmp_path / "bounds_report.txt").read_text()
    assert "g_tilde=1 " in text and "flagged=none" in text
    cols = np.loadtxt(tmp_path / "bounds_k0.5_beta3.txt")
    assert cols.shape == (11, 6)


def test_bounds_beta_too_small(tmp_path):
    assert run("bounds", "--k", "2", "--beta", "3", "--out", str(tmp_path)) == EXIT_CONFIG


def test_missing_profile_file(tmp_path):
    assert run("reconstruct", "--profile", str(tmp_path / "none.txt"), "--out", str(tmp_path)) == EXIT_CONFIG
