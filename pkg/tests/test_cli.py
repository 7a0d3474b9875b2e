import json
import math
import subprocess
import sys

import numpy as np
import pytest

from torusweyl.cli import main
from torusweyl.io import read_matrix_csv, read_table_csv
from torusweyl.symbols import analytic_spectrum_a
from torusweyl.lattice import make_geometry


@pytest.fixture
def run(tmp_path, monkeypatch):
    monkeypatch.setenv("TORUSWEYL_CACHE", str(tmp_path / "cache"))
    monkeypatch.chdir(tmp_path)

    def _run(*argv):
        return main([str(a) for a in argv])

    return _run


def test_build_n2(run, tmp_path):
    assert run("build", "--N", 2, "--out", "m.csv") == 0
    np.testing.assert_allclose(read_matrix_csv(tmp_path / "m.csv"),
                               math.pi / 4 * np.array([[-1, -1], [-1, 1]]), rtol=1e-15)


def test_build_n1_stdout(run, capsys):
    assert run("build", "--N", 1) == 0
    assert capsys.readouterr().out == "0\n"


def test_build_both_routes(run, tmp_path):
    assert run("build", "--N", 4, "--route", "both", "--out", "pair") == 0
    a = read_matrix_csv(tmp_path / "pair" / "h_N4_appendixB.csv")
    b = read_matrix_csv(tmp_path / "pair" / "h_N4_finite.csv")
    assert np.max(np.abs(a - b)) <= 1e-12 * 8 * math.pi


def test_spectrum_cache_byte_identical(run, tmp_path):
    assert run("spectrum", "--N", 40, "--out", "s1.json") == 0
    assert run("spectrum", "--N", 40, "--out", "s2.json") == 0
    assert (tmp_path / "s1.json").read_bytes() == (tmp_path / "s2.json").read_bytes()
    assert len(list((tmp_path / "cache").iterdir())) == 1


def test_spectrum_cache_dir_flag(run, tmp_path):
    assert run("spectrum", "--N", 5, "--cache-dir", "mine", "--out", "s.json") == 0
    assert len(list((tmp_path / "mine").iterdir())) == 1


def test_spectrum_symbol_a_matches_analytic(run, tmp_path):
    assert run("spectrum", "--N", 64, "--symbol", "a", "--out", "a.json") == 0
    data = json.loads((tmp_path / "a.json").read_text())
    exact = analytic_spectrum_a(make_geometry(64)).eigenvalues
    np.testing.assert_allclose(data["eigenvalues"], exact, rtol=1e-10, atol=1e-10 * exact.max())
    assert data["analytic"]["max_rel_error"] < 1e-10
    assert data["geometry"]["N"] == 64 and data["max_residual"] is not None


def test_spectrum_corrupt_cache_recomputes(tmp_path):
    cmd = [sys.executable, "-m", "torusweyl", "spectrum", "--N", "7", "--cache-dir", str(tmp_path / "c")]
    subprocess.run(cmd + ["--out", str(tmp_path / "a.json")], check=True)
    (entry,) = (tmp_path / "c").iterdir()
    entry.write_text("garbage")
    out = subprocess.run(cmd + ["--out", str(tmp_path / "b.json")], capture_output=True, text=True, check=True)
    assert "corrupt" in out.stderr
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_histogram(run, tmp_path):
    assert run("histogram", "--N", 100, "--bins", 9, "--out", "h.csv") == 0
    rows = read_table_csv(tmp_path / "h.csv")
    assert len(rows) == 9 and set(rows[0]) == {"bin_center", "density", "semiclassical_d"}
    width = (float(rows[1]["bin_center"]) - float(rows[0]["bin_center"]))
    assert sum(float(r["density"]) for r in rows) * width == pytest.approx(100)


def test_density_sweep_single_N(run, tmp_path):
    assert run("density-sweep", "--N-min", 60, "--N-max", 60, "--K", 3, "--out", "d.csv") == 0
    rows = read_table_csv(tmp_path / "d.csv")
    assert len(rows) == 2 and rows[0]["N"] == "60" and rows[-1]["N"] == "summary"


def test_density_sweep_rejects_small_N(run):
    assert run("density-sweep", "--N-min", 20, "--N-max", 20, "--K", 3) == 1


def test_regimes(run, tmp_path, capsys):
    assert run("regimes", "--alpha", 0.5, "--A", 2.0, "--N", 64, 128, 256, "--out", "r.csv") == 0
    rows = read_table_csv(tmp_path / "r.csv")
    assert [r["N"] for r in rows] == ["64", "128", "256"]
    assert "behaviour=dense" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ("build", "--N", 0),
    ("build", "--N", 4, "--ellx", -1),
    ("build", "--N", 6, "--ellx", 2, "--route", "finite"),
    ("build",),
    ("bogus",),
    ("regimes", "--alpha", 1.5, "--A", 1, "--N", 10),
    ("spectrum", "--N", 4, "--route", "both"),
])
def test_validation_exit_code(run, argv):
    assert run(*argv) == 1


def test_io_exit_code(run, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert run("build", "--N", 3, "--out", blocker / "sub" / "m.csv") == 3


def test_selftest_pass_and_perturbed_fail(run, capsys):
    assert run("selftest") == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and "PASS representations" in out
    assert run("selftest", "--perturb") == 2
    assert "FAIL representations" in capsys.readouterr().out


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "torusweyl", "build", "--N", "2"],
                         capture_output=True, text=True, check=True)
    assert float(out.stdout.split(",")[0]) == pytest.approx(-math.pi / 4, rel=1e-15)


@pytest.mark.slow
def test_spectrum_n1000_within_bounds(tmp_path, spectrum_cache_dir):
    assert main(["spectrum", "--N", "1000", "--cache-dir", str(spectrum_cache_dir),
                 "--out", str(tmp_path / "s.json")]) == 0
    data = json.loads((tmp_path / "s.json").read_text())
    lam = np.array(data["eigenvalues"])
    assert lam.size == 1000
    assert lam.min() >= -250 * math.pi and lam.max() <= 250 * math.pi
