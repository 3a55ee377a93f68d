import json
from dataclasses import replace

import numpy as np
import pytest

from modscat.cli import ConfigError, RunConfig, main, read_snapshot


def test_config_roundtrip():
    cfg = RunConfig(epsilon=0.02, mode="free")
    again = RunConfig.parse(cfg.canonical())
    assert again == cfg
    assert again.digest() == cfg.digest()


@pytest.mark.parametrize(
    "text", ["bogus = 1", "epsilon = 0.1\nepsilon = 0.2", "epsilon = abc", "mode = other", "novalue"]
)
def test_config_errors(text):
    with pytest.raises(ConfigError):
        RunConfig.parse(text)


def test_comments_and_blank_lines():
    cfg = RunConfig.parse("# header\n\nt_end = 50  # shorter\n")
    assert cfg.t_end == 50.0


def test_record_times_are_dyadic_fractions():
    t = RunConfig(t_end=16.0, record_per_octave=2).record_times()
    assert t[0] == 1.0 and t[-1] == 16.0
    assert np.allclose(np.diff(np.log2(t)), 0.5)


def test_bad_config_file_exit_code(tmp_path):
    p = tmp_path / "c.txt"
    p.write_text("nonsense = 3\n")
    assert main(["--config", str(p), "--out", str(tmp_path), "scatter"]) == 2


def test_scatter_command(tmp_path):
    p = tmp_path / "c.txt"
    p.write_text("scatter_n = 5\nscatter_xi_min = 0.5\nscatter_xi_max = 4\n")
    assert main(["--config", str(p), "--out", str(tmp_path), "scatter"]) == 0
    lines = (tmp_path / "scatter.csv").read_text().splitlines()
    cfg = replace(RunConfig.load(p), out_dir=str(tmp_path))
    assert lines[0] == f"# config_hash={cfg.digest()}"
    data = np.loadtxt(tmp_path / "scatter.csv", delimiter=",", skiprows=2)
    assert data.shape == (5, 8)
    assert np.all(data[:, 5] < 1e-6)


def test_basis_command(tmp_path):
    p = tmp_path / "c.txt"
    p.write_text("basis_x_max = 20\nbasis_n = 201\n")
    assert main(["--config", str(p), "--out", str(tmp_path), "basis", "--xi", "0.5"]) == 0
    data = np.loadtxt(tmp_path / "basis_xi0.5.csv", delimiter=",", skiprows=2)
    assert data.shape == (201, 4)
    assert data[:, 3].max() < 1e-6


def test_nls_and_profile_pipeline(tmp_path):
    p = tmp_path / "c.txt"
    p.write_text(
        "mode = free\nlab_x_max = 80\nlab_dx = 0.25\nlab_xi_max = 2\n"
        "t_end = 4\nrecord_per_octave = 2\nv_n = 21\nfit_t_min = 2\n"
    )
    assert main(["--config", str(p), "--out", str(tmp_path), "evolve-nls", "--epsilon", "0.05"]) == 0
    diag = json.loads((tmp_path / "diagnostics.json").read_text())
    assert len(diag["records"]) == 5
    t, x, u = read_snapshot(tmp_path / "snapshots" / "snap_004.csv")
    assert t == 4.0 and x.size == u.size
    assert main(["--config", str(p), "--out", str(tmp_path), "extract-profile"]) == 0
    fit = json.loads((tmp_path / "profile_fit.json").read_text())
    assert set(fit["cauchy_defects"]) == {"4/2", "2/1"}


def test_verify_subset(tmp_path):
    assert main(["--out", str(tmp_path), "verify", "--only", "3"]) == 0
    rep = json.loads((tmp_path / "verify.json").read_text())
    assert rep["criteria"][0]["id"] == 3 and rep["criteria"][0]["passed"]


def test_verify_failure_exit_code(tmp_path):
    assert main(["--out", str(tmp_path), "verify", "--only", "2"]) == 4


def test_explicit_record_list():
    assert RunConfig(record="4, 1,2").record_times() == (1.0, 2.0, 4.0)
    with pytest.raises(ConfigError):
        RunConfig(record="1,x").record_times()
