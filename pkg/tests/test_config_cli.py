import json
import subprocess
import sys

import pytest

from prandtl_lab import config as cfgmod
from prandtl_lab.cli import EXIT_INPUT, EXIT_NONCONVERGED, EXIT_OK, EXIT_SC, main
from prandtl_lab.io import read_csv


def test_dump_load_roundtrip(tmp_path):
    c = cfgmod.RunConfig()
    c.sweep.k_list = [10, 20]
    c.find_tau.tau0 = -0.7 - 0.7j
    c.heat.table_times = [0.5, 1.0]
    p = tmp_path / "run.cfg"
    p.write_text(cfgmod.dump(c))
    d = cfgmod.load(p)
    assert d.items() == c.items()


def test_bare_keys_resolve_to_section():
    c = cfgmod.load(None, ["N=800", "sweep.tol=1e-4", "threads=2"], "spectrum")
    assert c.spectrum.N == 800 and c.sweep.tol == 1e-4 and c.threads == 2


@pytest.mark.parametrize(
    "override",
    ["spectrum.N=201", "sweep.N=400", "compare.exclusion_widths=2", "find_tau.tau0=-1+1j", "heat.table_t=0.3", "quasimode.cutoff_inner=0.7"],
)
def test_validation_rejects(override):
    c = cfgmod.load(None, [override])
    with pytest.raises(ValueError):
        c.validate()


@pytest.mark.parametrize("override", ["bogus.N=1", "spectrum.bogus=1", "emit_svg=maybe"])
def test_unknown_keys(override):
    with pytest.raises(ValueError):
        cfgmod.load(None, [override])


def test_config_file_syntax(tmp_path):
    p = tmp_path / "bad.cfg"
    p.write_text("# comment\nspectrum.N 400\n")
    with pytest.raises(ValueError, match="bad.cfg:2"):
        cfgmod.load(p)


def _error(out):
    return json.loads((out / "error.json").read_text())


def test_find_tau_success(tmp_path):
    assert main(["find-tau", "--out", str(tmp_path)]) == EXIT_OK
    notes, cols, rows = read_csv(tmp_path / "tau.csv")
    assert not (tmp_path / "error.json").exists()
    assert (tmp_path / "config.txt").exists()
    assert any("dimensionless" in n or "tau" in n for n in notes)


def test_find_tau_nonconvergence(tmp_path):
    code = main(["find-tau", "--out", str(tmp_path), "--set", "tol=1e-30", "--set", "maxit=3"])
    assert code == EXIT_NONCONVERGED
    rec = _error(tmp_path)
    assert rec["exit_code"] == EXIT_NONCONVERGED and rec["command"] == "find-tau"


def test_find_tau_alarm(tmp_path):
    assert main(["find-tau", "--out", str(tmp_path), "--set", "sc_floor=0.5"]) == EXIT_SC
    assert _error(tmp_path)["exit_code"] == EXIT_SC


def test_bad_input(tmp_path):
    assert main(["find-tau", "--out", str(tmp_path), "--set", "nonsense=1"]) == EXIT_INPUT
    assert _error(tmp_path)["kind"] == "ConfigError"


def test_stale_error_removed(tmp_path):
    main(["find-tau", "--out", str(tmp_path), "--set", "nonsense=1"])
    assert main(["find-tau", "--out", str(tmp_path)]) == EXIT_OK
    assert not (tmp_path / "error.json").exists()


def test_scan_only(tmp_path):
    assert main(["find-tau", "--scan-only", "--out", str(tmp_path), "--set", "scan_n=6"]) == EXIT_OK
    _, cols, rows = read_csv(tmp_path / "scan.csv")
    assert cols == ["re_tau", "im_tau", "abs_G"] and len(rows) == 36
    assert not (tmp_path / "tau.csv").exists()


def test_environment_overrides_out(tmp_path, monkeypatch):
    env_out = tmp_path / "env"
    monkeypatch.setenv("PRANDTL_LAB_OUT", str(env_out))
    assert main(["spectrum", "--out", str(tmp_path / "flag"), "--set", "N=400"]) == EXIT_OK
    assert (env_out / "spectrum.csv").exists()
    assert not (tmp_path / "flag").exists()


def test_sweep_csv_deterministic(tmp_path):
    args = ["sweep", "--set", "k_list=1000", "--set", "N=1000", "--seed", "7"]
    tables = []
    for sub in ("a", "b"):
        assert main(args + ["--out", str(tmp_path / sub)]) == EXIT_OK
        _, cols, rows = read_csv(tmp_path / sub / "sweep.csv")
        keep = [i for i, c in enumerate(cols) if c != "wall_seconds"]
        tables.append([[r[i] for i in keep] for r in rows])
    assert tables[0] == tables[1]
    assert float(tables[0][0][3]) == pytest.approx(-0.8159, abs=2e-3)


def test_quasimode_command(tmp_path):
    assert main(["quasimode", "--out", str(tmp_path), "--set", "eps_list=1e-3", "--set", "n_times=2"]) == EXIT_OK
    _, cols, rows = read_csv(tmp_path / "envelope.csv")
    assert cols[:2] == ["epsilon", "t"] and len(rows) == 2


def test_module_entry_point(tmp_path):
    r = subprocess.run(
        [sys.executable, "-m", "prandtl_lab", "find-tau", "--out", str(tmp_path), "--set", "bad=1"],
        capture_output=True,
        text=True,
    )
    assert r.returncode == EXIT_INPUT
    assert "prandtl-lab" in r.stderr
