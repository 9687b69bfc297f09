"""Tests for the command-line entry point (src/crossflow/cli.py)."""
from __future__ import annotations

from dataclasses import replace
from pathlib import Path

import pytest

import crossflow.experiments.runner as runner_mod
from crossflow.cli import EXIT_ABORT, EXIT_CONFIG, EXIT_OK, main, resolve_out_dir
from crossflow.config.presets import get_preset
from crossflow.core.exceptions import NonFiniteStateError

TINY = "name = tiny\nmodel = pde1d\nn = 16\nepsilon = 0.01\ninitial = uniform\nr_inf = 0.2\nb_inf = 0.1\nt_end = 0.1\ndiagnostics_every = 0.05\n"


@pytest.fixture
def tiny_cfg(tmp_path) -> Path:
    path = tmp_path / "tiny.cfg"
    path.write_text(TINY, encoding="utf-8")
    return path


def test_list_prints_every_preset(capsys):
    assert main(["list"]) == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 12
    assert lines[0].startswith("ex2d_periodic")


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
    assert "crossflow" in capsys.readouterr().out


def test_validate_prints_filled_config(tiny_cfg, capsys):
    assert main(["validate", str(tiny_cfg)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "name = tiny" in out
    assert "scheduler = random_sequential" in out
    assert "# cfl_ok = true" in out
    assert "# entropy_regime_ok = false" in out


def test_run_writes_into_out_dir(tiny_cfg, tmp_path, capsys, monkeypatch):
    monkeypatch.delenv("CROSSFLOW_OUT", raising=False)
    out = tmp_path / "out"
    assert main(["run", str(tiny_cfg), "--out-dir", str(out), "--seed", "3"]) == EXIT_OK
    assert capsys.readouterr().out.strip() == str(out / "tiny")
    assert (out / "tiny" / "manifest.json").is_file()


def test_unknown_key_exits_with_config_code(tmp_path, capsys):
    path = tmp_path / "bad.cfg"
    path.write_text("name = bad\nwind = 3\n", encoding="utf-8")
    assert main(["run", str(path), "--out-dir", str(tmp_path)]) == EXIT_CONFIG
    err = capsys.readouterr().err
    assert "line 2" in err and "wind" in err


def test_negative_rate_exits_with_config_code(tmp_path, capsys):
    path = tmp_path / "neg.cfg"
    path.write_text("name = neg\ngamma0 = -1\n", encoding="utf-8")
    assert main(["validate", str(path)]) == EXIT_CONFIG
    assert "nonnegativity" in capsys.readouterr().err


def test_missing_source_exits_with_config_code(tmp_path):
    assert main(["run", str(tmp_path / "nothing.cfg")]) == EXIT_CONFIG


def test_solver_abort_exit_code(tiny_cfg, tmp_path, monkeypatch, capsys):
    def _explode(*args, **kwargs):
        raise NonFiniteStateError("Non-finite density encountered (t=0.05).")

    monkeypatch.setattr(runner_mod, "run_1d", _explode)
    assert main(["run", str(tiny_cfg), "--out-dir", str(tmp_path)]) == EXIT_ABORT
    assert "solver aborted" in capsys.readouterr().err


def test_map_command(tmp_path, capsys):
    code = main(["map", "--resolution", "32", "--epsilon", "0.05", "--method", "curve", "--out-dir", str(tmp_path)])
    assert code == EXIT_OK
    path = Path(capsys.readouterr().out.strip())
    assert path == tmp_path / "stability_map" / "region_map.csv"
    assert path.is_file()


def test_out_dir_precedence(monkeypatch):
    s = get_preset("ex1d_stable")
    monkeypatch.delenv("CROSSFLOW_OUT", raising=False)
    assert resolve_out_dir(None, s) == Path("runs")
    with_dir = replace(s, out_dir="from_scenario")
    assert resolve_out_dir(None, with_dir) == Path("from_scenario")
    monkeypatch.setenv("CROSSFLOW_OUT", "from_env")
    assert resolve_out_dir(None, with_dir) == Path("from_env")
    assert resolve_out_dir("from_flag", with_dir) == Path("from_flag")
