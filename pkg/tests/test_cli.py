"""Command-line behavior: subcommand flows and the exit-code contract."""

import dataclasses
import json

import pytest

import tactherm.cli as cli
import tactherm.pipeline as pipeline
from tactherm.errors import SolverError
from tactherm.pipeline import (
    LearnSpec,
    MeshLevels,
    StudyConfig,
    SweepSpec,
    config_to_json,
)

TINY_LADDER = ((5, 3, 2, 2), (6, 4, 2, 2))


@pytest.fixture()
def tiny_cfg_path(tmp_path):
    cfg = dataclasses.replace(
        StudyConfig(),
        sweep=SweepSpec(3, 1, 6),
        refinement=MeshLevels(polygon=TINY_LADDER, star=TINY_LADDER, level=0),
        learn=LearnSpec(train_size=3, test_size=1),
        out_dir=str(tmp_path / "out"),
    )
    path = tmp_path / "cfg.json"
    path.write_text(config_to_json(cfg))
    return path


def test_usage_errors_exit_1(capsys):
    assert cli.main([]) == 1
    assert cli.main(["solve", "--family", "hexagon", "--n", "3"]) == 1
    assert cli.main(["sweep", "--family", "polygon", "--bogus"]) == 1
    err = capsys.readouterr().err
    assert "usage error" in err


def test_missing_config_exits_1(tmp_path):
    assert cli.main(["--config", str(tmp_path / "nope.json"), "geometry",
                     "--family", "star", "--n", "5"]) == 1


def test_invalid_config_exits_1(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"sweep": {"start": 1}}))
    assert cli.main(["--config", str(bad), "geometry", "--family", "star", "--n", "5"]) == 1


def test_geometry_and_mesh_commands(tiny_cfg_path, tmp_path, capsys):
    csv = tmp_path / "poly.csv"
    assert cli.main(["--config", str(tiny_cfg_path), "geometry",
                     "--family", "star", "--n", "7", "--csv", str(csv)]) == 0
    assert csv.exists()
    assert cli.main(["--config", str(tiny_cfg_path), "mesh",
                     "--family", "polygon", "--n", "4"]) == 0
    out = capsys.readouterr().out
    assert "tets" in out and "tumor volume" in out


def test_solve_command_reports_signature(tiny_cfg_path, capsys):
    assert cli.main(["--config", str(tiny_cfg_path), "solve",
                     "--family", "polygon", "--n", "5", "--energy"]) == 0
    out = capsys.readouterr().out
    assert "T_max" in out and "rad/m" in out and "energy:" in out


def test_sweep_learn_figures_flow(tiny_cfg_path, tmp_path, capsys):
    c = str(tiny_cfg_path)
    assert cli.main(["--config", c, "sweep", "--family", "polygon"]) == 0
    assert cli.main(["--config", c, "learn", "--family", "polygon"]) == 0
    # star sweep missing: figures must report incomplete artifacts
    assert cli.main(["--config", c, "figures"]) == 3
    assert cli.main(["--config", c, "learn", "--family", "star"]) == 3
    assert cli.main(["--config", c, "sweep", "--family", "star"]) == 0
    assert cli.main(["--config", c, "figures"]) == 0
    assert (tmp_path / "out" / "figures" / "fig_contour.svg").exists()
    out = capsys.readouterr().out
    assert "sweep polygon: 4 solved" in out


def test_mesh_study_command(tiny_cfg_path, capsys):
    assert cli.main(["--config", str(tiny_cfg_path), "mesh-study",
                     "--family", "star", "--n", "4"]) == 0
    out = capsys.readouterr().out
    assert "level 0" in out and "verdict" in out


def test_calibrate_command(tiny_cfg_path, capsys):
    assert cli.main(["--config", str(tiny_cfg_path), "calibrate",
                     "--target", "29.5"]) == 0
    assert "calibrated t_ambient" in capsys.readouterr().out


def test_solver_failure_exits_2(tiny_cfg_path, monkeypatch, capsys):
    def boom(*args, **kwargs):
        raise SolverError("iteration limit reached")

    monkeypatch.setattr(cli, "run_model", boom)
    assert cli.main(["--config", str(tiny_cfg_path), "solve",
                     "--family", "polygon", "--n", "5"]) == 2
    assert "solver failure" in capsys.readouterr().err


def test_sweep_with_failures_exits_2(tiny_cfg_path, monkeypatch, capsys):
    real = pipeline.run_model

    def flaky(cfg, family, n, **kwargs):
        if n == 4:
            raise SolverError("diverged")
        return real(cfg, family, n, **kwargs)

    monkeypatch.setattr(pipeline, "run_model", flaky)
    assert cli.main(["--config", str(tiny_cfg_path), "sweep",
                     "--family", "polygon"]) == 2
    err = capsys.readouterr().err
    assert "polygon-n004" in err


def test_all_command_runs_everything(tiny_cfg_path, tmp_path):
    assert cli.main(["--config", str(tiny_cfg_path), "all"]) == 0
    out = tmp_path / "out"
    assert (out / "dataset_polygon.csv").exists()
    assert (out / "dataset_star.csv").exists()
    assert (out / "learn" / "polygon_model.txt").exists()
    assert (out / "figures" / "fig_tmax_star.svg").exists()


def test_out_flag_overrides_directory(tiny_cfg_path, tmp_path):
    alt = tmp_path / "elsewhere"
    assert cli.main(["--config", str(tiny_cfg_path), "--out", str(alt),
                     "sweep", "--family", "polygon"]) == 0
    assert (alt / "dataset_polygon.csv").exists()
