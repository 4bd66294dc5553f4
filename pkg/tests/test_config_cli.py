from __future__ import annotations

import csv
import json
import math

import numpy as np
import pytest

from glvortex import cli
from glvortex import effective as ef
from glvortex.config import ExperimentConfig, from_dict, parse_config, serialize
from glvortex.errors import ConfigError
from glvortex.experiments import (ComparisonReport, compare_trajectories, compute_verdicts, epsilon,
                                  run_experiment)
from glvortex.tracking import TrackSet, VortexObservation, read_tracks_csv

MINIMAL = """
model = "gradient_flow"
lambda = 2.0

[[vortices]]
x = -4.0
y = 0.0
n = 1
"""


def write(tmp_path, text, name="exp.toml"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_minimal_config_defaults(tmp_path):
    cfg = parse_config(write(tmp_path, MINIMAL))
    assert cfg.model == "gradient_flow" and cfg.lam == 2.0
    assert cfg.vortices[0].n == 1 and cfg.vortices[0].px == 0.0
    assert cfg.lattice.spacing == 0.125
    assert cfg.run.cfl_factor == 0.1 and cfg.run.courant_factor == 0.25
    assert cfg.initial.glue == "continuum"
    lat = cfg.lattice_spec()
    assert lat.extent >= 4.0 + 8.0 and lat.h == pytest.approx(0.125)


def test_roundtrip(tmp_path):
    text = MINIMAL + """
[[vortices]]
x = 4.0
y = 0.5
n = -1
px = 0.01

[run]
t_end = 3.5
snapshot_every = 7

[initial]
glue = "lattice_core"
"""
    cfg = parse_config(write(tmp_path, text))
    again = parse_config(write(tmp_path, serialize(cfg), "again.toml"))
    assert again == cfg


@pytest.mark.parametrize("text,path", [
    (MINIMAL.replace("x = -4.0", "x = -9.0") + "\n[lattice]\nextent = 12.0\n", "vortices[0]"),
    (MINIMAL.replace('"gradient_flow"', '"schroedinger"'), "model"),
    (MINIMAL.replace("lambda = 2.0", "lambda = -1.0"), "lambda"),
    (MINIMAL.replace("n = 1", "n = 0"), "vortices[0].n"),
    (MINIMAL + "\n[run]\ncfl_factor = 0.5\n", "run.cfl_factor"),
    (MINIMAL + "\n[run]\ncourant = 0.5\n", "run.courant"),
    (MINIMAL + "\n[[vortices]]\nx = -3.0\ny = 0.0\nn = 1\n", "vortices[1]"),
    (MINIMAL.replace("y = 0.0", 'y = "zero"'), "vortices[0].y"),
])
def test_validation_errors_name_key(tmp_path, text, path):
    with pytest.raises(ConfigError) as info:
        parse_config(write(tmp_path, text))
    assert info.value.path == path
    if path == "vortices[0]":
        assert "placement" in str(info.value)


def test_parse_errors(tmp_path):
    with pytest.raises(ConfigError):
        parse_config(write(tmp_path, "model = "))
    with pytest.raises(ConfigError):
        parse_config(tmp_path / "missing.toml")


def test_effective_models_reject_type_one():
    with pytest.raises(ConfigError):
        from_dict({"model": "effective_gf", "lambda": 0.5, "vortices": [{"x": 0, "y": 0, "n": 1}]})


# -- comparison reports

def fake_tracks(times, positions):
    tracks = [[(float(t), VortexObservation(tuple(positions[i, k]), 1, 0.0)) for i, t in enumerate(times)]
              for k in range(positions.shape[1])]
    return TrackSet(tracks)


def test_compare_identical_is_zero(p1_two):
    params = ef.EffectiveParams.from_profiles((1, 1), {1: p1_two})
    traj = ef.integrate(ef.EffectiveState([[-4.0, 0.0], [4.0, 0.0]]), params, 20.0, 0.05, False, record_every=20)
    x = (traj.times, traj.positions)
    report = compare_trajectories(x, x, params, "gradient_flow", 0.125)
    assert report.sup_deviation == 0.0
    assert report.verdicts["deviation"]
    # the effective law itself satisfies the law up to the differencing error
    assert max(report.law_residual) < 1e-3


def test_compare_track_order_is_aligned(p1_two):
    params = ef.EffectiveParams.from_profiles((1, 1), {1: p1_two})
    traj = ef.integrate(ef.EffectiveState([[-4.0, 0.0], [4.0, 0.0]]), params, 10.0, 0.05, False, record_every=20)
    swapped = fake_tracks(traj.times, traj.positions[:, ::-1])
    report = compare_trajectories(swapped, traj, params, "gradient_flow", 0.125)
    assert report.sup_deviation < 1e-12


def test_report_json_and_verdict_recompute(p1_two):
    params = ef.EffectiveParams.from_profiles((1, 1), {1: p1_two})
    traj = ef.integrate(ef.EffectiveState([[-4.0, 0.0], [4.0, 0.0]], [[0.05, 0], [-0.05, 0]]), params, 10.0,
                        0.05, True, record_every=10)
    shifted = (traj.times, traj.positions + np.array([0.3, 0.0]))
    report = compare_trajectories(shifted, traj, params, "maxwell_higgs", 0.125, p0_scale=0.05)
    assert report.sup_deviation == pytest.approx(0.3)
    assert report.verdicts["deviation"] is False and report.verdicts["velocity_residual"] is True
    back = ComparisonReport.from_json(report.to_json())
    assert back == report
    assert compute_verdicts(back) == report.verdicts
    assert report.epsilon == pytest.approx(epsilon(8.0))


# -- experiments and CLI

def config_text(model, vortices, run="", lam=2.0, lattice=""):
    lines = [f'model = "{model}"', f"lambda = {lam}"]
    for v in vortices:
        lines.append("[[vortices]]")
        lines += [f"{k} = {val}" for k, val in v.items()]
    return "\n".join(lines) + "\n" + run + "\n" + lattice


def test_effective_gf_experiment(tmp_path):
    cfg = from_dict({"model": "effective_gf", "lambda": 2.0, "output_dir": str(tmp_path / "out"),
                     "vortices": [{"x": -4.0, "y": 0.0, "n": 1}, {"x": 4.0, "y": 0.0, "n": 1}],
                     "run": {"t_end": 50.0, "effective_dt": 0.1}})
    result = run_experiment(cfg)
    rows = list(csv.DictReader(open(result.files["effective"])))
    seps = [float(r["separation"]) for r in rows]
    assert np.all(np.diff(seps) > 0)
    assert (tmp_path / "out" / "config.toml").exists()


def test_gradient_flow_single_vortex_stays_put(tmp_path):
    cfg = from_dict({"model": "gradient_flow", "lambda": 1.0, "output_dir": str(tmp_path / "out"),
                     "vortices": [{"x": 0.3, "y": -0.2, "n": 1}],
                     "lattice": {"spacing": 0.25, "extent": 9.0},
                     "run": {"t_end": 5.0, "cfl_factor": 0.2, "snapshot_every": 50}})
    result = run_experiment(cfg)
    tracks = read_tracks_csv(result.files["tracks"])
    pos = tracks.positions()[:, 0, :]
    assert np.max(np.hypot(pos[:, 0] - 0.3, pos[:, 1] + 0.2)) <= 2 * 0.25
    assert result.report is None


def test_maxwell_higgs_experiment_energy(tmp_path):
    cfg = from_dict({"model": "maxwell_higgs", "lambda": 2.0, "output_dir": str(tmp_path / "out"),
                     "vortices": [{"x": 0.0, "y": 0.0, "n": 1}], "run": {"t_end": 10.0, "snapshot_every": 40}})
    result = run_experiment(cfg)
    energy = [float(r["energy"]) for r in csv.DictReader(open(result.files["diagnostics"]))]
    assert max(abs(e - energy[0]) for e in energy) / energy[0] <= 1e-4


def test_cli_exit_codes(tmp_path, capsys):
    bad = write(tmp_path, MINIMAL.replace("x = -4.0", "x = -30.0") + "\n[lattice]\nextent = 12.0\n", "bad.toml")
    assert cli.main(["glue", "--config", str(bad)]) == 2
    assert "vortices[0]" in capsys.readouterr().err
    assert cli.main(["glue"]) == 2
    good = write(tmp_path, MINIMAL.replace("x = -4.0", "x = 0.0") + '\n[lattice]\nspacing = 0.25\n', "good.toml")
    assert cli.main(["glue", "--config", str(good), "--out", str(tmp_path / "g"), "--threads", "2"]) == 0
    summary = json.loads((tmp_path / "g" / "glued.json").read_text())
    assert summary["degree"] == 1 and math.isclose(summary["flux"], 2 * math.pi, abs_tol=1e-2)
    assert (tmp_path / "g" / "glued.glvx").exists()
    assert cli.main(["profile", "--n", "1", "--lambda", "0.5", "--out", str(tmp_path / "p")]) == 0
    assert (tmp_path / "p" / "profile_n1.csv").exists()
    assert cli.main(["profile", "--n", "1", "--lambda", "-1", "--out", str(tmp_path / "p")]) == 2
    assert cli.main(["compare", "--config", str(good)]) == 2


def test_cli_effective(tmp_path, capsys):
    cfg = write(tmp_path, config_text("maxwell_higgs", [{"x": -4.0, "y": 0.0, "n": 1, "px": 0.05},
                                                        {"x": 4.0, "y": 0.0, "n": 1, "px": -0.05}],
                                      "[run]\nt_end = 20.0\neffective_dt = 0.05\n"))
    assert cli.main(["effective", "--config", str(cfg), "--out", str(tmp_path / "e")]) == 0
    rows = list(csv.DictReader(open(tmp_path / "e" / "effective.csv")))
    assert float(rows[-1]["px0"]) < 0.05


def test_shipped_experiment_matrix_parses():
    from pathlib import Path
    files = sorted((Path(__file__).parent.parent / "configs").glob("*.toml"))
    assert len(files) == 12
    for f in files:
        cfg = parse_config(f)
        assert cfg.lam in (1.0, 2.0) and cfg.is_pde and len(cfg.vortices) == 2
