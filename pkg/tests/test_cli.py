from __future__ import annotations

import csv
import json
import math

import numpy as np
import pytest

from abcd_lab.cli import main
from abcd_lab.spectral_solver import Trajectory

AC_03 = '{"b": 0.3, "ac_line": true}'
AC_QUARTER = '{"b": 0.25, "ac_line": true}'


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def _simulate(tmp_path, capsys, name="traj.npz", extra=()):
    path = tmp_path / name
    code, out, err = run(
        ["simulate", "--params", AC_QUARTER, "--grid", "256,100", "--dt", "0.05", "--T", "6",
         "--stride", "2", "--out", str(path), *extra],
        capsys,
    )
    assert code == 0, err
    return path


# --- classify -------------------------------------------------------------------------------


def test_classify_cone_band(capsys):
    code, out, _ = run(["classify", "--params", AC_03], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["label"] == "ConeBand_b_le_crit"
    assert math.isclose(data["v_max"], 1 - 2 / 2.7, rel_tol=1e-14)
    assert data["sigma"] == 1.0


def test_classify_from_file(tmp_path, capsys):
    f = tmp_path / "p.json"
    f.write_text('{"nu": 0.5, "b": 0.3}')
    out_path = tmp_path / "c.json"
    code, _, _ = run(["classify", "--params", f"@{f}", "--v0", "0.5", "--out", str(out_path)], capsys)
    assert code == 0
    assert json.loads(out_path.read_text())["label"] == "NotClassified"


@pytest.mark.parametrize(
    "argv, code",
    [
        (["classify", "--params", "{not json"], 2),
        (["classify", "--params", '{"b": 0.1, "ac_line": true}'], 2),
        (["classify", "--params", "@/nonexistent/params.json"], 3),
        (["classify"], 2),
        (["no-such-command"], 2),
    ],
)
def test_classify_errors(argv, code, capsys):
    assert run(argv, capsys)[0] == code


# --- atlas ------------------------------------------------------------------------------------


def test_atlas_outputs_are_deterministic(tmp_path, capsys):
    outs = []
    for i in range(2):
        svg, csv_path = tmp_path / f"m{i}.svg", tmp_path / f"m{i}.csv"
        code, _, err = run(["atlas", "--predicate", "dispersion_like", "--res", "40x30",
                            "--out", str(svg), "--out", str(csv_path)], capsys)
        assert code == 0, err
        outs.append((svg.read_bytes(), csv_path.read_bytes()))
    assert outs[0] == outs[1]
    assert outs[0][0].startswith(b"<svg")
    header = outs[0][1].split(b"\n", 1)[0]
    assert header == b"x,y,predicate,value,boundary"


def test_atlas_ac_plane(tmp_path, capsys):
    csv_path = tmp_path / "ac.csv"
    code, _, err = run(["atlas", "--predicates", "admissible,ellipse", "--axes", "a-c", "--b", "0.25",
                        "--resolution", "20,20", "--out-csv", str(csv_path)], capsys)
    assert code == 0, err
    rows = list(csv.DictReader(csv_path.read_text().splitlines()))
    assert {r["predicate"] for r in rows} == {"admissible", "ellipse"}
    assert len(rows) == 2 * 400


@pytest.mark.parametrize(
    "extra",
    [["--predicate", "nope"], ["--predicate", "refined", "--res", "0x10"],
     ["--predicate", "refined", "--x-range", "1,0"], ["--predicate", "refined", "--out", "map.png"]],
)
def test_atlas_bad_inputs(extra, tmp_path, capsys, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert run(["atlas", *extra], capsys)[0] == 2


# --- waves ------------------------------------------------------------------------------------


def test_waves_csv_and_summary(tmp_path, capsys):
    out = tmp_path / "disp.csv"
    code, text, _ = run(["waves", "--params", AC_QUARTER, "--kmax", "5", "--samples", "11",
                         "--out", str(out)], capsys)
    assert code == 0
    rows = list(csv.reader(out.read_text().splitlines()))
    assert rows[0] == ["k", "omega", "A", "group_velocity"]
    assert len(rows) == 12
    summary = json.loads(text)
    assert math.isclose(summary["v_min"], 0.25, abs_tol=1e-9)
    assert summary["zero_group_velocity_k"] == []


def test_waves_zero_gv(capsys):
    code, text, _ = run(["waves", "--params", '{"b": 0.1875, "ac_line": true}', "--find-zero-gv"], capsys)
    assert code == 0
    roots = json.loads(text)
    assert len(roots) == 1 and abs(roots[0] - 4) < 1e-9


# --- simulate, virial-check, decay-report --------------------------------------------------------


def test_simulate_writes_trajectory(tmp_path, capsys):
    path = _simulate(tmp_path, capsys)
    traj = Trajectory.load(path)
    assert len(traj) == 61 and math.isclose(traj.times[-1], 6.0)
    assert traj.meta["params"]["b"] == 0.25


def test_simulate_csv_format(tmp_path, capsys):
    path = _simulate(tmp_path, capsys, name="traj.csv")
    first = path.read_text().splitlines()[:2]
    assert first[0].startswith("# ") and first[1] == "t,x,u,eta"
    assert len(Trajectory.load(path)) == 61


def test_simulate_random_init_seeded(tmp_path, capsys):
    digests = []
    for seed in (1, 1, 2):
        path = tmp_path / f"r{seed}_{len(digests)}.npz"
        code, _, err = run(["--seed", str(seed), "simulate", "--params", AC_QUARTER, "--grid", "64,40",
                            "--init", "random:0.01,1", "--dt", "0.1", "--T", "1", "--out", str(path)], capsys)
        assert code == 0, err
        digests.append(Trajectory.load(path).u.tobytes())
    assert digests[0] == digests[1] != digests[2]


def test_simulate_init_from_file(tmp_path, capsys):
    x = np.linspace(-20, 20, 64, endpoint=False)
    data = tmp_path / "init.csv"
    with data.open("w") as fh:
        fh.write("x,u,eta\n")
        for xi in x:
            fh.write(f"{xi},{0.01 * math.exp(-xi * xi / 16)},0\n")
    path = tmp_path / "f.npz"
    code, _, err = run(["simulate", "--params", AC_QUARTER, "--grid", "64,40", "--init", str(data),
                        "--dt", "0.1", "--T", "1", "--out", str(path)], capsys)
    assert code == 0, err
    assert np.allclose(Trajectory.load(path).u[0], 0.01 * np.exp(-x * x / 16), atol=1e-12)


@pytest.mark.parametrize(
    "extra, code",
    [
        (["--dt", "5"], 2),
        (["--dt", "0.07"], 2),
        (["--grid", "100,10"], 2),
        (["--init", "box:1"], 2),
        (["--init", "/missing/file.csv"], 3),
    ],
)
def test_simulate_errors(extra, code, tmp_path, capsys):
    argv = ["simulate", "--params", AC_QUARTER, "--grid", "256,100", "--T", "1", "--out",
            str(tmp_path / "x.npz"), *extra]
    assert run(argv, capsys)[0] == code


def test_simulate_write_failure(tmp_path, capsys):
    argv = ["simulate", "--params", AC_QUARTER, "--grid", "64,40", "--dt", "0.1", "--T", "0.2",
            "--out", str(tmp_path / "missing" / "x.npz")]
    assert run(argv, capsys)[0] == 3


@pytest.mark.filterwarnings("ignore:weight centre")
def test_virial_check(tmp_path, capsys):
    traj = _simulate(tmp_path, capsys)
    out = tmp_path / "res.csv"
    code, text, err = run(["virial-check", "--traj", str(traj), "--v", "0.3", "--out", str(out)], capsys)
    assert code == 0, err
    summary = json.loads(text)
    assert summary["alpha"] == 0.0 and summary["max_relative_residual"] < 1e-3
    assert out.read_text().splitlines()[0] == "t,dH_dt_fd,Q,SQ,NQ,VH,residual"


@pytest.mark.filterwarnings("ignore:weight centre")
def test_virial_check_failure_exit(tmp_path, capsys):
    traj = _simulate(tmp_path, capsys)
    argv = ["virial-check", "--traj", str(traj), "--weight", "sech2", "--scale", "3", "--alpha", "0.1",
            "--tol", "0", "--out", str(tmp_path / "r.csv")]
    assert run(argv, capsys)[0] == 1


def test_virial_check_missing_traj(tmp_path, capsys):
    assert run(["virial-check", "--traj", str(tmp_path / "none.npz")], capsys)[0] == 3


def test_decay_report(tmp_path, capsys):
    traj = _simulate(tmp_path, capsys)
    out = tmp_path / "rep.json"
    code, text, err = run(["decay-report", "--traj", str(traj), "--velocities", "0,0.2", "--sigma", "1.5",
                           "--x0", "10", "--out", str(out)], capsys)
    assert code == 0, err
    rep = json.loads(out.read_text())
    assert rep["scenario"]["label"] == "ConeBand_b_le_crit"
    assert [f["frame_id"] for f in rep["frames"]] == ["cone_0", "cone_0.2", "ext_right_1.5", "ext_left_1.5"]
    series = tmp_path / "rep_series.csv"
    assert series.read_text().splitlines()[0].startswith("t,frame_id,window_h1,sech2,sech4,eloc")
    assert json.loads(text)["series"] == str(series)


def test_decay_report_strict(tmp_path, capsys):
    traj = _simulate(tmp_path, capsys)
    # the short run cannot show decay at v = 0, so the strict mode reports it
    argv = ["decay-report", "--traj", str(traj), "--out", str(tmp_path / "r.json"), "--strict"]
    code = run(argv, capsys)[0]
    rep = json.loads((tmp_path / "r.json").read_text())
    assert code == (1 if rep["flagged"] else 0)


def test_decay_report_too_short(tmp_path, capsys):
    path = tmp_path / "short.npz"
    run(["simulate", "--params", AC_QUARTER, "--grid", "64,40", "--dt", "0.1", "--T", "1",
         "--out", str(path)], capsys)
    assert run(["decay-report", "--traj", str(path), "--out", str(tmp_path / "r.json")], capsys)[0] == 4


# --- configuration files ---------------------------------------------------------------------------


def test_config_file_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({
        "seed": 3,
        "simulate": {"params": {"b": 0.25, "ac_line": True}, "grid": "64,40", "dt": 0.1, "T": 1.0,
                     "stride": 5, "out": str(tmp_path / "cfg.npz")},
    }))
    code, text, err = run(["--config", str(cfg), "simulate"], capsys)
    assert code == 0, err
    assert json.loads(text)["snapshots"] == 3
    code, text, _ = run(["--config", str(cfg), "simulate", "--T", "2.0"], capsys)
    assert json.loads(text)["snapshots"] == 5


@pytest.mark.parametrize(
    "content, code",
    [("{bad", 2), ('{"simulate": {"nope": 1}}', 2), ('{"fly": {}}', 2), ("[1, 2]", 2)],
)
def test_config_file_errors(content, code, tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(content)
    assert run(["--config", str(cfg), "classify", "--params", AC_03], capsys)[0] == code


def test_missing_config_file(tmp_path, capsys):
    assert run(["--config", str(tmp_path / "none.json"), "classify", "--params", AC_03], capsys)[0] == 3


def test_thread_env_validation(monkeypatch, tmp_path, capsys):
    monkeypatch.setenv("ABCD_LAB_THREADS", "many")
    argv = ["simulate", "--params", AC_QUARTER, "--grid", "64,40", "--dt", "0.1", "--T", "0.2",
            "--out", str(tmp_path / "t.npz")]
    assert run(argv, capsys)[0] == 2
