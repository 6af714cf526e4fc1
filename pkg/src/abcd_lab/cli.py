"""Command-line front door: ``abcd-lab <command> [options]``.

Options may also come from ``--config run.json``, an object keyed by command
name (``{"simulate": {"dt": 0.05, "params": {"b": 0.25, "ac_line": true}}}``)
with an optional top-level ``"seed"``.  Flags override the file, which
overrides the built-in defaults.

Exit codes: 0 success, 1 failed check, 2 bad configuration, 3 I/O error,
4 numerical failure.
"""

from __future__ import annotations

import csv
import json
import math
import sys
from pathlib import Path

import click
import numpy as np

from .errors import AbcdLabError, ConfigError, InvariantViolation, IoFailure
from .params_core import normalize, params_from_config
from .spectral_solver import (
    FieldPair,
    Grid,
    SolverConfig,
    Trajectory,
    evolve,
    gaussian_state,
)

__all__ = ["main", "cli"]


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False)


def _read_text(source: str) -> str:
    """``@path`` reads a file; anything else is taken literally."""
    if source.startswith("@"):
        try:
            return Path(source[1:]).read_text()
        except OSError as exc:
            raise IoFailure(f"cannot read {source[1:]}: {exc}") from exc
    return source


def _load_params(source: str | None):
    if source is None:
        raise ConfigError("missing --params")
    return params_from_config(_read_text(source))


def _floats(text: str, name: str, count: int | None = None) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise ConfigError(f"{name}: cannot parse {text!r}") from exc
    if count is not None and len(vals) != count:
        raise ConfigError(f"{name}: expected {count} comma-separated values, got {text!r}")
    return vals


def _write_text(path: str, text: str) -> None:
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def _open_out(path: str):
    try:
        return open(path, "w", newline="\n")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def _load_config(path: str) -> dict:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise IoFailure(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config file must hold a JSON object")
    out: dict = {}
    for key, section in raw.items():
        if key == "seed":
            out["seed"] = section
            continue
        if not isinstance(section, dict):
            raise ConfigError(f"config section {key!r} must be an object")
        if key not in cli.commands:
            raise ConfigError(f"config names an unknown command {key!r}")
        # nested objects (parameter sets) are passed on as JSON text
        out[key] = {
            k.replace("-", "_"): json.dumps(v) if isinstance(v, (dict, list)) else v
            for k, v in section.items()
        }
    return out


def _resolve_keys(command: click.Command | None, section: dict) -> dict:
    """Map config keys spelled like flags (``"T"``, ``"k-max"``) to parameter names."""
    if command is None:
        raise ConfigError("config names an unknown command")
    lookup = {}
    for param in command.params:
        lookup[param.name] = param.name
        for opt in getattr(param, "opts", []):
            lookup[opt.lstrip("-").replace("-", "_")] = param.name
    out = {}
    for key, value in section.items():
        if key not in lookup:
            raise ConfigError(f"config key {key!r} is not an option of {command.name!r}")
        out[lookup[key]] = value
    return out


@click.group()
@click.option("--seed", type=int, default=None, help="Seed for random initial data.")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
              help="JSON file with per-command defaults.")
@click.pass_context
def cli(ctx: click.Context, seed: int | None, config_path: str | None) -> None:
    """Numerical laboratory for the Hamiltonian abcd Boussinesq system."""
    cfg = _load_config(config_path) if config_path else {}
    ctx.default_map = {
        name: _resolve_keys(cli.commands[name], section)
        for name, section in cfg.items() if name != "seed"
    }
    ctx.obj = {"seed": seed if seed is not None else int(cfg.get("seed", 0))}


# --- classify -------------------------------------------------------------------


@cli.command()
@click.option("--params", default=None, help="Parameter JSON, or @file.")
@click.option("--v0", type=float, default=None, help="Speed bound for the uniform conditions.")
@click.option("--out", default=None, help="Write the JSON here instead of stdout.")
def classify(params: str | None, v0: float | None, out: str | None) -> None:
    """Report the decay scenario of a parameter set."""
    from .region_atlas import classify as classify_params

    text = _dump_json(classify_params(_load_params(params), v0).to_dict())
    if out:
        _write_text(out, text + "\n")
    else:
        click.echo(text)


# --- atlas ------------------------------------------------------------------------


@cli.command()
@click.option("--predicate", "predicates", multiple=True, help="Predicate to rasterize (repeatable).")
@click.option("--predicates", "predicate_list", default=None, help="Comma-separated predicates.")
@click.option("--axes", type=click.Choice(["nu-b", "a-c"]), default="nu-b")
@click.option("--x-range", default=None, help="lo,hi of the horizontal axis.")
@click.option("--y-range", default=None, help="lo,hi of the vertical axis.")
@click.option("--resolution", "--res", "resolution", default="400x400", help="NxM (or N,M) cells.")
@click.option("--b-fixed", "--b", "b_fixed", type=float, default=None, help="b for the a-c plane.")
@click.option("--v0", type=float, default=None, help="Speed bound for 'uniform'.")
@click.option("--out", "out_paths", multiple=True, help="Output path; .svg or .csv (repeatable).")
@click.option("--out-svg", default=None)
@click.option("--out-csv", default=None)
def atlas(predicates, predicate_list, axes, x_range, y_range, resolution, b_fixed, v0,
          out_paths, out_svg, out_csv) -> None:
    """Rasterize region predicates to SVG and CSV."""
    from .region_atlas import rasterize

    names = list(predicates)
    if predicate_list:
        names += [t.strip() for t in predicate_list.split(",") if t.strip()]
    names = names or ["dispersion_like"]
    nx, ny = (int(v) for v in _floats(resolution.lower().replace("x", ","), "resolution", 2))
    xr = tuple(_floats(x_range, "x-range", 2)) if x_range else None
    yr = tuple(_floats(y_range, "y-range", 2)) if y_range else None
    for path in out_paths:
        suffix = Path(path).suffix.lower()
        if suffix == ".svg":
            out_svg = path
        elif suffix == ".csv":
            out_csv = path
        else:
            raise ConfigError(f"--out must end in .svg or .csv, got {path!r}")
    if out_svg is None and out_csv is None:
        out_svg, out_csv = "atlas.svg", "atlas.csv"
    rmap = rasterize(names, axes, xr, yr, (nx, ny), b_fixed, v0)
    if out_svg:
        _write_text(out_svg, rmap.to_svg())
    if out_csv:
        with _open_out(out_csv) as fh:
            rmap.write_csv(fh)
    click.echo(_dump_json({"svg": out_svg, "csv": out_csv, "cells": nx * ny, "predicates": names}))


# --- waves ---------------------------------------------------------------------------


@cli.command()
@click.option("--params", default=None, help="Parameter JSON, or @file.")
@click.option("--k-max", "--kmax", "k_max", type=float, default=10.0)
@click.option("--samples", type=int, default=1001)
@click.option("--out", default=None, help="CSV of k, omega, A, group_velocity.")
@click.option("--find-zero-gv", is_flag=True, help="Print only the zero group-velocity wavenumbers.")
def waves(params, k_max, samples, out, find_zero_gv) -> None:
    """Dispersion relation, group-velocity range and zero-speed wavenumbers."""
    from .linear_waves import pw_range, sample_waves, zero_gv_wavenumbers

    p = _load_params(params)
    if samples < 2 or not k_max > 0:
        raise ConfigError("need samples >= 2 and k-max > 0")
    if out:
        ws = sample_waves(p, k_max, samples)
        with _open_out(out) as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["k", "omega", "A", "group_velocity"])
            for row in zip(ws.k, ws.omega, ws.amplitude_A, ws.group_velocity):
                wr.writerow([f"{v:.12g}" for v in row])
    roots = zero_gv_wavenumbers(p)
    if find_zero_gv:
        click.echo(_dump_json(roots))
        return
    rng = pw_range(p)
    summary = {
        "v_min": rng.v_min,
        "v_max": rng.v_max,
        "k_at_min": rng.k_at_min if math.isfinite(rng.k_at_min) else "inf",
        "k_at_max": rng.k_at_max if math.isfinite(rng.k_at_max) else "inf",
        "zero_group_velocity_k": roots,
    }
    click.echo(_dump_json(summary))


# --- simulate ---------------------------------------------------------------------


def _initial_state(spec: str, grid: Grid, seed: int) -> FieldPair:
    kind, _, rest = spec.partition(":")
    if kind == "gaussian":
        vals = _floats(rest, "init")
        if len(vals) not in (2, 3):
            raise ConfigError("gaussian init takes amp,width[,center]")
        return gaussian_state(grid, *vals)
    if kind == "random":
        vals = _floats(rest, "init")
        if len(vals) != 2:
            raise ConfigError("random init takes amp,k_max")
        amp, k_cut = vals
        rng = np.random.default_rng(seed)
        k = grid.wavenumbers
        fields = []
        for _ in range(2):
            coef = rng.standard_normal(k.size) + 1j * rng.standard_normal(k.size)
            coef[(k > k_cut) | (k == 0)] = 0.0
            f = grid.irfft(coef)
            scale = np.max(np.abs(f))
            fields.append(amp * f / scale if scale > 0 else f)
        return FieldPair(fields[0], fields[1], grid, 0.0)
    if spec.endswith(".csv"):
        try:
            data = np.loadtxt(spec, delimiter=",", skiprows=1, ndmin=2)
        except (OSError, ValueError) as exc:
            raise IoFailure(f"cannot read initial data {spec}: {exc}") from exc
        if data.shape != (grid.n_points, 3):
            raise ConfigError(f"{spec}: expected {grid.n_points} rows of x,u,eta")
        return FieldPair(data[:, 1], data[:, 2], grid, 0.0)
    raise ConfigError(f"unknown --init {spec!r}")


@cli.command()
@click.option("--params", default=None, help="Parameter JSON, or @file.")
@click.option("--init", "init_spec", default="gaussian:0.05,2.0",
              help="gaussian:amp,width[,center] | random:amp,k_max | file.csv (x,u,eta).")
@click.option("--grid", "grid_spec", default="2048,628.3185307179587", help="n,L.")
@click.option("--dt", type=float, default=0.05)
@click.option("--T", "t_end", type=float, default=50.0)
@click.option("--stride", type=int, default=20)
@click.option("--dealias/--no-dealias", default=True)
@click.option("--out", default="traj.npz", help=".csv for text rows, anything else for npz.")
@click.pass_context
def simulate(ctx, params, init_spec, grid_spec, dt, t_end, stride, dealias, out) -> None:
    """Evolve the normalized system and save the trajectory."""
    p = _load_params(params)
    n_text, l_text = (grid_spec.split(",") + [""])[:2]
    try:
        grid = Grid(int(n_text), float(l_text))
    except ValueError as exc:
        raise ConfigError(f"bad --grid {grid_spec!r}: {exc}") from exc
    state = _initial_state(init_spec, grid, ctx.obj["seed"])
    cfg = SolverConfig(dt=dt, t_end=t_end, dealias=dealias, stride=stride)
    traj = evolve(state, normalize(p), cfg)
    traj.meta.update({"init": init_spec, "seed": ctx.obj["seed"], "params": p.to_dict()})
    traj.save(out)
    click.echo(_dump_json({"out": out, "snapshots": len(traj), "t_end": float(traj.times[-1])}))


# --- virial-check -------------------------------------------------------------------


@cli.command("virial-check")
@click.option("--traj", "traj_path", required=True, help="Trajectory file from simulate.")
@click.option("--alpha", default="auto", help="'auto' or a number.")
@click.option("--weight", type=click.Choice(["tanh", "sech2"]), default="tanh")
@click.option("--v", type=float, default=0.0, help="Weight speed.")
@click.option("--scale", type=float, default=None, help="Fixed weight scale (default t/log^2 t).")
@click.option("--method", type=click.Choice(["local", "snapshots"]), default="local")
@click.option("--tol", type=float, default=1e-3, help="Relative residual tolerance.")
@click.option("--out", default="residuals.csv")
def virial_check(traj_path, alpha, weight, v, scale, method, tol, out) -> None:
    """Compare finite-difference dH/dt with the four-term decomposition."""
    from .decay_diagnostics import virial_residual
    from .virial_engine import positivity_certificate

    traj = Trajectory.load(traj_path)
    if alpha == "auto":
        cert = positivity_certificate(traj.params)
        if cert.alpha is None:
            raise ConfigError("no positivity certificate for these parameters; pass --alpha")
        alpha_val = cert.alpha
    else:
        alpha_val = _floats(alpha, "alpha", 1)[0]
    indices = None
    if scale is None:
        indices = [i for i, t in enumerate(traj.times) if t > 1.0]
        if method == "snapshots":
            indices = [i for i in indices if 0 < i < len(traj) - 1]
    res = virial_residual(traj, alpha_val, v=v, profile=weight, scale=scale, method=method,
                          indices=indices)
    with _open_out(out) as fh:
        res.write_csv(fh)
    worst = float(res.relative.max())
    click.echo(_dump_json({"alpha": alpha_val, "samples": int(res.t.size),
                           "max_relative_residual": worst, "out": out}))
    if not worst < tol:
        raise InvariantViolation(f"relative residual {worst:.3e} exceeds {tol:g}")


# --- decay-report -----------------------------------------------------------------


@cli.command("decay-report")
@click.option("--traj", "traj_path", required=True)
@click.option("--velocities", default="0", help="Comma-separated cone speeds.")
@click.option("--sigma", "sigmas", default="", help="Comma-separated exterior frame speeds.")
@click.option("--x0", type=float, default=30.0, help="Exterior frame offset.")
@click.option("--frame-scale", type=float, default=2.0, help="Exterior frame width.")
@click.option("--out", default="report.json")
@click.option("--series-out", default=None, help="Series CSV (default: next to --out).")
@click.option("--strict", is_flag=True, help="Exit 1 when a frame contradicts the prediction.")
def decay_report_cmd(traj_path, velocities, sigmas, x0, frame_scale, out, series_out, strict) -> None:
    """Windowed norms and trend statistics along a trajectory."""
    from .decay_diagnostics import decay_report, json_safe
    from .params_core import denormalize
    from .region_atlas import classify as classify_params

    traj = Trajectory.load(traj_path)
    scenario = classify_params(denormalize(traj.params))
    rep = decay_report(traj, _floats(velocities, "velocities"), _floats(sigmas, "sigma"),
                       x0=x0, scale=frame_scale, v_max=scenario.v_max, sigma=scenario.sigma)
    series_path = series_out or str(Path(out).with_suffix("")) + "_series.csv"
    payload = rep.to_dict()
    payload["scenario"] = scenario.to_dict()
    _write_text(out, json.dumps(json_safe(payload), indent=2, sort_keys=True) + "\n")
    with _open_out(series_path) as fh:
        rep.write_series_csv(fh)
    click.echo(_dump_json({"report": out, "series": series_path, "flagged": rep.flagged}))
    if strict and rep.flagged:
        raise InvariantViolation(f"frames contradict the prediction: {rep.flagged}")


def main(argv: list[str] | None = None) -> int:
    """Run the CLI and map package errors onto exit codes."""
    try:
        cli.main(args=argv, prog_name="abcd-lab", standalone_mode=False)
    except AbcdLabError as exc:
        click.echo(f"error: {exc}", err=True)
        return exc.exit_code
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return 2
    except click.exceptions.Abort:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
