"""Windowed and weighted norms, localized energies and decay reports.

Two families of frames are monitored along a trajectory:

* cone frames, centred at ``v t`` with half-width ``lam(t) = t / log(t)^2``,
  measured with a sharp window and with ``sech^2`` / ``sech^4`` weights;
* exterior frames ``psi((x - x0 - sigma t)/L)`` with ``psi = (1 + tanh)/2``
  and their mirror images on the left, which see only mass travelling faster
  than ``sigma``.

The trend statistics are desk-scale stand-ins for limits: terminal/initial
ratios and the fraction of decreasing steps over the last half of a run.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import ParameterError, TooShortTrajectory, WindowOutsideGrid
from .params_core import NormParams
from .spectral_solver import FieldPair, SpectralSystem, Trajectory, energy
from .virial_engine import (
    DiscreteWeight,
    eval_decomposition,
    eval_functionals,
    lambda_law,
    lambda_law_prime,
)

__all__ = [
    "WindowSpec",
    "ExteriorFrame",
    "FrameSeries",
    "DecayReport",
    "VirialResidual",
    "window_norm",
    "weighted_norm",
    "local_energy",
    "exterior_norm",
    "decay_report",
    "virial_residual",
    "trend_statistics",
    "MIN_WINDOW_TIME",
    "json_safe",
]

#: Earliest time at which cone windows are formed (the scale law needs t > 1).
MIN_WINDOW_TIME = 2.0


def _h1_density(state: FieldPair) -> np.ndarray:
    g = state.grid
    ux, ex = g.derivative(state.u), g.derivative(state.eta)
    return state.u**2 + ux**2 + state.eta**2 + ex**2


@dataclass(frozen=True)
class WindowSpec:
    """The interval ``(v t - lam, v t + lam)`` with ``lam = t / log(t)^2`` by default."""

    v: float
    t: float
    half_width: float | None = None

    def __post_init__(self) -> None:
        if self.half_width is None:
            if not self.t >= MIN_WINDOW_TIME:
                raise ParameterError(f"window time must be >= {MIN_WINDOW_TIME}, got {self.t}")
            object.__setattr__(self, "half_width", lambda_law(self.t))
        elif not self.half_width > 0:
            raise ParameterError(f"half_width must be positive, got {self.half_width}")

    @property
    def lam(self) -> float:
        return float(self.half_width)

    @property
    def lam_prime(self) -> float:
        return lambda_law_prime(self.t)

    @property
    def centre(self) -> float:
        return self.v * self.t

    @property
    def interval(self) -> tuple[float, float]:
        return self.centre - self.lam, self.centre + self.lam

    def check_grid(self, state: FieldPair) -> None:
        lo, hi = self.interval
        half = 0.5 * state.grid.length
        if lo < -half or hi > half:
            raise WindowOutsideGrid(f"window ({lo:.4g}, {hi:.4g}) leaves the grid [-{half:.4g}, {half:.4g})")


def window_norm(state: FieldPair, spec: WindowSpec) -> float:
    """``H^1 x H^1`` norm of the state restricted to the window (sharp cutoff)."""
    spec.check_grid(state)
    lo, hi = spec.interval
    x = state.grid.x
    mask = (x > lo) & (x < hi)
    return math.sqrt(state.grid.integrate(np.where(mask, _h1_density(state), 0.0)))


def weighted_norm(state: FieldPair, w: DiscreteWeight | str, spec: WindowSpec | None = None) -> float:
    """``int weight (u^2 + u_x^2 + eta^2 + eta_x^2)`` (a squared norm).

    ``w`` is either a weight or the name of a cone profile (``"sech2"`` or
    ``"sech4"``), in which case it is centred and scaled by ``spec``.
    """
    if isinstance(w, str):
        if spec is None:
            raise ParameterError("a profile name needs a window spec")
        w = DiscreteWeight(w, v=spec.v, x0=0.0, scale=spec.lam)
    if spec is not None:
        spec.check_grid(state)
    phi = w.profile_values(state.grid.x, state.t)[0]
    return state.grid.integrate(phi * _h1_density(state))


def local_energy(state: FieldPair, w: DiscreteWeight | None, p: NormParams) -> float:
    """``1/2 int psi (-a_t u_x^2 - c_t eta_x^2 + u^2 + eta^2 + u^2 eta)``; ``w=None`` means ``psi = 1``."""
    if w is None:
        return energy(state, p)
    g = state.grid
    u, eta = state.u, state.eta
    ux, ex = g.derivative(u), g.derivative(eta)
    dens = -float(p.a_tilde) * ux**2 - float(p.c_tilde) * ex**2 + u**2 + eta**2 + u**2 * eta
    psi = w.profile_values(g.x, state.t)[0]
    return 0.5 * g.integrate(psi * dens)


# --- exterior frames ------------------------------------------------------------


@dataclass(frozen=True)
class ExteriorFrame:
    """Frame ``psi((x - x0 - sigma t)/L)`` on the right, mirrored on the left."""

    sigma: float
    side: str = "right"
    x0: float = 30.0
    scale: float = 2.0
    seam_margin: float = 10.0

    def __post_init__(self) -> None:
        if self.side not in ("right", "left"):
            raise ParameterError(f"side must be 'right' or 'left', got {self.side!r}")
        if not self.scale > 0:
            raise ParameterError(f"scale must be positive, got {self.scale}")

    @property
    def weight(self) -> DiscreteWeight:
        if self.side == "right":
            return DiscreteWeight("half_one_plus_tanh", v=self.sigma, x0=self.x0, scale=self.scale)
        return DiscreteWeight("half_one_minus_tanh", v=-self.sigma, x0=-self.x0, scale=self.scale)

    @property
    def frame_id(self) -> str:
        return f"ext_{self.side}_{self.sigma:g}"

    def fits(self, state: FieldPair) -> bool:
        """False once the frame edge comes within ``seam_margin`` scales of the seam."""
        centre = self.weight.centre(state.t)
        return abs(centre) + self.seam_margin * self.scale < 0.5 * state.grid.length


def exterior_norm(state: FieldPair, frame: ExteriorFrame) -> float:
    """``int psi (u^2 + u_x^2 + eta^2 + eta_x^2)`` in an exterior frame."""
    if not frame.fits(state):
        raise WindowOutsideGrid(f"frame {frame.frame_id} reaches the periodic seam at t = {state.t}")
    return weighted_norm(state, frame.weight)


# --- reports ---------------------------------------------------------------------


def trend_statistics(values: Sequence[float]) -> dict[str, float]:
    """Terminal/initial ratio, maximum and monotone fraction over the last half."""
    arr = np.asarray([v for v in values if np.isfinite(v)], dtype=float)
    if arr.size == 0:
        return {"ratio": math.nan, "max": math.nan, "monotone_fraction": math.nan}
    first, last = arr[0], arr[-1]
    ratio = last / first if first > 0 else (0.0 if last == 0 else math.inf)
    tail = arr[arr.size // 2:]
    steps = np.diff(tail)
    mono = float(np.mean(steps <= 0)) if steps.size else 1.0
    return {"ratio": float(ratio), "max": float(arr.max()), "monotone_fraction": mono}


@dataclass
class FrameSeries:
    frame_id: str
    kind: str  # "cone" or "exterior"
    speed: float
    t: np.ndarray
    window_h1: np.ndarray
    sech2: np.ndarray
    sech4: np.ndarray
    eloc: np.ndarray
    psi_weighted: np.ndarray
    stats: dict = field(default_factory=dict)
    flagged: bool = False


@dataclass
class DecayReport:
    frames: list[FrameSeries]
    interior_peak: float
    v_max: float | None = None
    sigma: float | None = None
    ratio_threshold: float = 0.5
    exterior_fraction: float = 1e-3

    def frame(self, frame_id: str) -> FrameSeries:
        for fr in self.frames:
            if fr.frame_id == frame_id:
                return fr
        raise KeyError(frame_id)

    @property
    def flagged(self) -> list[str]:
        return [fr.frame_id for fr in self.frames if fr.flagged]

    def to_dict(self) -> dict:
        return {
            "interior_peak": self.interior_peak,
            "v_max": self.v_max,
            "sigma": self.sigma,
            "ratio_threshold": self.ratio_threshold,
            "exterior_fraction": self.exterior_fraction,
            "flagged": self.flagged,
            "frames": [
                {"frame_id": fr.frame_id, "kind": fr.kind, "speed": fr.speed,
                 "samples": int(fr.t.size), "stats": fr.stats, "flagged": fr.flagged}
                for fr in self.frames
            ],
        }

    def to_json(self) -> str:
        return json.dumps(json_safe(self.to_dict()), indent=2, sort_keys=True)

    def write_series_csv(self, fh: io.TextIOBase) -> None:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["t", "frame_id", "window_h1", "sech2", "sech4", "eloc", "psi_weighted"])
        for fr in self.frames:
            for i in range(fr.t.size):
                wr.writerow([f"{fr.t[i]:.12g}", fr.frame_id] + [
                    f"{arr[i]:.12g}" for arr in (fr.window_h1, fr.sech2, fr.sech4, fr.eloc, fr.psi_weighted)
                ])


def json_safe(obj):
    """Replace non-finite floats by ``None`` so the result is strict JSON."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: json_safe(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [json_safe(v) for v in obj]
    return obj


def _cone_series(traj: Trajectory, v: float) -> FrameSeries:
    ts, h1, s2, s4, el = [], [], [], [], []
    for state in traj:
        if state.t < MIN_WINDOW_TIME:
            continue
        spec = WindowSpec(v, state.t)
        ts.append(state.t)
        h1.append(window_norm(state, spec))
        s2.append(weighted_norm(state, "sech2", spec))
        s4.append(weighted_norm(state, "sech4", spec))
        el.append(local_energy(state, DiscreteWeight("sech4", v=v, scale=spec.lam), traj.params))
    n = len(ts)
    fr = FrameSeries(f"cone_{v:g}", "cone", v, np.array(ts), np.array(h1), np.array(s2),
                     np.array(s4), np.array(el), np.full(n, math.nan))
    fr.stats = trend_statistics(fr.sech4)
    if n:
        lam = np.array([lambda_law(t) for t in fr.t])
        running = cumulative_trapezoid(fr.sech2 / lam, fr.t, initial=0.0)
        fr.stats["running_sech2_over_lambda"] = float(running[-1])
    return fr


def _exterior_series(traj: Trajectory, frame: ExteriorFrame) -> FrameSeries:
    ts, h1, el, pw = [], [], [], []
    w = frame.weight
    for state in traj:
        if not frame.fits(state):
            continue  # frames near the seam are dropped, not wrapped
        x = state.grid.x
        edge = w.centre(state.t)
        mask = x > edge if frame.side == "right" else x < edge
        ts.append(state.t)
        h1.append(math.sqrt(state.grid.integrate(np.where(mask, _h1_density(state), 0.0))))
        el.append(local_energy(state, w, traj.params))
        pw.append(weighted_norm(state, w))
    n = len(ts)
    fr = FrameSeries(frame.frame_id, "exterior", frame.sigma, np.array(ts), np.array(h1),
                     np.full(n, math.nan), np.full(n, math.nan), np.array(el), np.array(pw))
    fr.stats = trend_statistics(fr.psi_weighted)
    return fr


def decay_report(
    traj: Trajectory,
    velocities: Iterable[float] = (0.0,),
    sigmas: Iterable[float] = (),
    *,
    x0: float = 30.0,
    scale: float = 2.0,
    v_max: float | None = None,
    sigma: float | None = None,
    ratio_threshold: float = 0.5,
    exterior_fraction: float = 1e-3,
) -> DecayReport:
    """Monitor cone and exterior frames along a trajectory.

    A cone frame with ``|v| < v_max`` is flagged when its ``sech^4`` ratio
    exceeds ``ratio_threshold``; an exterior frame with speed above
    ``sigma`` is flagged when it ever exceeds ``exterior_fraction`` times the
    interior peak (the largest ``sech^4`` value over all cone frames).
    """
    if len(traj) < 2 or traj.times[-1] < MIN_WINDOW_TIME:
        raise TooShortTrajectory(
            f"need at least two snapshots reaching t >= {MIN_WINDOW_TIME}; "
            f"got {len(traj)} ending at t = {traj.times[-1] if len(traj) else None}"
        )
    frames = [_cone_series(traj, float(v)) for v in velocities]
    for s in sigmas:
        for side in ("right", "left"):
            frames.append(_exterior_series(traj, ExteriorFrame(float(s), side, x0, scale)))
    cone_peaks = [fr.sech4.max() for fr in frames if fr.kind == "cone" and fr.t.size]
    peak = float(max(cone_peaks)) if cone_peaks else math.nan
    for fr in frames:
        if fr.kind == "cone" and v_max is not None and abs(fr.speed) < v_max:
            fr.flagged = bool(fr.stats["ratio"] > ratio_threshold)
        if fr.kind == "exterior" and sigma is not None and fr.speed > sigma and fr.t.size:
            fr.stats["peak_fraction"] = float(fr.psi_weighted.max() / peak) if peak > 0 else 0.0
            fr.flagged = bool(fr.psi_weighted.max() > exterior_fraction * peak)
    return DecayReport(frames, peak, v_max, sigma, ratio_threshold, exterior_fraction)


# --- virial residual ----------------------------------------------------------


@dataclass
class VirialResidual:
    t: np.ndarray
    H: np.ndarray
    dH_dt_fd: np.ndarray
    Q: np.ndarray
    SQ: np.ndarray
    NQ: np.ndarray
    VH: np.ndarray

    @property
    def residual(self) -> np.ndarray:
        return self.dH_dt_fd - (self.Q + self.SQ + self.NQ + self.VH)

    @property
    def relative(self) -> np.ndarray:
        return np.abs(self.residual) / np.maximum(1.0, np.abs(self.dH_dt_fd))

    def write_csv(self, fh: io.TextIOBase) -> None:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["t", "dH_dt_fd", "Q", "SQ", "NQ", "VH", "residual"])
        res = self.residual
        for i in range(self.t.size):
            wr.writerow([f"{val:.12g}" for val in (self.t[i], self.dH_dt_fd[i], self.Q[i],
                                                   self.SQ[i], self.NQ[i], self.VH[i], res[i])])

    def to_dict(self) -> dict:
        return {k: v.tolist() for k, v in asdict(self).items()}


def _local_derivative(traj: Trajectory, state: FieldPair, w: DiscreteWeight, alpha: float,
                      h: float) -> float:
    """Centered difference of ``H`` from one RK4 step forward and one backward."""
    dealias = bool(traj.meta.get("dealias", True))
    nonlinear = bool(traj.meta.get("nonlinear", True))
    sysm = SpectralSystem.normalized(state.grid, traj.params, dealias=dealias, nonlinear=nonlinear)
    g = state.grid
    values = []
    for step in (h, -h):
        uh, eh = sysm.rk4_step(state.u_hat, state.eta_hat, step)
        moved = FieldPair(g.irfft(uh), g.irfft(eh), g, state.t + step)
        values.append(eval_functionals(moved, w, alpha)["H"])
    return (values[0] - values[1]) / (2 * h)


def virial_residual(
    traj: Trajectory,
    alpha: float,
    v: float = 0.0,
    profile: str = "tanh",
    scale: float | None = None,
    x0: float = 0.0,
    method: str = "local",
    fd_factor: float = 1e-3,
    indices: Sequence[int] | None = None,
) -> VirialResidual:
    """Compare a finite-difference ``dH/dt`` with ``Q + SQ + NQ + VH``.

    ``method="local"`` differentiates by stepping each snapshot forward and
    backward by ``fd_factor * traj.dt``; ``method="snapshots"`` uses the
    neighbouring snapshots (interior snapshots only).
    """
    if method not in ("local", "snapshots"):
        raise ParameterError(f"unknown method {method!r}")
    w = DiscreteWeight(profile, v=v, x0=x0, scale=scale)
    n = len(traj)
    if method == "snapshots":
        if n < 3:
            raise TooShortTrajectory(f"centered differences need 3 snapshots, got {n}")
        default = range(1, n - 1)
    else:
        if n < 1:
            raise TooShortTrajectory("empty trajectory")
        default = range(n)
    idx = list(default if indices is None else indices)
    if not idx:
        raise TooShortTrajectory("no snapshots selected")
    cols: dict[str, list[float]] = {k: [] for k in ("t", "H", "fd", "Q", "SQ", "NQ", "VH")}
    h = fd_factor * traj.dt
    for i in idx:
        state = traj.snapshot(i)
        if method == "local":
            fd = _local_derivative(traj, state, w, alpha, h)
        else:
            if not 0 < i < n - 1:
                raise TooShortTrajectory(f"snapshot {i} has no neighbours on both sides")
            hp = eval_functionals(traj.snapshot(i + 1), w, alpha)["H"]
            hm = eval_functionals(traj.snapshot(i - 1), w, alpha)["H"]
            fd = (hp - hm) / (traj.times[i + 1] - traj.times[i - 1])
        parts = eval_decomposition(state, w, alpha, traj.params)
        cols["t"].append(state.t)
        cols["H"].append(eval_functionals(state, w, alpha)["H"])
        cols["fd"].append(fd)
        for k in ("Q", "SQ", "NQ", "VH"):
            cols[k].append(parts[k])
    arr = {k: np.asarray(v_, dtype=float) for k, v_ in cols.items()}
    return VirialResidual(arr["t"], arr["H"], arr["fd"], arr["Q"], arr["SQ"], arr["NQ"], arr["VH"])
