"""Pseudospectral solver for the Hamiltonian abcd system on a periodic domain.

The inner loop integrates the system with unit smoothing coefficients,

    eta_t = -(1 - dx^2)^{-1} dx (a_t u_xx + u + u eta)
    u_t   = -(1 - dx^2)^{-1} dx (c_t eta_xx + eta + u^2 / 2),

with ``a_t = a/b`` and ``c_t = c/b``.  Runs in physical variables are wrapped
by the space-time dilation ``x -> x / sqrt(b)``, ``t -> t / sqrt(b)``.

Time stepping is classical RK4 on the Fourier coefficients.  Products are
formed in physical space and, by default, truncated with the two-thirds
rule; the initial state is truncated the same way so that the discrete
energy is conserved by the semi-discrete flow.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Union

import numpy as np
import scipy.fft as sfft

from .errors import ConfigError, IoFailure, NonFiniteState
from .params_core import NormParams, PhysParams, dilation_factor, normalize

__all__ = [
    "fft_workers",
    "Grid",
    "FieldPair",
    "SolverConfig",
    "SpectralSystem",
    "Trajectory",
    "rhs",
    "evolve",
    "evolve_physical",
    "linear_propagator",
    "energy",
    "gaussian_state",
    "state_from_arrays",
]


def fft_workers() -> int:
    """Thread count for FFTs, capped by ``ABCD_LAB_THREADS`` (default 1)."""
    raw = os.environ.get("ABCD_LAB_THREADS", "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError(f"ABCD_LAB_THREADS must be an integer, got {raw!r}") from exc
    return max(1, n)


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on ``[-L/2, L/2)`` with ``n`` points."""

    n_points: int
    length: float

    def __post_init__(self) -> None:
        n = self.n_points
        if n < 16 or n & (n - 1):
            raise ConfigError(f"n_points must be a power of two >= 16, got {n}")
        if not (self.length > 0 and math.isfinite(self.length)):
            raise ConfigError(f"length must be positive, got {self.length}")

    @property
    def dx(self) -> float:
        return self.length / self.n_points

    @property
    def x(self) -> np.ndarray:
        return -0.5 * self.length + self.dx * np.arange(self.n_points)

    @property
    def wavenumbers(self) -> np.ndarray:
        """Non-negative wavenumbers of the real FFT, ``2 pi m / L``."""
        return 2 * np.pi / self.length * np.arange(self.n_points // 2 + 1)

    @property
    def odd_wavenumbers(self) -> np.ndarray:
        """Wavenumbers for odd-order derivatives, with the Nyquist mode zeroed."""
        k = self.wavenumbers.copy()
        k[-1] = 0.0
        return k

    @property
    def dealias_mask(self) -> np.ndarray:
        """Two-thirds rule: keep modes ``|m| <= n/3``."""
        return np.arange(self.n_points // 2 + 1) <= self.n_points / 3

    def rfft(self, f: np.ndarray) -> np.ndarray:
        return sfft.rfft(f, workers=fft_workers())

    def irfft(self, fh: np.ndarray) -> np.ndarray:
        return sfft.irfft(fh, n=self.n_points, workers=fft_workers())

    def derivative(self, f: np.ndarray, order: int = 1) -> np.ndarray:
        """Spectral derivative; the Nyquist mode is dropped for odd orders."""
        if order == 0:
            return np.array(f, dtype=float, copy=True)
        k = self.odd_wavenumbers if order % 2 else self.wavenumbers
        return self.irfft((1j * k) ** order * self.rfft(f))

    def helmholtz_inverse(self, f: np.ndarray) -> np.ndarray:
        """Solve ``g - g_xx = f`` by division by ``1 + k^2``."""
        k = self.wavenumbers
        return self.irfft(self.rfft(f) / (1 + k * k))

    def integrate(self, f: np.ndarray) -> float:
        """Rectangle rule, spectrally accurate for smooth periodic integrands."""
        return float(np.sum(f) * self.dx)

    def to_dict(self) -> dict:
        return {"n_points": self.n_points, "length": self.length}


@dataclass(frozen=True)
class FieldPair:
    """Real fields ``(u, eta)`` at time ``t`` on a grid."""

    u: np.ndarray
    eta: np.ndarray
    grid: Grid
    t: float = 0.0

    def __post_init__(self) -> None:
        n = self.grid.n_points
        for name in ("u", "eta"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (n,):
                raise ConfigError(f"{name} must have shape ({n},), got {arr.shape}")
            object.__setattr__(self, name, arr)

    @property
    def u_hat(self) -> np.ndarray:
        return self.grid.rfft(self.u)

    @property
    def eta_hat(self) -> np.ndarray:
        return self.grid.rfft(self.eta)

    def with_time(self, t: float) -> "FieldPair":
        return replace(self, t=t)

    def h1_norm_sq(self) -> float:
        g = self.grid
        ux, ex = g.derivative(self.u), g.derivative(self.eta)
        return g.integrate(self.u**2 + ux**2 + self.eta**2 + ex**2)


def state_from_arrays(u, eta, grid: Grid, t: float = 0.0) -> FieldPair:
    return FieldPair(np.asarray(u, float), np.asarray(eta, float), grid, t)


def gaussian_state(
    grid: Grid, amp: float, width: float, center: float = 0.0, eta_amp: float | None = None
) -> FieldPair:
    """``u = amp exp(-((x - center)/width)^2)``, ``eta`` likewise (default same amplitude)."""
    if width <= 0:
        raise ConfigError(f"width must be positive, got {width}")
    bump = np.exp(-(((grid.x - center) / width) ** 2))
    ea = amp if eta_amp is None else eta_amp
    return FieldPair(amp * bump, ea * bump, grid, 0.0)


@dataclass(frozen=True)
class SolverConfig:
    dt: float
    t_end: float
    dealias: bool = True
    stride: int = 1
    nonlinear: bool = True

    def __post_init__(self) -> None:
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if not (self.t_end >= 0 and math.isfinite(self.t_end)):
            raise ConfigError(f"t_end must be non-negative, got {self.t_end}")
        if self.stride < 1:
            raise ConfigError(f"stride must be >= 1, got {self.stride}")

    @property
    def n_steps(self) -> int:
        ratio = self.t_end / self.dt
        steps = round(ratio)
        if abs(steps - ratio) > 1e-9 * max(1.0, ratio):
            raise ConfigError(f"t_end / dt = {ratio} is not an integer")
        return int(steps)

    def check_grid(self, grid: Grid) -> None:
        if self.dt > 0.5 * grid.dx:
            raise ConfigError(f"dt = {self.dt} exceeds 0.5 dx = {0.5 * grid.dx}")


class SpectralSystem:
    """Fourier symbols of the system with coefficients ``(a, c)`` and smoothing ``s``.

    The normalized system is ``s = 1``; passing the physical ``(a, c, b)``
    integrates the undilated equations directly, which serves as an
    independent check of the rescaling.
    """

    def __init__(self, grid: Grid, a: float, c: float, smoothing: float = 1.0,
                 dealias: bool = True, nonlinear: bool = True):
        self.grid = grid
        self.a, self.c, self.smoothing = float(a), float(c), float(smoothing)
        self.dealias = dealias
        self.nonlinear = nonlinear
        k = grid.wavenumbers
        self.k = k
        self.prefactor = -1j * grid.odd_wavenumbers / (1 + self.smoothing * k * k)
        self.lin_u = 1 - self.a * k * k  # multiplies u_hat in the eta equation
        self.lin_eta = 1 - self.c * k * k  # multiplies eta_hat in the u equation
        self.mask = grid.dealias_mask if dealias else np.ones(k.shape, dtype=bool)

    @classmethod
    def normalized(cls, grid: Grid, p: NormParams, **kw) -> "SpectralSystem":
        return cls(grid, float(p.a_tilde), float(p.c_tilde), 1.0, **kw)

    def project(self, fh: np.ndarray) -> np.ndarray:
        return np.where(self.mask, fh, 0.0)

    def rhs_hat(self, uh: np.ndarray, eh: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        deta = self.lin_u * uh
        du = self.lin_eta * eh
        if self.nonlinear:
            g = self.grid
            u, eta = g.irfft(uh), g.irfft(eh)
            deta = deta + self.project(g.rfft(u * eta))
            du = du + self.project(g.rfft(0.5 * u * u))
        return self.prefactor * du, self.prefactor * deta

    def rk4_step(self, uh, eh, dt):
        k1u, k1e = self.rhs_hat(uh, eh)
        k2u, k2e = self.rhs_hat(uh + 0.5 * dt * k1u, eh + 0.5 * dt * k1e)
        k3u, k3e = self.rhs_hat(uh + 0.5 * dt * k2u, eh + 0.5 * dt * k2e)
        k4u, k4e = self.rhs_hat(uh + dt * k3u, eh + dt * k3e)
        uh = uh + dt / 6 * (k1u + 2 * k2u + 2 * k3u + k4u)
        eh = eh + dt / 6 * (k1e + 2 * k2e + 2 * k3e + k4e)
        return uh, eh

    def evolve_hat(self, uh, eh, dt: float, n_steps: int, stride: int):
        """Yield ``(step, uh, eh)`` every ``stride`` steps, starting at step 0."""
        yield 0, uh, eh
        for step in range(1, n_steps + 1):
            uh, eh = self.rk4_step(uh, eh, dt)
            if step % stride == 0 or step == n_steps:
                if not (np.all(np.isfinite(uh)) and np.all(np.isfinite(eh))):
                    raise NonFiniteState(f"non-finite state at step {step}")
                yield step, uh, eh


@dataclass
class Trajectory:
    """Snapshots of a run: ``u[i]`` and ``eta[i]`` at ``times[i]``."""

    grid: Grid
    times: np.ndarray
    u: np.ndarray
    eta: np.ndarray
    params: NormParams
    dt: float
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.times)

    def snapshot(self, i: int) -> FieldPair:
        return FieldPair(self.u[i], self.eta[i], self.grid, float(self.times[i]))

    def __iter__(self):
        for i in range(len(self)):
            yield self.snapshot(i)

    def final(self) -> FieldPair:
        return self.snapshot(len(self) - 1)

    def time_reversed(self) -> "Trajectory":
        """The reversed run ``(u, eta, t) -> (-u, eta, -t)``, reindexed forward."""
        t_end = self.times[-1]
        return Trajectory(
            self.grid, (t_end - self.times)[::-1].copy(), -self.u[::-1].copy(),
            self.eta[::-1].copy(), self.params, self.dt, dict(self.meta),
        )

    # --- persistence ------------------------------------------------------

    def _header(self) -> dict:
        return {
            "grid": self.grid.to_dict(),
            "a_tilde": float(self.params.a_tilde),
            "c_tilde": float(self.params.c_tilde),
            "dt": self.dt,
            "meta": self.meta,
        }

    def save(self, path: Union[str, Path]) -> None:
        path = Path(path)
        try:
            if path.suffix == ".csv":
                with path.open("w", newline="\n") as fh:
                    fh.write("# " + json.dumps(self._header(), sort_keys=True) + "\n")
                    fh.write("t,x,u,eta\n")
                    x = self.grid.x.tolist()
                    for i, t in enumerate(self.times.tolist()):
                        for xj, uj, ej in zip(x, self.u[i].tolist(), self.eta[i].tolist()):
                            fh.write(f"{t!r},{xj!r},{uj!r},{ej!r}\n")
            else:
                with path.open("wb") as fh:
                    np.savez(
                        fh, times=self.times, u=self.u, eta=self.eta,
                        header=np.array(json.dumps(self._header(), sort_keys=True)),
                    )
        except OSError as exc:
            raise IoFailure(f"cannot write trajectory to {path}: {exc}") from exc

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Trajectory":
        path = Path(path)
        try:
            if path.suffix == ".csv":
                with path.open() as fh:
                    first = fh.readline()
                    if not first.startswith("# "):
                        raise IoFailure(f"{path}: missing header line")
                    header = json.loads(first[2:])
                    data = np.loadtxt(fh, delimiter=",", skiprows=1, ndmin=2)
                n = header["grid"]["n_points"]
                times = data[::n, 0]
                u = data[:, 2].reshape(-1, n)
                eta = data[:, 3].reshape(-1, n)
            else:
                with np.load(path) as z:
                    header = json.loads(str(z["header"]))
                    times, u, eta = z["times"], z["u"], z["eta"]
        except (OSError, ValueError, KeyError) as exc:
            raise IoFailure(f"cannot read trajectory {path}: {exc}") from exc
        grid = Grid(**header["grid"])
        params = NormParams(header["a_tilde"], header["c_tilde"])
        return cls(grid, np.asarray(times), np.asarray(u), np.asarray(eta), params,
                   float(header["dt"]), header.get("meta", {}))


# --- public operations ---------------------------------------------------------


def rhs(state: FieldPair, p: NormParams, dealias: bool = True, nonlinear: bool = True) -> FieldPair:
    """Time derivative ``(u_t, eta_t)`` of the normalized system."""
    sysm = SpectralSystem.normalized(state.grid, p, dealias=dealias, nonlinear=nonlinear)
    du, de = sysm.rhs_hat(state.u_hat, state.eta_hat)
    g = state.grid
    return FieldPair(g.irfft(du), g.irfft(de), g, state.t)


def evolve(init: FieldPair, p: NormParams, cfg: SolverConfig) -> Trajectory:
    """RK4 integration from ``init.t`` to ``init.t + cfg.t_end``."""
    grid = init.grid
    cfg.check_grid(grid)
    n_steps = cfg.n_steps
    sysm = SpectralSystem.normalized(grid, p, dealias=cfg.dealias, nonlinear=cfg.nonlinear)
    uh, eh = sysm.project(init.u_hat), sysm.project(init.eta_hat)
    return _collect(sysm, uh, eh, init.t, cfg, n_steps, p)


def _collect(sysm: SpectralSystem, uh, eh, t0: float, cfg: SolverConfig, n_steps: int,
             p: NormParams) -> Trajectory:
    g = sysm.grid
    times, us, etas = [], [], []
    for step, uh_s, eh_s in sysm.evolve_hat(uh, eh, cfg.dt, n_steps, cfg.stride):
        times.append(t0 + step * cfg.dt)
        us.append(g.irfft(uh_s))
        etas.append(g.irfft(eh_s))
    meta = {"dealias": cfg.dealias, "nonlinear": cfg.nonlinear, "stride": cfg.stride}
    return Trajectory(g, np.array(times), np.array(us), np.array(etas), p, cfg.dt, meta)


def evolve_physical(init: FieldPair, pp: PhysParams, cfg: SolverConfig) -> Trajectory:
    """Evolve data given in physical variables through the normalized system.

    The grid length and all times are divided by ``sqrt(b)`` going in and
    multiplied back coming out; field values are unchanged by the dilation.
    """
    s = dilation_factor(pp.b)
    g_phys = init.grid
    g_norm = Grid(g_phys.n_points, g_phys.length / s)
    norm_init = FieldPair(init.u, init.eta, g_norm, init.t / s)
    norm_cfg = replace(cfg, dt=cfg.dt / s, t_end=cfg.t_end / s)
    traj = evolve(norm_init, normalize(pp), norm_cfg)
    traj.grid = g_phys
    traj.times = traj.times * s
    traj.dt = cfg.dt
    traj.meta["physical_b"] = float(pp.b)
    return traj


def linear_propagator(state: FieldPair, p: NormParams, t: float) -> FieldPair:
    """Exact evolution of the linearized system by per-mode rotation."""
    g = state.grid
    k = g.wavenumbers
    kk = g.odd_wavenumbers
    alpha = kk * (1 - float(p.a_tilde) * k * k) / (1 + k * k)
    beta = kk * (1 - float(p.c_tilde) * k * k) / (1 + k * k)
    w = np.sqrt(alpha * beta)
    cos = np.cos(w * t)
    sinc_t = t * np.sinc(w * t / np.pi)  # sin(w t) / w, finite at w = 0
    uh, eh = state.u_hat, state.eta_hat
    eh_t = cos * eh - 1j * alpha * sinc_t * uh
    uh_t = cos * uh - 1j * beta * sinc_t * eh
    return FieldPair(g.irfft(uh_t), g.irfft(eh_t), g, state.t + t)


def energy(state: FieldPair, p: NormParams) -> float:
    """Conserved energy ``1/2 int(-a_t u_x^2 - c_t eta_x^2 + u^2 + eta^2 + u^2 eta)``."""
    g = state.grid
    u, eta = state.u, state.eta
    ux, ex = g.derivative(u), g.derivative(eta)
    dens = -float(p.a_tilde) * ux**2 - float(p.c_tilde) * ex**2 + u**2 + eta**2 + u**2 * eta
    return 0.5 * g.integrate(dens)
