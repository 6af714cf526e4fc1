"""Dispersion relation and group velocity of the linearized abcd system.

Plane waves ``exp(i(kx - w t))`` of the linear system propagate with

    w(k) = |k| sqrt(1 - a k^2) sqrt(1 - c k^2) / (1 + b k^2),

and the group velocity ``w'(k)`` has the sextic numerator
``abc k^6 + 3ac k^4 - (b + 2a + 2c) k^2 + 1``.  On the symmetric line
``a = c`` the group velocity is a rational function of ``mu = b k^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import NotOnAcLine
from .params_core import PhysParams

__all__ = [
    "WaveSample",
    "omega",
    "group_velocity",
    "amplitude",
    "amplitude_alt",
    "sample_waves",
    "pmu",
    "pmu_b_tilde",
    "PwRange",
    "pw_range",
    "pw_range_ac",
    "gv_numerator",
    "zero_gv_wavenumbers",
]


def _coeffs(p: PhysParams) -> tuple[float, float, float]:
    return float(p.a), float(p.b), float(p.c)


def omega(p: PhysParams, k):
    """Non-negative branch of the dispersion relation (scalar or array)."""
    a, b, c = _coeffs(p)
    k = np.asarray(k, dtype=float)
    k2 = k * k
    w = np.abs(k) * np.sqrt(1 - a * k2) * np.sqrt(1 - c * k2) / (1 + b * k2)
    return w if w.ndim else float(w)


def gv_numerator(p: PhysParams, k):
    a, b, c = _coeffs(p)
    k2 = np.asarray(k, dtype=float) ** 2
    return ((a * b * c * k2 + 3 * a * c) * k2 - (b + 2 * a + 2 * c)) * k2 + 1


def group_velocity(p: PhysParams, k):
    """Signed derivative ``dw/dk``; equal to 1 at ``k = 0``."""
    a, b, c = _coeffs(p)
    k = np.asarray(k, dtype=float)
    k2 = k * k
    denom = (1 + b * k2) ** 2 * np.sqrt(1 - a * k2) * np.sqrt(1 - c * k2)
    v = np.sign(k) * gv_numerator(p, k) / denom
    v = np.where(k == 0, 1.0, v)
    return v if v.ndim else float(v)


def amplitude(p: PhysParams, k):
    """Eta-to-u amplitude ratio ``k (1 - a k^2) / (w (1 + b k^2))``; 1 at ``k = 0``."""
    a, b, _ = _coeffs(p)
    k = np.asarray(k, dtype=float)
    w = np.asarray(omega(p, k))
    with np.errstate(invalid="ignore", divide="ignore"):
        A = np.abs(k) * (1 - a * k * k) / (w * (1 + b * k * k))
    A = np.where(k == 0, 1.0, A)
    return A if A.ndim else float(A)


def amplitude_alt(p: PhysParams, k):
    """Second expression of the amplitude, ``w (1 + b k^2) / (k (1 - c k^2))``."""
    _, b, c = _coeffs(p)
    k = np.asarray(k, dtype=float)
    w = np.asarray(omega(p, k))
    with np.errstate(invalid="ignore", divide="ignore"):
        A = w * (1 + b * k * k) / (np.abs(k) * (1 - c * k * k))
    A = np.where(k == 0, 1.0, A)
    return A if A.ndim else float(A)


@dataclass(frozen=True)
class WaveSample:
    k: np.ndarray
    omega: np.ndarray
    amplitude_A: np.ndarray
    group_velocity: np.ndarray


def sample_waves(p: PhysParams, k_max: float, samples: int) -> WaveSample:
    k = np.linspace(0.0, k_max, samples)
    return WaveSample(
        k=k,
        omega=np.asarray(omega(p, k)),
        amplitude_A=np.asarray(amplitude(p, k)),
        group_velocity=np.asarray(group_velocity(p, k)),
    )


# --- the symmetric line ---------------------------------------------------


def _require_ac(p: PhysParams) -> None:
    if not p.on_ac_line:
        raise NotOnAcLine(f"a = {p.a} and c = {p.c} differ")


def pmu_b_tilde(p: PhysParams) -> float:
    return 1 / (6 * float(p.b)) - 1


def pmu(p: PhysParams, mu):
    """Group velocity on ``a = c`` as a function of ``mu = b k^2 >= 0``.

    ``P(mu) = (1 + (-1 - 3 bt) mu - bt mu^2) / (1 + mu)^2`` with
    ``bt = 1/(6b) - 1``.
    """
    _require_ac(p)
    bt = pmu_b_tilde(p)
    mu = np.asarray(mu, dtype=float)
    val = (1 + (-1 - 3 * bt) * mu - bt * mu * mu) / (1 + mu) ** 2
    return val if val.ndim else float(val)


@dataclass(frozen=True)
class PwRange:
    v_min: float
    v_max: float
    k_at_min: float
    k_at_max: float


def pw_range_ac(p: PhysParams) -> PwRange:
    """Closed form on ``a = c``: minimum ``1 - 3/(16b)`` at ``mu = 3``, maximum 1 at 0."""
    _require_ac(p)
    b = float(p.b)
    return PwRange(v_min=1 - 3 / (16 * b), v_max=1.0, k_at_min=math.sqrt(3 / b), k_at_max=0.0)


def pw_range(p: PhysParams, samples: int = 4001) -> PwRange:
    """Extremes of the signed group velocity over ``k >= 0``.

    ``mu = b k^2`` is sampled log-uniformly on ``[1e-6, 1e6]`` (plus ``mu = 0``)
    and the best samples are refined with a bounded scalar search in
    ``log mu``.  The value at ``k -> infinity`` is included as a candidate.
    """
    b = float(p.b)
    log_mu = np.linspace(-6.0, 6.0, samples)
    k = np.sqrt(10.0 ** log_mu / b)
    v = np.asarray(group_velocity(p, k))

    def gv_of_log(s: float, sign: float) -> float:
        return sign * float(group_velocity(p, math.sqrt(10.0 ** s / b)))

    def refine(idx: int, sign: float) -> tuple[float, float]:
        lo = log_mu[max(idx - 1, 0)]
        hi = log_mu[min(idx + 1, samples - 1)]
        res = minimize_scalar(
            gv_of_log, bounds=(lo, hi), args=(sign,), method="bounded",
            options={"xatol": 1e-12},
        )
        s = float(res.x) if res.fun <= sign * v[idx] else float(log_mu[idx])
        return sign * gv_of_log(s, sign), math.sqrt(10.0 ** s / b)

    v_min, k_min = refine(int(np.argmin(v)), 1.0)
    v_max, k_max = refine(int(np.argmax(v)), -1.0)
    if 1.0 >= v_max:
        v_max, k_max = 1.0, 0.0
    if 1.0 < v_min:
        v_min, k_min = 1.0, 0.0
    a, c = float(p.a), float(p.c)
    v_inf = math.sqrt(a * c) / b  # limit of the group velocity as k -> infinity
    if v_inf < v_min:
        v_min, k_min = v_inf, math.inf
    if v_inf > v_max:
        v_max, k_max = v_inf, math.inf
    return PwRange(v_min=v_min, v_max=v_max, k_at_min=k_min, k_at_max=k_max)


# --- zero group velocity --------------------------------------------------


def _cubic_real_roots(A: float, B: float, C: float, D: float) -> list[tuple[float, int]]:
    """Real roots of ``A x^3 + B x^2 + C x + D`` (``A != 0``) with multiplicities.

    A discriminant within rounding of zero is snapped to the repeated-root
    formulas.
    """
    delta0 = B * B - 3 * A * C
    delta1 = 2 * B**3 - 9 * A * B * C + 27 * A * A * D
    disc = 18 * A * B * C * D - 4 * B**3 * D + B * B * C * C - 4 * A * C**3 - 27 * A * A * D * D
    scale = max(abs(B) ** 4, abs(A * C**3), abs(A * A * D * D), abs(B * B * C * C), 1e-300)
    if abs(disc) <= 1e-12 * scale:
        if abs(delta0) <= 1e-12 * max(B * B, abs(A * C), 1e-300):
            return [(-B / (3 * A), 3)]
        double = (9 * A * D - B * C) / (2 * delta0)
        simple = (4 * A * B * C - 9 * A * A * D - B**3) / (A * delta0)
        return sorted([(double, 2), (simple, 1)])
    if disc > 0:
        # three distinct real roots: trigonometric form
        p_ = (3 * A * C - B * B) / (3 * A * A)
        q_ = (2 * B**3 - 9 * A * B * C + 27 * A * A * D) / (27 * A**3)
        m = 2 * math.sqrt(-p_ / 3)
        arg = 3 * q_ / (p_ * m)
        theta = math.acos(max(-1.0, min(1.0, arg))) / 3
        shift = -B / (3 * A)
        return sorted((shift + m * math.cos(theta - 2 * math.pi * j / 3), 1) for j in range(3))
    # one real root: Cardano
    inner = math.sqrt(delta1 * delta1 - 4 * delta0**3)
    Cc = np.cbrt((delta1 + inner) / 2) if delta1 >= 0 else np.cbrt((delta1 - inner) / 2)
    Cc = float(Cc)
    return [(-(B + Cc + delta0 / Cc) / (3 * A), 1)]


def zero_gv_wavenumbers(p: PhysParams, tol: float = 1e-12) -> list[float]:
    """Positive wavenumbers where the group velocity vanishes.

    The numerator is a cubic in ``x = k^2``; its real roots are found in
    closed form, restricted to ``x > 0`` and polished by Newton steps.
    """
    a, b, c = _coeffs(p)
    A, B, C, D = a * b * c, 3 * a * c, -(b + 2 * a + 2 * c), 1.0
    # derivative chain: a repeated root of the cubic is a simple root of its
    # derivative, so Newton is run on the derivative of matching order
    chain = [
        (lambda x: ((A * x + B) * x + C) * x + D, lambda x: (3 * A * x + 2 * B) * x + C),
        (lambda x: (3 * A * x + 2 * B) * x + C, lambda x: 6 * A * x + 2 * B),
        (lambda x: 6 * A * x + 2 * B, lambda x: 6 * A),
    ]
    out: list[float] = []
    for x, mult in _cubic_real_roots(A, B, C, D):
        if not x > 0:
            continue
        f, df = chain[mult - 1]
        for _ in range(50):
            slope = df(x)
            if slope == 0:
                break
            step = f(x) / slope
            x -= step
            if abs(step) <= tol * max(1.0, abs(x)):
                break
        if x > 0:
            out.append(math.sqrt(x))
    out = sorted(out)
    merged: list[float] = []
    for k in out:
        if not merged or abs(k - merged[-1]) > 1e-9 * max(1.0, k):
            merged.append(k)
    return merged
