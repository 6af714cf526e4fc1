"""Virial functionals, their coefficient families and positivity certificates.

The functionals are evaluated on the normalized system (unit smoothing), with
``a_t = a/b`` and ``c_t = c/b`` in every coefficient.  For a weight
``phi((x - x0 - v t)/lam)`` write ``y`` for the rescaled variable; then

    I = int phi(y) (u eta + u_x eta_x),      J = (1/lam) int phi'(y) eta u_x,
    H = I + alpha J,

and ``dH/dt = Q + SQ + NQ + VH`` with the quadratic, lower-order, cubic and
moving-weight parts implemented below.  Every ``n``-th ``x``-derivative of the
weight carries a factor ``lam**-n``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import EpsOutOfRange, ParameterError, WeightTouchesBoundary
from .params_core import NormParams, PhysParams
from .region_atlas import REFINED_BREAKPOINT
from .spectral_solver import FieldPair, Grid

__all__ = [
    "VirialCoeffs",
    "StarCoeffs",
    "SosWitness",
    "PositivityCertificate",
    "DiscreteWeight",
    "PROFILES",
    "lambda_law",
    "lambda_law_prime",
    "quad_coeffs",
    "primed_coeffs",
    "star_coeffs",
    "sos_r0",
    "sos_poly",
    "sos_certificate",
    "positivity_certificate",
    "helmholtz_solve",
    "eval_functionals",
    "eval_decomposition",
    "q_canonical",
    "q_tilde",
    "exact_dH_dt",
]

Params = Union[PhysParams, NormParams]


def _tilde(p: Params) -> tuple[float, float]:
    if isinstance(p, NormParams):
        return float(p.a_tilde), float(p.c_tilde)
    return float(p.a) / float(p.b), float(p.c) / float(p.b)


# --- coefficient families -----------------------------------------------------


@dataclass(frozen=True)
class VirialCoeffs:
    """Canonical-variable coefficients of the quadratic form ``Q``.

    ``A*`` multiply ``f, f_x, f_xx, f_xxx`` squared against ``phi'``, ``B*`` do
    the same for ``g``, and the ``D`` block multiplies ``f^2, f_x^2, g^2, g_x^2``
    against ``phi'''``.
    """

    A1: float
    A2: float
    A3: float
    A4: float
    B1: float
    B2: float
    B3: float
    B4: float
    D11: float
    D12: float
    D21: float
    D22: float
    alpha: float

    @property
    def a_block(self) -> tuple[float, float, float, float]:
        return self.A1, self.A2, self.A3, self.A4

    @property
    def b_block(self) -> tuple[float, float, float, float]:
        return self.B1, self.B2, self.B3, self.B4


def _linear_coeffs(at: float, ct: float) -> dict[str, tuple[float, float]]:
    """Each coefficient as ``(slope, intercept)`` in alpha."""
    return {
        "A1": (0.0, 0.5),
        "A2": (-1.0, -1.5 * at),
        "A3": (-(1 - at), -2 * at - 0.5),
        "A4": (at, -0.5 * at),
        "B1": (0.0, 0.5),
        "B2": (1.0, -1.5 * ct),
        "B3": (1 - ct, -2 * ct - 0.5),
        "B4": (-ct, -0.5 * ct),
    }


def quad_coeffs(p: Params, alpha: float) -> VirialCoeffs:
    at, ct = _tilde(p)
    lin = {k: s * alpha + i for k, (s, i) in _linear_coeffs(at, ct).items()}
    return VirialCoeffs(
        **lin,
        D11=-0.5 * (1 + at) * (-alpha - 1) - 0.5,
        D12=-at * (alpha - 0.5),
        D21=-0.5 * (1 + ct) * (alpha - 1) - 0.5,
        D22=-ct * (-alpha - 0.5),
        alpha=alpha,
    )


#: Shift from the plain coefficients to the primed ones: the block
#: ``(9, 3, -5, 1)/18`` is split off each of ``f`` and ``g``.
_PRIME_SHIFT = {"2": 1 / 6, "3": -5 / 18, "4": 1 / 18}


def _primed_linear(at: float, ct: float) -> dict[str, tuple[float, float]]:
    out = {}
    for key, (s, i) in _linear_coeffs(at, ct).items():
        if key[1] == "1":
            continue
        out[key + "'"] = (s, i - _PRIME_SHIFT[key[1]])
    return out


def primed_coeffs(p: Params, alpha: float) -> dict[str, float]:
    """``A2'..A4'`` and ``B2'..B4'`` used by the refined positivity lemmas."""
    at, ct = _tilde(p)
    return {k: s * alpha + i for k, (s, i) in _primed_linear(at, ct).items()}


@dataclass(frozen=True)
class StarCoeffs:
    A1s: float
    A2s: float
    A3s: float
    A4s: float
    B1s: float
    B2s: float
    B3s: float
    B4s: float
    v0_plus: float
    alpha: float

    @property
    def a_block(self) -> tuple[float, float, float, float]:
        return self.A1s, self.A2s, self.A3s, self.A4s

    @property
    def b_block(self) -> tuple[float, float, float, float]:
        return self.B1s, self.B2s, self.B3s, self.B4s


#: The block split off the quadratic form, scaled by ``v0+``.
LEADING_BLOCK = (0.5, 1.5, 1.5, 0.5)


def star_coeffs(p: PhysParams, alpha: float, v0: float) -> StarCoeffs:
    """Remainder after removing ``v0+`` times the leading block, in ``(nu, b)``."""
    nu, b = float(p.nu), float(p.b)
    vp = (1 + v0) / 2
    k = 1 - vp
    m = 3 * nu - 2
    return StarCoeffs(
        A1s=k / 2,
        A2s=3 * k / 2 + m / (4 * b) - alpha,
        A3s=3 * k / 2 + m / (3 * b) - (2 + m / (6 * b)) * alpha,
        A4s=k / 2 + m / (12 * b) - (1 + m / (6 * b)) * alpha,
        B1s=k / 2,
        B2s=3 * k / 2 - 3 * nu / (4 * b) + alpha,
        B3s=3 * k / 2 - nu / b + (2 - nu / (2 * b)) * alpha,
        B4s=k / 2 - nu / (4 * b) + (1 - nu / (2 * b)) * alpha,
        v0_plus=vp,
        alpha=alpha,
    )


# --- sum-of-squares certificate -----------------------------------------------


def sos_poly(r: float) -> float:
    """``(((1 - r)^2 + 5)/2)^2 + 5r - 9``."""
    return (((1 - r) ** 2 + 5) / 2) ** 2 + 5 * r - 9


def sos_r0() -> float:
    """Positive root of ``sos_poly`` from the cubic formula."""
    s = (2 * math.sqrt(571) / (3 * math.sqrt(3)) - 170 / 27) ** (1 / 3)
    return s - 32 / (9 * s) + 4 / 3


@dataclass(frozen=True)
class SosWitness:
    """Coefficients ``(a, b, c, d)`` with

    ``int (a w + b w_x + c w_xx + d w_xxx)^2
      = int a^2 w^2 + (b^2 - 2ac) w_x^2 + (c^2 - 2bd) w_xx^2 + d^2 w_xxx^2``

    on a periodic domain, matched against ``target = (c0, c1, c2, c3)``.
    """

    a_hat: float
    b_hat: float
    c_hat: float
    d_hat: float
    target: tuple[float, float, float, float]
    eps: float
    delta: float

    @property
    def expanded(self) -> tuple[float, float, float, float]:
        a, b, c, d = self.a_hat, self.b_hat, self.c_hat, self.d_hat
        return a * a, b * b - 2 * a * c, c * c - 2 * b * d, d * d

    def quadratic_form(self, w: np.ndarray, grid: Grid) -> float:
        derivs = [w] + [grid.derivative(w, k) for k in (1, 2, 3)]
        return sum(c * grid.integrate(dw**2) for c, dw in zip(self.target, derivs))

    def square_form(self, w: np.ndarray, grid: Grid) -> float:
        derivs = [w] + [grid.derivative(w, k) for k in (1, 2, 3)]
        comb = sum(c * dw for c, dw in zip((self.a_hat, self.b_hat, self.c_hat, self.d_hat), derivs))
        return grid.integrate(comb**2)


def sos_certificate(eps: float | None = None) -> SosWitness:
    """Witness for ``(9 - delta) w^2 + (3 + eps) w_x^2 - 5 w_xx^2 + w_xxx^2 >= 0``."""
    r0 = sos_r0()
    if eps is None:
        eps = r0 / 2
    if not 0 < eps < r0:
        raise EpsOutOfRange(f"eps = {eps} must lie in (0, {r0})")
    a_hat = 3 + sos_poly(eps) / (2 * (1 - eps))
    delta = 9 - a_hat**2
    return SosWitness(
        a_hat=a_hat,
        b_hat=((1 - eps) ** 2 + 5) / 2,
        c_hat=1 - eps,
        d_hat=1.0,
        target=(9 - delta, 3 + eps, -5.0, 1.0),
        eps=eps,
        delta=delta,
    )


# --- choice of alpha --------------------------------------------------------------


@dataclass(frozen=True)
class PositivityCertificate:
    lemma: str  # DispersionLike, Pos1..Pos4 or None
    alpha: float | None
    interval: tuple[float, float] | None = None


def _open_interval(constraints: list[tuple[float, float]]) -> tuple[float, float] | None:
    """Intersect ``slope * alpha + intercept > 0`` over all constraints."""
    lo, hi = -math.inf, math.inf
    for s, i in constraints:
        if s > 0:
            lo = max(lo, -i / s)
        elif s < 0:
            hi = min(hi, -i / s)
        elif not i > 0:
            return None
    if lo < hi:
        return lo, hi
    return None


def _interval_midpoint(lo: float, hi: float) -> float:
    if math.isinf(lo) and math.isinf(hi):
        return 0.0
    if math.isinf(lo):
        return hi - 1.0
    if math.isinf(hi):
        return lo + 1.0
    return 0.5 * (lo + hi)


def _lemma_constraints(at: float, ct: float) -> dict[str, list[tuple[float, float]]]:
    plain = _linear_coeffs(at, ct)
    primed = _primed_linear(at, ct)
    a_plain = [plain[k] for k in ("A2", "A3", "A4")]
    b_plain = [plain[k] for k in ("B2", "B3", "B4")]
    a_primed = [primed[k] for k in ("A2'", "A3'", "A4'")]
    b_primed = [primed[k] for k in ("B2'", "B3'", "B4'")]
    return {
        "DispersionLike": a_plain + b_plain,
        "Pos1": a_primed + b_primed,
        "Pos2": a_primed + b_primed,
        "Pos3": a_plain + b_primed,
        "Pos4": a_primed + b_plain,
    }


def positivity_certificate(p: Params) -> PositivityCertificate:
    """Find which positivity lemma applies and an admissible alpha.

    Each lemma asks for a set of coefficients, linear in alpha, to be
    positive; the returned alpha is the midpoint of the resulting open
    interval.  Lemmas are tried in the order: all plain coefficients, then
    the variant suited to the sub-range of the smaller normalized coefficient.
    """
    at, ct = _tilde(p)
    cons = _lemma_constraints(at, ct)
    order = ["DispersionLike"]
    if ct <= at:
        order += ["Pos3", "Pos1"] if ct < REFINED_BREAKPOINT else ["Pos1", "Pos3"]
    if at <= ct:
        order += ["Pos4", "Pos2"] if at < REFINED_BREAKPOINT else ["Pos2", "Pos4"]
    for lemma in order:
        iv = _open_interval(cons[lemma])
        if iv is not None:
            return PositivityCertificate(lemma, _interval_midpoint(*iv), iv)
    return PositivityCertificate("None", None, None)


# --- weights ------------------------------------------------------------------------


def _tanh_derivs(y):
    T = np.tanh(y)
    s = 1 - T * T
    return T, s, -2 * s * T, 4 * s * T * T - 2 * s * s


def _sech2_derivs(y):
    T = np.tanh(y)
    s = 1 - T * T
    return s, -2 * s * T, 4 * s * T * T - 2 * s * s, -8 * s * T**3 + 16 * s * s * T


def _sech4_derivs(y):
    T = np.tanh(y)
    s = 1 - T * T
    return (
        s * s,
        -4 * s * s * T,
        16 * s * s * T * T - 4 * s**3,
        -64 * s * s * T**3 + 56 * s**3 * T,
    )


def _half_tanh(sign: float) -> Callable:
    def derivs(y):
        T, d1, d2, d3 = _tanh_derivs(y)
        return 0.5 * (1 + sign * T), 0.5 * sign * d1, 0.5 * sign * d2, 0.5 * sign * d3

    return derivs


#: profile name -> function returning (phi, phi', phi'', phi''') at y
PROFILES: dict[str, Callable] = {
    "tanh": _tanh_derivs,
    "sech2": _sech2_derivs,
    "sech4": _sech4_derivs,
    "half_one_plus_tanh": _half_tanh(1.0),
    "half_one_minus_tanh": _half_tanh(-1.0),
}


def lambda_law(t: float) -> float:
    """Window scale ``t / log(t)^2`` (defined for ``t > 1``)."""
    if not t > 1:
        raise ParameterError(f"scale law needs t > 1, got {t}")
    return t / math.log(t) ** 2


def lambda_law_prime(t: float) -> float:
    if not t > 1:
        raise ParameterError(f"scale law needs t > 1, got {t}")
    lg = math.log(t)
    return (1 - 2 / lg) / lg**2


@dataclass(frozen=True)
class DiscreteWeight:
    """Weight ``phi((x - x0 - v t) / scale(t))``.

    ``scale=None`` selects the law ``t / log(t)^2``; a number fixes the scale.
    """

    profile: str = "tanh"
    v: float = 0.0
    x0: float = 0.0
    scale: float | None = None

    def __post_init__(self) -> None:
        if self.profile not in PROFILES:
            raise ParameterError(f"unknown weight profile {self.profile!r}")
        if self.scale is not None and not self.scale > 0:
            raise ParameterError(f"scale must be positive, got {self.scale}")

    def lam(self, t: float) -> float:
        return lambda_law(t) if self.scale is None else float(self.scale)

    def lam_prime(self, t: float) -> float:
        return lambda_law_prime(t) if self.scale is None else 0.0

    def centre(self, t: float) -> float:
        return self.x0 + self.v * t

    def y(self, x: np.ndarray, t: float) -> np.ndarray:
        return (x - self.centre(t)) / self.lam(t)

    def profile_values(self, x: np.ndarray, t: float):
        """``(phi, phi', phi'', phi''')`` as functions of ``y`` (no scale factors)."""
        return PROFILES[self.profile](self.y(x, t))

    def x_derivatives(self, x: np.ndarray, t: float):
        """``(phi, d_x phi, d_x^2 phi, d_x^3 phi)`` including the ``lam**-n`` factors."""
        lam = self.lam(t)
        vals = self.profile_values(x, t)
        return tuple(v / lam**n for n, v in enumerate(vals))

    def check_grid(self, grid: Grid, t: float, margin: float = 10.0) -> None:
        """Warn when the centre is within ``margin`` scale lengths of the seam."""
        c = self.centre(t)
        if abs(c) > 0.5 * grid.length - margin * self.lam(t):
            warnings.warn(
                f"weight centre {c:.4g} is within {margin} scale lengths of the periodic seam",
                WeightTouchesBoundary,
                stacklevel=3,
            )


# --- functionals and decomposition ---------------------------------------------


def helmholtz_solve(u: np.ndarray, grid: Grid) -> np.ndarray:
    """Canonical variable ``f`` with ``f - f_xx = u``."""
    return grid.helmholtz_inverse(u)


def eval_functionals(state: FieldPair, w: DiscreteWeight, alpha: float, t: float | None = None
                     ) -> dict[str, float]:
    g = state.grid
    t = state.t if t is None else t
    w.check_grid(g, t)
    phi, dphi, _, _ = w.x_derivatives(g.x, t)
    u, eta = state.u, state.eta
    ux, ex = g.derivative(u), g.derivative(eta)
    I = g.integrate(phi * (u * eta + ux * ex))
    J = g.integrate(dphi * eta * ux)
    return {"I": I, "J": J, "H": I + alpha * J}


def eval_decomposition(state: FieldPair, w: DiscreteWeight, alpha: float, p: Params,
                       t: float | None = None) -> dict[str, float]:
    """The four parts of ``dH/dt``, each by quadrature on the grid."""
    g = state.grid
    t = state.t if t is None else t
    w.check_grid(g, t)
    at, ct = _tilde(p)
    x = g.x
    lam, dlam = w.lam(t), w.lam_prime(t)
    _, w1, w2, w3 = w.x_derivatives(x, t)
    y = w.y(x, t)
    _, d1, d2, _ = w.profile_values(x, t)

    u, eta = state.u, state.eta
    ux, ex = g.derivative(u), g.derivative(eta)
    Linv = g.helmholtz_inverse
    Lu, Le = Linv(u), Linv(eta)
    integ = g.integrate

    Q = (
        ((1 + ct) * (alpha - 1) + 0.5) * integ(w1 * eta**2)
        + ct * (-alpha - 0.5) * integ(w1 * ex**2)
        + ((1 + at) * (-alpha - 1) + 0.5) * integ(w1 * u**2)
        + at * (alpha - 0.5) * integ(w1 * ux**2)
        + (1 + ct) * (1 - alpha) * integ(w1 * eta * Le)
        + (1 + at) * (alpha + 1) * integ(w1 * u * Lu)
    )
    # lower-order quadratic terms; they all come from the variation of J
    SQ = alpha * (
        (1 + at) * integ(w2 * u * Linv(ux))
        + 0.5 * ct * integ(w3 * eta**2)
    )
    ue = u * eta
    NQ = (
        0.5 * (-alpha - 1) * integ(w1 * u**2 * eta)
        + 0.5 * (1 - alpha) * integ(w1 * eta * Linv(u**2))
        + (alpha + 1) * integ(w1 * u * Linv(ue))
        + alpha * integ(w2 * u * Linv(g.derivative(ue)))
    )
    dens_i = ue + ux * ex
    dens_j = eta * ux
    VH = (
        -(w.v / lam) * integ(d1 * dens_i)
        - (dlam / lam) * integ(y * d1 * dens_i)
        + alpha * (
            -(dlam / lam**2) * integ(d1 * dens_j)
            - (w.v / lam**2) * integ(d2 * dens_j)
            - (dlam / lam**2) * integ(y * d2 * dens_j)
        )
    )
    return {"Q": Q, "SQ": SQ, "NQ": NQ, "VH": VH}


def _canonical_derivs(f: np.ndarray, grid: Grid) -> list[np.ndarray]:
    return [f] + [grid.derivative(f, k) for k in (1, 2, 3)]


def q_canonical(state: FieldPair, w: DiscreteWeight, alpha: float, p: Params,
                t: float | None = None) -> float:
    """``Q`` through the canonical variables ``f, g`` and the coefficient families."""
    g = state.grid
    t = state.t if t is None else t
    _, w1, _, w3 = w.x_derivatives(g.x, t)
    co = quad_coeffs(p, alpha)
    fd = _canonical_derivs(helmholtz_solve(state.u, g), g)
    gd = _canonical_derivs(helmholtz_solve(state.eta, g), g)
    main = sum(c * g.integrate(w1 * d**2) for c, d in zip(co.a_block, fd))
    main += sum(c * g.integrate(w1 * d**2) for c, d in zip(co.b_block, gd))
    low = g.integrate(w3 * (co.D11 * fd[0] ** 2 + co.D12 * fd[1] ** 2
                            + co.D21 * gd[0] ** 2 + co.D22 * gd[1] ** 2))
    return main + low


def q_tilde(state: FieldPair, w: DiscreteWeight, alpha: float, p: Params,
            t: float | None = None) -> tuple[float, float]:
    """Leading part of ``Q`` in the variables ``sqrt(phi') f``, ``sqrt(phi') g``.

    Returns ``(value, mass)`` where ``mass`` is the sum of the squared
    ``L^2`` norms of the weighted variables and their first three
    derivatives, scaled like the value; the gap to ``Q`` is expected to be
    of order ``mass / lam``.
    """
    g = state.grid
    t = state.t if t is None else t
    lam = w.lam(t)
    _, d1, _, _ = w.profile_values(g.x, t)
    root = np.sqrt(np.clip(d1, 0.0, None))
    co = quad_coeffs(p, alpha)
    fd = _canonical_derivs(root * helmholtz_solve(state.u, g), g)
    gd = _canonical_derivs(root * helmholtz_solve(state.eta, g), g)
    value = sum(c * g.integrate(d**2) for c, d in zip(co.a_block, fd))
    value += sum(c * g.integrate(d**2) for c, d in zip(co.b_block, gd))
    mass = sum(g.integrate(d**2) for d in fd + gd)
    return value / lam, mass / lam


def exact_dH_dt(state: FieldPair, w: DiscreteWeight, alpha: float, p: Params,
                t: float | None = None, dealias: bool = True) -> float:
    """``dH/dt`` from the equations of motion, as an independent reference.

    Uses the solver's right-hand side for ``(u_t, eta_t)`` plus the explicit
    time derivative of the weight.
    """
    from .spectral_solver import SpectralSystem

    g = state.grid
    t = state.t if t is None else t
    at, ct = _tilde(p)
    sysm = SpectralSystem(g, at, ct, 1.0, dealias=dealias)
    du_h, de_h = sysm.rhs_hat(state.u_hat, state.eta_hat)
    ut, et = g.irfft(du_h), g.irfft(de_h)
    u, eta = state.u, state.eta
    ux, ex = g.derivative(u), g.derivative(eta)
    utx, etx = g.derivative(ut), g.derivative(et)
    phi, w1, _, _ = w.x_derivatives(g.x, t)
    lam, dlam = w.lam(t), w.lam_prime(t)
    y = w.y(g.x, t)
    _, d1, d2, _ = w.profile_values(g.x, t)
    # time derivatives of phi(y) and of phi'(y)/lam
    phi_t = -(w.v / lam + y * dlam / lam) * d1
    w1_t = -(dlam / lam**2) * d1 - (w.v / lam**2 + y * dlam / lam**2) * d2
    dI = g.integrate(phi_t * (u * eta + ux * ex) + phi * (ut * eta + u * et + utx * ex + ux * etx))
    dJ = g.integrate(w1_t * eta * ux + w1 * (et * ux + eta * utx))
    return dI + alpha * dJ
