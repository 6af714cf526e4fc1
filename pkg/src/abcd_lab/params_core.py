"""Parameter validation and the coordinate systems of the abcd family.

Three views of the same Hamiltonian parameter set are provided:

* :class:`PhysParams` -- the physical quadruple ``(a, b, c, d)`` with ``d = b``;
* :class:`NuB` -- the two-parameter chart ``(nu, b)`` with
  ``a = -nu/2 + 1/3 - b`` and ``c = nu/2 - b``;
* :class:`NormParams` -- the ratios ``a/b`` and ``c/b`` used by the rescaled
  system in which the smoothing coefficients equal one.

All arithmetic is written with plain operators so that exact rationals
(:class:`fractions.Fraction`) pass through unchanged.  That matters on region
boundaries, where a rounded ``1/6 - b`` can land on either side of a strict
inequality.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real
from typing import Any, Mapping

from .errors import (
    BTooSmall,
    ConfigError,
    NotHamiltonian,
    OutsideR0,
    ParameterError,
    SignViolation,
    SumViolation,
    ThetaOutOfRange,
)

__all__ = [
    "PhysParams",
    "NuB",
    "NormParams",
    "validate_phys",
    "from_nu_b",
    "to_nu_b",
    "normalize",
    "denormalize",
    "a_equals_c_line",
    "in_r0",
    "params_from_config",
    "dilation_factor",
    "to_normalized_coordinates",
    "to_physical_coordinates",
    "STRUCTURAL_TOL",
]

#: Absolute tolerance for the structural identities ``d = b`` and the sum rule.
STRUCTURAL_TOL = 1e-12

ONE_SIXTH = Fraction(1, 6)
ONE_THIRD = Fraction(1, 3)
TWO_THIRDS = Fraction(2, 3)
HALF = Fraction(1, 2)


@dataclass(frozen=True)
class PhysParams:
    """Validated physical coefficients with ``d = b``.

    Instances are produced by :func:`validate_phys` (or the helpers built on
    it); constructing one directly skips validation.
    """

    a: Real
    b: Real
    c: Real
    d: Real
    theta: float

    @property
    def nu(self) -> Real:
        return 2 * (self.c + self.b)

    @property
    def a_tilde(self) -> Real:
        return self.a / self.b

    @property
    def c_tilde(self) -> Real:
        return self.c / self.b

    @property
    def on_ac_line(self) -> bool:
        return abs(self.a - self.c) <= STRUCTURAL_TOL

    def as_floats(self) -> tuple[float, float, float, float]:
        return float(self.a), float(self.b), float(self.c), float(self.d)

    def to_dict(self) -> dict[str, float]:
        return {
            "a": float(self.a),
            "b": float(self.b),
            "c": float(self.c),
            "d": float(self.d),
            "nu": float(self.nu),
            "theta": float(self.theta),
            "a_tilde": float(self.a_tilde),
            "c_tilde": float(self.c_tilde),
        }


@dataclass(frozen=True)
class NuB:
    """A point of the ``(nu, b)`` chart."""

    nu: Real
    b: Real


@dataclass(frozen=True)
class NormParams:
    """Coefficients of the rescaled system: ``a_tilde = a/b``, ``c_tilde = c/b``.

    The sum rule fixes ``b`` from the two ratios, ``a_tilde + c_tilde =
    1/(3b) - 2``, so the range checks can be carried out without it.
    """

    a_tilde: Real
    c_tilde: Real

    def __post_init__(self) -> None:
        at, ct = self.a_tilde, self.c_tilde
        if not (at < 0 and ct < 0):
            raise SignViolation(f"normalized coefficients must be negative, got ({at}, {ct})")
        if at + ct <= -2:
            raise ParameterError(f"a_tilde + c_tilde must exceed -2, got {at + ct}")
        if ct < -1:
            raise ParameterError(f"c_tilde must be >= -1, got {ct}")
        if at < -1 - 1 / (6 * self.b) - STRUCTURAL_TOL:
            raise ParameterError(f"a_tilde must be >= -1 - 1/(6b), got {at}")

    @property
    def b(self) -> Real:
        """The physical ``b`` implied by the sum rule."""
        return 1 / (3 * (self.a_tilde + self.c_tilde + 2))


def validate_phys(a: Real, b: Real, c: Real, d: Real) -> PhysParams:
    """Check the Hamiltonian, sign and sum conditions and recover ``theta``.

    Raises
    ------
    NotHamiltonian
        ``|d - b| > 1e-12``.
    SignViolation
        ``a >= 0`` or ``c >= 0``.
    SumViolation
        ``|a + b + c + d - 1/3| > 1e-12``.
    ThetaOutOfRange
        ``1 - 2(c + d)`` is not in ``[0, 1]``.
    """
    if abs(d - b) > STRUCTURAL_TOL:
        raise NotHamiltonian(f"d = {d} differs from b = {b}")
    if not (a < 0 and c < 0):
        raise SignViolation(f"need a < 0 and c < 0, got a = {a}, c = {c}")
    total = a + b + c + b
    if abs(total - ONE_THIRD) > STRUCTURAL_TOL:
        raise SumViolation(f"a + b + c + d = {total}, expected 1/3")
    theta_sq = 1 - 2 * (c + b)
    if theta_sq < -STRUCTURAL_TOL or theta_sq > 1 + STRUCTURAL_TOL:
        raise ThetaOutOfRange(f"theta^2 = {theta_sq} outside [0, 1]")
    if not b > ONE_SIXTH:
        # implied by the three checks above; kept as a guard
        raise BTooSmall(f"b = {b} must exceed 1/6")
    theta = math.sqrt(min(max(float(theta_sq), 0.0), 1.0))
    return PhysParams(a=a, b=b, c=c, d=b, theta=theta)


def in_r0(nu: Real, b: Real) -> bool:
    """Membership in the open admissible region of the ``(nu, b)`` chart."""
    return b > ONE_SIXTH and 0 <= nu <= 1 and TWO_THIRDS - 2 * b < nu < 2 * b


def from_nu_b(nu: Real, b: Real) -> PhysParams:
    """Build physical coefficients from the ``(nu, b)`` chart."""
    if not in_r0(nu, b):
        raise OutsideR0(f"(nu, b) = ({nu}, {b}) is outside the admissible region")
    a = -nu / 2 + ONE_THIRD - b
    c = nu / 2 - b
    return validate_phys(a, b, c, b)


def to_nu_b(p: PhysParams) -> NuB:
    return NuB(nu=p.nu, b=p.b)


def normalize(p: PhysParams) -> NormParams:
    return NormParams(a_tilde=p.a / p.b, c_tilde=p.c / p.b)


def denormalize(n: NormParams) -> PhysParams:
    """Inverse of :func:`normalize` using the ``b`` implied by the sum rule."""
    b = n.b
    return validate_phys(n.a_tilde * b, b, n.c_tilde * b, b)


def a_equals_c_line(b: Real) -> PhysParams:
    """The symmetric family ``a = c = 1/6 - b``."""
    if not b > ONE_SIXTH:
        raise BTooSmall(f"b = {b} must exceed 1/6")
    a = ONE_SIXTH - b
    return validate_phys(a, b, a, b)


# --- configuration ----------------------------------------------------------


def _number(value: Any, key: str) -> Real:
    """Accept ints, floats and rational strings such as ``"3/16"``."""
    if isinstance(value, bool):
        raise ConfigError(f"{key}: expected a number, got a boolean")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return value
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"{key}: cannot parse {value!r} as a number") from exc
    raise ConfigError(f"{key}: expected a number, got {type(value).__name__}")


def params_from_config(cfg: Mapping[str, Any] | str) -> PhysParams:
    """Parse one of the three accepted parameter layouts.

    ``{"a":..,"b":..,"c":..,"d":..}``, ``{"nu":..,"b":..}`` or
    ``{"b":.., "ac_line": true}``.  A JSON string is accepted as well.
    """
    if isinstance(cfg, str):
        try:
            cfg = json.loads(cfg)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed parameter JSON: {exc}") from exc
    if not isinstance(cfg, Mapping):
        raise ConfigError("parameter config must be a JSON object")
    keys = set(cfg)
    if cfg.get("ac_line"):
        if "b" not in keys:
            raise ConfigError("ac_line config needs 'b'")
        return a_equals_c_line(_number(cfg["b"], "b"))
    if {"a", "b", "c", "d"} <= keys:
        return validate_phys(*(_number(cfg[k], k) for k in ("a", "b", "c", "d")))
    if {"nu", "b"} <= keys:
        return from_nu_b(_number(cfg["nu"], "nu"), _number(cfg["b"], "b"))
    raise ConfigError(
        "parameter config must contain a,b,c,d or nu,b or b with ac_line=true; "
        f"got keys {sorted(keys)}"
    )


# --- space-time dilation ----------------------------------------------------


def dilation_factor(b: Real) -> float:
    """Scale relating physical and rescaled variables, ``sqrt(b)``.

    A physical solution ``u(T, X)`` corresponds to the rescaled solution
    ``u_b(t, x) = u(sqrt(b) t, sqrt(b) x)``.
    """
    return math.sqrt(float(b))


def to_normalized_coordinates(b: Real, t: float, x: Any) -> tuple[float, Any]:
    s = dilation_factor(b)
    return t / s, x / s


def to_physical_coordinates(b: Real, t: float, x: Any) -> tuple[float, Any]:
    s = dilation_factor(b)
    return t * s, x * s
