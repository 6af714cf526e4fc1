"""Exception hierarchy shared by every module of the package.

Each error carries an ``exit_code`` so the command-line front door can map
failures onto process exit statuses without inspecting messages.
"""

from __future__ import annotations


class AbcdLabError(Exception):
    """Base class for all package errors."""

    exit_code = 1


# --- parameter validation -------------------------------------------------


class ParameterError(AbcdLabError, ValueError):
    """Invalid model parameters (configuration-level problem)."""

    exit_code = 2


class NotHamiltonian(ParameterError):
    """``d`` differs from ``b``."""


class SignViolation(ParameterError):
    """``a`` or ``c`` is not strictly negative."""


class SumViolation(ParameterError):
    """``a + b + c + d`` differs from 1/3."""


class ThetaOutOfRange(ParameterError):
    """The recovered angle parameter falls outside [0, 1]."""


class OutsideR0(ParameterError):
    """A (nu, b) pair outside the admissible open region."""


class BTooSmall(ParameterError):
    """``b`` must exceed 1/6."""


class V0OutOfRange(ParameterError):
    """Speed bound ``v0`` must lie strictly between 0 and 1."""


class KappaOutOfRange(ParameterError):
    """``kappa0`` must lie strictly between 0 and 1/4."""


class NotOnAcLine(ParameterError):
    """Operation requires ``a == c``."""


class EpsOutOfRange(ParameterError):
    """Certificate parameter outside (0, r0)."""


class BadRange(ParameterError):
    """Malformed raster axes, ranges or predicate list."""


class ConfigError(ParameterError):
    """Malformed run configuration."""


# --- numerics -------------------------------------------------------------


class NumericalFailure(AbcdLabError):
    """A numerical procedure could not produce a trustworthy result."""

    exit_code = 4


class NonFiniteState(NumericalFailure):
    """The time integrator produced NaN or infinite values."""


class WindowOutsideGrid(NumericalFailure):
    """A decay window or weight centre leaves the periodic grid."""


class TooShortTrajectory(NumericalFailure):
    """Not enough snapshots for the requested diagnostic."""


class WeightTouchesBoundary(UserWarning):
    """A weight is not negligible at the periodic seam."""


# --- io / invariants ------------------------------------------------------


class IoFailure(AbcdLabError):
    """Reading or writing an artifact failed."""

    exit_code = 3


class InvariantViolation(AbcdLabError):
    """A checked invariant did not hold."""

    exit_code = 1
