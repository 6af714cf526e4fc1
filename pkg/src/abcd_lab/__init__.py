"""Numerical laboratory for the Hamiltonian abcd Boussinesq system.

Submodules:

* :mod:`abcd_lab.params_core` -- parameter validation and coordinate charts;
* :mod:`abcd_lab.region_atlas` -- region predicates, thresholds and rasters;
* :mod:`abcd_lab.linear_waves` -- dispersion relation and group velocity;
* :mod:`abcd_lab.spectral_solver` -- pseudospectral RK4 time integration;
* :mod:`abcd_lab.virial_engine` -- virial functionals and positivity certificates;
* :mod:`abcd_lab.decay_diagnostics` -- windowed norms and decay reports;
* :mod:`abcd_lab.cli` -- the ``abcd-lab`` command.
"""

from __future__ import annotations

from .errors import (
    AbcdLabError,
    ConfigError,
    InvariantViolation,
    IoFailure,
    NumericalFailure,
    ParameterError,
)
from .params_core import (
    NormParams,
    PhysParams,
    a_equals_c_line,
    from_nu_b,
    normalize,
    params_from_config,
    validate_phys,
)

__version__ = "0.1.0"

__all__ = [
    "AbcdLabError",
    "ConfigError",
    "InvariantViolation",
    "IoFailure",
    "NumericalFailure",
    "ParameterError",
    "NormParams",
    "PhysParams",
    "a_equals_c_line",
    "from_nu_b",
    "normalize",
    "params_from_config",
    "validate_phys",
    "__version__",
]
