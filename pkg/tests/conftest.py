from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from abcd_lab.params_core import a_equals_c_line, from_nu_b
from abcd_lab.spectral_solver import Grid

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow], max_examples=100
)
settings.load_profile("default")

#: acceptance outcomes collected during the run, printed in the terminal summary
ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def sym_quarter():
    """The symmetric set a = c = -1/12, b = 1/4."""
    return a_equals_c_line(Fraction(1, 4))


@pytest.fixture
def asym_params():
    """An asymmetric admissible set, nu = 1/2, b = 3/10."""
    return from_nu_b(Fraction(1, 2), Fraction(3, 10))


@pytest.fixture
def small_grid():
    return Grid(256, 40 * math.pi)


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


def band_limited(grid: Grid, rng: np.random.Generator, k_cut: float = 3.0, amp: float = 1.0):
    """Random smooth periodic field with modes up to ``k_cut``."""
    k = grid.wavenumbers
    coef = rng.standard_normal(k.size) + 1j * rng.standard_normal(k.size)
    coef[k > k_cut] = 0.0
    coef[0] = coef[0].real
    f = grid.irfft(coef)
    return amp * f / np.max(np.abs(f))
