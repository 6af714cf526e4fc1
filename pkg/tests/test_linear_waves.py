from __future__ import annotations

import math
import warnings
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from abcd_lab.errors import NotOnAcLine
from abcd_lab.linear_waves import (
    amplitude,
    amplitude_alt,
    gv_numerator,
    group_velocity,
    omega,
    pmu,
    pmu_b_tilde,
    pw_range,
    pw_range_ac,
    sample_waves,
    zero_gv_wavenumbers,
)
from abcd_lab.params_core import a_equals_c_line, from_nu_b, in_r0
from abcd_lab.region_atlas import is_refined_dispersion_like

ac_b = st.floats(0.1667, 20.0).filter(lambda b: b > 1 / 6 + 1e-6)


def test_omega_at_zero(sym_quarter):
    assert omega(sym_quarter, 0.0) == 0.0


def test_omega_ac_line_merges_radicands(sym_quarter):
    k = np.linspace(0.01, 30, 500)
    a, b = float(sym_quarter.a), float(sym_quarter.b)
    assert np.allclose(omega(sym_quarter, k), k * (1 - a * k * k) / (1 + b * k * k), rtol=1e-14)


def test_omega_long_wave(asym_params):
    k = np.array([1e-3, 1e-4])
    assert np.allclose(omega(asym_params, k) / k, 1.0, atol=1e-5)


def test_omega_even_in_k(asym_params):
    k = np.linspace(0, 10, 50)
    assert np.array_equal(omega(asym_params, k), omega(asym_params, -k))


def test_group_velocity_at_zero(asym_params):
    assert group_velocity(asym_params, 0.0) == 1.0


def test_group_velocity_vanishes_at_four():
    p = a_equals_c_line(F(3, 16))
    assert abs(group_velocity(p, 4.0)) < 1e-14


def test_group_velocity_odd(asym_params):
    k = np.linspace(0.1, 10, 20)
    assert np.allclose(group_velocity(asym_params, -k), -group_velocity(asym_params, k))


@pytest.mark.parametrize("nu, b", [(1 / 3, 0.25), (0.5, 0.3), (0.1, 1.0), (0.9, 2.5), (1 / 3, 0.17)])
def test_group_velocity_finite_differences(nu, b):
    p = from_nu_b(nu, b)
    k = np.linspace(1e-3, 50, 1000)
    h = 1e-5
    fd = (omega(p, k + h) - omega(p, k - h)) / (2 * h)
    gv = group_velocity(p, k)
    assert np.all(np.abs(gv - fd) <= 1e-6 * np.maximum(1.0, np.abs(gv)))


def test_numerator_is_cubic_in_k_squared(asym_params):
    a, b, c = (float(x) for x in (asym_params.a, asym_params.b, asym_params.c))
    k = np.linspace(0, 5, 11)
    expected = a * b * c * k**6 + 3 * a * c * k**4 - (b + 2 * a + 2 * c) * k**2 + 1
    assert np.allclose(gv_numerator(asym_params, k), expected, rtol=1e-13)


def test_amplitude_expressions_agree(asym_params):
    k = np.linspace(0.0, 20, 200)
    assert np.allclose(amplitude(asym_params, k), amplitude_alt(asym_params, k), rtol=1e-12)


def test_amplitude_is_one_on_ac_line(sym_quarter):
    assert np.allclose(amplitude(sym_quarter, np.linspace(0, 10, 30)), 1.0)


def test_sample_waves_shapes(sym_quarter):
    s = sample_waves(sym_quarter, 5.0, 11)
    assert s.k[0] == 0 and s.k[-1] == 5.0
    assert s.omega.shape == s.amplitude_A.shape == s.group_velocity.shape == (11,)


# --- a = c profile ---------------------------------------------------------------------


@given(ac_b)
def test_pmu_endpoint_values(b):
    p = a_equals_c_line(b)
    bt = pmu_b_tilde(p)
    assert -1 < bt < 0
    assert pmu(p, 0.0) == 1.0
    assert math.isclose(pmu(p, 3.0), -(9 * bt + 1) / 8, rel_tol=1e-12, abs_tol=1e-14)
    assert math.isclose(pmu(p, 1e9), -bt, abs_tol=1e-7)


@given(ac_b, st.floats(0.0, 1e3))
def test_pmu_is_group_velocity(b, mu):
    p = a_equals_c_line(b)
    k = math.sqrt(mu / b)
    assert math.isclose(pmu(p, mu), group_velocity(p, k), rel_tol=1e-10, abs_tol=1e-12)


@given(ac_b)
def test_pmu_minimum_at_three(b):
    p = a_equals_c_line(b)
    mu = np.linspace(0, 50, 5001)
    d = np.diff(pmu(p, mu))
    assert np.all(d[mu[1:] < 2.99] < 0) and np.all(d[mu[:-1] > 3.01] > 0)


def test_pmu_needs_ac_line(asym_params):
    with pytest.raises(NotOnAcLine):
        pmu(asym_params, 1.0)
    with pytest.raises(NotOnAcLine):
        pw_range_ac(asym_params)


def test_pmu_three_equals_closed_form_minimum():
    p = a_equals_c_line(F(2, 7))
    bt = pmu_b_tilde(p)
    assert math.isclose(-(9 * bt + 1) / 8, 1 - 3 / (16 * float(p.b)), rel_tol=1e-14)


@pytest.mark.parametrize("b, v_min", [(F(1, 4), 0.25), (F(3, 16), 0.0), (F(1, 2), 0.625)])
def test_pw_range_ac_closed_form(b, v_min):
    p = a_equals_c_line(b)
    r = pw_range_ac(p)
    assert math.isclose(r.v_min, v_min, abs_tol=1e-15)
    assert r.v_max == 1.0
    # numerical search agrees with the closed form
    num = pw_range(p)
    assert math.isclose(num.v_min, v_min, abs_tol=1e-9)
    assert math.isclose(num.k_at_min, math.sqrt(3 / float(b)), rel_tol=1e-4)
    assert num.v_max == 1.0


def test_pw_range_off_line_reference():
    # minimum located by a dense search in mu followed by a bounded refinement
    r = pw_range(from_nu_b(0.5, 0.3))
    assert math.isclose(r.v_min, 0.27611809952824235, rel_tol=1e-9)
    assert math.isclose(r.k_at_min, 3.81835716783, rel_tol=1e-6)
    assert r.v_max == 1.0


def test_pw_range_vmax_sampled():
    counterexamples = []
    for nu in np.linspace(0.01, 0.99, 15):
        for b in np.linspace(0.17, 5, 15):
            if in_r0(nu, b):
                r = pw_range(from_nu_b(nu, b), samples=801)
                assert r.v_min <= r.v_max
                if r.v_max > 1 + 1e-12:
                    counterexamples.append((nu, b, r.v_max))
    if counterexamples:
        warnings.warn(f"group velocity above 1 at {counterexamples}", stacklevel=1)
    for b in np.linspace(0.17, 5, 15):
        assert pw_range(a_equals_c_line(b), samples=801).v_max <= 1.0


# --- zero group velocity ----------------------------------------------------------------


def test_zero_gv_threshold_root():
    roots = zero_gv_wavenumbers(a_equals_c_line(F(3, 16)))
    assert len(roots) == 1 and abs(roots[0] - 4) < 1e-12


def test_zero_gv_empty_in_refined_regime(sym_quarter):
    assert zero_gv_wavenumbers(sym_quarter) == []


def test_zero_gv_two_roots_below_threshold():
    p = a_equals_c_line(0.17)
    roots = zero_gv_wavenumbers(p)
    assert len(roots) == 2
    # roots of the cubic in x = k^2, frozen from a polynomial solver
    assert np.allclose(roots, [2.528800605286788, 16.611986897273], rtol=1e-10)
    mu = [0.17 * k * k for k in roots]
    assert mu[0] < 3 < mu[1]
    for k in roots:
        assert abs(gv_numerator(p, k)) < 1e-10 * k**6


@given(st.floats(0.0, 1.0), st.floats(0.17, 20.0))
def test_zero_gv_roots_are_roots(nu, b):
    if not (2 / 3 - 2 * b + 1e-9 < nu < 2 * b - 1e-9):
        return
    p = from_nu_b(nu, b)
    a, bb, c = float(p.a), float(p.b), float(p.c)
    cubic = np.poly1d([a * bb * c, 3 * a * c, -(bb + 2 * a + 2 * c), 1.0])
    expected = sorted(math.sqrt(x.real) for x in cubic.roots if abs(x.imag) < 1e-9 * abs(x) and x.real > 0)
    roots = zero_gv_wavenumbers(p)
    assert len(roots) == len(expected) or any(abs(np.polyder(cubic)(k * k)) < 1e-6 for k in roots)
    for k in roots:
        assert abs(cubic(k * k)) <= 1e-9 * max(1.0, abs(a * bb * c) * k**6)


@given(ac_b)
def test_refined_implies_no_zero_gv_on_ac_line(b):
    p = a_equals_c_line(b)
    roots = zero_gv_wavenumbers(p)
    if is_refined_dispersion_like(p):
        assert roots == []
    elif b < 3 / 16 - 1e-9:
        assert len(roots) >= 1
