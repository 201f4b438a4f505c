import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from starkres.profiles import (NormSignError, gauss_moment, gauss_poly, l2_norm_numeric, make_gaussian,
                               make_model2, make_psi0_default, make_zero_profile, profile_from_spec,
                               sign_integral)


def test_gaussian_norm():
    p = make_gaussian(0.3)
    assert math.isclose(p.l2_norm, 0.3 * math.pi ** 0.25, rel_tol=1e-15)
    assert math.isclose(l2_norm_numeric(p), p.l2_norm, rel_tol=1e-12)
    assert p.is_pure_gaussian and p.reflection_symmetric


def test_moments():
    assert gauss_moment(3) == 0.0
    assert math.isclose(gauss_moment(2), math.sqrt(math.pi) / 2)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False), min_size=1, max_size=4))
def test_gauss_poly_norm_matches_quadrature(coeffs):
    p = gauss_poly(coeffs)
    if p.l2_norm < 1e-3:
        return
    assert math.isclose(l2_norm_numeric(p), p.l2_norm, rel_tol=1e-10)


def test_reflection_symmetry_detection():
    assert gauss_poly([1.0, 1j]).reflection_symmetric
    assert not gauss_poly([1.0, 1.0]).reflection_symmetric


def test_pair_is_abs2_on_real_line():
    p = gauss_poly([1.0, 0.5 + 0.2j, 0.3j])
    k = np.linspace(-3, 3, 11)
    assert np.allclose(p.pair(k).real, p.abs2_real(k), atol=1e-15)
    assert np.allclose(p.pair(k).imag, 0.0, atol=1e-15)


def test_model2_construction():
    psi0 = make_psi0_default()
    assert sign_integral(psi0) < 0
    q = make_model2(psi0, 0.05)
    k = np.array([0.7, -1.3])
    expected = (k ** 2 - 1 + 0.05j) * psi0(k) / math.sqrt(-sign_integral(psi0))
    assert np.allclose(q(k), expected, rtol=1e-14)
    assert math.isclose(l2_norm_numeric(q), q.l2_norm, rel_tol=1e-10)


def test_model2_needs_negative_sign_integral():
    with pytest.raises(NormSignError):
        make_model2(make_gaussian(1.0), 0.1)
    with pytest.raises(ValueError):
        make_model2(make_psi0_default(), -0.1)


def test_profile_specs():
    assert profile_from_spec({"kind": "gaussian", "mu": 0.2}).params["mu"] == 0.2
    assert profile_from_spec({"kind": "gaussian", "mu": 0}).l2_norm == 0.0
    assert profile_from_spec({"kind": "gauss_poly", "coeffs": [1, [0, 1]]}).poly == (1 + 0j, 1j)
    assert make_zero_profile().l2_norm == 0.0
    with pytest.raises(ValueError):
        profile_from_spec({"kind": "lorentzian"})
    with pytest.raises(ValueError):
        make_gaussian(-1.0)


def test_saddle_product_floor_gaussian_closed_form():
    # for mu exp(-k^2/2) the product is mu^2 exp(-z), smallest where Re z is largest
    from starkres.profiles import saddle_product_floor
    zs = [complex(x, y) for x in np.linspace(0.9, 1.1, 5) for y in np.linspace(-0.05, 0, 5)]
    v, at = saddle_product_floor(make_gaussian(0.1), zs)
    assert v == pytest.approx(0.01 * math.exp(-1.1), rel=1e-12)
    assert at.real == pytest.approx(1.1)
    with pytest.raises(ValueError):
        saddle_product_floor(make_gaussian(0.1), [])
