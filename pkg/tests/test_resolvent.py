import math

import numpy as np
import pytest

from oracles import airy_psi, airy_resolvent, gaussian_f0_mp, gaussian_plain_quad
from starkres.contours import build_gamma_alpha
from starkres.profiles import gauss_poly, make_gaussian, make_model2, make_psi0_default
from starkres.resolvent import (DomainError, EvalBudget, F_model1, F_model2, bound_state_condition,
                                find_bound_state, gaussian_f0_continued, gaussian_f0_plain, model2_r0_formula,
                                model_F, psi_f, psi_norm, resolvent_continued, resolvent_direct,
                                resolvent_expansion24, resolvent_f0_continued, resolvent_f0_plain)

MU = 0.1
P = make_gaussian(MU)


@pytest.mark.parametrize("f", [0.1, 0.02])
@pytest.mark.parametrize("x", [0.5, 3.0, -2.0, 1 + 0.5j, 20 - 3j, 60.0, -15.0])
def test_psi_f_matches_airy_closed_form(x, f):
    ref = airy_psi(x, f, MU)
    assert abs(psi_f(x, f, P).to_complex() - ref) <= 1e-10 * abs(ref)


def test_psi_f_on_explicit_contours_agree():
    x, f = 4.0 - 1.0j, 0.1
    vals = [psi_f(x, f, P, path=build_gamma_alpha(a, 2.0)).to_complex() for a in (0.2, 0.5, 0.9)]
    assert max(abs(v - vals[0]) for v in vals) <= 1e-9 * abs(vals[0])


def test_psi_f_needs_positive_field():
    with pytest.raises(DomainError):
        psi_f(1.0, 0.0, P)


@pytest.mark.parametrize("z", [1 + 0.3j, 0.5 + 1j, -2 + 0.1j, 3 - 0.5j, 1.02 - 0.005j, 0.2 - 1.0j])
def test_gaussian_f0_against_mpmath(z):
    ref = gaussian_f0_mp(z, MU)
    assert abs(gaussian_f0_continued(z, MU) - ref) <= 1e-13 * abs(ref)


@pytest.mark.parametrize("z", [1 + 0.3j, -1 - 0.5j, 2 - 2j])
def test_gaussian_plain_against_quadrature(z):
    ref = gaussian_plain_quad(z, MU)
    assert abs(gaussian_f0_plain(z, MU) - ref) <= 1e-12 * abs(ref)
    assert abs(resolvent_f0_plain(z, P) - ref) <= 1e-10 * abs(ref)


def test_f0_continued_general_route_matches_closed_form():
    q = gauss_poly([MU])
    for z in (1.1 - 0.2j, 0.4 + 0.3j):
        a = resolvent_f0_continued(z, q, fast=False)
        assert abs(a - gaussian_f0_continued(z, MU)) <= 1e-10 * abs(a)


def test_f0_continued_outside_strip_is_rejected():
    with pytest.raises(DomainError):
        resolvent_f0_continued(-30 - 1j, P)
    with pytest.raises(DomainError):
        resolvent_f0_plain(-1.0, P)


@pytest.mark.parametrize("z,f", [(1 + 0.3j, 0.1), (0.5 + 0.2j, 0.05)])
def test_direct_resolvent_against_airy_oracle(z, f):
    ref = airy_resolvent(z, f, MU)
    assert abs(resolvent_direct(z, f, P).to_complex() - ref) <= 1e-9 * abs(ref)


@pytest.mark.slow
def test_time_and_xspace_routes_agree():
    # the x-space route is the general-profile fallback; one point keeps the test affordable
    z, b8 = 1.02 - 0.05j, EvalBudget(rel_tol=1e-8)
    a = resolvent_continued(z, 0.2, P, route="time").to_complex()
    b = resolvent_continued(z, 0.2, P, b8, route="xspace").to_complex()
    assert abs(a - b) <= 1e-7 * abs(a)


def test_continuation_is_continuous_across_axis():
    f = 0.05
    up = resolvent_continued(1.0 + 1e-9j, f, P).to_complex()
    down = resolvent_continued(1.0 - 1e-9j, f, P).to_complex()
    on = resolvent_continued(1.0, f, P).to_complex()
    assert abs(up - down) <= 1e-7 * abs(up)
    assert abs(on - up) <= 1e-7 * abs(up)


def test_direct_rejects_real_axis():
    with pytest.raises(DomainError):
        resolvent_direct(1.0, 0.1, P)


def test_small_field_approaches_f0_in_upper_half_plane():
    z = 1 + 0.5j
    e = [abs(resolvent_direct(z, f, P).to_complex() - gaussian_f0_plain(z, MU)) for f in (0.02, 0.01)]
    assert e[1] < e[0] < 1e-3


def test_expansion24_close_to_exact():
    z, f = 1.02 - 0.005j, 0.01
    a = resolvent_expansion24(z, f, P).to_complex()
    b = resolvent_continued(z, f, P).to_complex()
    assert abs(a - b) <= 2 * MU ** 2 * f


def test_psi_norm_parseval_coarse():
    v = psi_norm(0.5, P, EvalBudget(rel_tol=1e-8))
    assert math.isclose(v, MU * math.pi ** 0.25, rel_tol=1e-6)


def test_f_model1_at_mu_zero():
    from starkres.profiles import make_zero_profile
    assert F_model1(0.7 - 0.1j, 0.0, make_zero_profile()).to_complex() == pytest.approx(0.3 + 0.1j)


def test_model2_f0_closed_form_matches_resolvent():
    q = make_model2(make_psi0_default(), 0.1)
    z = 1.05 + 0.2j
    closed = F_model2(z, 0.0, q).to_complex()
    direct = resolvent_f0_plain(z, q) - 1
    assert abs(closed - direct) <= 1e-10 * abs(direct)


def test_model2_formula_is_close_for_small_eps():
    q = make_model2(make_psi0_default(), 0.02)
    r = model2_r0_formula(q)
    assert abs(F_model2(r, 0.0, q).to_complex()) < 1e-6
    assert r.imag < 0


def test_bound_state_condition():
    lam = find_bound_state(make_gaussian(0.5))
    assert lam is not None and lam < 0
    assert abs(bound_state_condition(lam, make_gaussian(0.5)) - 1.0) < 1e-10


def test_model_f_dispatch():
    assert model_F("model1", P)(1.0, 0.0) is not None
    with pytest.raises(ValueError):
        model_F("model3", P)


def test_bound_state_is_real_zero_of_F():
    # independent of the condition's own form: 1 - lam - (phi, (p^2 - lam)^{-1} phi) vanishes
    from oracles import gaussian_plain_quad
    lam = find_bound_state(make_gaussian(0.5))
    F = lambda x: 1 - x - gaussian_plain_quad(x, 0.5).real
    assert abs(F(lam)) < 1e-9
    assert abs(F(lam - 0.01)) > 1e-4
