import math

import numpy as np
import pytest
from scipy.special import airy, dawsn

from starkres.contours import ContourPath, build_gamma_alpha, ray_in, ray_out, segment
from starkres.quadrature import CubicPhase, NonConvergence, integrate, integrate_oscillatory, principal_value

REAL_LINE = ContourPath((ray_in(-1.0, -1.0), segment(-1.0, 1.0), ray_out(1.0, 1.0)))


def test_gaussian_integral():
    r = integrate(REAL_LINE, lambda k: np.exp(-k * k))
    assert abs(r.complex() - math.sqrt(math.pi)) < 1e-14
    assert r.abs_error < 1e-10


def test_polynomial_on_segment():
    r = integrate(ContourPath((segment(0, 1),)), lambda k: k ** 2)
    assert abs(r.complex() - 1 / 3) < 1e-15


def test_log_integrand_avoids_overflow():
    r = integrate(REAL_LINE, log_integrand=lambda k: (1000.0 - k * k, np.ones_like(k)))
    assert math.isclose(r.value.log_abs(), 1000 + 0.5 * math.log(math.pi), rel_tol=1e-14)


@pytest.mark.parametrize("x", [-3.0, 0.0, 1.5, 6.0])
def test_airy_integral_on_gamma_alpha(x):
    # int exp(-i(k^3/3 - k x)) dk = 2 pi Ai(-x)
    path = build_gamma_alpha(0.5, math.sqrt(max(x, 0) + 0.25) + 0.5)
    r = integrate_oscillatory(path, CubicPhase(x), lambda k: np.ones_like(k), 1.0, 1e-12)
    assert abs(r.complex() - 2 * math.pi * airy(-x)[0]) < 1e-11


@pytest.mark.parametrize("s", [1.0, 0.3, -2.0])
def test_principal_value_dawson(s):
    # P.V. int exp(-k^2)/(k - s) dk = -2 sqrt(pi) D(s)
    v = principal_value(lambda k: np.exp(-np.asarray(k) ** 2), s)
    assert abs(v + 2 * math.sqrt(math.pi) * dawsn(s)) < 1e-11


def test_principal_value_rejects_origin():
    with pytest.raises(ValueError):
        principal_value(lambda k: np.exp(-k * k), 0.0)


def test_budget_exhaustion_raises():
    path = ContourPath((segment(0, 1),))
    with pytest.raises(NonConvergence):
        integrate(path, lambda k: np.abs(k.real - 1 / math.pi) ** -0.9 + 0j, rel_tol=1e-14, max_evals=300)


def test_needs_one_integrand():
    with pytest.raises(ValueError):
        integrate(REAL_LINE)
