import io
import math

import numpy as np
import pytest

from starkres.contours import (PathError, Region, RegionM, build_C_pm, build_gamma_alpha, build_gamma_prime,
                               build_semicircle, build_steepest, dump_csv, ray_in, segment,
                               validate_in_region, ContourPath)
from starkres.numerics import principal_sqrt
from starkres.quadrature import integrate


def test_gamma_alpha_shape():
    p = build_gamma_alpha(0.3, 2.0, Region("strip", 4.0))
    assert p.check_continuity()
    ok, bad = validate_in_region(p, Region("strip", 4.0))
    assert ok and bad is None
    pts = np.concatenate(p.sample(16))
    assert np.all(pts.imag <= 1e-15) and np.all(pts.imag >= -0.3 - 1e-15)


def test_gamma_alpha_rejects_alpha_outside_strip():
    with pytest.raises(PathError):
        build_gamma_alpha(5.0, 1.0, Region("strip", 4.0))
    with pytest.raises(PathError):
        build_gamma_alpha(-0.1, 1.0)


def test_c_pm_passes_through_origin():
    p = build_C_pm(0.3)
    assert p.check_continuity()
    ends = [pc.end() for pc in p.traversal()]
    assert 0j in ends
    with pytest.raises(PathError):
        build_C_pm(0.5, Region("strip", 0.4))


@pytest.mark.parametrize("z", [1.02 - 0.005j, 1.5 - 0.2j, 0.5 - 0.01j])
@pytest.mark.parametrize("side", ["plus", "minus"])
def test_steepest_curve_keeps_phase(z, side):
    spec, path = build_steepest(z, side)
    s = principal_sqrt(z)
    curve = [pc for pc in path.pieces if pc.kind == "curve"][0]
    t = np.linspace(curve.t_lo, curve.t_hi, 50)
    zeta = curve.k(t) - (s if side == "plus" else -s)
    assert np.max(np.abs(spec.residual(zeta))) < 1e-12
    assert path.check_continuity()


def test_gamma_prime_meets_at_zero():
    minus, plus = build_gamma_prime(1.02 - 0.005j)
    assert abs(minus.traversal()[-1].end()) < 1e-15
    assert abs(plus.traversal()[0].start()) < 1e-15
    assert (minus + plus).check_continuity()


def test_steepest_rejects_leaving_strip():
    with pytest.raises(PathError):
        build_steepest(0.01 - 3.9j, "plus", region=Region("strip", 0.5))


def test_region_m_membership():
    m = RegionM()
    assert m.contains(1.02 - 0.005j)
    assert not m.contains(1.0 + 0.1j)
    assert not m.contains(0.001 - 0.0001j)


def test_upper_clockwise_semicircle_gives_minus_i_pi():
    # 1/(k - c) over the arc above c from c - r to c + r
    arc = build_semicircle(1.0, 0.5, "upper", "cw")
    v = integrate(arc, lambda k: 1.0 / (k - 1.0)).complex()
    assert abs(v + 1j * math.pi) < 1e-12


def test_dump_csv_header_and_rows():
    buf = io.StringIO()
    dump_csv(ContourPath((segment(0, 1), ray_in(-1.0, -1.0))), buf, samples=5)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "piece,t,re_k,im_k"
    assert len(lines) == 11
