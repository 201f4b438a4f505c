"""Randomized property suites, 10^3 cases each with a fixed derandomized seed."""
import json

from hypothesis import HealthCheck, assume, given, settings, strategies as st

from props import (additivity_case_ok, check_additivity, check_csv_roundtrip, check_herglotz,
                   check_schwarz)
from starkres.cli import RunConfig
from starkres.trajectories import TrajectoryPoint

SUITE = settings(max_examples=1000, derandomize=True, deadline=None,
                 suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much])

mu_s = st.floats(0.05, 0.85)
f_s = st.floats(0.005, 0.5)
z_up = st.builds(complex, st.floats(-3, 3), st.floats(0.01, 2))


@SUITE
@given(z_up, f_s, mu_s)
def test_herglotz(z, f, mu):
    assert check_herglotz(z, f, mu)


@SUITE
@given(z_up, f_s, mu_s)
def test_schwarz_reflection(z, f, mu):
    assert check_schwarz(z, f, mu)


@SUITE
@given(st.floats(0.6, 1.0), st.floats(0.05, 0.4), st.floats(-0.3, -0.001), st.floats(0.001, 0.3),
       st.floats(0.05, 0.95))
def test_winding_additivity(x0, width, y0, y1, frac):
    x1 = x0 + width
    split = x0 + frac * width
    assume(additivity_case_ok(x0, x1, y0, y1, split))
    assert check_additivity(x0, x1, y0, y1, split)


finite = st.floats(allow_nan=False, allow_infinity=False, width=64)
point = st.builds(lambda f, a, b, r, q, br: TrajectoryPoint(f, complex(a, b), r, q, br),
                  st.floats(1e-6, 1.0), finite, finite, st.floats(0, 1), st.floats(0, 1e3), st.integers(0, 50))


@SUITE
@given(st.lists(point, min_size=1, max_size=8))
def test_csv_determinism(points):
    assert check_csv_roundtrip(points)


@SUITE
@given(st.floats(0.0, 0.85), st.floats(0, 1), st.floats(0, 1), st.floats(1e-14, 1e-6),
       st.lists(st.lists(st.floats(-2, 2), min_size=2, max_size=2), max_size=3), st.integers(1, 16))
def test_config_roundtrip(mu, eps, f, tol, seeds, nx):
    cfg = RunConfig(mu=mu, epsilon=eps, f=f, tol=tol, seeds=seeds, grid=[nx, 2])
    again = RunConfig.from_json(cfg.to_json())
    assert again == cfg
    assert json.loads(again.to_json()) == json.loads(cfg.to_json())
