import cmath
import io

import numpy as np
import pytest

from starkres.trajectories import (BranchLost, TrajectoryPoint, instability_report, mu_sweep, trace, trace_many,
                                   write_mu_sweep_csv, write_trajectory_csv)

R0 = 1.0190539888887071 - 0.011111503308084166j


def linear(z, f):
    # zero at r(f) = 1 - 0.5 i f
    return 1 - z - 0.5j * f


@pytest.mark.parametrize("mode", ["ray", "branch"])
def test_linear_family_is_followed_exactly(mode):
    traj = trace(linear, None, 0.02, 0.0005, 12, 1.0, mode=mode)
    fs = [q.f for q in traj]
    assert all(a > b for a, b in zip(fs, fs[1:]))
    for q in traj:
        assert abs(q.r - (1 - 0.5j * q.f)) < 1e-12
        assert q.im_over_f == pytest.approx(0.5)


def test_branch_lost_reports_last_point():
    def F(z, f):
        return linear(z, f) if f > 0.01 else cmath.exp(z)
    with pytest.raises(BranchLost) as exc:
        trace(F, None, 0.02, 0.005, 4, 1.0, mode="branch")
    assert exc.value.last is not None and exc.value.last.f > 0.01


def test_trace_validates_range():
    with pytest.raises(ValueError):
        trace(linear, None, 0.01, 0.02, 5, 1.0)
    with pytest.raises(ValueError):
        trace(linear, None, 0.02, 0.01, 5, 1.0, mode="spiral")


def test_trace_many_returns_failures_in_place():
    out = trace_many(linear, None, 0.02, 0.01, 3, [1.0, 1.0 + 0.1j], threads=2)
    assert len(out) == 2 and all(isinstance(t, list) for t in out)


def synthetic(r_of_f, fs):
    return [TrajectoryPoint(f, r_of_f(f), 0.0, abs(r_of_f(f).imag) / f) for f in fs]


def test_report_unstable_for_linear_approach_to_axis():
    fs = np.geomspace(0.02, 0.0005, 20)
    rep = instability_report(synthetic(lambda f: 1 - 0.5j * f, fs), 1 - 0.01j)
    assert rep.c0_hat == pytest.approx(0.5)
    assert rep.min_dist_to_r0 >= 0.005
    assert rep.verdict == "unstable"


def test_report_inconclusive_for_convergent_trajectory():
    fs = np.geomspace(0.02, 0.0005, 20)
    rep = instability_report(synthetic(lambda f: R0 + (1 - 1j) * f, fs), R0)
    assert rep.verdict == "inconclusive"


def test_report_flags_growing_ratio():
    fs = np.geomspace(0.02, 0.0005, 20)
    rep = instability_report(synthetic(lambda f: 1 - 1j * f * (1 + 0.01 / f), fs), 1 - 0.5j)
    assert not rep.bounded and rep.verdict == "inconclusive"


def test_mu_sweep_small_mu_law_and_sign():
    pts = mu_sweep([0.2, 0.025, 0.1, 0.05])
    assert [q.mu for q in pts] == [0.025, 0.05, 0.1, 0.2]
    assert abs(pts[2].r0 - (1.01905 - 0.0111115j)) < 5e-5
    assert all(q.r0.imag < 0 for q in pts)
    slope = np.polyfit(np.log([q.mu for q in pts]), np.log([abs(q.r0 - 1) for q in pts]), 1)[0]
    assert abs(slope - 2) <= 0.2
    steps = np.diff([q.mu for q in pts])
    jumps = np.abs(np.diff([q.r0 for q in pts]))
    assert np.all(jumps <= 5 * steps)


def test_mu_sweep_rejects_out_of_range():
    with pytest.raises(ValueError):
        mu_sweep([0.1, 0.9])


def test_csv_writers():
    buf = io.StringIO()
    write_trajectory_csv([TrajectoryPoint(0.1, 1 - 0.1j, 1e-16, 1.0, 0)], buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "f,re_r,im_r,residual,im_over_f,branch"
    assert lines[1].startswith("0.10000000000000001,")
    buf = io.StringIO()
    write_mu_sweep_csv(mu_sweep([0.1]), buf)
    assert buf.getvalue().splitlines()[0] == "mu,re_r0,im_r0,residual"
