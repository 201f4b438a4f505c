"""Property checks shared by the hypothesis suites and the seeded acceptance runs."""
from __future__ import annotations

import csv
import io

from starkres.profiles import make_gaussian
from starkres.resolvent import F_model1, resolvent_direct
from starkres.rootfind import winding_count
from starkres.trajectories import TrajectoryPoint, write_trajectory_csv

R0 = 1.0190539888887071 - 0.011111503308084166j
_P01 = make_gaussian(0.1)


def check_herglotz(z: complex, f: float, mu: float) -> bool:
    """Im (phi, R(z) phi) > 0 for Im z > 0."""
    return resolvent_direct(z, f, make_gaussian(mu)).to_complex().imag > 0


def check_schwarz(z: complex, f: float, mu: float, tol: float = 1e-9) -> bool:
    """(phi, R(conj z) phi) = conj (phi, R(z) phi) on the physical sheet."""
    p = make_gaussian(mu)
    a = resolvent_direct(z, f, p).to_complex()
    b = resolvent_direct(z.conjugate(), f, p).to_complex()
    return abs(b - a.conjugate()) <= tol * abs(a)


def additivity_case_ok(x0: float, x1: float, y0: float, y1: float, split: float, gap: float = 2e-3) -> bool:
    """True if the known zero r0 stays away from every edge of both halves."""
    edges_x = (x0, split, x1)
    edges_y = (y0, y1)
    return min(abs(R0.real - e) for e in edges_x) > gap and min(abs(R0.imag - e) for e in edges_y) > gap


def check_additivity(x0: float, x1: float, y0: float, y1: float, split: float) -> bool:
    """Winding count of a rectangle equals the sum over a vertical split."""
    F = lambda z: F_model1(z, 0.0, _P01)
    whole = winding_count(F, (complex(x0, y0), complex(x1, y1)), 16).count
    left = winding_count(F, (complex(x0, y0), complex(split, y1)), 16).count
    right = winding_count(F, (complex(split, y0), complex(x1, y1)), 16).count
    inside = x0 < R0.real < x1 and y0 < R0.imag < y1
    return whole == left + right == int(inside)


def check_csv_roundtrip(points: list[TrajectoryPoint]) -> bool:
    """Two writes are byte-identical and every value parses back exactly."""
    a, b = io.StringIO(), io.StringIO()
    write_trajectory_csv(points, a)
    write_trajectory_csv(points, b)
    if a.getvalue() != b.getvalue():
        return False
    rows = list(csv.reader(io.StringIO(a.getvalue())))[1:]
    for q, row in zip(points, rows):
        vals = [float(x) for x in row[:5]]
        if vals != [q.f, q.r.real, q.r.imag, q.residual, q.im_over_f] or int(row[5]) != q.branch:
            return False
    return len(rows) == len(points)
