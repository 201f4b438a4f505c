"""Continuation of resonances in the field strength f and instability diagnostics."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.stats import kendalltau

from .resolvent import DEFAULT_BUDGET, F_model1, model_F
from .rootfind import NoConvergence, _map, newton

MIN_STEP = 1e-5
MAX_STEP = 0.01


class BranchLost(RuntimeError):
    def __init__(self, message: str, last: Optional["TrajectoryPoint"] = None):
        super().__init__(message)
        self.last = last


@dataclass
class TrajectoryPoint:
    f: float
    r: complex
    residual: float
    im_over_f: float
    branch: int = 0


@dataclass
class InstabilityReport:
    c0_hat: float
    min_dist_to_r0: float
    verdict: str
    f_range: tuple[float, float]
    kendall_tau: float = math.nan
    kendall_p: float = math.nan
    bounded: bool = True


@dataclass
class MuSweepPoint:
    mu: float
    r0: complex
    residual: float


def _jump_limit(f: float, r: complex) -> float:
    # a quarter of the local zero spacing pi f / sqrt(Re r)
    return 0.25 * math.pi * f / math.sqrt(max(r.real, 1e-3))


def _continue(solve, hist, f, target, h):
    """Predictor-corrector from f down to target; returns (hist, h) or raises NoConvergence."""
    easy = 0
    if len(hist) < 2:
        # bootstrap the secant predictor with a tiny step
        f0, z0 = hist[-1]
        fb = f0 * (1 - 1e-4 * f0)
        hist = [(f0, z0), (fb, solve(z0, fb).z)]
        f = fb
    while f > target * (1 + 1e-12):
        fn = max(target, f - h)
        (f1, z1), (f2, z2) = hist[-2], hist[-1]
        pred = z2 + (z2 - z1) * (fn - f2) / (f2 - f1)
        try:
            r = solve(pred, fn)
            if abs(r.z - pred) > _jump_limit(fn, pred):
                raise NoConvergence("corrector jumped to another zero", r.z)
        except NoConvergence:
            if h <= MIN_STEP:
                raise
            h, easy = max(MIN_STEP, h / 2), 0
            continue
        f = fn
        hist = [hist[-1], (fn, r.z)]
        easy += 1
        if easy >= 3:
            h, easy = min(MAX_STEP, 2 * h), 0
    return hist, h, r if hist[-1][0] == target else None


def trace(model, p, f_start: float, f_end: float, steps: int, seed: complex, *, mode: str = "ray",
          half_width: float = 0.05, tol: float = 1e-12, anchor: Optional[float] = None,
          valid: Optional[Callable[[complex], bool]] = None, budget=None) -> list[TrajectoryPoint]:
    """Follow a zero of F(., f) from f_start down to f_end on a geometric grid of `steps` values.

    `model` is "model1", "model2" or a callable F(z, f) (then p is ignored).

    Zeros drift like z^(3/2) ~ f, so a single branch leaves any fixed window as f
    decreases.  mode="ray" (default) samples, at each grid value, the zero reached
    by Newton from anchor + i Im r_prev; the branch id increments whenever two
    consecutive samples are farther apart than the local zero spacing allows for
    one continued zero.  mode="branch" continues one zero by secant prediction
    and Newton correction with adaptive steps (halve on failure, double after
    three easy steps, clamped to [1e-5, 0.01]); a correction farther than a
    quarter of the zero spacing from the prediction is a failure, and failure at
    the minimum step raises BranchLost.
    """
    if not f_start > f_end > 0:
        raise ValueError("need f_start > f_end > 0")
    if mode not in ("ray", "branch"):
        raise ValueError(f"unknown mode {mode!r}")
    grid = [float(x) for x in np.geomspace(f_start, f_end, max(steps, 2))]
    F = model_F(model, p, budget or DEFAULT_BUDGET)

    def solve(z0, f):
        return newton(lambda z: F(z, f), z0, tol, valid=valid, f=f)

    rec = solve(complex(seed), grid[0])
    out = [TrajectoryPoint(grid[0], rec.z, rec.residual, abs(rec.z.imag) / grid[0], 0)]
    if mode == "branch":
        hist, h = [(grid[0], rec.z)], MAX_STEP
        for target in grid[1:]:
            try:
                hist, h, rec = _continue(solve, hist, hist[-1][0], target, h)
            except NoConvergence:
                raise BranchLost(f"branch lost between f={hist[-1][0]:.6g} and {target:.6g}", out[-1])
            out.append(TrajectoryPoint(target, rec.z, rec.residual, abs(rec.z.imag) / target, 0))
        return out
    anchor = rec.z.real if anchor is None else anchor
    branch = 0
    for target in grid[1:]:
        prev = out[-1]
        rec = solve(complex(anchor, prev.r.imag), target)
        if abs(rec.z.real - anchor) > half_width:
            raise NoConvergence(f"no zero within {half_width} of Re z = {anchor} at f={target:.6g}", rec.z)
        # a continued zero moves by about (2/3) z df/f; anything farther is a different zero
        drift = (2 / 3) * abs(prev.r) * (prev.f - target) / prev.f
        if abs(rec.z - prev.r) > drift + _jump_limit(target, prev.r):
            branch += 1
        out.append(TrajectoryPoint(target, rec.z, rec.residual, abs(rec.z.imag) / target, branch))
    return out


def trace_many(model, p, f_start: float, f_end: float, steps: int, seeds: Sequence[complex], *,
               threads: int = 1, **kw) -> list[list[TrajectoryPoint] | Exception]:
    """Independent trajectories from several seeds, in parallel; failures are returned in place."""
    def one(seed):
        try:
            return trace(model, p, f_start, f_end, steps, seed, **kw)
        except (NoConvergence, BranchLost) as exc:
            return exc
    return _map(one, list(seeds), threads)


def write_trajectory_csv(traj: Sequence[TrajectoryPoint], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["f", "re_r", "im_r", "residual", "im_over_f", "branch"])
    for q in traj:
        w.writerow([fmt(q.f), fmt(q.r.real), fmt(q.r.imag), fmt(q.residual), fmt(q.im_over_f), q.branch])


def write_mu_sweep_csv(points: Sequence[MuSweepPoint], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["mu", "re_r0", "im_r0", "residual"])
    for q in points:
        w.writerow([fmt(q.mu), fmt(q.r0.real), fmt(q.r0.imag), fmt(q.residual)])


def fmt(x: float) -> str:
    """17 significant digits, stable across platforms."""
    return format(float(x), ".17g")


def instability_report(traj: Sequence[TrajectoryPoint], r0: complex, f_cut: Optional[float] = None,
                       alpha: float = 0.05) -> InstabilityReport:
    """Bounded |Im r|/f (no significant upward trend as f decreases) and distance from r0."""
    if not traj:
        raise ValueError("empty trajectory")
    pts = sorted(traj, key=lambda p: -p.f)
    ratios = np.array([p.im_over_f for p in pts])
    c0 = float(ratios.max())
    if len(pts) >= 3 and np.ptp(ratios) > 0:
        res = kendalltau(np.arange(len(pts)), ratios, alternative="greater")
        tau, pval = float(res.statistic), float(res.pvalue)
    else:
        tau, pval = 0.0, 1.0
    bounded = not (tau > 0 and pval < alpha)
    cut = 0.1 * abs(r0.imag) if f_cut is None else f_cut
    tail = [p for p in pts if p.f <= cut * (1 + 1e-12)] or [pts[-1]]
    dmin = float(min(abs(p.r - r0) for p in tail))
    unstable = bounded and dmin >= abs(r0.imag) / 2
    return InstabilityReport(c0, dmin, "unstable" if unstable else "inconclusive",
                             (pts[-1].f, pts[0].f), tau, pval, bounded)


def mu_sweep(mu_grid: Sequence[float], F_of_mu: Optional[Callable[[float], Callable]] = None,
             seed: complex = 1 - 0.001j, tol: float = 1e-13) -> list[MuSweepPoint]:
    """f = 0 resonance r0(mu), continued in mu from the smallest value upward."""
    from .profiles import make_gaussian

    if F_of_mu is None:
        def F_of_mu(mu):
            p = make_gaussian(mu)
            return lambda z: F_model1(z, 0.0, p)
    mus = sorted(float(m) for m in mu_grid)
    if any(not 0 < m <= 0.85 for m in mus):
        raise ValueError("mu values must lie in (0, 0.85]")
    out = []
    z = complex(seed)
    prev = []
    for mu in mus:
        guess = z
        if len(prev) >= 2:
            (m1, z1), (m2, z2) = prev[-2], prev[-1]
            guess = z2 + (z2 - z1) * (mu - m2) / (m2 - m1)
        rec = newton(F_of_mu(mu), guess, tol)
        z = rec.z
        prev.append((mu, z))
        out.append(MuSweepPoint(mu, z, rec.residual))
    return out
