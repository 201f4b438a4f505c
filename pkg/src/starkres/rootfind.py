"""Zeros of the continued F: damped Newton, argument-principle counting and window scans."""
from __future__ import annotations

import cmath
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .numerics import ScaledComplex, as_scaled

Fun = Callable[[complex], object]


class NoConvergence(RuntimeError):
    def __init__(self, message: str, last: Optional[complex] = None):
        super().__init__(message)
        self.last = last


class BoundaryZero(RuntimeError):
    pass


class NonIntegerWinding(RuntimeError):
    pass


def default_threads() -> int:
    env = os.environ.get("STARKRES_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def _map(fn, items, threads: int):
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


@dataclass
class ResonanceRecord:
    z: complex
    residual: float
    newton_iters: int
    f: float = 0.0
    model: str = "model1"
    count_certified: bool = False
    multiplicity: int = 1
    residual_log: float = -math.inf
    step: float = 0.0

    @property
    def kind(self) -> str:
        if self.z.imag < 0:
            return "resonance"
        if self.z.imag == 0:
            return "eigenvalue-candidate"
        return "upper-half-plane"

    def as_dict(self) -> dict:
        return {"re": self.z.real, "im": self.z.imag, "residual": self.residual,
                "residual_log": self.residual_log, "newton_iters": self.newton_iters, "f": self.f,
                "model": self.model, "count_certified": self.count_certified,
                "multiplicity": self.multiplicity, "kind": self.kind}


@dataclass
class WindingReport:
    rectangle: tuple[complex, complex]
    count: int
    boundary_min_abs_F: float
    raw: float = 0.0
    evaluations: int = 0
    perturbations: int = 0


def _scaled(v) -> ScaledComplex:
    return as_scaled(v)


def newton(Fh: Fun, z0: complex, tol: float = 1e-12, max_iter: int = 50, *,
           valid: Optional[Callable[[complex], bool]] = None, f: float = 0.0, model: str = "model1",
           max_halvings: int = 12) -> ResonanceRecord:
    """Damped complex Newton with central-difference derivatives.

    Converged when the last Newton correction |F/F'| is below tol*max(1, |z|).
    """
    z = complex(z0)
    Fz = _scaled(Fh(z))
    if Fz.is_zero():
        return ResonanceRecord(z, 0.0, 0, f, model, residual_log=-math.inf)
    for it in range(1, max_iter + 1):
        h = max(1e-7, 1e-7 * abs(z))
        d = (_scaled(Fh(z + h)) - _scaled(Fh(z - h))) / (2 * h)
        if d.is_zero():
            raise NoConvergence("vanishing derivative", z)
        step = (Fz / d).to_complex()
        lam = 1.0
        for _ in range(max_halvings):
            zn = z - lam * step
            if valid is not None and not valid(zn):
                lam *= 0.5
                continue
            Fn = _scaled(Fh(zn))
            if Fn.log_abs() < Fz.log_abs() or abs(lam * step) <= tol * max(1.0, abs(z)):
                break
            lam *= 0.5
        else:
            raise NoConvergence("damping failed to reduce |F|", z)
        if valid is not None and not valid(zn):
            raise NoConvergence("step left the valid domain", z)
        z, Fz = zn, Fn
        if abs(lam * step) <= tol * max(1.0, abs(z)):
            return ResonanceRecord(z, abs(Fz), it, f, model, residual_log=Fz.log_abs(), step=abs(lam * step))
    raise NoConvergence(f"no convergence after {max_iter} iterations", z)


def _rect_corners(rect) -> tuple[float, float, float, float]:
    a, b = complex(rect[0]), complex(rect[1])
    return min(a.real, b.real), max(a.real, b.real), min(a.imag, b.imag), max(a.imag, b.imag)


def _boundary_params(n: int) -> list[np.ndarray]:
    return [np.linspace(0.0, 1.0, n + 1)[:-1] for _ in range(4)]


def _boundary_point(rect, side: int, t: float) -> complex:
    x0, x1, y0, y1 = rect
    # counterclockwise: bottom, right, top, left
    if side == 0:
        return complex(x0 + (x1 - x0) * t, y0)
    if side == 1:
        return complex(x1, y0 + (y1 - y0) * t)
    if side == 2:
        return complex(x1 - (x1 - x0) * t, y1)
    return complex(x0, y1 - (y1 - y0) * t)


def _winding_once(Fh: Fun, rect, samples: int, threads: int, max_evals: int):
    ts = [(s, t) for s in range(4) for t in np.linspace(0.0, 1.0, samples + 1)[:-1]]
    pts = [_boundary_point(rect, s, t) for s, t in ts]
    vals = _map(lambda z: _scaled(Fh(z)), pts, threads)
    # close the loop
    params = [s + t for s, t in ts] + [4.0]
    vals = vals + [vals[0]]
    evals = len(pts)
    total = 0.0
    min_abs = min(v.log_abs() for v in vals)
    stack = [(params[i], vals[i], params[i + 1], vals[i + 1], 0) for i in range(len(params) - 1)]
    stack.reverse()
    while stack:
        pa, va, pb, vb, depth = stack.pop()
        d = cmath.phase(vb.mantissa / va.mantissa) if not (va.is_zero() or vb.is_zero()) else math.pi
        if abs(d) < math.pi / 2:
            total += d
            continue
        if depth > 30 or evals > max_evals:
            raise NonIntegerWinding("argument refinement budget exhausted")
        pm = 0.5 * (pa + pb)
        side = min(int(pm), 3)
        vm = _scaled(Fh(_boundary_point(rect, side, pm - side)))
        evals += 1
        min_abs = min(min_abs, vm.log_abs())
        stack.append((pm, vm, pb, vb, depth + 1))
        stack.append((pa, va, pm, vm, depth + 1))
    return total / (2 * math.pi), min_abs, evals, [v.log_abs() for v in vals]


def winding_count(Fh: Fun, rectangle, samples_per_side: int = 32, *, threads: int = 1,
                  max_evals: int = 20000, zero_ratio: float = 1e-9) -> WindingReport:
    """Number of zeros of F inside the rectangle by the argument principle."""
    rect = _rect_corners(rectangle)
    perturb = 0
    while True:
        n = samples_per_side
        near_zero = False
        for _ in range(4):
            try:
                raw, min_log, evals, logs = _winding_once(Fh, rect, n, threads, max_evals)
            except NonIntegerWinding:
                raw = math.nan
                break
            near_zero = min_log - float(np.median(logs)) < math.log(zero_ratio)
            if near_zero:
                break
            if abs(raw - round(raw)) <= 0.05:
                a, b = complex(rect[0], rect[2]), complex(rect[1], rect[3])
                return WindingReport((a, b), int(round(raw)), math.exp(min_log), raw, evals, perturb)
            n *= 2
        if perturb >= 3:
            if not math.isnan(raw) and near_zero:
                raise BoundaryZero("F vanishes on the boundary after 3 perturbations")
            raise NonIntegerWinding(f"winding {raw} not within 0.05 of an integer")
        # shift the boundary outward slightly and retry
        perturb += 1
        w, h = rect[1] - rect[0], rect[3] - rect[2]
        e = 0.0137 * perturb
        rect = (rect[0] - e * w, rect[1] + e * w, rect[2] - e * h, rect[3] + e * h)


@dataclass
class ScanResult:
    records: list[ResonanceRecord]
    winding: Optional[WindingReport]
    starts: int
    failures: int
    mismatch: bool = False
    diagnostics: list[str] = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.records)


def _inside(z: complex, rect, pad: float = 0.0) -> bool:
    x0, x1, y0, y1 = rect
    return x0 - pad <= z.real <= x1 + pad and y0 - pad <= z.imag <= y1 + pad


def dedupe(records: Sequence[ResonanceRecord], radius: float = 1e-6) -> list[ResonanceRecord]:
    out: list[ResonanceRecord] = []
    for r in sorted(records, key=lambda r: (r.z.real, r.z.imag)):
        for i, q in enumerate(out):
            if abs(q.z - r.z) <= radius:
                if r.residual < q.residual:
                    out[i] = r
                break
        else:
            out.append(r)
    return sorted(out, key=lambda r: (r.z.real, r.z.imag))


def scan_window(Fh: Fun, rectangle, grid: tuple[int, int] = (8, 4), *, tol: float = 1e-12,
                cluster_radius: float = 1e-6, threads: int = 1, certify: bool = True,
                f: float = 0.0, model: str = "model1", winding_samples: int = 32,
                valid: Optional[Callable[[complex], bool]] = None) -> ScanResult:
    """Newton from every grid node, deduplicated, cross-checked by the winding count."""
    rect = _rect_corners(rectangle)
    nx, ny = grid
    xs = np.linspace(rect[0], rect[1], nx + 2)[1:-1]
    ys = np.linspace(rect[2], rect[3], ny + 2)[1:-1]
    starts = [complex(x, y) for y in ys for x in xs]

    def run(z0):
        try:
            return newton(Fh, z0, tol, valid=valid, f=f, model=model)
        except NoConvergence:
            return None

    found = _map(run, starts, threads)
    failures = sum(r is None for r in found)
    inside = [r for r in found if r is not None and _inside(r.z, rect)]
    records = dedupe(inside, cluster_radius)
    diagnostics = []
    wr = None
    try:
        wr = winding_count(Fh, (complex(rect[0], rect[2]), complex(rect[1], rect[3])), winding_samples,
                           threads=threads)
    except (BoundaryZero, NonIntegerWinding) as exc:
        diagnostics.append(f"winding count failed: {exc}")
    mismatch = wr is None or wr.count != len(records)
    if wr is not None and mismatch:
        msg = f"scan found {len(records)} zeros but the winding count is {wr.count}"
        diagnostics.append(msg)
        warnings.warn(msg, RuntimeWarning)
    if certify:
        for r in records:
            others = [abs(q.z - r.z) for q in records if q is not r]
            rad = min([0.25 * d for d in others] + [0.25 * min(rect[1] - rect[0], rect[3] - rect[2]), 1e-2])
            try:
                w = winding_count(Fh, (r.z - rad * (1 + 1j), r.z + rad * (1 + 1j)), 16, threads=threads)
                r.count_certified = w.count == 1
                r.multiplicity = max(w.count, 1)
            except (BoundaryZero, NonIntegerWinding):
                r.count_certified = False
    return ScanResult(records, wr, len(starts), failures, mismatch, diagnostics)


@dataclass
class EigenvalueReport:
    lam: float
    F_residual: float
    psi_residual: float
    candidate: bool


def eigenvalue_check(lam: float, f: float, p, budget=None, threshold: float = 1e-6) -> EigenvalueReport:
    """|F_model1(lam)| and |psi_f(lam/f)| (relative to ||phi||); both small for an embedded eigenvalue."""
    from .resolvent import DEFAULT_BUDGET, F_model1, psi_f
    budget = budget or DEFAULT_BUDGET
    Fv = abs(_scaled(F_model1(complex(lam), f, p, budget)))
    if p.l2_norm == 0:
        return EigenvalueReport(lam, Fv, math.nan, Fv < threshold)
    pv = abs(psi_f(complex(lam) / f, f, p, budget)) / p.l2_norm
    return EigenvalueReport(lam, Fv, pv, Fv < threshold and pv < threshold)


def rouche_ratio(R: Fun, center: complex = 1.0, radius: float = 0.05, samples: int = 64) -> float:
    """max |R(z)| / radius on the circle |z - center| = radius.

    For F(z) = (center - z) - R(z) a value below 1 certifies, by Rouche, exactly
    one zero of F in the disc.  Values at or above 1 prove nothing either way.
    """
    if radius <= 0 or samples < 4:
        raise ValueError("need radius > 0 and samples >= 4")
    center = complex(center)
    worst = 0.0
    for t in np.linspace(0.0, 2 * math.pi, samples, endpoint=False):
        v = _scaled(R(center + radius * cmath.exp(1j * t)))
        worst = max(worst, abs(v.to_complex()))
    return worst / radius
