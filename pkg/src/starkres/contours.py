"""Integration paths in the complex k-plane.

Pieces are segments, parametrized curves or rays (semi-infinite straight
tails).  A piece contributes ``sign * int k'(t) g(k(t)) dt`` so an incoming
tail is a ray with sign -1.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .numerics import principal_sqrt


class PathError(ValueError):
    pass


@dataclass(frozen=True)
class Region:
    """Analyticity metadata of a profile: strip |Im k| < k0 or double sector |arg(+-k)| < theta0."""
    kind: str = "strip"
    k0: float = math.inf
    theta0: float = math.pi / 2

    def contains(self, k: np.ndarray) -> np.ndarray:
        k = np.asarray(k, dtype=complex)
        if self.kind == "strip":
            return np.abs(k.imag) < self.k0
        ang = np.abs(np.angle(k))
        ang = np.minimum(ang, math.pi - ang)
        return (ang < self.theta0) | (k == 0)

    def margin(self) -> float:
        return self.k0 if self.kind == "strip" else math.inf


@dataclass(frozen=True)
class Piece:
    kind: str  # segment | ray | curve
    a: complex = 0j
    b: complex = 0j
    direction: complex = 1.0
    fmap: Optional[Callable[[np.ndarray], np.ndarray]] = None
    dmap: Optional[Callable[[np.ndarray], np.ndarray]] = None
    t_lo: float = 0.0
    t_hi: float = 1.0
    sign: float = 1.0
    smooth: bool = True
    label: str = ""

    def k(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.kind == "segment":
            return self.a + (self.b - self.a) * t
        if self.kind == "ray":
            return self.a + self.direction * t
        return self.fmap(t)

    def dk(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.kind == "segment":
            return np.full(t.shape, self.b - self.a, dtype=complex)
        if self.kind == "ray":
            return np.full(t.shape, self.direction, dtype=complex)
        return self.dmap(t)

    @property
    def infinite(self) -> bool:
        return self.kind == "ray"

    def bounds(self) -> tuple[float, float]:
        if self.kind == "segment":
            return 0.0, 1.0
        if self.kind == "ray":
            return 0.0, math.inf
        return self.t_lo, self.t_hi

    def start(self) -> complex:
        """Point where traversal begins (respecting sign); inf for incoming rays."""
        lo, hi = self.bounds()
        if self.sign > 0:
            return complex(self.k(np.array(lo)))
        if self.infinite:
            return complex(np.inf)
        return complex(self.k(np.array(hi)))

    def end(self) -> complex:
        lo, hi = self.bounds()
        if self.sign > 0:
            if self.infinite:
                return complex(np.inf)
            return complex(self.k(np.array(hi)))
        return complex(self.k(np.array(lo)))

    def flipped(self) -> "Piece":
        return replace(self, sign=-self.sign)

    def t_limit(self, truncation: Optional[float]) -> float:
        """Finite upper parameter for rays, cut where |Re k| reaches the truncation."""
        if not self.infinite:
            return self.bounds()[1]
        T = 20.0 if truncation is None else truncation
        d = self.direction
        if abs(d.real) > 1e-14:
            return max((T - abs(self.a.real)) / abs(d.real), 0.0)
        return max(T - abs(self.a), 0.0) / abs(d)


@dataclass(frozen=True)
class ContourPath:
    pieces: tuple[Piece, ...]
    orientation: float = 1.0
    truncation: Optional[float] = None
    name: str = ""

    def traversal(self) -> list[Piece]:
        """Pieces in traversal order with orientation folded into their signs."""
        if self.orientation > 0:
            return list(self.pieces)
        return [p.flipped() for p in reversed(self.pieces)]

    def reversed(self) -> "ContourPath":
        return replace(self, orientation=-self.orientation)

    def __add__(self, other: "ContourPath") -> "ContourPath":
        return ContourPath(tuple(self.traversal()) + tuple(other.traversal()), 1.0,
                           self.truncation if other.truncation is None else other.truncation,
                           f"{self.name}+{other.name}")

    def with_truncation(self, T: float) -> "ContourPath":
        return replace(self, truncation=T)

    def sample(self, n: int = 64) -> list[np.ndarray]:
        out = []
        for p in self.traversal():
            lo, hi = p.bounds()
            if p.infinite:
                hi = p.t_limit(self.truncation)
            t = np.linspace(lo, hi, n)
            if p.sign < 0:
                t = t[::-1]
            out.append(p.k(t))
        return out

    def length(self) -> float:
        total = 0.0
        for p in self.pieces:
            lo, hi = p.bounds()
            if p.infinite:
                hi = p.t_limit(self.truncation)
            if p.kind in ("segment", "ray"):
                total += abs(p.dk(np.array([0.0]))[0]) * (hi - lo)
            else:
                x, w = np.polynomial.legendre.leggauss(64)
                t = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
                total += 0.5 * (hi - lo) * float(np.sum(w * np.abs(p.dk(t))))
        return total

    def check_continuity(self, tol: float = 1e-12) -> bool:
        pcs = self.traversal()
        for p, q in zip(pcs[:-1], pcs[1:]):
            e, s = p.end(), q.start()
            if not (np.isfinite(e) and np.isfinite(s)):
                return False
            if abs(e - s) > tol * max(1.0, abs(e)):
                return False
        return True


def segment(a: complex, b: complex, label: str = "") -> Piece:
    return Piece("segment", a=complex(a), b=complex(b), label=label)


def ray_out(a: complex, direction: complex, label: str = "") -> Piece:
    return Piece("ray", a=complex(a), direction=complex(direction), label=label)


def ray_in(a: complex, direction: complex, label: str = "") -> Piece:
    """Tail arriving at a from infinity along -direction ... i.e. traversed toward a."""
    return Piece("ray", a=complex(a), direction=complex(direction), sign=-1.0, label=label)


def build_gamma_alpha(alpha: float, N: float, region: Optional[Region] = None,
                      truncation: Optional[float] = None) -> ContourPath:
    if alpha <= 0 or N <= 0:
        raise PathError("alpha and N must be positive")
    if region is not None and alpha >= region.margin():
        raise PathError(f"alpha={alpha} outside analyticity margin {region.margin()}")
    lo, hi = complex(-N, -alpha), complex(N, -alpha)
    pieces = (
        ray_in(lo, -1.0, "tail-"),
        segment(lo, -N, "riser"),
        segment(-N, N, "real"),
        segment(N, hi, "drop"),
        ray_out(hi, 1.0, "tail+"),
    )
    return ContourPath(pieces, 1.0, truncation, f"gamma_{alpha}")


def build_C_minus(alpha: float) -> ContourPath:
    c = complex(-1.0, -alpha)
    return ContourPath((ray_in(c, -1.0, "C-tail"), segment(c, 0.0, "C-slope")), 1.0, None, "C-")


def build_C_plus(alpha: float) -> ContourPath:
    c = complex(1.0, -alpha)
    return ContourPath((segment(0.0, c, "C+slope"), ray_out(c, 1.0, "C+tail")), 1.0, None, "C+")


def build_C_pm(alpha: float, region: Optional[Region] = None) -> ContourPath:
    if alpha <= 0:
        raise PathError("alpha must be positive")
    if region is not None:
        cap = region.k0 if region.kind == "strip" else math.tan(region.theta0)
        if alpha >= cap:
            raise PathError(f"alpha={alpha} must be below {cap}")
    p = build_C_minus(alpha) + build_C_plus(alpha)
    return replace(p, name="C-uC+")


def build_semicircle(center: float, radius: float, half: str = "upper", orient: str = "cw") -> ContourPath:
    if radius <= 0:
        raise PathError("radius must be positive")
    c = complex(center)
    # upper half traversed clockwise runs from angle pi to 0
    if half == "upper":
        t_lo, t_hi = 0.0, math.pi
        cw_sign = -1.0
    else:
        t_lo, t_hi = -math.pi, 0.0
        cw_sign = 1.0

    def fmap(t):
        return c + radius * np.exp(1j * np.asarray(t))

    def dmap(t):
        return 1j * radius * np.exp(1j * np.asarray(t))

    sign = cw_sign if orient == "cw" else -cw_sign
    piece = Piece("curve", fmap=fmap, dmap=dmap, t_lo=t_lo, t_hi=t_hi, sign=sign, label=f"arc-{half}-{orient}")
    return ContourPath((piece,), 1.0, None, "semicircle")


# ---- steepest-descent curves through the saddles +-sqrt(z) ----

@dataclass(frozen=True)
class SteepestPathSpec:
    z: complex
    gamma: float
    nu: float
    side: str
    delta: float
    t0: float
    Theta0: float
    eps: float

    def residual(self, zeta: np.ndarray) -> np.ndarray:
        s = principal_sqrt(self.z)
        zeta = np.asarray(zeta, dtype=complex)
        if self.side == "plus":
            return np.real(zeta ** 3 / 3 + s * zeta ** 2)
        return np.real(zeta ** 3 / 3 - s * zeta ** 2)


@dataclass(frozen=True)
class RegionM:
    eps1: float = 0.05
    eps2: float = 0.1
    eps3: float = 0.05
    a: float = 3.0
    profile_kind: str = "strip"
    k0: float = 4.0
    theta0: float = math.pi / 2

    def contains(self, z: complex) -> bool:
        s = principal_sqrt(z)
        ang = math.atan2(s.imag, s.real)
        lim = min(math.pi / 3, self.theta0)
        if not (self.eps2 <= s.real <= self.a):
            return False
        if not (-lim + self.eps1 < ang < 0):
            return False
        if self.profile_kind == "strip" and s.imag < -self.k0 + self.eps3:
            return False
        return True


def _minus_curve(gamma: float, nu: float):
    def y(x):
        x = np.asarray(x, dtype=float)
        u = gamma - x
        a = nu / u
        return x * (a + np.sqrt(a * a + (gamma - x / 3) / u))

    def dy(x):
        x = np.asarray(x, dtype=float)
        u = gamma - x
        a = nu / u
        b = (gamma - x / 3) / u
        S = np.sqrt(a * a + b)
        da = nu / u ** 2
        db = 2 * gamma / (3 * u ** 2)
        dS = (2 * a * da + db) / (2 * S)
        return a + S + x * (da + dS)

    return y, dy


def _plus_curve(gamma: float, nu: float):
    def y(x):
        x = np.asarray(x, dtype=float)
        u = gamma + x
        a = nu / u
        return x * (a - np.sqrt(a * a + (gamma + x / 3) / u))

    def dy(x):
        x = np.asarray(x, dtype=float)
        u = gamma + x
        a = nu / u
        b = (gamma + x / 3) / u
        S = np.sqrt(a * a + b)
        da = -nu / u ** 2
        db = -2 * gamma / (3 * u ** 2)
        dS = (2 * a * da + db) / (2 * S)
        return a - S + x * (da - dS)

    return y, dy


def default_eps(k0: float = 4.0, eps2: float = 0.1) -> float:
    return min(0.05, k0 / 4, eps2 / 10)


def build_steepest(z: complex, side: str, delta: Optional[float] = None, eps: Optional[float] = None,
                   region: Optional[Region] = None) -> tuple[SteepestPathSpec, ContourPath]:
    """Saddle path through +sqrt(z) (side='plus', outward to +inf) or -sqrt(z)
    (side='minus', inward from -inf), in k-coordinates."""
    s = principal_sqrt(z)
    gamma, nu = s.real, -s.imag
    if gamma <= 0:
        raise PathError("steepest paths need Re sqrt(z) > 0")
    k0 = region.margin() if region is not None else math.inf
    if eps is None:
        eps = default_eps(min(k0, 4.0))
    if delta is None:
        delta = gamma / 10
    if side == "minus":
        y, dy = _minus_curve(gamma, nu)

        def theta(t0):
            return float(-y(-t0))

        if nu < eps:
            t0 = 2 * eps * math.sqrt(3)
        else:
            target = nu * (1 + eps)
            hi = max(delta, 1.0)
            while theta(hi) < target:
                hi *= 2
            t0 = brentq(lambda t: theta(t) - target, 1e-14, hi, xtol=1e-15, rtol=1e-15)
        Theta0 = theta(t0)
        end = complex(-t0, -Theta0) - s

        def fmap(t):
            return np.asarray(t) + 1j * y(t) - s

        def dmap(t):
            return 1.0 + 1j * dy(t)

        curve = Piece("curve", fmap=fmap, dmap=dmap, t_lo=-t0, t_hi=0.0, label="Gamma-")
        tail = ray_in(end, -1.0, "Gamma-tail")
        path = ContourPath((tail, curve), 1.0, None, "Gamma-")
        tail_im = nu - Theta0
    elif side == "plus":
        y, dy = _plus_curve(gamma, nu)

        def theta(t0):
            return float(-y(t0))

        t0 = delta
        if nu < 0 and theta(t0) <= -nu * (1 + eps):
            target = -nu * (1 + eps)
            hi = max(delta, 1.0)
            while theta(hi) < target:
                hi *= 2
            t0 = brentq(lambda t: theta(t) - target, 1e-14, hi, xtol=1e-15, rtol=1e-15)
        Theta0 = theta(t0)
        end = complex(t0, -Theta0) + s

        def fmap(t):
            return np.asarray(t) + 1j * y(t) + s

        def dmap(t):
            return 1.0 + 1j * dy(t)

        curve = Piece("curve", fmap=fmap, dmap=dmap, t_lo=0.0, t_hi=t0, label="Gamma+")
        tail = ray_out(end, 1.0, "Gamma+tail")
        path = ContourPath((curve, tail), 1.0, None, "Gamma+")
        tail_im = -nu - Theta0
    else:
        raise PathError(f"unknown side {side!r}")
    if abs(tail_im) >= k0:
        raise PathError(f"steepest tail at Im k={tail_im:.4g} leaves the analyticity strip k0={k0}")
    spec = SteepestPathSpec(complex(z), gamma, nu, side, float(delta), float(t0), float(Theta0), float(eps))
    return spec, path


def build_gamma_prime(z: complex, delta: Optional[float] = None, eps: Optional[float] = None,
                      region: Optional[Region] = None) -> tuple[ContourPath, ContourPath]:
    """Distorted C- and C+ through the saddles; returns (minus part, plus part) meeting at 0."""
    s = principal_sqrt(z)
    _, gm = build_steepest(z, "minus", delta, eps, region)
    _, gp = build_steepest(z, "plus", delta, eps, region)
    minus = gm + ContourPath((segment(-s, 0.0, "I4"),))
    plus = ContourPath((segment(0.0, s, "I1"),)) + gp
    return replace(minus, name="Gamma'-"), replace(plus, name="Gamma'+")


def validate_in_region(path: ContourPath, region: Region, samples: int = 64) -> tuple[bool, Optional[complex]]:
    samples = max(samples, 64)
    for pts in path.sample(samples):
        inside = region.contains(pts)
        if not np.all(inside):
            return False, complex(pts[np.argmin(inside)])
        # refine between samples where the boundary is close
        if region.kind == "strip" and np.isfinite(region.k0):
            close = np.abs(pts.imag) > 0.9 * region.k0
            if np.any(close):
                mid = 0.5 * (pts[1:] + pts[:-1])
                bad = ~region.contains(mid)
                if np.any(bad):
                    return False, complex(mid[np.argmax(bad)])
    return True, None


def dump_csv(path: ContourPath, fh, samples: int = 200) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["piece", "t", "re_k", "im_k"])
    for i, p in enumerate(path.traversal()):
        lo, hi = p.bounds()
        if p.infinite:
            hi = p.t_limit(path.truncation)
        t = np.linspace(lo, hi, samples)
        if p.sign < 0:
            t = t[::-1]
        for tt, kk in zip(t, p.k(t)):
            w.writerow([i, f"{tt:.17g}", f"{kk.real:.17g}", f"{kk.imag:.17g}"])
