"""psi_f, resolvent matrix elements (direct and continued) and the functions F.

Conventions: phi_hat is the Fourier-side profile, psi_f(x) is
(1/sqrt(2 pi)) int exp(-i(k^3/(3f) - k x)) phi_hat(k) dk along a contour in the
lower half plane, and the reflected transform is conj(psi_f(conj x)).
"""
from __future__ import annotations

import cmath
import math
import threading
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .contours import (ContourPath, PathError, Region, build_gamma_alpha, build_gamma_prime,
                       build_semicircle, build_steepest, ray_in, ray_out, segment, build_C_minus,
                       build_C_plus)
from .numerics import (ScaledComplex, erf_complex_scaled, principal_sqrt, scaled_exp)
from .profiles import Profile
from .quadrature import CubicPhase, NonConvergence, integrate, integrate_oscillatory, principal_value

SQRT2PI = math.sqrt(2 * math.pi)


class DomainError(ValueError):
    pass


class ResolventWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class EvalBudget:
    rel_tol: float = 1e-10
    max_evals: int = 20_000_000
    method: str = "auto"  # exact | expansion24 | leading26 | auto
    exact_threshold: float = 0.01

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.method not in ("exact", "expansion24", "leading26", "auto"):
            raise ValueError(f"unknown method {self.method!r}")


DEFAULT_BUDGET = EvalBudget()


@dataclass(frozen=True)
class SpectralPoint:
    z: complex
    sheet: str = "continued"  # physical | continued
    f: float = 0.0

    def validate(self, p: Optional[Profile] = None) -> None:
        z = complex(self.z)
        if self.f < 0:
            raise DomainError("f must be >= 0")
        if self.sheet == "physical":
            if z.imag == 0:
                raise DomainError("physical sheet needs Im z != 0")
            return
        if self.f > 0:
            return
        if z.imag == 0 and z.real <= 0:
            raise DomainError("z on (-inf, 0]")
        if z.imag < 0 and p is not None and p.region.kind == "strip":
            if principal_sqrt(z).imag <= -p.region.k0:
                raise DomainError("sqrt(z) below the analyticity strip")


# ---------------------------------------------------------------- psi_f

def _alpha(region: Region) -> float:
    return min(0.5, 0.5 * region.margin())


def horizontal_line(depth: float) -> ContourPath:
    c = complex(0.0, -depth)
    return ContourPath((ray_in(c, -1.0, "line-"), ray_out(c, 1.0, "line+")), 1.0, None, "line")


def choose_psi_path(z: complex, f: float, region: Region) -> tuple[ContourPath, str]:
    """Contour for int exp(-i(k^3/3 - k z)/f) a(k) dk: gamma_alpha when the
    exponent is mild, otherwise the saddle contour."""
    s = principal_sqrt(z) if z != 0 else 0j
    w = abs(z) ** 1.5 / f
    alpha = _alpha(region)
    if w < 5:
        N = max(1.0, math.sqrt(max(z.real, 0.0) + alpha ** 2) + 0.5)
        return build_gamma_alpha(alpha, N, region), "gamma_alpha"
    if s.real >= 0.25 * abs(s):
        try:
            minus, plus = build_gamma_prime(z, region=region)
            return minus + plus, "gamma_prime"
        except PathError:
            pass
    depth = min(abs(s.imag), 0.9 * region.margin())
    return horizontal_line(depth), "line"


def transform(z: complex, f: float, amp: Callable, path: ContourPath, rel_tol: float = 1e-10,
              max_evals: int = 20_000_000) -> ScaledComplex:
    """int_path exp(-i(k^3/3 - k z)/f) amp(k) dk."""
    return integrate_oscillatory(path, CubicPhase(z), amp, 1.0 / f, rel_tol, max_evals=max_evals).value


class _PsiCache:
    def __init__(self, limit: int = 200_000):
        self.data: dict = {}
        self.limit = limit
        self.lock = threading.Lock()

    def get(self, key):
        return self.data.get(key)

    def put(self, key, value):
        # identical keys produce identical values, so last writer wins harmlessly
        with self.lock:
            if len(self.data) >= self.limit:
                self.data.clear()
            self.data[key] = value


PSI_CACHE = _PsiCache()


def psi_f(x: complex, f: float, p: Profile, budget: EvalBudget = DEFAULT_BUDGET,
          reflected: bool = False, path: Optional[ContourPath] = None) -> ScaledComplex:
    """psi_f(x), or conj(psi_f(conj x)) when reflected=True."""
    if not f > 0:
        raise DomainError("psi_f needs f > 0")
    x = complex(x)
    key = (float(f), p.key, x.real, x.imag, reflected, budget.rel_tol)
    cacheable = path is None
    if cacheable:
        hit = PSI_CACHE.get(key)
        if hit is not None:
            return hit
    z = f * x
    if path is None:
        path, _ = choose_psi_path(z, f, p.region)
    if reflected and p.reflection_symmetric:
        # psi_f is real on the real axis, so the reflected transform is psi_f itself
        return psi_f(x, f, p, budget)
    if reflected:
        def amp(k):
            return p.eval_conj(-k)
    else:
        amp = p.eval
    val = transform(z, f, amp, path, budget.rel_tol, budget.max_evals) / SQRT2PI
    if cacheable:
        PSI_CACHE.put(key, val)
    return val


def psi_f_reflected(x: complex, f: float, p: Profile, budget: EvalBudget = DEFAULT_BUDGET) -> ScaledComplex:
    return psi_f(x, f, p, budget, reflected=True)


def psi_abs2_real(xs: np.ndarray, f: float, p: Profile, budget: EvalBudget = DEFAULT_BUDGET) -> np.ndarray:
    """|psi_f(x)|^2 for real x (one transform per point, cached)."""
    out = np.empty(len(xs))
    for i, x in enumerate(np.asarray(xs).real):
        v = psi_f(complex(x), f, p, budget)
        out[i] = abs(v) ** 2 if v.log_abs() > -700 else 0.0
    return out


def psi_norm(f: float, p: Profile, budget: EvalBudget = DEFAULT_BUDGET) -> float:
    """||psi_f||_2 by quadrature over the real x line."""
    def g(x):
        return psi_abs2_real(x, f, p, budget).astype(complex)

    def omega(pc, t):
        x = pc.k(t).real
        return 2 * np.sqrt(f * np.maximum(x, 0.0)) + 0.5

    path = ContourPath((ray_in(-1.0, -1.0), segment(-1.0, 1.0), ray_out(1.0, 1.0)))
    r = integrate(path, g, budget.rel_tol, omega=omega, tail_ratio=budget.rel_tol * 1e-3)
    return math.sqrt(r.complex().real)


# ---------------------------------------------------------------- time-domain route

def autocorrelation(p: Profile, f: float, s: np.ndarray) -> np.ndarray:
    """C(s) = (phi, exp(i(p^2 + f x) s) phi) for Gauss-polynomial profiles."""
    if p.poly is None:
        raise ValueError("closed-form autocorrelation needs a Gauss-polynomial profile")
    s = np.asarray(s, dtype=float)
    c = np.asarray(p.poly, dtype=complex)
    cc = np.conj(c)
    d = len(c) - 1
    a = f * s
    # conj-P(k + a) expanded in powers of k
    shifted = np.zeros(s.shape + (d + 1,), dtype=complex)
    for j in range(d + 1):
        for m in range(j + 1):
            shifted[..., m] += cc[j] * math.comb(j, m) * a ** (j - m)
    q = np.zeros(s.shape + (2 * d + 1,), dtype=complex)
    for i in range(d + 1):
        q[..., i:i + d + 1] += c[i] * shifted
    A = 1.0 - 1j * s
    mom = np.zeros(s.shape + (2 * d + 1,), dtype=complex)
    mom[..., 0] = 1.0
    if 2 * d >= 1:
        mom[..., 1] = -a / 2
    for n in range(1, 2 * d):
        mom[..., n + 1] = (-a / 2) * mom[..., n] + (n / (2 * A)) * mom[..., n - 1]
    poly = np.sum(q * mom, axis=-1)
    return np.sqrt(math.pi / A) * np.exp(-f * f * s * s / 4 + 1j * f * f * s ** 3 / 12) * poly


def _time_integral(z: complex, f: float, p: Profile, upper: bool, rel_tol: float) -> complex:
    """upper: i int_0^inf e^{izs} conj C(s) ds; else -i int_0^inf e^{-izs} C(s) ds."""
    if upper:
        def g(s):
            return np.exp(1j * z * s.real) * np.conj(autocorrelation(p, f, s.real))
    else:
        def g(s):
            return np.exp(-1j * z * s.real) * autocorrelation(p, f, s.real)

    def omega(pc, t):
        s = pc.k(t).real
        return np.abs(z.real - f * f * s * s / 4) + 0.5

    path = ContourPath((ray_out(0.0, 1.0, "s"),))
    val = integrate(path, g, rel_tol, omega=omega).complex()
    return 1j * val if upper else -1j * val


# ---------------------------------------------------------------- x-space route

def _x_integrand_complex(f: float, p: Profile, budget: EvalBudget, w: complex):
    def g(x):
        out = np.empty(len(x), dtype=complex)
        for i, xi in enumerate(x):
            xi = complex(xi)
            if xi.imag == 0:
                # on the real line the reflected transform is the conjugate
                v = psi_f(xi, f, p, budget)
                gv = abs(v) ** 2 if v.log_abs() > -700 else 0.0
            else:
                v = psi_f(xi, f, p, budget) * psi_f(xi, f, p, budget, reflected=True)
                gv = v.to_complex()
            out[i] = gv
        return out
    return g


def _xspace(z: complex, f: float, p: Profile, budget: EvalBudget, continued: bool) -> ScaledComplex:
    w = complex(z) / f
    G = _x_integrand_complex(f, p, budget, w)
    c = w.real
    L = 4.0
    a, b = c - L, c + L

    def omega(pc, t):
        x = pc.k(t).real
        return 2 * np.sqrt(f * np.maximum(x, 0.0)) + 0.5

    tr = budget.rel_tol * 1e-3
    if w.imag == 0:
        if not continued:
            raise DomainError("direct resolvent needs Im z != 0")
        rho = 0.5
        arc = build_semicircle(c, rho, "upper", "cw")
        path = (ContourPath((ray_in(a, -1.0), segment(a, c - rho))) + arc
                + ContourPath((segment(c + rho, b), ray_out(b, 1.0))))
        val = integrate(path, lambda x: G(x) / (x - w), budget.rel_tol, omega=omega, tail_ratio=tr).complex()
        # the arc passes above the pole, so the residue term restores the limit from C+
        return ScaledComplex.from_complex(val / f) + jump_term(z, f, p, budget)
    gw_s = psi_f(w, f, p, budget) * psi_f(w, f, p, budget, reflected=True)
    if abs(w.imag) >= 2:
        path = ContourPath((ray_in(a, -1.0), segment(a, b), ray_out(b, 1.0)))
        val = integrate(path, lambda x: G(x) / (x - w), budget.rel_tol, omega=omega, tail_ratio=tr).complex()
        res = ScaledComplex.from_complex(val / f)
    else:
        gw = gw_s.to_complex()
        inner = ContourPath((segment(a, c), segment(c, b)))
        v1 = integrate(inner, lambda x: (G(x) - gw) / (x - w), budget.rel_tol, omega=omega,
                       abs_tol=budget.rel_tol * 1e-3 * max(abs(gw), 1e-300)).complex()
        tails = ContourPath((ray_in(a, -1.0),)) + ContourPath((ray_out(b, 1.0),))
        v2 = integrate(tails, lambda x: G(x) / (x - w), budget.rel_tol, omega=omega, tail_ratio=tr,
                       abs_tol=1e-300).complex()
        v3 = gw * (cmath.log(b - w) - cmath.log(a - w))
        res = ScaledComplex.from_complex((v1 + v2 + v3) / f)
    if continued and w.imag < 0:
        res = res + gw_s * (2j * math.pi / f)
    return res


# ---------------------------------------------------------------- resolvents, f > 0

def _route(p: Profile, route: str) -> str:
    if route == "auto":
        return "time" if p.is_gauss_poly else "xspace"
    if route not in ("time", "xspace"):
        raise ValueError(f"unknown route {route!r}")
    if route == "time" and not p.is_gauss_poly:
        raise ValueError("time-domain route needs a Gauss-polynomial profile")
    return route


def resolvent_direct(z: complex, f: float, p: Profile, budget: EvalBudget = DEFAULT_BUDGET,
                     route: str = "auto") -> ScaledComplex:
    """Physical-sheet matrix element (phi, (p^2 + f x - z)^{-1} phi), Im z != 0."""
    z = complex(z)
    if z.imag == 0:
        raise DomainError("direct resolvent needs Im z != 0")
    if not f > 0:
        return ScaledComplex.from_complex(resolvent_f0_plain(z, p, budget))
    r = _route(p, route)
    if r == "xspace":
        if abs(z.imag) / f < 1e-3:
            warnings.warn("pole close to the real x-axis: |Im z|/f < 1e-3", ResolventWarning)
        return _xspace(z, f, p, budget, continued=False)
    return ScaledComplex.from_complex(_time_integral(z, f, p, z.imag > 0, budget.rel_tol))


def jump_term(z: complex, f: float, p: Profile, budget: EvalBudget = DEFAULT_BUDGET) -> ScaledComplex:
    """(2 pi i / f) conj(psi_f(conj z / f)) psi_f(z / f)."""
    x = complex(z) / f
    return psi_f(x, f, p, budget, reflected=True) * psi_f(x, f, p, budget) * (2j * math.pi / f)


def resolvent_continued(z: complex, f: float, p: Profile, budget: EvalBudget = DEFAULT_BUDGET,
                        route: str = "auto") -> ScaledComplex:
    """Continuation of the matrix element from C+ across the real axis (entire in z for f > 0)."""
    z = complex(z)
    if not f > 0:
        return ScaledComplex.from_complex(resolvent_f0_continued(z, p, budget))
    r = _route(p, route)
    if r == "xspace":
        return _xspace(z, f, p, budget, continued=True)
    if z.imag >= 0:
        return ScaledComplex.from_complex(_time_integral(z, f, p, True, budget.rel_tol))
    direct = ScaledComplex.from_complex(_time_integral(z, f, p, False, budget.rel_tol))
    return jump_term(z, f, p, budget) + direct


# ---------------------------------------------------------------- f = 0

def gaussian_f0_continued(z: complex, mu: float) -> complex:
    """mu^2 i pi exp(-z)(1 + erf(i sqrt z))/sqrt z, valid in both half planes."""
    s = principal_sqrt(z)
    v = scaled_exp(-z) * (erf_complex_scaled(1j * s) + 1.0) * (1j * math.pi * mu * mu / s)
    return v.to_complex()


def gaussian_f0_plain(z: complex, mu: float) -> complex:
    """Ordinary integral int mu^2 e^{-k^2}/(k^2 - z) dk."""
    if complex(z).imag >= 0:
        return gaussian_f0_continued(z, mu)
    s = principal_sqrt(z)
    v = scaled_exp(-z) * (1.0 - erf_complex_scaled(1j * s)) * (-1j * math.pi * mu * mu / s)
    return v.to_complex()


def _h(p: Profile, k):
    k = np.asarray(k, dtype=complex)
    return p.pair(k) + p.pair(-k)


def resolvent_f0_plain(z: complex, p: Profile, budget: EvalBudget = DEFAULT_BUDGET) -> complex:
    """int |phi_hat|^2/(k^2 - z) dk as an ordinary integral; on (0, inf) the limit from above."""
    z = complex(z)
    if z.imag == 0 and z.real <= 0:
        raise DomainError("z on (-inf, 0]")
    s = principal_sqrt(z)
    hs = complex(_h(p, np.array([s]))[0])
    L = max(2 * abs(s), s.real + 12.0)
    tol = budget.rel_tol

    def sub(k):
        return (_h(p, k.real) - hs) / (k.real - s)

    if s.imag == 0:
        seg = ContourPath((segment(0.0, s), segment(s, L)))
        log_minus_s = complex(math.log(s.real), -math.pi)
    else:
        seg = ContourPath((segment(0.0, L),))
        log_minus_s = cmath.log(-s)
    scale = max(abs(hs), float(np.max(np.abs(_h(p, np.linspace(0, L, 64))))), 1e-300)
    i1 = integrate(seg, sub, tol, abs_tol=tol * 1e-2 * scale).complex()
    i1 += hs * (cmath.log(L - s) - log_minus_s)
    tail = integrate(ContourPath((ray_out(L, 1.0),)), lambda k: _h(p, k.real) / (k.real - s), tol,
                     abs_tol=tol * 1e-2 * scale).complex()
    i2 = integrate(ContourPath((segment(0.0, L), ray_out(L, 1.0))), lambda k: _h(p, k.real) / (k.real + s),
                   tol, abs_tol=tol * 1e-2 * scale).complex()
    return (i1 + tail - i2) / (2 * s)


def residue_term(z: complex, p: Profile) -> complex:
    """(i pi/sqrt z)(phi(sqrt z) conj-phi(sqrt z) + phi(-sqrt z) conj-phi(-sqrt z))."""
    s = principal_sqrt(z)
    return complex(1j * math.pi / s * _h(p, np.array([s]))[0])


def resolvent_f0_continued(z: complex, p: Profile, budget: EvalBudget = DEFAULT_BUDGET,
                           fast: bool = True) -> complex:
    """Continued f = 0 matrix element: plain integral plus the residue below the axis."""
    z = complex(z)
    SpectralPoint(z, "continued", 0.0).validate(p)
    if fast and p.is_pure_gaussian:
        return gaussian_f0_continued(z, abs(p.poly[0]))
    plain = resolvent_f0_plain(z, p, budget)
    if z.imag < 0:
        plain += residue_term(z, p)
    return plain


def pv_part(z: float, p: Profile, rel_tol: float = 1e-10) -> float:
    """P(z) = (1/(2 sqrt z))[PV int |phi|^2/(k - sqrt z) - PV int |phi|^2/(k + sqrt z)], z > 0."""
    s = math.sqrt(z)
    a = principal_value(p.abs2_real, s, rel_tol)
    b = principal_value(p.abs2_real, -s, rel_tol)
    return (a - b) / (2 * s)


# ---------------------------------------------------------------- small-f expansions

@dataclass
class SteepestIntegrals:
    I1: ScaledComplex
    I2: ScaledComplex
    I3: ScaledComplex
    I4: ScaledComplex
    I5: ScaledComplex
    I6: ScaledComplex

    def plus(self) -> ScaledComplex:
        return self.I1 + self.I2 + self.I3

    def minus(self) -> ScaledComplex:
        return self.I4 + self.I5 - self.I6


def steepest_integrals(z: complex, f: float, p: Profile, budget: EvalBudget = DEFAULT_BUDGET,
                       amp: Optional[Callable] = None, delta: Optional[float] = None) -> SteepestIntegrals:
    """The six pieces of the saddle decomposition of the C-minus/C-plus integrals."""
    z = complex(z)
    amp = p.eval if amp is None else amp
    s = principal_sqrt(z)
    _, gm = build_steepest(z, "minus", delta, region=p.region)
    _, gp = build_steepest(z, "plus", delta, region=p.region)
    tail_m, curve_m = gm.pieces
    curve_p, tail_p = gp.pieces

    def T(*pieces):
        return transform(z, f, amp, ContourPath(tuple(pieces)), budget.rel_tol, budget.max_evals)

    I1 = T(segment(0.0, s))
    I2 = T(curve_p)
    I3 = T(tail_p)
    I4 = T(segment(-s, 0.0))
    I5 = T(curve_m)
    I6 = T(tail_m.flipped())  # outward from the curve end to -infinity
    return SteepestIntegrals(I1, I2, I3, I4, I5, I6)


def c_pm_integrals(z: complex, f: float, p: Profile, alpha: float = 0.3,
                   budget: EvalBudget = DEFAULT_BUDGET, amp: Optional[Callable] = None):
    """Direct quadrature over C-minus and C-plus (no saddle deformation)."""
    amp = p.eval if amp is None else amp
    return (transform(z, f, amp, build_C_minus(alpha), budget.rel_tol, budget.max_evals),
            transform(z, f, amp, build_C_plus(alpha), budget.rel_tol, budget.max_evals))


def resolvent_expansion24(z: complex, f: float, p: Profile, budget: EvalBudget = DEFAULT_BUDGET,
                          delta: Optional[float] = None) -> ScaledComplex:
    """Small-f expansion through the saddle contour, error O(f)."""
    z = complex(z)
    minus, plus = build_gamma_prime(z, delta=delta, region=p.region)
    full = minus + plus

    def ampA(k):
        return p.eval_conj(-k)

    tol = budget.rel_tol
    A_full = transform(z, f, ampA, full, tol)
    B_full = transform(z, f, p.eval, full, tol)
    A_neg = transform(z, f, ampA, minus, tol)
    B_neg = transform(z, f, p.eval, minus, tol)
    i_f = 1j / f
    out = A_full * B_full * i_f - A_neg * B_neg * i_f
    out = out + (A_neg * p.boundary_right + B_neg * p.boundary_left.conjugate()) / z
    return out + resolvent_f0_plain(z, p, budget)


def leading_exponent(z: complex, f: float) -> complex:
    """i (4/(3f)) z^{3/2} with the principal branch."""
    s = principal_sqrt(z)
    return 1j * 4.0 / (3.0 * f) * s ** 3


def resolvent_leading26(z: complex, f: float, p: Profile, budget: EvalBudget = DEFAULT_BUDGET) -> ScaledComplex:
    """Leading order: (pi/sqrt z) phi(sqrt z) conj-phi(-sqrt z) e^{i 4 z^{3/2}/(3f)} + f=0 continued."""
    z = complex(z)
    s = principal_sqrt(z)
    coef = math.pi / s * complex(p.eval(np.array([s]))[0] * p.eval_conj(np.array([-s]))[0])
    lead = scaled_exp(leading_exponent(z, f)) * coef
    return lead + resolvent_f0_continued(z, p, budget)


# ---------------------------------------------------------------- F functions

def _continued(z: complex, f: float, p: Profile, budget: EvalBudget) -> ScaledComplex:
    if f == 0:
        return ScaledComplex.from_complex(resolvent_f0_continued(z, p, budget))
    m = budget.method
    if m == "auto":
        m = "exact" if (p.is_gauss_poly or f >= budget.exact_threshold) else "expansion24"
    if m == "exact":
        return resolvent_continued(z, f, p, budget)
    if m == "expansion24":
        return resolvent_expansion24(z, f, p, budget)
    return resolvent_leading26(z, f, p, budget)


def F_model1(z: complex, f: float, p: Profile, budget: EvalBudget = DEFAULT_BUDGET) -> ScaledComplex:
    """1 - z - (phi, R_f(z) phi), continued."""
    z = complex(z)
    return -_continued(z, f, p, budget) + (1.0 - z)


def F_model2(z: complex, f: float, p: Profile, budget: EvalBudget = DEFAULT_BUDGET) -> ScaledComplex:
    """(phi_eps, R_f(z) phi_eps) - 1 for a profile built by make_model2.

    At f = 0 this is the closed form
    ((z-1)||psi0||^2 + (eps^2 + (z-1)^2)(psi0, (p^2-z)^{-1} psi0)) / |D|.
    """
    z = complex(z)
    if "psi0" not in p.params:
        raise ValueError("F_model2 needs a profile from make_model2")
    if f == 0:
        psi0 = p.params["psi0"]
        eps = p.params["epsilon"]
        D = p.params["D"]
        R = resolvent_f0_continued(z, psi0, budget)
        val = ((z - 1) * psi0.l2_norm ** 2 + (eps * eps + (z - 1) ** 2) * R) / abs(D)
        return ScaledComplex.from_complex(val)
    return _continued(z, f, p, budget) - 1.0


def model2_r0_formula(p: Profile, rel_tol: float = 1e-12) -> complex:
    """1 - (eps^2/||psi0||^2)(P.V.(psi0,(p^2-1)^{-1}psi0) + (i pi/2)(|psi0(1)|^2 + |psi0(-1)|^2))."""
    psi0 = p.params["psi0"]
    eps = p.params["epsilon"]
    pv = pv_part(1.0, psi0, rel_tol)
    a = psi0.abs2_real(np.array([1.0, -1.0]))
    return 1 - eps * eps / psi0.l2_norm ** 2 * (pv + 0.5j * math.pi * float(a.sum()))


def bound_state_condition(lam: float, p: Profile, rel_tol: float = 1e-12) -> float:
    """int |phi_hat|^2/((k^2 + |lam|)(1 + |lam|)) dk; a bound state at lam < 0 iff this equals 1."""
    if not lam < 0:
        raise DomainError("lambda must be negative")
    a = abs(lam)
    path = ContourPath((ray_in(0.0, -1.0), ray_out(0.0, 1.0)))
    r = integrate(path, lambda k: (p.abs2_real(k.real) / ((k.real ** 2 + a) * (1 + a))).astype(complex),
                  rel_tol, abs_tol=1e-300)
    return float(r.complex().real)


def find_bound_state(p: Profile, lo: float = -50.0, hi: float = -1e-8) -> Optional[float]:
    """Bisection for the eigenvalue below 0; None if the condition never reaches 1."""
    from scipy.optimize import brentq
    g = lambda lam: bound_state_condition(lam, p) - 1.0
    if g(hi) < 0 or g(lo) > 0:
        return None
    return brentq(g, lo, hi, xtol=1e-13)


def model_F(model, p: Profile, budget: EvalBudget = DEFAULT_BUDGET) -> Callable[[complex, float], ScaledComplex]:
    """F(z, f) for "model1", "model2", or a user callable passed through unchanged."""
    if callable(model):
        return model
    if model == "model1":
        return lambda z, f: F_model1(z, f, p, budget)
    if model == "model2":
        return lambda z, f: F_model2(z, f, p, budget)
    raise ValueError(f"unknown model {model!r}")


# ---------------------------------------------------------------- order-law diagnostics

def _loglog_slope(x, y) -> float:
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])


@dataclass
class OrderLawReport:
    z: complex
    fs: tuple[float, ...]
    err24: tuple[float, ...]
    err26: tuple[float, ...]
    slope24: float
    slope26: float

    def deviations(self) -> dict:
        return {"expansion24": abs(self.slope24 - 1.0), "leading26": abs(self.slope26 - 0.5)}


def order_law_fit(z: complex, fs, p: Profile, rel_tol: float = 1e-12) -> OrderLawReport:
    """Errors of the expansion24/leading26 approximations against the exact continuation, slope-fitted in f."""
    fs = tuple(float(f) for f in fs)
    b = EvalBudget(rel_tol=rel_tol)
    e24, e26 = [], []
    for f in fs:
        ex = resolvent_continued(z, f, p, b).to_complex()
        e24.append(abs(resolvent_expansion24(z, f, p).to_complex() - ex))
        e26.append(abs(resolvent_leading26(z, f, p).to_complex() - ex))
    return OrderLawReport(complex(z), fs, tuple(e24), tuple(e26), _loglog_slope(fs, e24), _loglog_slope(fs, e26))


@dataclass
class DecayReport:
    fs: tuple[float, ...]
    log_abs: tuple[float, ...]
    slope: float  # d log|I6| / d(1/f); negative for exponential decay


def i6_decay(z: complex, fs, p: Profile, budget: EvalBudget = DEFAULT_BUDGET) -> DecayReport:
    fs = tuple(float(f) for f in fs)
    logs = tuple(steepest_integrals(z, f, p, budget).I6.log_abs() for f in fs)
    slope = float(np.polyfit(1.0 / np.asarray(fs), np.asarray(logs), 1)[0])
    return DecayReport(fs, logs, slope)
