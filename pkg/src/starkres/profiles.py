"""Fourier-side coupling profiles with analyticity metadata.

Shipped profiles are of the form P(k)*exp(-k^2/2) with a complex polynomial P
("Gauss-polynomial" class), which keeps norms and moments exact.  Custom
profiles only need eval/eval_conj closures and a region.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .contours import ContourPath, Region, ray_in, ray_out, segment

WORKING_K0 = 4.0


class NormSignError(ValueError):
    """(psi0, (1 - p^2) psi0) is not negative."""


@dataclass(frozen=True)
class Profile:
    eval: Callable[[np.ndarray], np.ndarray]
    eval_conj: Callable[[np.ndarray], np.ndarray]
    region: Region
    l2_norm: float
    boundary_right: complex
    boundary_left: complex
    description: str = ""
    key: str = ""
    # ascending coefficients of P when the profile is P(k) exp(-k^2/2)
    poly: Optional[tuple[complex, ...]] = None
    params: dict = field(default_factory=dict, compare=False)

    def __call__(self, k):
        return self.eval(np.asarray(k, dtype=complex))

    @property
    def is_gauss_poly(self) -> bool:
        return self.poly is not None

    @property
    def reflection_symmetric(self) -> bool:
        """eval_conj(-k) == eval(k), i.e. phi is real in position space."""
        if self.poly is None:
            return bool(self.params.get("real_space_real", False))
        return all(abs(complex(c).conjugate() * (-1) ** n - c) == 0 for n, c in enumerate(self.poly))

    @property
    def is_pure_gaussian(self) -> bool:
        return self.poly is not None and len(self.poly) == 1

    def abs2_real(self, k: np.ndarray) -> np.ndarray:
        """|phi_hat(k)|^2 for real k."""
        v = self.eval(np.asarray(k, dtype=float).astype(complex))
        return (v * np.conj(v)).real

    def pair(self, k: np.ndarray) -> np.ndarray:
        """Analytic continuation of |phi_hat|^2 off the real line: phi_hat(k)*eval_conj(k)."""
        k = np.asarray(k, dtype=complex)
        return self.eval(k) * self.eval_conj(k)


def _poly_eval(c: np.ndarray, k: np.ndarray) -> np.ndarray:
    return np.polynomial.polynomial.polyval(k, c)


def gauss_moment(n: int) -> float:
    """int k^n exp(-k^2) dk over R."""
    if n % 2:
        return 0.0
    return math.gamma((n + 1) / 2)


def _poly_l2(c: np.ndarray) -> float:
    P = np.polynomial.polynomial
    sq = P.polymul(c, np.conj(c))
    return math.sqrt(sum((sq[n] * gauss_moment(n)).real for n in range(len(sq))))


def gauss_poly(coeffs, k0: float = WORKING_K0, description: str = "", key: str = "", params=None) -> Profile:
    c = np.asarray(coeffs, dtype=complex)
    c = np.trim_zeros(c, "b") if np.any(c != 0) else np.zeros(1, dtype=complex)
    cc = np.conj(c)

    def ev(k):
        k = np.asarray(k, dtype=complex)
        return _poly_eval(c, k) * np.exp(-0.5 * k * k)

    def evc(k):
        k = np.asarray(k, dtype=complex)
        return _poly_eval(cc, k) * np.exp(-0.5 * k * k)

    b0 = complex(c[0])
    key = key or "gp:" + ",".join(f"{x.real:.17g}{x.imag:+.17g}j" for x in c)
    return Profile(ev, evc, Region("strip", k0), _poly_l2(c), b0, b0, description, key,
                   tuple(complex(x) for x in c), dict(params or {}))


def make_gaussian(mu: float) -> Profile:
    """phi_hat(k) = mu*exp(-k^2/2)."""
    if not mu > 0:
        raise ValueError("mu must be positive")
    return gauss_poly([mu], description=f"gaussian mu={mu:g}", key=f"gauss:{mu!r}", params={"mu": mu})


def make_zero_profile() -> Profile:
    """The decoupled case mu = 0."""
    return gauss_poly([0.0], description="zero coupling", key="zero", params={"mu": 0.0})


def make_psi0_default() -> Profile:
    """(1 + k^2) exp(-k^2/2): negative (psi0, (1-p^2) psi0) and no real zeros."""
    return gauss_poly([1.0, 0.0, 1.0], description="psi0 = (1+k^2) exp(-k^2/2)", key="psi0-default")


def sign_integral(psi0: Profile) -> float:
    """(psi0, (1 - p^2) psi0) = int (1 - k^2)|psi0_hat|^2 dk."""
    if psi0.poly is not None:
        P = np.polynomial.polynomial
        c = np.asarray(psi0.poly)
        sq = P.polymul(P.polymul(c, np.conj(c)), [1.0, 0.0, -1.0])
        return float(sum((sq[n] * gauss_moment(n)).real for n in range(len(sq))))
    return real_line_integral(lambda k: (1 - k * k) * psi0.abs2_real(k))


def real_line_integral(g: Callable, rel_tol: float = 1e-12) -> float:
    from .quadrature import integrate
    path = ContourPath((ray_in(-1.0, -1.0), segment(-1.0, 1.0), ray_out(1.0, 1.0)))
    return float(integrate(path, lambda k: g(k.real).astype(complex), rel_tol).complex().real)


def make_model2(psi0_hat: Profile, epsilon: float) -> Profile:
    """phi_eps_hat(k) = (k^2 - 1 + i eps) psi0_hat(k) / sqrt(|(psi0, (1-p^2) psi0)|)."""
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    D = sign_integral(psi0_hat)
    if D >= 0:
        raise NormSignError(f"(psi0,(1-p^2)psi0) = {D:.6g} is not negative")
    norm = math.sqrt(-D)
    params = {"epsilon": epsilon, "D": D, "normalization": norm, "psi0": psi0_hat}
    desc = f"model II eps={epsilon:g} on {psi0_hat.description}"
    key = f"m2:{epsilon!r}:{psi0_hat.key}"
    if psi0_hat.poly is not None:
        c = np.polynomial.polynomial.polymul([-1.0 + 1j * epsilon, 0.0, 1.0], psi0_hat.poly) / norm
        return gauss_poly(c, psi0_hat.region.k0, desc, key, params)
    a = complex(-1.0, epsilon)

    def ev(k):
        k = np.asarray(k, dtype=complex)
        return (k * k + a) * psi0_hat.eval(k) / norm

    def evc(k):
        k = np.asarray(k, dtype=complex)
        return (k * k + a.conjugate()) * psi0_hat.eval_conj(k) / norm

    l2 = math.sqrt(real_line_integral(lambda k: ((k * k - 1) ** 2 + epsilon ** 2) * psi0_hat.abs2_real(k)) / -D)
    p = Profile(ev, evc, psi0_hat.region, l2, 0j, 0j, desc, key, None, params)
    br, bl = boundary_values(p)
    return Profile(ev, evc, psi0_hat.region, l2, br, bl, desc, key, None, params)


def boundary_values(p: Profile) -> tuple[complex, complex]:
    """(phi_hat(+0), phi_hat(-0)) by Richardson extrapolation of one-sided samples."""
    h = np.array([1e-2, 1e-3, 1e-4, 1e-5])
    out = []
    for side in (1.0, -1.0):
        v = p.eval(side * h.astype(complex))
        # linear-in-h extrapolation between successive pairs, then take the finest
        ext = (v[1:] * h[:-1] - v[:-1] * h[1:]) / (h[:-1] - h[1:])
        out.append(complex(ext[-1]))
    return out[0], out[1]


def l2_norm_numeric(p: Profile) -> float:
    return math.sqrt(real_line_integral(p.abs2_real))


def profile_from_spec(spec: dict) -> Profile:
    """Config-level profile description: {"kind": "gaussian", "mu": 0.1} etc."""
    kind = spec.get("kind", "gaussian")
    if kind == "gaussian":
        mu = float(spec.get("mu", 0.1))
        return make_zero_profile() if mu == 0 else make_gaussian(mu)
    if kind == "gauss_poly":
        coeffs = [complex(c) if not isinstance(c, (list, tuple)) else complex(*c) for c in spec["coeffs"]]
        return gauss_poly(coeffs)
    if kind == "psi0_default":
        return make_psi0_default()
    raise ValueError(f"unknown profile kind {kind!r}")


def saddle_product_floor(p: Profile, zs) -> tuple[float, complex]:
    """min over zs of |phi_hat(sqrt z) * conj(phi_hat(-conj sqrt z))| and where it is attained.

    The small-f expansion assumes this product stays away from zero on the
    region where it is used.  No threshold is implied; callers compare the
    floor against whatever margin their use needs.
    """
    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    if zs.size == 0:
        raise ValueError("need at least one point")
    s = np.sqrt(zs)
    v = np.abs(p(s) * np.conj(p(-np.conj(s))))
    i = int(np.argmin(v))
    return float(v[i]), complex(zs[i])
