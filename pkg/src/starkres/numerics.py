"""Exponent-scaled complex numbers, the principal square root and erf.

A ScaledComplex stores ``mantissa * exp(log_scale)`` with ``1 <= |mantissa| < e``
so products like ``exp(i*4/(3f)*z**1.5)`` survive even when the plain double
would overflow.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

SHADOW_THRESHOLD = 800.0
_E = math.e


@dataclass(frozen=True)
class ScaledComplex:
    mantissa: complex = 0j
    log_scale: float = 0.0
    shadowed: bool = field(default=False, compare=False)

    @staticmethod
    def normalize(mantissa: complex, log_scale: float = 0.0, shadowed: bool = False) -> "ScaledComplex":
        m = complex(mantissa)
        if m == 0 or not cmath.isfinite(m):
            if m == 0:
                return ScaledComplex(0j, 0.0, shadowed)
            raise OverflowError("non-finite mantissa")
        a = math.log(abs(m))
        n = math.floor(a)
        if abs(n) > 600:
            # subnormal or huge mantissas: rescale in two halves to stay in range
            h = n // 2
            m = m * math.exp(-h) * math.exp(-(n - h))
        else:
            m = m * math.exp(-n)
        s = float(log_scale) + n
        # guard rounding at the interval ends
        if abs(m) >= _E:
            m /= _E
            s += 1.0
        elif abs(m) < 1.0:
            m *= _E
            s -= 1.0
        return ScaledComplex(m, s, shadowed)

    @staticmethod
    def from_complex(c: complex) -> "ScaledComplex":
        return ScaledComplex.normalize(c, 0.0)

    def to_complex(self) -> complex:
        if self.mantissa == 0:
            return 0j
        return self.mantissa * math.exp(self.log_scale)

    def __complex__(self) -> complex:
        return self.to_complex()

    def is_zero(self) -> bool:
        return self.mantissa == 0

    def log_abs(self) -> float:
        """log|x|; -inf for zero."""
        if self.mantissa == 0:
            return -math.inf
        return math.log(abs(self.mantissa)) + self.log_scale

    def arg(self) -> float:
        return cmath.phase(self.mantissa)

    def __abs__(self) -> float:
        if self.mantissa == 0:
            return 0.0
        return abs(self.mantissa) * math.exp(self.log_scale)

    def __neg__(self) -> "ScaledComplex":
        return ScaledComplex(-self.mantissa, self.log_scale, self.shadowed)

    def conjugate(self) -> "ScaledComplex":
        return ScaledComplex(self.mantissa.conjugate(), self.log_scale, self.shadowed)

    def __mul__(self, other) -> "ScaledComplex":
        return scaled_mul(self, as_scaled(other))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "ScaledComplex":
        o = as_scaled(other)
        if o.mantissa == 0:
            raise ZeroDivisionError("ScaledComplex division by zero")
        if self.mantissa == 0:
            return ScaledComplex()
        return ScaledComplex.normalize(self.mantissa / o.mantissa, self.log_scale - o.log_scale)

    def __rtruediv__(self, other) -> "ScaledComplex":
        return as_scaled(other) / self

    def __add__(self, other) -> "ScaledComplex":
        return scaled_add(self, as_scaled(other))

    __radd__ = __add__

    def __sub__(self, other) -> "ScaledComplex":
        return scaled_add(self, -as_scaled(other))

    def __rsub__(self, other) -> "ScaledComplex":
        return scaled_add(as_scaled(other), -self)

    def __repr__(self) -> str:
        return f"ScaledComplex({self.mantissa!r}, {self.log_scale!r})"


def as_scaled(x) -> ScaledComplex:
    if isinstance(x, ScaledComplex):
        return x
    return ScaledComplex.from_complex(complex(x))


def scaled_mul(a: ScaledComplex, b: ScaledComplex) -> ScaledComplex:
    if a.mantissa == 0 or b.mantissa == 0:
        return ScaledComplex()
    return ScaledComplex.normalize(a.mantissa * b.mantissa, a.log_scale + b.log_scale,
                                   a.shadowed or b.shadowed)


def scaled_add(a: ScaledComplex, b: ScaledComplex) -> ScaledComplex:
    if a.mantissa == 0:
        return b
    if b.mantissa == 0:
        return a
    if a.log_scale < b.log_scale:
        a, b = b, a
    gap = a.log_scale - b.log_scale
    if gap > SHADOW_THRESHOLD:
        return ScaledComplex(a.mantissa, a.log_scale, True)
    m = a.mantissa + b.mantissa * math.exp(-gap)
    return ScaledComplex.normalize(m, a.log_scale, a.shadowed or b.shadowed)


def scaled_exp(w: complex) -> ScaledComplex:
    w = complex(w)
    return ScaledComplex.normalize(cmath.exp(1j * w.imag), w.real)


def scaled_sum(values: np.ndarray, log_scales: np.ndarray | float = 0.0) -> ScaledComplex:
    """Sum of values[i]*exp(log_scales[i]) without overflow."""
    v = np.asarray(values, dtype=complex).ravel()
    s = np.broadcast_to(np.asarray(log_scales, dtype=float), np.shape(values)).ravel()
    keep = v != 0
    if not keep.any():
        return ScaledComplex()
    v, s = v[keep], s[keep]
    ref = float(s.max())
    return ScaledComplex.normalize(complex(np.sum(v * np.exp(s - ref))), ref)


def principal_sqrt(z: complex) -> complex:
    """Principal root, cut on (-inf, 0); on the cut the limit from above."""
    z = complex(z)
    if z.imag == 0.0 and z.real < 0.0:
        return 1j * math.sqrt(-z.real)
    return cmath.sqrt(z)


def principal_sqrt_array(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    out = np.sqrt(z)
    cut = (z.imag == 0.0) & (z.real < 0.0)
    if np.any(cut):
        out = np.where(cut, 1j * np.sqrt(np.abs(z.real)), out)
    return out


_TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)


def _erf_taylor(z: complex) -> complex:
    z2 = z * z
    term = z
    total = z
    n = 0
    while True:
        n += 1
        term *= -z2 / n
        add = term / (2 * n + 1)
        total += add
        if abs(add) <= 1e-17 * abs(total) and n > abs(z2):
            break
        if n > 4000:
            break
    return _TWO_OVER_SQRT_PI * total


def faddeeva_cf(zeta: complex) -> complex:
    """w(zeta) = exp(-zeta^2) erfc(-i zeta) for Im zeta >= 0 by the Laplace continued fraction."""
    def run(n: int) -> complex:
        acc = zeta
        for k in range(n, 0, -1):
            acc = zeta - (k / 2.0) / acc
        return 1j / math.sqrt(math.pi) / acc

    n = 32
    prev = run(n)
    while n < 20000:
        n *= 2
        cur = run(n)
        if abs(cur - prev) <= 1e-16 * abs(cur):
            return cur
        prev = cur
    return prev


def _use_cf(z: complex) -> bool:
    r = abs(z)
    return r >= 6.0 or (r >= 2.5 and abs(z.real) >= 1.0)


def erf_complex(z: complex) -> complex:
    """Entire erf; Taylor near the imaginary axis and for small |z|, continued fraction elsewhere."""
    z = complex(z)
    if z == 0:
        return 0j
    if not _use_cf(z):
        return _erf_taylor(z)
    sgn = -1.0 if z.real < 0 else 1.0
    zp = sgn * z
    w = faddeeva_cf(1j * zp)
    return sgn * (1.0 - cmath.exp(-zp * zp) * w)


def erf_complex_scaled(z: complex) -> ScaledComplex:
    """erf as ScaledComplex so exp(-z^2) growth cannot overflow."""
    z = complex(z)
    if not _use_cf(z):
        return ScaledComplex.from_complex(_erf_taylor(z))
    sgn = -1.0 if z.real < 0 else 1.0
    zp = sgn * z
    w = ScaledComplex.from_complex(faddeeva_cf(1j * zp))
    val = ScaledComplex.from_complex(1.0) - scaled_exp(-zp * zp) * w
    return val * sgn
