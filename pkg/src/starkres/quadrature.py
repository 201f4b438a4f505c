"""Adaptive Gauss-Kronrod (7/15) quadrature along ContourPath objects.

All panels of a round are evaluated in one vectorized integrand call.  Scalar
integrands may supply an exponent (``log_integrand``) so that panel sums are
accumulated relative to a running maximum and returned as ScaledComplex.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .contours import ContourPath, Piece, segment, ray_out, ray_in
from .numerics import ScaledComplex

_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
WG = np.zeros(15)
# Gauss nodes are the odd-indexed Kronrod nodes (1,3,5 from each side) plus the centre
for j, g in zip((1, 3, 5), _WG[:3]):
    WG[j] = g
    WG[14 - j] = g
WG[7] = _WG[3]

MAX_DEPTH = 24
ROUNDOFF = 50 * np.finfo(float).eps


class NonConvergence(RuntimeError):
    def __init__(self, message: str, result: "QuadResult | None" = None, worst: tuple | None = None):
        super().__init__(message)
        self.result = result
        self.worst = worst


@dataclass
class QuadResult:
    value: object  # ScaledComplex for scalar integrands, ndarray for batches
    abs_error_estimate: object  # same log scale as value (multiply by exp(value.log_scale))
    evaluations: int
    tail_bound: object = 0.0
    truncations: list = field(default_factory=list)
    panels: int = 0

    @property
    def abs_error(self) -> float:
        if isinstance(self.value, ScaledComplex):
            return float(self.abs_error_estimate) * math.exp(self.value.log_scale)
        return self.abs_error_estimate

    def complex(self) -> complex:
        return self.value.to_complex()


Omega = Callable[[Piece, np.ndarray], np.ndarray]


def _initial_panels(piece: Piece, omega: Optional[Omega], min_panels: int) -> np.ndarray:
    lo, hi = piece.bounds()
    if omega is None:
        return np.linspace(lo, hi, min_panels + 1)
    t = np.linspace(lo, hi, 513)
    w = np.abs(omega(piece, t))
    w = np.where(np.isfinite(w), w, 0.0)
    phase = np.concatenate([[0.0], np.cumsum(0.5 * (w[1:] + w[:-1]) * np.diff(t))])
    n = max(min_panels, int(math.ceil(phase[-1] / math.pi)))
    if n == min_panels:
        return np.linspace(lo, hi, n + 1)
    # equal phase increments, plus a uniform floor so flat regions still get panels
    target = np.linspace(0.0, phase[-1], n + 1)
    edges = np.interp(target, phase, t)
    edges = np.unique(np.concatenate([edges, np.linspace(lo, hi, min_panels + 1)]))
    return edges


class _Integrator:
    def __init__(self, path: ContourPath, integrand, log_integrand, rel_tol, abs_tol, omega,
                 min_panels, max_evals, batch, tail_ratio=1e-17):
        self.pieces = path.traversal()
        self.integrand = integrand
        self.log_integrand = log_integrand
        self.rel_tol = rel_tol
        self.abs_tol = abs_tol
        self.omega = omega
        self.min_panels = min_panels
        self.max_evals = max_evals
        self.batch = batch
        self.tail_log = math.log(tail_ratio)
        self.evals = 0
        # panel store
        self.pidx: list[np.ndarray] = []
        self.ta: list[np.ndarray] = []
        self.tb: list[np.ndarray] = []
        self.depth: list[np.ndarray] = []
        self.K: list[np.ndarray] = []
        self.G: list[np.ndarray] = []
        self.ref: list[np.ndarray] = []  # per panel log reference
        self.pmax: list[np.ndarray] = []  # per panel log max |integrand*dk|

    def _eval(self, pidx: np.ndarray, ta: np.ndarray, tb: np.ndarray):
        P = len(pidx)
        half = 0.5 * (tb - ta)
        mid = 0.5 * (tb + ta)
        t = mid[:, None] + half[:, None] * NODES[None, :]
        k = np.empty(t.shape, dtype=complex)
        dk = np.empty(t.shape, dtype=complex)
        sign = np.empty(P)
        for i in np.unique(pidx):
            sel = pidx == i
            pc = self.pieces[i]
            k[sel] = pc.k(t[sel])
            dk[sel] = pc.dk(t[sel])
            sign[sel] = pc.sign
        flat = k.ravel()
        self.evals += flat.size
        if self.log_integrand is not None:
            logv, amp = self.log_integrand(flat)
            logv = np.asarray(logv, dtype=complex).reshape(t.shape)
            amp = np.asarray(amp, dtype=complex).reshape(t.shape)
            re = logv.real
            # zero amplitudes must not set the reference
            re_m = np.where(amp != 0, re, -np.inf)
            ref = np.max(re_m, axis=1)
            ref = np.where(np.isfinite(ref), ref, 0.0)
            vals = amp * np.exp(logv - ref[:, None]) * dk
            pm = ref + np.log(np.maximum(np.max(np.abs(vals), axis=1), 1e-300))
        else:
            v = np.asarray(self.integrand(flat), dtype=complex)
            if self.batch:
                v = v.reshape(t.shape + v.shape[1:])
                vals = v * dk[..., None]
            else:
                vals = v.reshape(t.shape) * dk
            ref = np.zeros(P)
            a = np.abs(vals)
            if self.batch:
                a = a.max(axis=2)
            pm = np.log(np.maximum(a.max(axis=1), 1e-300))
        scale = (half * sign)
        if self.batch:
            Kv = np.einsum("j,pjm->pm", WK, vals) * scale[:, None]
            Gv = np.einsum("j,pjm->pm", WG, vals) * scale[:, None]
        else:
            Kv = vals @ WK * scale
            Gv = vals @ WG * scale
        bad = ~np.isfinite(Kv)
        if np.any(bad):
            raise NonConvergence("non-finite integrand values on path")
        return Kv, Gv, ref, pm

    def _add(self, pidx, ta, tb, depth):
        Kv, Gv, ref, pm = self._eval(pidx, ta, tb)
        self.pidx.append(pidx)
        self.ta.append(ta)
        self.tb.append(tb)
        self.depth.append(depth)
        self.K.append(Kv)
        self.G.append(Gv)
        self.ref.append(ref)
        self.pmax.append(pm)
        return pm

    def _concat(self):
        self.pidx = [np.concatenate(self.pidx)]
        self.ta = [np.concatenate(self.ta)]
        self.tb = [np.concatenate(self.tb)]
        self.depth = [np.concatenate(self.depth)]
        self.K = [np.concatenate(self.K)]
        self.G = [np.concatenate(self.G)]
        self.ref = [np.concatenate(self.ref)]
        self.pmax = [np.concatenate(self.pmax)]

    def _march_edges(self, pc: Piece, t: float, h: float, n: int):
        """Next n (or more) tail panels from t: geometric growth, at most half a wavelength each."""
        steps = np.minimum(h * 2.0 ** np.arange(n), 64.0)
        h_next = float(min(steps[-1] * 2, 64.0))
        span = float(steps.sum())
        if self.omega is None:
            return t + np.concatenate([[0.0], np.cumsum(steps)]), h_next
        w0 = float(np.abs(self.omega(pc, np.array([t]))[0]))
        if w0 > 0 and np.isfinite(w0):
            span = min(span, n * math.pi / w0)
        grid = np.linspace(t, t + span, 257)
        w = np.abs(self.omega(pc, grid))
        w = np.where(np.isfinite(w), w, 0.0)
        phase = np.concatenate([[0.0], np.cumsum(0.5 * (w[1:] + w[:-1]) * np.diff(grid))])
        cap = 4 * n * math.pi
        if phase[-1] > cap:
            # shorten the span so one round covers a bounded number of wavelengths
            j = max(int(np.searchsorted(phase, cap)), 1)
            span = float(grid[j] - t)
            grid, phase = grid[:j + 1], phase[:j + 1]
        m = max(n, int(math.ceil(phase[-1] / math.pi)))
        edges = np.interp(np.linspace(0.0, phase[-1], m + 1), phase, grid) if phase[-1] > 0 \
            else np.linspace(t, t + span, m + 1)
        edges[0], edges[-1] = t, t + span
        return edges, h_next

    def run(self) -> QuadResult:
        finite_idx, ray_idx = [], []
        pid, ta, tb = [], [], []
        for i, pc in enumerate(self.pieces):
            if pc.infinite:
                ray_idx.append(i)
                continue
            finite_idx.append(i)
            edges = _initial_panels(pc, self.omega, self.min_panels)
            pid.append(np.full(len(edges) - 1, i))
            ta.append(edges[:-1])
            tb.append(edges[1:])
        if pid:
            pid = np.concatenate(pid)
            self._add(pid, np.concatenate(ta), np.concatenate(tb), np.zeros(len(pid), dtype=int))
        truncations = []
        tail_bound_terms = []
        # march semi-infinite tails outward until negligible against the running maximum
        state = {i: [0.0, 0.5, [], 0] for i in ray_idx}  # t, h, pmax history, panel count
        active = list(ray_idx)
        rounds = 0
        while active:
            per_round = 8 * 2 ** min(rounds, 5)
            rounds += 1
            gmax = max((float(np.max(p)) for p in self.pmax if len(p)), default=-np.inf)
            pid, ta, tb = [], [], []
            for i in active:
                pc = self.pieces[i]
                t, h, _, _ = state[i]
                edges, h = self._march_edges(pc, t, h, per_round)
                pid.extend([i] * (len(edges) - 1))
                ta.extend(edges[:-1])
                tb.extend(edges[1:])
                state[i][0], state[i][1] = float(edges[-1]), h
            pid = np.array(pid)
            pm = self._add(pid, np.array(ta), np.array(tb), np.zeros(len(pid), dtype=int))
            gmax = max(gmax, float(np.max(pm)))
            still = []
            for i in active:
                sel = pid == i
                hist = state[i][2]
                hist.extend(pm[sel].tolist())
                state[i][3] += int(sel.sum())
                last = hist[-2:]
                decaying = len(hist) >= 3 and hist[-1] <= hist[-3]
                if all(v < gmax + self.tail_log for v in last) and decaying:
                    truncations.append((i, state[i][0]))
                    tail_bound_terms.append(hist[-1])
                elif state[i][3] > 200_000:
                    raise NonConvergence(f"tail of piece {i} does not decay")
                else:
                    still.append(i)
            active = still
        self._concat()
        self.truncations = truncations
        self.tail_logs = tail_bound_terms
        return self._refine()

    def _totals(self):
        ref = self.ref[0]
        gref = float(np.max(ref)) if len(ref) else 0.0
        w = np.exp(ref - gref)
        if self.batch:
            K = self.K[0] * w[:, None]
            G = self.G[0] * w[:, None]
        else:
            K = self.K[0] * w
            G = self.G[0] * w
        return gref, K, G

    def _refine(self) -> QuadResult:
        while True:
            gref, K, G = self._totals()
            total = K.sum(axis=0)
            err = np.abs(K - G)
            if self.batch:
                floor = ROUNDOFF * np.abs(K).sum(axis=0)
                tol = np.maximum(np.maximum(self.rel_tol * np.abs(total), self.abs_tol), floor)
                tol = np.where(tol > 0, tol, 1e-300)
                e = (err / tol[None, :]).max(axis=1)
            else:
                abs_t = self.abs_tol * math.exp(-gref) if self.abs_tol > 0 else 0.0
                # cancellation limits attainable accuracy to roundoff of the absolute mass
                floor = ROUNDOFF * float(np.abs(K).sum())
                tol = max(self.rel_tol * abs(total), abs_t, floor, 1e-300)
                e = err / tol
            esum = float(e.sum())
            if esum <= 1.0 or not np.isfinite(esum):
                break
            order = np.argsort(-e, kind="stable")
            csum = np.cumsum(e[order])
            need = esum - 0.5
            n_split = int(np.searchsorted(csum, need) + 1)
            split = np.sort(order[:n_split])
            depth = self.depth[0][split]
            if np.any(depth >= MAX_DEPTH):
                j = split[np.argmax(depth)]
                pc = self.pieces[self.pidx[0][j]]
                worst = (int(self.pidx[0][j]), float(self.ta[0][j]), float(self.tb[0][j]), pc.label)
                res = self._result(gref, K, G)
                raise NonConvergence(f"depth limit {MAX_DEPTH} reached on piece {worst}", res, worst)
            if self.evals > self.max_evals:
                res = self._result(gref, K, G)
                raise NonConvergence(f"evaluation budget {self.max_evals} exhausted", res)
            keep = np.ones(len(e), dtype=bool)
            keep[split] = False
            a, b = self.ta[0][split], self.tb[0][split]
            m = 0.5 * (a + b)
            pid = np.repeat(self.pidx[0][split], 2)
            na = np.ravel(np.column_stack([a, m]))
            nb = np.ravel(np.column_stack([m, b]))
            nd = np.repeat(depth + 1, 2)
            for name in ("pidx", "ta", "tb", "depth", "K", "G", "ref", "pmax"):
                arr = getattr(self, name)[0]
                setattr(self, name, [arr[keep]])
            self._add(pid, na, nb, nd)
            self._concat()
        return self._result(gref, K, G)

    def _result(self, gref, K, G) -> QuadResult:
        # fixed summation order by piece then parameter
        order = np.lexsort((self.ta[0], self.pidx[0]))
        total = K[order].sum(axis=0)
        err = np.abs(K - G).sum(axis=0)
        if self.batch:
            tail = np.zeros(total.shape)
            return QuadResult(total, err, self.evals, tail, self.truncations, len(order))
        tail_b = sum(math.exp(t - gref) for t in self.tail_logs) if self.tail_logs else 0.0
        val = ScaledComplex.normalize(complex(total), gref) if total != 0 else ScaledComplex()
        shift = val.log_scale - gref if not val.is_zero() else 0.0
        return QuadResult(val, float(err) * math.exp(-shift), self.evals,
                          tail_b * math.exp(-shift), self.truncations, len(order))


def integrate(path: ContourPath, integrand: Optional[Callable] = None, rel_tol: float = 1e-10,
              abs_tol: float = 0.0, *, log_integrand: Optional[Callable] = None,
              omega: Optional[Omega] = None, min_panels: int = 2, max_evals: int = 20_000_000,
              batch: bool = False, tail_ratio: float = 1e-17) -> QuadResult:
    """Integrate along path.

    integrand(k) returns complex values (shape (n,) or (n, m) with batch=True).
    log_integrand(k) returns (log_factor, amplitude) meaning amplitude*exp(log_factor),
    accumulated without overflow.  omega(piece, t) gives the local angular
    frequency in the piece parameter; panels start at half a wavelength.
    """
    if (integrand is None) == (log_integrand is None):
        raise ValueError("give exactly one of integrand or log_integrand")
    if rel_tol <= 0 and abs_tol <= 0:
        raise ValueError("need a positive tolerance")
    return _Integrator(path, integrand, log_integrand, rel_tol, abs_tol, omega, min_panels,
                       max_evals, batch, tail_ratio).run()


class CubicPhase:
    """phase(k) = k^3/3 - k*x, the family used throughout."""

    def __init__(self, x: complex):
        self.x = complex(x)

    def __call__(self, k):
        return k ** 3 / 3 - k * self.x

    def derivative(self, k):
        return k * k - self.x


def integrate_oscillatory(path: ContourPath, phase: Callable, amplitude: Callable, one_over_f: float,
                          rel_tol: float = 1e-10, abs_tol: float = 0.0,
                          dphase: Optional[Callable] = None, max_evals: int = 20_000_000) -> QuadResult:
    """int exp(-i*one_over_f*phase(k)) amplitude(k) dk with scaled accumulation."""
    if dphase is None:
        dphase = getattr(phase, "derivative", None)
    if dphase is None:
        def dphase(k, _h=1e-6):
            return (phase(k + _h) - phase(k - _h)) / (2 * _h)

    def log_integrand(k):
        return -1j * one_over_f * phase(k), amplitude(k)

    def omega(pc: Piece, t):
        if one_over_f == 0:
            return np.zeros_like(t)
        k = pc.k(t)
        return one_over_f * np.abs(np.real(dphase(k) * pc.dk(t)))

    return integrate(path, log_integrand=log_integrand, rel_tol=rel_tol, abs_tol=abs_tol,
                     omega=omega, max_evals=max_evals)


def principal_value(fhat_sq: Callable, s: float, rel_tol: float = 1e-10, half_width: float | None = None) -> float:
    """P.V. int_R g(k)/(k - s) dk by subtracting g(s) on a window symmetric about s."""
    if abs(s) < 1e-8:
        raise ValueError("principal value point too close to 0")
    R = half_width if half_width is not None else max(10.0, 2 * abs(s))
    gs = complex(fhat_sq(np.array([s]))[0])

    def smooth(k):
        k = np.asarray(k)
        return (fhat_sq(k.real) - gs) / (k - s)

    def plain(k):
        return fhat_sq(np.asarray(k).real) / (k - s)

    # s sits on panel endpoints, so the removable singularity is never sampled
    inner = ContourPath((segment(s - R, s), segment(s, s + R)))
    outer = ContourPath((ray_in(s - R, -1.0), ))
    outer2 = ContourPath((ray_out(s + R, 1.0), ))
    scale = max(abs(gs), 1e-300)
    a = integrate(inner, smooth, rel_tol, abs_tol=rel_tol * scale * 1e-2).complex()
    b = integrate(outer, plain, rel_tol, abs_tol=rel_tol * scale * 1e-2).complex()
    c = integrate(outer2, plain, rel_tol, abs_tol=rel_tol * scale * 1e-2).complex()
    # the symmetric window contributes g(s)*log|R/R| = 0
    return float((a + b + c).real)
