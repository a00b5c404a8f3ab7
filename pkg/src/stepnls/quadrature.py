"""Complex-plane numerical kernel.

Adaptive Gauss-Kronrod quadrature along piecewise paths, bracketed root
finding, damped Newton iteration, a classical RK4 step, and the square-root
branch used for every cut in the package.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (
    CutCollision,
    DomainError,
    NoSignChange,
    NonConvergence,
    SingularJacobian,
    SolverError,
)

DEFAULT_TOL = 1e-10
MAX_DEPTH = 30

# Gauss-Kronrod 7/15 nodes on [-1, 1] (QUADPACK qk15 tables).
_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
WEIGHTS_K = np.concatenate([_WK[:-1], _WK[::-1]])
# Gauss nodes are the odd-indexed Kronrod nodes 1, 3, 5, 7(centre), 9, 11, 13.
_GAUSS_IDX = np.array([1, 3, 5, 7, 9, 11, 13])
WEIGHTS_G = np.concatenate([_WG[:-1], _WG[::-1]])


# ---------------------------------------------------------------- paths

@dataclass(frozen=True)
class Segment:
    z0: complex
    z1: complex

    def point(self, t):
        return self.z0 + (self.z1 - self.z0) * t

    def deriv(self, t):
        return np.full(np.shape(t), self.z1 - self.z0, dtype=complex)

    @property
    def start(self):
        return complex(self.z0)

    @property
    def end(self):
        return complex(self.z1)

    def reversed(self):
        return Segment(self.z1, self.z0)

    def sample(self, n=65):
        return self.point(np.linspace(0.0, 1.0, n))


@dataclass(frozen=True)
class Arc:
    """Circular arc ``center + radius*exp(i*theta)``, theta from t0 to t1."""

    center: complex
    radius: float
    t0: float
    t1: float

    def point(self, t):
        th = self.t0 + (self.t1 - self.t0) * np.asarray(t)
        return self.center + self.radius * np.exp(1j * th)

    def deriv(self, t):
        th = self.t0 + (self.t1 - self.t0) * np.asarray(t)
        return 1j * (self.t1 - self.t0) * self.radius * np.exp(1j * th)

    @property
    def start(self):
        return complex(self.point(0.0))

    @property
    def end(self):
        return complex(self.point(1.0))

    def reversed(self):
        return Arc(self.center, self.radius, self.t1, self.t0)

    def sample(self, n=257):
        return self.point(np.linspace(0.0, 1.0, n))


@dataclass(frozen=True)
class Path:
    segments: tuple
    closed: bool = False

    def __post_init__(self):
        segs = tuple(self.segments)
        object.__setattr__(self, "segments", segs)
        if not segs:
            raise ValueError("a path needs at least one segment")
        for s, t in zip(segs, segs[1:]):
            if abs(s.end - t.start) > 1e-14 * max(1.0, abs(s.end)):
                raise ValueError("path segments are not connected end to start")
        if self.closed and abs(segs[-1].end - segs[0].start) > 1e-14 * max(1.0, abs(segs[0].start)):
            raise ValueError("closed path does not return to its start")

    @classmethod
    def polyline(cls, points: Sequence[complex], closed=False):
        pts = [complex(p) for p in points]
        if closed and pts[0] != pts[-1]:
            pts.append(pts[0])
        return cls(tuple(Segment(a, b) for a, b in zip(pts, pts[1:])), closed=closed)

    @classmethod
    def circle(cls, center: complex, radius: float):
        return cls((Arc(complex(center), float(radius), 0.0, 2 * np.pi),), closed=True)

    @classmethod
    def rectangle(cls, lo: complex, hi: complex):
        """Counterclockwise rectangle with corners ``lo`` (bottom-left) and ``hi``."""
        a, b = complex(lo), complex(hi)
        pts = [a, complex(b.real, a.imag), b, complex(a.real, b.imag), a]
        return cls.polyline(pts, closed=True)

    @classmethod
    def around_segment(cls, a: complex, b: complex, clearance: float):
        """Counterclockwise rectangle enclosing the segment [a, b] at distance ``clearance``."""
        a, b = complex(a), complex(b)
        t = (b - a) / abs(b - a)
        n = 1j * t
        c = clearance
        pts = [a - c * t - c * n, b + c * t - c * n, b + c * t + c * n, a - c * t + c * n]
        return cls.polyline(pts, closed=True)

    def reversed(self):
        return Path(tuple(s.reversed() for s in reversed(self.segments)), closed=self.closed)

    def __add__(self, other: "Path"):
        return Path(self.segments + other.segments)

    @property
    def start(self):
        return self.segments[0].start

    @property
    def end(self):
        return self.segments[-1].end


@dataclass(frozen=True)
class QuadratureResult:
    value: complex
    error: float
    evaluations: int


# ------------------------------------------------------------ geometry

def point_segment_distance(p, a, b):
    """Distance from point(s) ``p`` to the segment [a, b]."""
    p = np.asarray(p, dtype=complex)
    d = b - a
    if d == 0:
        return np.abs(p - a)
    t = np.clip(((p - a) * np.conj(d)).real / abs(d) ** 2, 0.0, 1.0)
    return np.abs(p - (a + t * d))


def _cross(u, v):
    return (np.conj(u) * v).imag


def segments_intersect(p0, p1, q0, q1):
    d1 = _cross(q1 - q0, p0 - q0)
    d2 = _cross(q1 - q0, p1 - q0)
    d3 = _cross(p1 - p0, q0 - p0)
    d4 = _cross(p1 - p0, q1 - p0)
    return (d1 * d2 < 0) and (d3 * d4 < 0)


def segment_distance(p0, p1, q0, q1):
    if segments_intersect(p0, p1, q0, q1):
        return 0.0
    return float(min(point_segment_distance(p0, q0, q1), point_segment_distance(p1, q0, q1),
                     point_segment_distance(q0, p0, p1), point_segment_distance(q1, p0, p1)))


def path_clearance(path: Path, cuts: Sequence[tuple]) -> float:
    """Smallest distance between ``path`` and any of the segment ``cuts``."""
    best = np.inf
    for seg in path.segments:
        for a, b in cuts:
            if isinstance(seg, Segment):
                d = segment_distance(seg.z0, seg.z1, complex(a), complex(b))
            else:
                d = float(np.min(point_segment_distance(seg.sample(), complex(a), complex(b))))
            best = min(best, d)
    return best


def check_clearance(path: Path, cuts: Sequence[tuple], clearance: float):
    d = path_clearance(path, cuts)
    if d < clearance:
        raise CutCollision(f"path passes within {d:.3g} of a branch cut (clearance {clearance:.3g})")


# ----------------------------------------------------------- quadrature

def _call(f, z):
    out = f(z)
    out = np.asarray(out, dtype=complex)
    if out.shape != np.shape(z):
        out = np.broadcast_to(out, np.shape(z)).astype(complex)
    return out


def _panels(f, seg, bounds):
    """Kronrod and Gauss estimates on several parameter panels at once."""
    bounds = np.asarray(bounds, dtype=float)
    mid = 0.5 * (bounds[:, 0] + bounds[:, 1])
    hw = 0.5 * (bounds[:, 1] - bounds[:, 0])
    t = mid[:, None] + hw[:, None] * NODES[None, :]
    v = _call(f, seg.point(t)) * seg.deriv(t)
    k = hw * (v @ WEIGHTS_K)
    g = hw * (v[:, _GAUSS_IDX] @ WEIGHTS_G)
    scale = hw * (np.abs(v) @ WEIGHTS_K)
    floor = 50 * np.finfo(float).eps * scale
    err = np.maximum(np.abs(k - g), floor)
    return k, err, floor


def integrate(f: Callable, path: Path, tol: float = DEFAULT_TOL, max_depth: int = MAX_DEPTH,
              cuts: Sequence[tuple] | None = None, clearance: float | None = None,
              initial_panels: int = 4, max_evaluations: int = 4_000_000) -> QuadratureResult:
    """Integrate ``f`` along ``path`` by globally adaptive Gauss-Kronrod subdivision.

    ``f`` must accept numpy arrays of complex points. Refinement stops when the
    summed error estimate is below ``max(tol*|value|, tol)``. If ``cuts`` are
    given, the path is first checked to keep at least ``clearance`` from them.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if cuts:
        check_clearance(path, cuts, clearance if clearance is not None else 0.0)

    heap = []
    total = 0j
    total_err = 0.0
    total_floor = 0.0
    evals = 0
    counter = 0
    for si, seg in enumerate(path.segments):
        edges = np.linspace(0.0, 1.0, initial_panels + 1)
        bounds = np.stack([edges[:-1], edges[1:]], axis=1)
        k, e, fl = _panels(f, seg, bounds)
        evals += 15 * len(bounds)
        for (t0, t1), kv, ev, fv in zip(bounds, k, e, fl):
            heapq.heappush(heap, (-ev, counter, si, t0, t1, kv, 0, fv))
            counter += 1
            total += kv
            total_err += ev
            total_floor += fv

    # round-off floor: further subdivision cannot beat it
    while total_err > max(tol * abs(total), tol, 2 * total_floor):
        if not heap:
            break
        neg_e, _, si, t0, t1, kv, depth, fv = heapq.heappop(heap)
        if depth >= max_depth:
            raise NonConvergence(f"quadrature subdivision exceeded depth {max_depth}")
        if evals > max_evaluations:
            raise NonConvergence("quadrature exceeded the evaluation budget")
        tm = 0.5 * (t0 + t1)
        k, e, fl = _panels(f, path.segments[si], [(t0, tm), (tm, t1)])
        evals += 30
        total += k.sum() - kv
        total_err += e.sum() + neg_e
        total_floor += fl.sum() - fv
        for (a, b), kk, ee, ff in zip([(t0, tm), (tm, t1)], k, e, fl):
            heapq.heappush(heap, (-ee, counter, si, a, b, kk, depth + 1, ff))
            counter += 1
        if not np.isfinite(total_err):
            raise NonConvergence("integrand produced non-finite values")

    # recompute the sum from the panels to limit drift from the running update
    value = sum(item[5] for item in heap)
    err = sum(-item[0] for item in heap)
    return QuadratureResult(complex(value), float(err), evals)


def integrate_interval(f: Callable, a: float, b: float, tol: float = DEFAULT_TOL,
                       breakpoints: Sequence[float] = (), **kw) -> QuadratureResult:
    """Integrate over the real interval [a, b], splitting at ``breakpoints``."""
    pts = [a] + sorted(p for p in breakpoints if a < p < b) + [b]
    return integrate(f, Path(tuple(Segment(complex(x), complex(y)) for x, y in zip(pts, pts[1:]))),
                     tol=tol, **kw)


# ---------------------------------------------------------- root finding

def find_root_1d(f: Callable[[float], float], bracket: Sequence[float], tol: float = 1e-12,
                 max_iter: int = 200) -> float:
    """Bisection on a sign-changing bracket followed by one Newton polish.

    Returns ``x`` in the bracket with ``|f(x)| <= tol``. If the bracket shrinks to
    adjacent floating point numbers first, that point is returned: the sign
    change is then resolved to machine precision.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise NoSignChange(f"f has the same sign at {lo} and {hi}")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if abs(fm) <= tol:
            return _polish(f, mid, fm, lo, hi)
        if mid in (lo, hi):
            return mid
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
        if hi - lo <= 4 * np.finfo(float).eps * max(1.0, abs(mid)):
            x = lo if abs(flo) < abs(fhi) else hi
            return x
    raise NonConvergence("bisection did not converge")


def _polish(f, x, fx, lo, hi):
    h = max(1e-7 * max(1.0, abs(x)), 10 * (hi - lo))
    d = (f(x + h) - f(x - h)) / (2 * h)
    if d == 0 or not np.isfinite(d):
        return x
    xn = x - fx / d
    if lo <= xn <= hi:
        fn = f(xn)
        if abs(fn) < abs(fx):
            return xn
    return x


@dataclass(frozen=True)
class NewtonResult:
    x: np.ndarray
    residual: float
    iterations: int


def fd_jacobian(F: Callable, x: np.ndarray, fx: np.ndarray | None = None, rel: float = 1e-6):
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(len(x)):
        h = rel * max(1.0, abs(x[i]))
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        cols.append((np.asarray(F(xp)) - np.asarray(F(xm))) / (2 * h))
    return np.stack(cols, axis=1)


def newton_solve(F: Callable, J: Callable | None, x0, tol: float = 1e-10, max_iter: int = 50,
                 min_damping: float = 2.0 ** -12) -> NewtonResult:
    """Damped Newton iteration in the infinity norm.

    ``J`` may be ``None`` for a central-difference Jacobian. A trial step is halved
    whenever the residual does not decrease or the trial point is rejected by ``F``
    with a domain or solver error.
    """
    x = np.array(x0, dtype=float)
    r = np.asarray(F(x), dtype=float)
    nr = float(np.max(np.abs(r)))
    for it in range(max_iter + 1):
        if nr <= tol:
            return NewtonResult(x, nr, it)
        if it == max_iter:
            break
        jac = fd_jacobian(F, x, r) if J is None else np.asarray(J(x), dtype=float)
        try:
            dx = -np.linalg.solve(jac, r)
        except np.linalg.LinAlgError as exc:
            raise SingularJacobian(str(exc)) from exc
        if not np.all(np.isfinite(dx)):
            raise SingularJacobian("Newton step is not finite")
        lam = 1.0
        while True:
            xt = x + lam * dx
            try:
                rt = np.asarray(F(xt), dtype=float)
                nt = float(np.max(np.abs(rt)))
            except (DomainError, SolverError):
                nt = np.inf
            if nt < nr or nt <= tol:
                break
            lam *= 0.5
            if lam < min_damping:
                raise NonConvergence(f"damped Newton stalled at residual {nr:.3e}", residual=r)
        x, r, nr = xt, rt, nt
    raise NonConvergence(f"Newton did not reach {tol:.1e} in {max_iter} iterations (residual {nr:.3e})",
                         residual=r)


# -------------------------------------------------------------- ODE step

def ode_step_rk4(rhs: Callable, x, s: float, h: float) -> np.ndarray:
    """One classical Runge-Kutta step for ``dx/ds = rhs(s, x)``."""
    x = np.asarray(x, dtype=float)
    k1 = np.asarray(rhs(s, x), dtype=float)
    k2 = np.asarray(rhs(s + h / 2, x + h / 2 * k1), dtype=float)
    k3 = np.asarray(rhs(s + h / 2, x + h / 2 * k2), dtype=float)
    k4 = np.asarray(rhs(s + h, x + h * k3), dtype=float)
    return x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


# ------------------------------------------------------ square-root cuts

def sqrt_segment(k, a: complex, b: complex):
    """``sqrt((k-a)(k-b))`` with its cut on the straight segment [a, b].

    The branch behaves like ``k - (a+b)/2`` at infinity.
    """
    k = np.asarray(k, dtype=complex)
    m = 0.5 * (a + b)
    d = 0.5 * (b - a)
    if d == 0:
        return k - m
    u = (k - m) / d
    return d * np.sqrt(u - 1) * np.sqrt(u + 1)


def sqrt_segment_side(k, a: complex, b: complex, side: int):
    """Boundary value of :func:`sqrt_segment` on the cut.

    ``side=+1`` is the left side of the segment oriented from ``a`` to ``b``,
    ``side=-1`` the right side. Points are projected onto the segment.
    """
    k = np.asarray(k, dtype=complex)
    m = 0.5 * (a + b)
    d = 0.5 * (b - a)
    t = np.clip(((k - m) / d).real, -1.0, 1.0)
    return side * 1j * d * np.sqrt(1 - t * t)
