"""Hyperelliptic surfaces, g-function derivatives and their antiderivatives.

A surface is a list of straight cuts. Each cut carries the square root
``sqrt((k-a)(k-b))`` normalised like ``k`` at infinity, and ``w`` is the product
over all cuts, so ``w ~ k**ncuts`` on the principal sheet.

A g-function derivative is stored as

    g'(k) = 4 * num(k) * prod_{i in zero_cuts} s_i(k) / prod_{i not in zero_cuts} s_i(k)

where ``num`` is a real polynomial. Cuts listed in ``zero_cuts`` are those whose
endpoints are simple zeros of the full numerator; the cancellation against
``w`` is done in closed form.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    BracketFailure,
    ConditionsNotSatisfied,
    CutCollision,
    DomainError,
    NoSignChange,
    OnCutWithoutSide,
    PathBlocked,
)
from .quadrature import (
    Path,
    Segment,
    find_root_1d,
    integrate,
    point_segment_distance,
    segment_distance,
    segments_intersect,
    sqrt_segment,
)
from .spectral import Omega, ProblemParams, X

PERIOD_TOL = 1e-13
CONDITIONS_TOL = 1e-6


# ---------------------------------------------------------------- cuts

@dataclass(frozen=True)
class Cut:
    """Straight branch cut from ``a`` to ``b``."""

    a: complex
    b: complex

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "b", complex(self.b))

    @classmethod
    def vertical(cls, p: complex):
        """Self-conjugate cut [conj p, p] with Im p > 0, oriented upwards."""
        p = complex(p)
        if p.imag <= 0:
            raise DomainError("vertical cuts need an endpoint in the upper half plane")
        return cls(p.conjugate(), p)

    @property
    def mid(self) -> complex:
        return 0.5 * (self.a + self.b)

    @property
    def half(self) -> complex:
        return 0.5 * (self.b - self.a)

    @property
    def self_conjugate(self) -> bool:
        return abs(self.a - self.b.conjugate()) <= 1e-15 * max(1.0, abs(self.a))

    def mirror(self) -> "Cut":
        return Cut(self.a.conjugate(), self.b.conjugate())

    def sqrt(self, k):
        return sqrt_segment(k, self.a, self.b)

    def distance(self, k):
        return point_segment_distance(k, self.a, self.b)

    def theta_points(self, theta):
        """Points on the cut parametrised by ``k = mid - half*cos(theta)``."""
        return self.mid - self.half * np.cos(theta)


@dataclass(frozen=True)
class SurfaceSpec:
    """Ordered cuts of a hyperelliptic surface, closed under conjugation."""

    cuts: tuple

    def __post_init__(self):
        cuts = tuple(self.cuts)
        object.__setattr__(self, "cuts", cuts)
        if not cuts:
            raise DomainError("a surface needs at least one cut")
        for c in cuts:
            if c.self_conjugate:
                continue
            m = c.mirror()
            if not any(abs(m.a - d.a) + abs(m.b - d.b) < 1e-13 for d in cuts):
                raise DomainError("surface cuts must be closed under conjugation")
        for i in range(len(cuts)):
            for j in range(i + 1, len(cuts)):
                if self.gap(i, j) <= 0:
                    raise CutCollision(f"cuts {i} and {j} intersect")
        if not 1 <= len(cuts) <= 4:
            raise DomainError("supported genera are 0 to 3")

    @classmethod
    def from_points(cls, points: Sequence[complex]):
        """Surface with one vertical cut per upper-half-plane branch point."""
        return cls(tuple(Cut.vertical(p) for p in points))

    @property
    def genus(self) -> int:
        return len(self.cuts) - 1

    def gap(self, i: int, j: int) -> float:
        a, b = self.cuts[i], self.cuts[j]
        return segment_distance(a.a, a.b, b.a, b.b)

    @property
    def min_gap(self) -> float:
        n = len(self.cuts)
        gaps = [self.gap(i, j) for i in range(n) for j in range(i + 1, n)]
        return min(gaps) if gaps else np.inf

    @property
    def clearance(self) -> float:
        return min(self.min_gap, 1.0) / 4

    @property
    def branch_points(self):
        pts = []
        for c in self.cuts:
            pts += [c.a, c.b]
        return pts

    @property
    def radius(self) -> float:
        return max(abs(p) for p in self.branch_points)

    def segments(self):
        return [(c.a, c.b) for c in self.cuts]

    def on_cut(self, k, tol=1e-13):
        k = np.asarray(k, dtype=complex)
        hit = np.zeros(k.shape, dtype=bool)
        for c in self.cuts:
            hit |= c.distance(k) <= tol * max(1.0, abs(c.mid))
        return hit


def w_eval(surface: SurfaceSpec, k):
    """Product of the cut square roots, ``w ~ k**ncuts`` at infinity."""
    if np.any(surface.on_cut(k)):
        raise OnCutWithoutSide("w is evaluated off the cuts only")
    out = np.ones(np.shape(k), dtype=complex)
    for c in surface.cuts:
        out = out * c.sqrt(k)
    return out


def theta_phase(xi: float, k):
    """Phase ``2k^2 + xi*k``."""
    k = np.asarray(k, dtype=complex)
    return 2 * k * k + xi * k


# -------------------------------------------------------------- g-prime

@dataclass(frozen=True)
class GPrimeSpec:
    """Derivative of a g-function at fixed ``xi``.

    ``real_zeros`` and ``pair_zeros`` (one member per conjugate pair) define the
    polynomial part unless ``numerator`` is given directly (highest power
    first). ``g0`` is the constant in ``g = 2k^2 + xi k + g0 + O(1/k)``.
    """

    xi: float
    surface: SurfaceSpec
    real_zeros: tuple = ()
    pair_zeros: tuple = ()
    zero_cuts: tuple = ()
    g0: float = 0.0
    label: str = ""
    numerator: tuple | None = None
    poly: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "real_zeros", tuple(float(x) for x in self.real_zeros))
        object.__setattr__(self, "pair_zeros", tuple(complex(p) for p in self.pair_zeros))
        object.__setattr__(self, "zero_cuts", tuple(int(i) for i in self.zero_cuts))
        if self.numerator is not None:
            poly = np.array(self.numerator, dtype=float)
        else:
            poly = np.array([1.0])
            for z in self.real_zeros:
                poly = np.polymul(poly, [1.0, -z])
            for p in self.pair_zeros:
                poly = np.polymul(poly, [1.0, -2 * p.real, abs(p) ** 2])
        object.__setattr__(self, "poly", poly)
        n_num = len(poly) - 1 + len(self.zero_cuts)
        n_den = len(self.surface.cuts) - len(self.zero_cuts)
        if n_num - n_den != 1:
            raise DomainError(f"g' must grow like 4k (degree mismatch {n_num - n_den})")

    @property
    def genus(self) -> int:
        return self.surface.genus


def _gprime_factor(spec: GPrimeSpec, k, skip: int | None = None):
    """g' with the square root of cut ``skip`` removed, plus that root's exponent."""
    k = np.asarray(k, dtype=complex)
    out = 4 * np.polyval(spec.poly, k)
    exponent = 0
    for i, c in enumerate(spec.surface.cuts):
        e = 1 if i in spec.zero_cuts else -1
        if i == skip:
            exponent = e
            continue
        s = c.sqrt(k)
        out = out * s if e > 0 else out / s
    return out, exponent


def gprime(spec: GPrimeSpec, k):
    """Evaluate g'(k) off the cuts."""
    if np.any(spec.surface.on_cut(k)):
        raise OnCutWithoutSide("g' is evaluated off the cuts only")
    return _gprime_factor(spec, k)[0]


# ------------------------------------------------------ Laurent series

def series_power(q: np.ndarray, alpha: float, n: int) -> np.ndarray:
    """Coefficients of ``q(x)**alpha`` up to ``x**(n-1)`` for ``q(0) = 1``."""
    q = np.concatenate([np.asarray(q, dtype=complex), np.zeros(n)])[:n]
    h = np.zeros(n, dtype=complex)
    h[0] = 1.0
    for m in range(1, n):
        j = np.arange(1, m + 1)
        h[m] = np.sum(((alpha + 1) * j - m) * q[j] * h[m - j]) / m
    return h


def laurent_coefficients(spec: GPrimeSpec, nterms: int = 6) -> np.ndarray:
    """Coefficients of k^1, k^0, k^-1, ... of g' at infinity, by series arithmetic."""
    n = nterms + 4
    x = np.zeros(n, dtype=complex)
    poly = spec.poly
    x[: len(poly)] = poly  # poly(k) = k^d * sum p_i x^i
    series = x
    for i, c in enumerate(spec.surface.cuts):
        q = np.array([1.0, -(c.a + c.b), c.a * c.b])
        alpha = 0.5 if i in spec.zero_cuts else -0.5
        series = np.convolve(series, series_power(q, alpha, n))[:n]
    out = 4 * series[:nterms]
    return out.real if np.all(np.abs(out.imag) < 1e-12 * (1 + np.abs(out.real))) else out


def laurent_fit(spec: GPrimeSpec, radius: float, npoints: int = 16) -> np.ndarray:
    """Fit k^1, k^0, k^-1, k^-2 coefficients from samples on a circle (Vandermonde)."""
    th = 2 * np.pi * (np.arange(npoints) + 0.25) / npoints
    k = radius * np.exp(1j * th)
    vals = gprime(spec, k)
    powers = np.array([1, 0, -1, -2, -3])
    V = k[:, None] ** powers[None, :]
    coef, *_ = np.linalg.lstsq(V, vals, rcond=None)
    return coef[:4]


def expansion_residuals(spec: GPrimeSpec) -> np.ndarray:
    """(k^1 coefficient - 4, k^0 coefficient - xi, k^-1 coefficient)."""
    c = laurent_coefficients(spec, 3)
    return np.array([c[0] - 4, c[1] - spec.xi, c[2]])


# --------------------------------------------------------- cycle periods

def collapsed_cycle(H, cut: Cut, exponent: int, tol: float = PERIOD_TOL,
                    max_evaluations: int = 4_000_000) -> complex:
    """Counterclockwise loop integral of ``H(k) * s(k)**exponent`` around ``cut``.

    ``s`` is the cut's square root and ``H`` must be analytic near the cut. The
    loop is contracted onto the cut, and the endpoint substitution
    ``k = mid - half*cos(theta)`` removes the square-root endpoint behaviour.
    """
    d = cut.half

    if exponent < 0:
        def f(th):
            return H(cut.theta_points(th.real))
        res = integrate(f, Path((Segment(0, math.pi),)), tol=tol, max_evaluations=max_evaluations)
        return 2j * res.value

    def f(th):
        t = th.real
        return H(cut.theta_points(t)) * np.sin(t) ** 2
    res = integrate(f, Path((Segment(0, math.pi),)), tol=tol, max_evaluations=max_evaluations)
    return -2j * d * d * res.value


def rectangle_cycle(F, cut: Cut, clearance: float, tol: float = 1e-12) -> complex:
    """The same loop integral on a rectangle around ``cut``; used as a cross-check."""
    return integrate(F, Path.around_segment(cut.a, cut.b, clearance), tol=tol).value


def gprime_period(spec: GPrimeSpec, i: int, tol: float = PERIOD_TOL) -> complex:
    """Loop integral of g' around cut ``i`` on the principal sheet."""
    cut = spec.surface.cuts[i]

    def H(k):
        return _gprime_factor(spec, k, skip=i)[0]
    return collapsed_cycle(H, cut, _gprime_factor(spec, cut.mid + 10.0, skip=i)[1], tol)


def condition_residuals(spec: GPrimeSpec) -> np.ndarray:
    """Expansion residuals followed by the imaginary parts of all cut periods.

    These vanish exactly when Im g is single valued off the cuts and g has the
    prescribed behaviour at infinity.
    """
    per = [gprime_period(spec, i).imag for i in range(len(spec.surface.cuts))]
    return np.concatenate([np.abs(expansion_residuals(spec)), per])


# ----------------------------------------------------------- cut-free paths

def _rect_corners(cut: Cut, c: float):
    t = (cut.b - cut.a) / abs(cut.b - cut.a) if cut.b != cut.a else 1.0
    n = 1j * t
    return [cut.a - c * t - c * n, cut.b + c * t - c * n, cut.b + c * t + c * n, cut.a - c * t + c * n]


def _edge_ok(p, q, cuts, margin, end_free):
    for c in cuts:
        if segments_intersect(p, q, c.a, c.b):
            return False
        if c.a == c.b:
            continue
        if end_free:
            # only the final point may sit close to a cut
            pts = np.array([p, 0.5 * (p + q)])
            if np.min(point_segment_distance(pts, c.a, c.b)) < margin:
                return False
            if min(point_segment_distance(c.a, p, q), point_segment_distance(c.b, p, q)) < 1e-15:
                return False
        elif segment_distance(p, q, c.a, c.b) < margin:
            return False
    return True


def cut_free_path(surface: SurfaceSpec, start: complex, end: complex, clearance: float | None = None) -> Path:
    """Shortest polyline from ``start`` to ``end`` that keeps off every cut.

    Waypoints are the corners of rectangles around the cuts; only the last leg
    may approach a cut closer than half the clearance.
    """
    cuts = surface.cuts
    c = surface.clearance if clearance is None else clearance
    nodes = [complex(start), complex(end)]
    for cut in cuts:
        nodes += _rect_corners(cut, c)
    margin = 0.5 * c
    n = len(nodes)
    dist = [np.inf] * n
    prev = [-1] * n
    dist[0] = 0.0
    heap = [(0.0, 0)]
    while heap:
        d, i = heapq.heappop(heap)
        if d > dist[i]:
            continue
        if i == 1:
            break
        for j in range(1, n):
            if j == i:
                continue
            if not _edge_ok(nodes[i], nodes[j], cuts, margin, end_free=(j == 1)):
                continue
            nd = d + abs(nodes[j] - nodes[i])
            if nd < dist[j]:
                dist[j] = nd
                prev[j] = i
                heapq.heappush(heap, (nd, j))
    if not np.isfinite(dist[1]):
        raise PathBlocked(f"no cut-free path from {start} to {end}")
    idx = 1
    chain = [1]
    while idx != 0:
        idx = prev[idx]
        chain.append(idx)
    pts = [nodes[i] for i in reversed(chain)]
    return Path.polyline(pts)


# -------------------------------------------------------------- g itself

def anchor_point(spec: GPrimeSpec) -> float:
    return max(p.real for p in spec.surface.branch_points) + 2.0


def _series_radius(spec: GPrimeSpec) -> float:
    roots = list(np.roots(spec.poly)) if len(spec.poly) > 1 else []
    r = max([spec.surface.radius] + [abs(z) for z in roots] + [1.0])
    return 4.0 * r


def anchor_value(spec: GPrimeSpec, tol: float = 1e-13) -> complex:
    """g at the real anchor point, fixed by the normalisation at infinity."""
    k0 = anchor_point(spec)
    R = max(_series_radius(spec), k0 + 1.0)
    c = laurent_coefficients(spec, 24)
    # tail: integral of sum_{n>=2} c_{-n} k^{-n} from R to infinity
    tail = sum(c[n + 1] * R ** (1 - n) / (n - 1) for n in range(2, 23))
    # c_{-1} ~ 0 when the conditions hold; its log contribution is dropped

    def f(k):
        return gprime(spec, k) - 4 * k - spec.xi
    body = integrate(f, Path((Segment(k0, R),)), tol=tol).value
    return 2 * k0 ** 2 + spec.xi * k0 + spec.g0 - (body + tail)


def check_conditions(spec: GPrimeSpec, tol: float = CONDITIONS_TOL):
    res = condition_residuals(spec)
    if np.max(np.abs(res)) > tol:
        raise ConditionsNotSatisfied(f"g-function conditions violated (max residual {np.max(np.abs(res)):.2e})",
                                     residual=float(np.max(np.abs(res))))
    return res


def g_eval(spec: GPrimeSpec, k, acknowledge: bool = False, tol: float = 1e-12):
    """g(k) by integrating g' from the real anchor along a cut-free path.

    Unless ``acknowledge`` is set, the defining conditions are checked first; when
    they fail, Im g would depend on the path.
    """
    if not acknowledge:
        check_conditions(spec)
    k_arr = np.atleast_1d(np.asarray(k, dtype=complex))
    if np.any(spec.surface.on_cut(k_arr)):
        raise OnCutWithoutSide("g is evaluated off the cuts only")
    k0 = anchor_point(spec)
    g_k0 = anchor_value(spec)
    out = np.empty(k_arr.shape, dtype=complex)
    for idx, kk in enumerate(k_arr):
        path = cut_free_path(spec.surface, complex(k0), complex(kk))
        total = 0j
        for seg in path.segments:
            total += integrate(lambda z: gprime(spec, z), Path((seg,)), tol=tol).value
        out[idx] = g_k0 + total
    return out[0] if np.ndim(k) == 0 else out.reshape(np.shape(k))


# ----------------------------------------------------------- spec builders

def genus0_zeros(A: float, B: float, xi: float):
    """Zeros of the plane-wave g' for background (A, B): real pair or conjugate pair."""
    disc = (xi + 4 * B) ** 2 - 32 * A ** 2
    c = B / 2 - xi / 8
    if disc >= 0:
        s = math.sqrt(disc) / 8
        return (c - s, c + s), ()
    return (), (complex(c, math.sqrt(-disc) / 8),)


def genus0_spec(params: ProblemParams, xi: float, j: int = 2) -> GPrimeSpec:
    """Plane-wave g-function ``Omega_j + xi X_j`` as a GPrimeSpec."""
    A, B = params.A(j), params.B(j)
    real, pair = genus0_zeros(A, B, xi)
    surf = SurfaceSpec.from_points([params.E(j)])
    return GPrimeSpec(xi, surf, real, pair, (), g0=params.omega(j) - xi * B, label=f"genus0-{j}")


def genus0_closed_form(params: ProblemParams, xi: float, k, j: int = 2):
    return Omega(params, j, k) + xi * X(params, j, k)


def genus1_xi0_spec(params: ProblemParams) -> GPrimeSpec:
    """g'(0,k) = 4k(k^2 + alpha0^2)/w for the symmetric shock with A >= B."""
    A, B = _sym(params)
    if A < B:
        raise DomainError("the xi = 0 form with a conjugate zero pair needs A >= B")
    a0 = math.sqrt(A * A - B * B)
    surf = SurfaceSpec.from_points([params.E1, params.E2])
    if a0 == 0:
        return GPrimeSpec(0.0, surf, (0.0, 0.0, 0.0), (), label="genus1-xi0")
    return GPrimeSpec(0.0, surf, (0.0,), (1j * a0,), label="genus1-xi0")


def _sym(params: ProblemParams):
    if not params.is_symmetric_shock:
        raise DomainError("operation requires a symmetric shock (A1 = A2, B2 = -B1 > 0)")
    return params.A1, params.B2


# ---------------------------------------------------- boundary locations

@dataclass(frozen=True)
class BoundaryValue:
    closed_form: float
    numeric: float


def xi_E1_closed(A: float, B: float) -> float:
    return 2 * (B + math.sqrt(A * A + B * B))


def xi_merge_closed(A: float, B: float) -> float:
    return 4 * (-B + math.sqrt(2) * A)


def find_xi_E1(params: ProblemParams) -> BoundaryValue:
    """xi at which the plane-wave level set Im g_2 = 0 passes through E1."""
    A, B = _sym(params)

    def f(xi):
        return float(np.imag(genus0_closed_form(params, xi, params.E1)))
    try:
        root = find_root_1d(f, (0.0, 10 * (A + B)), tol=1e-13)
    except NoSignChange as exc:
        raise BracketFailure(str(exc)) from exc
    return BoundaryValue(xi_E1_closed(A, B), root)


def find_xi_merge(params: ProblemParams) -> BoundaryValue:
    """xi at which the two real zeros of the plane-wave g' coalesce."""
    A, B = _sym(params)

    def disc(xi):
        return (xi + 4 * B) ** 2 - 32 * A ** 2
    root = find_root_1d(disc, (-4 * B, -4 * B + 10 * (A + 1.0)), tol=1e-13)
    return BoundaryValue(xi_merge_closed(A, B), root)
