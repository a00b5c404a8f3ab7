"""Branch functions, background solutions and pure-step scattering data.

All evaluators accept scalars or numpy arrays of spectral points ``k``.
Points on a cut Sigma_j = [conj(E_j), E_j] require ``side``: ``+1`` for the
left (plus) side of the upward-oriented cut, ``-1`` for the right side.
Boundary values are limits from that side, computed at offsets ``delta`` and
``2*delta`` and combined by Richardson extrapolation.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import AtBranchPoint, DomainError, EndpointWarning, OnCutWithoutSide, ZeroDenominator
from .quadrature import sqrt_segment

SIGMA2 = np.array([[0, -1j], [1j, 0]])
SIGMA3 = np.array([[1, 0], [0, -1]], dtype=complex)
SIDE_DELTA = 1e-8
CUT_TOL = 1e-13
# generic data grow like |k - E|^(-1/4) next to a branch point
ENDPOINT_RADIUS = 1e-3
ENDPOINT_SMALL_A = 1.0


@dataclass(frozen=True)
class ProblemParams:
    """Step parameters: amplitudes ``A1, A2``, wavenumbers ``B1, B2``, phases."""

    A1: float
    A2: float
    B1: float
    B2: float
    phi1: float = 0.0
    phi2: float = 0.0
    case: str = field(init=False)

    def __post_init__(self):
        for name in ("A1", "A2", "B1", "B2", "phi1", "phi2"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise DomainError(f"{name} must be finite")
            object.__setattr__(self, name, v)
        if not (self.A1 > 0 and self.A2 > 0):
            raise DomainError("A_j>0 required")
        if self.B1 > self.B2:
            case = "rarefaction"
        elif self.B1 < self.B2:
            case = "shock"
        else:
            case = "equal"
        object.__setattr__(self, "case", case)

    @property
    def E1(self) -> complex:
        return complex(self.B1, self.A1)

    @property
    def E2(self) -> complex:
        return complex(self.B2, self.A2)

    def E(self, j: int) -> complex:
        return self.E1 if j == 1 else self.E2

    def A(self, j: int) -> float:
        return self.A1 if j == 1 else self.A2

    def B(self, j: int) -> float:
        return self.B1 if j == 1 else self.B2

    def phase(self, j: int) -> float:
        return self.phi1 if j == 1 else self.phi2

    def omega(self, j: int) -> float:
        return self.A(j) ** 2 - 2 * self.B(j) ** 2

    @property
    def phi(self) -> float:
        return self.phi1 - self.phi2

    @property
    def is_symmetric_shock(self) -> bool:
        return (self.case == "shock" and abs(self.A1 - self.A2) <= 1e-14 * self.A1
                and abs(self.B1 + self.B2) <= 1e-14 * max(1.0, abs(self.B2)))

    def as_dict(self):
        return {k: getattr(self, k) for k in ("A1", "A2", "B1", "B2", "phi1", "phi2")}


def symmetric_shock(A: float, B: float = 1.0, phi1: float = 0.0, phi2: float = 0.0) -> ProblemParams:
    """Parameters with A1 = A2 = A and B2 = -B1 = B."""
    return ProblemParams(A, A, -B, B, phi1, phi2)


# ------------------------------------------------------------ side limits

def _on_cut(k, E: complex):
    k = np.asarray(k, dtype=complex)
    return (np.abs(k.real - E.real) <= CUT_TOL * max(1.0, abs(E.real))) & (np.abs(k.imag) <= E.imag)


def one_sided(fn, k, side: int, delta: float = SIDE_DELTA):
    """Limit of ``fn`` at ``k`` from the ``side`` of an upward-oriented vertical cut."""
    k = np.asarray(k, dtype=complex)
    step = -side * delta
    f1 = fn(k + step)
    f2 = fn(k + 2 * step)
    if isinstance(f1, tuple):
        return tuple(2 * u - v for u, v in zip(f1, f2))
    return 2 * f1 - f2


def _guard(k, cuts, side):
    if side is not None:
        return
    for E in cuts:
        if np.any(_on_cut(k, E)):
            raise OnCutWithoutSide(f"k lies on the cut through {E}; specify side=+1 or -1")


# -------------------------------------------------------- branch functions

def log_vertical(z):
    """Logarithm with its cut along the downward vertical ray from 0."""
    return np.log(-1j * np.asarray(z, dtype=complex)) + 0.5j * np.pi


def _nu_raw(E: complex, k):
    k = np.asarray(k, dtype=complex)
    return np.exp(0.25 * (log_vertical(k - E) - log_vertical(k - np.conj(E))))


def nu(params: ProblemParams, j: int, k, side: int | None = None):
    """Fourth root ``((k-E_j)/(k-conj E_j))**(1/4)``, cut on Sigma_j, tending to 1."""
    E = params.E(j)
    if side is not None:
        return one_sided(lambda z: _nu_raw(E, z), k, side)
    _guard(k, [E], side)
    return _nu_raw(E, k)


def X(params: ProblemParams, j: int, k, side: int | None = None):
    """``sqrt((k-E_j)(k-conj E_j))`` with ``X_j ~ k - B_j`` at infinity."""
    E = params.E(j)
    if side is not None:
        return one_sided(lambda z: sqrt_segment(z, np.conj(E), E), k, side)
    _guard(k, [E], side)
    return sqrt_segment(k, np.conj(E), E)


def Omega(params: ProblemParams, j: int, k, side: int | None = None):
    k = np.asarray(k, dtype=complex)
    return 2 * (k + params.B(j)) * X(params, j, k, side)


def _emat(n):
    p = 0.5 * (n + 1 / n)
    m = 0.5 * (n - 1 / n)
    return np.array([[p, m], [m, p]])


def E_matrix(params: ProblemParams, j: int, k: complex, side: int | None = None):
    """The 2x2 matrix built from nu_j (scalar ``k`` only)."""
    return _emat(complex(nu(params, j, k, side)))


def N_matrix(params: ProblemParams, j: int, k: complex, side: int | None = None):
    ph = params.phase(j)
    d = np.diag([np.exp(0.5j * ph), np.exp(-0.5j * ph)])
    return d @ E_matrix(params, j, k, side) @ np.conj(d)


def background_phi0(params: ProblemParams, j: int, x: float, t: float, k: complex,
                    side: int | None = None):
    """Background Jost-type solution of the Lax pair for the plane wave j."""
    b = params.B(j)
    w = params.omega(j)
    left = np.exp(-1j * b * x + 1j * w * t)
    xj = complex(X(params, j, k, side))
    om = complex(Omega(params, j, k, side))
    right = np.exp(-1j * xj * x - 1j * om * t)
    return np.diag([left, 1 / left]) @ N_matrix(params, j, k, side) @ np.diag([right, 1 / right])


# ------------------------------------------------------- scattering data

def _ab_raw(params: ProblemParams, k):
    n1 = _nu_raw(params.E1, k)
    n2 = _nu_raw(params.E2, k)
    p1, m1 = n1 + 1 / n1, n1 - 1 / n1
    p2, m2 = n2 + 1 / n2, n2 - 1 / n2
    a = 0.25 * (-np.exp(-1j * params.phi) * m1 * m2 + p1 * p2)
    b = 0.25 * (np.exp(1j * params.phi2) * p1 * m2 - np.exp(1j * params.phi1) * m1 * p2)
    return a, b


def _check_branch_points(params, k):
    k = np.asarray(k, dtype=complex)
    for p in (params.E1, params.E2):
        for q in (p, np.conj(p)):
            if np.any(np.abs(k - q) <= 1e-14 * max(1.0, abs(q))):
                raise AtBranchPoint(f"k coincides with the branch point {q}")


def _check_endpoint_growth(params, k, a):
    k = np.asarray(k, dtype=complex)
    d = np.min([np.abs(k - q) for p in (params.E1, params.E2) for q in (p, np.conj(p))], axis=0)
    if np.any((d < ENDPOINT_RADIUS) & (np.abs(a) < ENDPOINT_SMALL_A)):
        warnings.warn("|a| is small next to a branch point; the endpoint behaviour may be "
                      "non-generic (virtual level), which is not classified", EndpointWarning,
                      stacklevel=3)


def step_scattering(params: ProblemParams, k, side: int | None = None):
    """Closed-form spectral functions ``(a(k), b(k))`` of the pure step."""
    _check_branch_points(params, k)
    if side is not None:
        a, b = one_sided(lambda z: _ab_raw(params, z), k, side)
    else:
        _guard(k, [params.E1, params.E2], side)
        a, b = _ab_raw(params, k)
    _check_endpoint_growth(params, k, a)
    return a, b


def a_star(params: ProblemParams, k, side: int | None = None):
    """Schwarz conjugate ``conj(a(conj k))``; the side is preserved by reflection."""
    k = np.asarray(k, dtype=complex)
    return np.conj(step_scattering(params, np.conj(k), side)[0])


def b_star(params: ProblemParams, k, side: int | None = None):
    k = np.asarray(k, dtype=complex)
    return np.conj(step_scattering(params, np.conj(k), side)[1])


def scattering_matrix(params: ProblemParams, k: complex):
    a, b = step_scattering(params, k)
    return np.array([[a_star(params, k), b], [-b_star(params, k), a]], dtype=complex)


def reflection(params: ProblemParams, k):
    """Reflection coefficients ``r = b*/a`` and ``rtilde = b/a`` for real ``k``."""
    k = np.asarray(k, dtype=float)
    for bj in (params.B1, params.B2):
        if np.any(k == bj):
            raise DomainError("k must differ from B1 and B2 (cut crossings of the real axis)")
    a, b = step_scattering(params, k.astype(complex))
    if np.any(np.abs(a) < 1e-14):
        raise ZeroDenominator("a(k) vanishes: soliton or virtual-level configuration")
    bs = np.conj(b)  # b*(k) = conj(b(k)) on the real axis
    return bs / a, b / a


def theta(xi, k):
    k = np.asarray(k, dtype=complex)
    return 2 * k * k + xi * k


PARTS = ("R", "S1+", "S1-", "S2+", "S2-")


def jump_matrix0(params: ProblemParams, k: complex, part: str):
    """Jump matrix before conjugation by the exponential phase."""
    k = complex(k)
    if part == "R":
        if abs(k.imag) > 1e-14:
            raise DomainError("part 'R' requires real k")
        r, _ = reflection(params, k.real)
        r = complex(r)
        return np.array([[1 + abs(r) ** 2, np.conj(r)], [r, 1]])
    if part not in PARTS:
        raise ValueError(f"unknown contour part {part!r}")
    j = int(part[1])
    upper = part[2] == "+"
    E = params.E(j)
    if not _on_cut(k, E) or (k.imag > 0) != upper or k.imag == 0:
        raise DomainError(f"k = {k} is not on {part}")
    _check_branch_points(params, k)
    if upper:
        ap = complex(step_scattering(params, k, +1)[0])
        am = complex(step_scattering(params, k, -1)[0])
        if j == 1:
            return np.array([[1, 0], [1j * np.exp(-1j * params.phi1) / (ap * am), 1]])
        return np.array([[am / ap, 1j * np.exp(1j * params.phi2)], [0, ap / am]])
    sp = complex(a_star(params, k, +1))
    sm = complex(a_star(params, k, -1))
    if j == 1:
        return np.array([[1, 1j * np.exp(1j * params.phi1) / (sp * sm)], [0, 1]])
    return np.array([[sp / sm, 0], [1j * np.exp(-1j * params.phi2), sm / sp]])


def jump_matrix(params: ProblemParams, x: float, t: float, k: complex, part: str):
    """Full jump ``exp(-it theta sigma3) J0 exp(it theta sigma3)`` with theta = 2k^2 + (x/t)k."""
    j0 = jump_matrix0(params, k, part)
    ph = np.exp(-2j * (2 * k * k * t + x * k))
    out = j0.astype(complex).copy()
    out[0, 1] *= ph
    out[1, 0] /= ph
    return out
