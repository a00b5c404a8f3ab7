"""Genus-2 g-function of the symmetric shock: period map, Jacobian, ODE, start.

The unknowns are ``x = (xi, alpha1, alpha2)``. The real zeros ``mu1 < mu2``
follow from the two conditions at infinity, and

    F(x) = (1/i) (loop integral of dg around Sigma_1, same around Sigma_2)

must vanish. Loop integrals are evaluated by contracting each loop onto its cut.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AtBranchPoint,
    CutCollision,
    DomainError,
    DomainTooClose,
    NewtonFailure,
    NonConvergence,
    SingularP,
    SingularPeriodMatrix,
)
from .quadrature import newton_solve
from .spectral import ProblemParams
from .surfaces import (
    Cut,
    GPrimeSpec,
    SurfaceSpec,
    _sym,
    collapsed_cycle,
    xi_E1_closed,
)

MIN_DIST_E = 1e-6


@dataclass(frozen=True)
class ParamStateG2:
    """Point ``(xi, alpha1, alpha2)`` of the genus-2 parameter space."""

    params: ProblemParams
    xi: float
    alpha1: float
    alpha2: float
    A: float = field(init=False)
    B: float = field(init=False)

    def __post_init__(self):
        A, B = _sym(self.params)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        for name in ("xi", "alpha1", "alpha2"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not self.alpha2 > 0:
            raise DomainError("alpha2 > 0 required")
        for E in (self.params.E1, self.params.E2):
            d = abs(self.alpha - E)
            if d == 0:
                raise AtBranchPoint("alpha coincides with a background branch point")
            if d < MIN_DIST_E:
                raise DomainTooClose(f"alpha is {d:.1e} from {E}; closer than {MIN_DIST_E:g} is refused")
        for E in (self.params.E1, self.params.E2):
            if abs(self.alpha1 - E.real) == 0.0:
                raise CutCollision("the alpha cut overlaps a background cut")

    @property
    def alpha(self) -> complex:
        return complex(self.alpha1, self.alpha2)

    @property
    def x(self) -> np.ndarray:
        return np.array([self.xi, self.alpha1, self.alpha2])

    def replace(self, xi=None, alpha1=None, alpha2=None) -> "ParamStateG2":
        return ParamStateG2(self.params, self.xi if xi is None else xi,
                            self.alpha1 if alpha1 is None else alpha1,
                            self.alpha2 if alpha2 is None else alpha2)

    # zeros of the quadratic factor
    @property
    def mu_sum(self) -> float:
        return -self.alpha1 - self.xi / 4

    @property
    def mu_prod(self) -> float:
        a1, a2, xi = self.alpha1, self.alpha2, self.xi
        return a1 * a1 + a1 * xi / 4 + self.A ** 2 - a2 * a2 / 2 - self.B ** 2

    @property
    def discriminant(self) -> float:
        a1, a2, xi, A, B = self.alpha1, self.alpha2, self.xi, self.A, self.B
        return -48 * a1 ** 2 - 8 * a1 * xi - 64 * A ** 2 + 32 * a2 ** 2 + 64 * B ** 2 + xi ** 2

    @property
    def mu1(self) -> float:
        return (-4 * self.alpha1 - self.xi - math.sqrt(max(self.discriminant, 0.0))) / 8

    @property
    def mu2(self) -> float:
        return (-4 * self.alpha1 - self.xi + math.sqrt(max(self.discriminant, 0.0))) / 8

    @property
    def in_domain(self) -> bool:
        return self.discriminant > 0

    @property
    def surface(self) -> SurfaceSpec:
        p = self.params
        return SurfaceSpec((Cut.vertical(p.E1), Cut.vertical(self.alpha), Cut.vertical(p.E2)))

    def gprime_spec(self) -> GPrimeSpec:
        return GPrimeSpec(self.xi, self.surface, numerator=(1.0, -self.mu_sum, self.mu_prod),
                          zero_cuts=(1,), label="genus2")

    @property
    def P(self) -> np.ndarray:
        return P_matrix(self.xi, self.alpha1, self.alpha2, self.A, self.B)

    @property
    def G(self) -> np.ndarray:
        return G_vector(self.alpha1, self.alpha2)

    @property
    def detP(self) -> float:
        return float(np.linalg.det(self.P))


def P_matrix(xi, a1, a2, A, B) -> np.ndarray:
    """Coefficients of the alpha-derivatives of dg in the basis (1, k)/w."""
    p11 = 12 * a1 ** 3 + 2 * a1 ** 2 * xi + 6 * a1 * a2 ** 2 + 4 * a1 * A ** 2 + a2 ** 2 * xi - 4 * a1 * B ** 2
    p21 = -12 * a1 ** 2 - 2 * a1 * xi - 4 * A ** 2 + 6 * a2 ** 2 + 4 * B ** 2
    p12 = a2 * (a1 * xi + 4 * A ** 2 - 6 * a2 ** 2 - 4 * B ** 2)
    p22 = a2 * (12 * a1 + xi)
    return np.array([[p11, p12], [p21, p22]])


def G_vector(a1, a2) -> np.ndarray:
    return np.array([a1 * (a1 * a1 + a2 * a2), a2 * a2 - a1 * a1])


def detP_closed(state: ParamStateG2) -> float:
    """16 alpha2 |alpha - mu1|^2 |alpha - mu2|^2, written through mu1 + mu2 and mu1 mu2."""
    a = state.alpha
    s, p = state.mu_sum, state.mu_prod
    q = a * a - s * a + p  # (alpha - mu1)(alpha - mu2)
    return 16 * state.alpha2 * abs(q) ** 2


# ------------------------------------------------------------- periods

def _cut_factors(state: ParamStateG2):
    p = state.params
    c1, ca, c2 = Cut.vertical(p.E1), Cut.vertical(state.alpha), Cut.vertical(p.E2)
    return c1, ca, c2


def _loop(state: ParamStateG2, j: int, num, tol=1e-13) -> complex:
    """Loop integral around Sigma_j of num(k)/w(k) with w = X1 X_alpha X2."""
    c1, ca, c2 = _cut_factors(state)
    cut, other = (c1, c2) if j == 1 else (c2, c1)

    def H(k):
        return num(k) / (ca.sqrt(k) * other.sqrt(k))
    try:
        return collapsed_cycle(H, cut, -1, tol, max_evaluations=100_000)
    except NonConvergence:
        # alpha within ~1e-6 of E1: the near-endpoint peak limits attainable accuracy
        return collapsed_cycle(H, cut, -1, 1e3 * tol)


def _loop_dg(state: ParamStateG2, j: int, tol=1e-13) -> complex:
    c1, ca, c2 = _cut_factors(state)
    cut, other = (c1, c2) if j == 1 else (c2, c1)
    s, p = state.mu_sum, state.mu_prod

    def H(k):
        return 4 * (k * k - s * k + p) * ca.sqrt(k) / other.sqrt(k)
    return collapsed_cycle(H, cut, -1, tol)


@dataclass(frozen=True)
class PeriodMatrix:
    M: np.ndarray       # loop integrals of k^(l-1)/w, the inverse of the normalising matrix
    A: np.ndarray       # normalising matrix, inverse of M
    cond: float


def periods_matrix(state: ParamStateG2, tol: float = 1e-13) -> PeriodMatrix:
    """Loop integrals of dk/w and k dk/w around Sigma_1, Sigma_2 and their inverse."""
    M = np.empty((2, 2), dtype=complex)
    for j in (1, 2):
        for l in (1, 2):
            M[j - 1, l - 1] = _loop(state, j, lambda k, l=l: k ** (l - 1), tol)
    cond = float(np.linalg.cond(M))
    if not np.isfinite(cond) or cond > 1e14:
        raise SingularPeriodMatrix(f"period matrix is singular (condition {cond:.2e})")
    return PeriodMatrix(M, np.linalg.inv(M), cond)


def F_raw(state: ParamStateG2, tol: float = 1e-13) -> np.ndarray:
    """(1/i) times the two loop integrals of dg, as complex numbers."""
    return np.array([_loop_dg(state, j, tol) for j in (1, 2)]) / 1j


def F_eval(state: ParamStateG2, tol: float = 1e-13) -> np.ndarray:
    """The real map F; its imaginary part vanishes by Schwarz symmetry."""
    return F_raw(state, tol).real


def jacobian_alpha(state: ParamStateG2, periods: PeriodMatrix | None = None) -> np.ndarray:
    """D_alpha F = -i M P with M the loop integrals of (1, k)/w."""
    pm = periods or periods_matrix(state)
    return (-1j * pm.M @ state.P).real


def I_vector(state: ParamStateG2, tol: float = 1e-13) -> np.ndarray:
    a1 = state.alpha1
    return np.array([_loop(state, j, lambda k: k * k * (k - a1), tol) for j in (1, 2)])


def dF_dxi(state: ParamStateG2, periods: PeriodMatrix | None = None) -> np.ndarray:
    pm = periods or periods_matrix(state)
    return (-1j * (pm.M @ state.G + I_vector(state))).real


def ode_rhs(state: ParamStateG2) -> np.ndarray:
    """(alpha1', alpha2') along F = 0 from -P^{-1} G - P^{-1} A I."""
    P = state.P
    if abs(np.linalg.det(P)) < 1e-14 * max(1.0, np.max(np.abs(P)) ** 2):
        raise SingularP("P is singular")
    pm = periods_matrix(state)
    rhs = -np.linalg.solve(P, state.G) - np.linalg.solve(P, pm.A @ I_vector(state))
    return rhs.real


def ode_rhs_complex(state: ParamStateG2) -> np.ndarray:
    """The same right-hand side before taking real parts (for realness checks)."""
    P = state.P
    pm = periods_matrix(state)
    return -np.linalg.solve(P.astype(complex), state.G) - np.linalg.solve(P.astype(complex), pm.A @ I_vector(state))


# ------------------------------------------------- behaviour near xi_E1

def c1_constant(A: float, B: float) -> complex:
    E1 = complex(-B, A)
    E2 = complex(B, A)
    return 2 * B * E1 / (A * A + 4j * A * B - 3 * B * B - B * abs(E2))


def mu_at_xi_E1(A: float, B: float):
    """Plane-wave zeros at xi_E1, where the genus-2 branch starts."""
    E = math.hypot(A, B)
    r = math.sqrt(2 * B * (3 * E + 5 * B) - 7 * A * A)
    return (B - E - r) / 4, (B - E + r) / 4


def f0(A: float, B: float, xi: float) -> float:
    """Limit of F1 as alpha tends to E1."""
    sE2 = np.sqrt(complex(B, A))
    return -8 * math.sqrt(B) * sE2.imag * (xi - xi_E1_closed(A, B))


def f0_prime(A: float, B: float) -> float:
    return -8 * math.sqrt(B) * np.sqrt(complex(B, A)).imag


def Q_poly(A: float, B: float, xi: float) -> complex:
    return -2j * A * A + A * (xi - 12 * B) + 2j * B * (4 * B - xi)


def d00(A: float, B: float, xi: float) -> complex:
    """Coefficient of the logarithmic singularity of the alpha-derivatives of F1."""
    return -1j * np.conj(Q_poly(A, B, xi)) / (math.sqrt(B) * np.sqrt(complex(B, -A)))


def q_limits(A: float, B: float, xi: float):
    """Limits of (d F2/d alpha1, d F2/d alpha2) as alpha tends to E1."""
    z = Q_poly(A, B, xi) / (math.sqrt(B) * np.sqrt(complex(B, A)))
    return -math.pi * z.imag, math.pi * z.real


def regularizing_map(E1: complex, alpha: complex) -> complex:
    """alpha -> E1 + (alpha - E1)/|ln|alpha - E1||, which removes the log singularity."""
    d = alpha - E1
    return E1 + d / abs(math.log(abs(d)))


def F_tilde(params: ProblemParams, xi: float, alpha: complex) -> np.ndarray:
    """F composed with the regularizing map, second component rescaled by |ln|alpha-E1||."""
    E1 = params.E1
    phi = regularizing_map(E1, alpha)
    Fv = F_eval(ParamStateG2(params, xi, phi.real, phi.imag))
    return np.array([Fv[0], Fv[1] * abs(math.log(abs(alpha - E1)))])


def DF_tilde_limit(A: float, B: float) -> np.ndarray:
    """Limit of the Jacobian of F_tilde at (xi_E1, E1)."""
    xi = xi_E1_closed(A, B)
    d = d00(A, B, xi)
    q1, q2 = q_limits(A, B, xi)
    return np.array([[f0_prime(A, B), -d.imag, -d.real], [0.0, q1, q2]])


# ------------------------------------------------------------- solving

def correct(state: ParamStateG2, tol: float = 1e-10, max_iter: int = 50) -> tuple[ParamStateG2, float, int]:
    """Newton on F(xi fixed, alpha) = 0 with the exact Jacobian."""
    params, xi = state.params, state.xi

    def make(a):
        return ParamStateG2(params, xi, a[0], a[1])

    def F(a):
        return F_eval(make(a))

    def J(a):
        return jacobian_alpha(make(a))

    try:
        res = newton_solve(F, J, np.array([state.alpha1, state.alpha2]), tol=tol, max_iter=max_iter)
    except NonConvergence as exc:
        raise NewtonFailure(str(exc), getattr(exc, "residual", None)) from exc
    return make(res.x), res.residual, res.iterations


def genus2_start(params: ProblemParams, delta: float = 1e-3, tol: float = 1e-10) -> ParamStateG2:
    """Corrected genus-2 state at xi = xi_E1 - delta, seeded by the small-delta expansion."""
    A, B = _sym(params)
    if not 0 < delta < 0.5:
        raise DomainError("0 < delta < 0.5 required")
    xi = xi_E1_closed(A, B) - delta
    c1 = c1_constant(A, B)
    seed = params.E1 + c1 * delta / abs(math.log(delta))
    state = ParamStateG2(params, xi, seed.real, seed.imag)
    return correct(state, tol=tol)[0]
