"""Genus-3 g-function of the symmetric shock for A > B.

g'(k) = 4 (k - mu) Y(k) conj-Y(k) / (X1 X2) with Y the square root on the
oblique cut [alpha, beta]. Five real unknowns (mu, alpha, beta) are fixed by
the two expansion conditions at infinity, vanishing periods around Sigma_1 and
Sigma_2, and Im g(beta) = 0 (the integral of g' from conj(beta) to beta through
the real axis between the cut pair vanishes).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NewtonFailure, NonConvergence, SolverError, SurfaceDegenerate
from .quadrature import Path, Segment, integrate, newton_solve
from .spectral import ProblemParams
from .surfaces import Cut, GPrimeSpec, SurfaceSpec, _sym, expansion_residuals, gprime, gprime_period, genus1_xi0_spec

CYCLE_BASIS = ("loop around [conj E1, E1]",
               "path conj(beta) -> real axis -> beta between the oblique cuts",
               "loop around [conj E2, E2]")
DEGENERATE_TOL = 1e-6


@dataclass(frozen=True)
class ParamStateG3:
    params: ProblemParams
    xi: float
    mu: float
    alpha: complex
    beta: complex

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "beta", complex(self.beta))
        if self.alpha.imag <= 0 or self.beta.imag <= 0:
            raise DomainError("Im alpha > 0 and Im beta > 0 required")

    @classmethod
    def from_vector(cls, params, xi, x):
        return cls(params, xi, x[0], complex(x[1], x[2]), complex(x[3], x[4]))

    @property
    def x(self) -> np.ndarray:
        return np.array([self.mu, self.alpha.real, self.alpha.imag, self.beta.real, self.beta.imag])

    @property
    def degenerate(self) -> bool:
        return abs(self.alpha - self.beta) < DEGENERATE_TOL

    @property
    def surface(self) -> SurfaceSpec:
        p = self.params
        up = Cut(self.alpha, self.beta)
        return SurfaceSpec((Cut.vertical(p.E1), up, up.mirror(), Cut.vertical(p.E2)))

    def gprime_spec(self) -> GPrimeSpec:
        return GPrimeSpec(self.xi, self.surface, (self.mu,), (), zero_cuts=(1, 2), label="genus3")


def _crossing_point(state: ParamStateG3) -> float:
    """Real point where the path between conj(beta) and beta crosses the axis."""
    return 0.5 * (state.alpha.real + state.beta.real)


def beta_condition(state: ParamStateG3, tol: float = 1e-13) -> float:
    """Im of the integral of g' from x* to beta, i.e. Im g(beta) - Im g(x*).

    The substitution k = beta + (x* - beta) s^2 absorbs the square-root zero at beta.
    """
    spec = state.gprime_spec()
    b = state.beta
    x0 = _crossing_point(state)
    d = x0 - b

    def f(s):
        s = s.real
        return gprime(spec, b + d * s * s) * 2 * d * s
    val = integrate(f, Path((Segment(0.0, 1.0),)), tol=tol).value
    # integral from x* to beta is minus the integral over s in [0, 1]
    return float(-2 * val.imag)


def residuals(state: ParamStateG3) -> np.ndarray:
    spec = state.gprime_spec()
    e = expansion_residuals(spec)
    return np.array([
        (gprime_period(spec, 0) / 1j).real,
        beta_condition(state),
        (gprime_period(spec, 3) / 1j).real,
        e[1].real,
        e[2].real,
    ])


def residual_imag_parts(state: ParamStateG3) -> np.ndarray:
    """Imaginary leftovers of the residual quantities; zero by Schwarz symmetry."""
    spec = state.gprime_spec()
    e = expansion_residuals(spec)
    return np.array([(gprime_period(spec, 0) / 1j).imag, (gprime_period(spec, 3) / 1j).imag,
                     e[1].imag, e[2].imag])


def degenerate_seed(params: ProblemParams) -> ParamStateG3:
    """xi = 0 point where alpha = beta = i sqrt(A^2 - B^2) and mu = 0."""
    A, B = _sym(params)
    if A <= B:
        raise DomainError("the genus-3 window requires A > B")
    a0 = 1j * math.sqrt(A * A - B * B)
    return ParamStateG3(params, 0.0, 0.0, a0, a0)


def xi0_reduction_residuals(params: ProblemParams) -> np.ndarray:
    """Expansion residuals of the genus-1 reduction 4k(k^2 + a0^2)/w1."""
    return expansion_residuals(genus1_xi0_spec(params))


@dataclass(frozen=True)
class G3Solution:
    state: ParamStateG3
    residual: float
    iterations: int


def solve_genus3(params: ProblemParams, xi: float, seed, tol: float = 1e-10,
                 max_iter: int = 50) -> G3Solution:
    """Newton solve of the five genus-3 conditions at ``xi`` from ``seed``.

    The solution is labelled with Re alpha <= Re beta.
    """
    _sym(params)
    if params.A2 <= abs(params.B2):
        raise DomainError("the genus-3 window requires A > B")
    x0 = seed.x if isinstance(seed, ParamStateG3) else np.asarray(seed, dtype=float)

    def F(x):
        return residuals(ParamStateG3.from_vector(params, xi, x))

    try:
        res = newton_solve(F, None, x0, tol=tol, max_iter=max_iter)
    except (NonConvergence, SolverError) as exc:
        raise NewtonFailure(str(exc), getattr(exc, "residual", None)) from exc
    x = res.x
    if x[1] > x[3]:
        # label the endpoints so that Re alpha <= Re beta
        x = x[[0, 3, 4, 1, 2]]
    state = ParamStateG3.from_vector(params, xi, x)
    if xi != 0 and state.degenerate:
        raise SurfaceDegenerate("alpha and beta coincide away from xi = 0")
    return G3Solution(state, float(res.residual), res.iterations)


def split_seed(params: ProblemParams, xi: float, direction: complex = 1.0,
               scale: float | None = None) -> ParamStateG3:
    """Seed with alpha, beta = i a0 -/+ scale * direction.

    A vertical split puts alpha on the path used by the beta condition, so keep
    ``direction`` away from the imaginary axis.
    """
    s0 = degenerate_seed(params)
    a0 = s0.alpha
    if scale is None:
        scale = math.sqrt(abs(xi))
    d = complex(direction) / abs(direction) * scale
    return ParamStateG3(params, xi, 0.0, a0 - d, a0 + d)


def continue_genus3(params: ProblemParams, xis, seed: ParamStateG3, tol: float = 1e-10):
    """Solve along ``xis`` in order, each solution seeding the next."""
    out = []
    cur = seed
    for xi in xis:
        sol = solve_genus3(params, xi, cur.x if isinstance(cur, ParamStateG3) else cur, tol=tol)
        out.append(sol)
        cur = sol.state
    return out
