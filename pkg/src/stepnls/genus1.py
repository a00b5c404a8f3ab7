"""Genus-1 g-functions: the three-real-zero form at small xi and the single-band form.

Both are fixed by the two expansion conditions at infinity plus one loop
condition, so each solve is a 3x3 real Newton problem.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NewtonFailure, NonConvergence, NoSignChange, OutsideSector, WrongRegime
from .quadrature import find_root_1d, newton_solve
from .spectral import ProblemParams
from .surfaces import (
    Cut,
    GPrimeSpec,
    SurfaceSpec,
    _sym,
    expansion_residuals,
    g_eval,
    gprime_period,
)


# ------------------------------------------------------ three real zeros

def smallxi_spec(params: ProblemParams, xi: float, mus) -> GPrimeSpec:
    surf = SurfaceSpec.from_points([params.E1, params.E2])
    return GPrimeSpec(xi, surf, tuple(sorted(mus)), (), label="genus1-smallxi")


def smallxi_residuals(params: ProblemParams, xi: float, mus) -> np.ndarray:
    spec = smallxi_spec(params, xi, mus)
    e = expansion_residuals(spec)
    return np.array([e[1].real, e[2].real, (gprime_period(spec, 0) / 1j).real])


@dataclass(frozen=True)
class SmallXiSolution:
    xi: float
    mu0: float
    mu1: float
    mu2: float
    residual: float

    def spec(self, params):
        return smallxi_spec(params, self.xi, (self.mu0, self.mu1, self.mu2))


def solve_genus1_smallxi(params: ProblemParams, xi: float, seed=None, tol: float = 1e-12) -> SmallXiSolution:
    """Zeros (mu0, mu1, mu2) of g' = 4(k-mu0)(k-mu1)(k-mu2)/w for the symmetric shock, A < B.

    mu0 is the zero nearest the origin; mu1 < mu2 are the outer ones.
    """
    A, B = _sym(params)
    if A >= B:
        raise WrongRegime("the three-real-zero form requires A < B")
    s = math.sqrt(B * B - A * A)
    if seed is None:
        if xi == 0:
            return SmallXiSolution(0.0, 0.0, -s, s, float(np.max(np.abs(smallxi_residuals(params, 0.0, (0.0, -s, s))))))
        # continue from xi = 0 in a few steps
        x = np.array([0.0, -s, s])
        for t in np.linspace(0, xi, 6)[1:]:
            x = _solve_smallxi(params, t, x, tol)
        seed = x
    x = _solve_smallxi(params, xi, np.asarray(seed, dtype=float), tol)
    mu0, mu1, mu2 = _order(x)
    res = float(np.max(np.abs(smallxi_residuals(params, xi, x))))
    return SmallXiSolution(float(xi), mu0, mu1, mu2, res)


def _order(x):
    srt = sorted(x, key=lambda v: abs(v))
    mu0 = srt[0]
    rest = sorted(srt[1:])
    return float(mu0), float(rest[0]), float(rest[1])


def _solve_smallxi(params, xi, x0, tol):
    try:
        return newton_solve(lambda x: smallxi_residuals(params, xi, x), None, x0, tol=tol).x
    except NonConvergence as exc:
        raise NewtonFailure(str(exc), getattr(exc, "residual", None)) from exc


# ---------------------------------------------------------- single band

def band_spec(params: ProblemParams, xi: float, mu: float, beta: complex, g0: float = 0.0) -> GPrimeSpec:
    """g' = 4(k - mu) X_beta / X_2 with cuts Sigma_2 and [conj beta, beta]."""
    beta = complex(beta)
    if beta.imag <= 0:
        raise DomainError("Im beta > 0 required")
    surf = SurfaceSpec((Cut.vertical(beta), Cut.vertical(params.E2)))
    return GPrimeSpec(xi, surf, (mu,), (), zero_cuts=(0,), g0=g0, label="genus1-band")


def band_residuals(params: ProblemParams, xi: float, x) -> np.ndarray:
    mu, b1, b2 = x
    spec = band_spec(params, xi, mu, complex(b1, b2))
    e = expansion_residuals(spec)
    return np.array([e[1].real, e[2].real, (gprime_period(spec, 1) / 1j).real])


@dataclass(frozen=True)
class BandSolution:
    xi: float
    mu: float
    beta: complex
    residual: float

    def spec(self, params):
        return band_spec(params, self.xi, self.mu, self.beta)


def band_sector(params: ProblemParams):
    """xi-range of the single-band form attached to E2: (-4 B2, -4 B2 + 4 sqrt2 A2)."""
    return -4 * params.B2, -4 * params.B2 + 4 * math.sqrt(2) * params.A2


def band_seed(params: ProblemParams, xi: float):
    """Seed from the merge of the plane-wave zeros: beta splits off the double zero."""
    lo, hi = band_sector(params)
    m = params.B2 / 2 - hi / 8
    return np.array([m, m, math.sqrt(max(hi - xi, 1e-12))])


def solve_genus1_rarefaction(params: ProblemParams, xi: float, seed=None, tol: float = 1e-10,
                             check_sector: bool = True) -> BandSolution:
    """Solve for (mu, beta) of the single-band g-function at ``xi``.

    Without a seed, the solution is continued from the upper end of the sector.
    """
    if params.case == "equal":
        raise DomainError("B1 = B2 is not supported")
    lo, hi = band_sector(params)
    if check_sector and not lo < xi < hi:
        raise OutsideSector(f"xi={xi} outside ({lo:.6g}, {hi:.6g})")
    if seed is None:
        x = band_seed(params, hi - 1e-3)
        x = _solve_band(params, hi - 1e-3, x, tol)
        n = max(2, int(math.ceil((hi - 1e-3 - xi) / 0.1)))
        for t in np.linspace(hi - 1e-3, xi, n + 1)[1:]:
            x = _solve_band(params, t, x, tol)
    else:
        s = np.asarray(seed, dtype=complex).ravel()
        x = np.array([s[0].real, s[1].real, s[1].imag]) if len(s) == 2 else s.real.astype(float)
        x = _solve_band(params, xi, x, tol)
    res = float(np.max(np.abs(band_residuals(params, xi, x))))
    return BandSolution(float(xi), float(x[0]), complex(x[1], x[2]), res)


def _solve_band(params, xi, x0, tol):
    try:
        return newton_solve(lambda x: band_residuals(params, xi, x), None, x0, tol=tol).x
    except NonConvergence as exc:
        raise NewtonFailure(str(exc), getattr(exc, "residual", None)) from exc


def trace_band(params: ProblemParams, xis, tol: float = 1e-10):
    """Solutions at decreasing ``xis`` inside the band sector, each seeding the next."""
    xis = sorted(xis, reverse=True)
    out = []
    prev = None
    for xi in xis:
        sol = solve_genus1_rarefaction(params, xi, seed=None if prev is None else (prev.mu, prev.beta), tol=tol)
        out.append(sol)
        prev = sol
    return out


def band_imag_g_at_E1(params: ProblemParams, sol: BandSolution) -> float:
    return float(np.imag(g_eval(sol.spec(params), params.E1)))


def find_xi_E1_new(params: ProblemParams, tol: float = 1e-9):
    """xi where the level set Im g = 0 of the single-band g-function passes E1.

    Scanned downward from the merge point; the first sign change of Im g(E1) is refined.
    """
    _sym(params)
    lo, hi = band_sector(params)
    lo = max(lo, 0.0)
    grid = np.linspace(hi - 1e-3, lo + 1e-3, 25)
    sols = {}
    prev_sol, prev_val = None, None
    for xi in grid:
        sol = solve_genus1_rarefaction(params, xi, seed=None if prev_sol is None else (prev_sol.mu, prev_sol.beta),
                                       tol=tol)
        val = band_imag_g_at_E1(params, sol)
        sols[xi] = sol
        if prev_val is not None and np.sign(val) != np.sign(prev_val):
            a, b = prev_sol, sol
            cache = {"sol": a}

            def f(t):
                s = solve_genus1_rarefaction(params, t, seed=(cache["sol"].mu, cache["sol"].beta), tol=tol)
                cache["sol"] = s
                return band_imag_g_at_E1(params, s)
            return find_root_1d(f, (b.xi, a.xi), tol=1e-10)
        prev_sol, prev_val = sol, val
    raise NoSignChange("Im g(E1) keeps its sign across the band sector")


def genus0_merge_point(params: ProblemParams):
    """(xi_merge, double zero) of the plane-wave g' attached to E2."""
    lo, hi = band_sector(params)
    # the discriminant vanishes at hi, leaving the double zero B2/2 - hi/8
    return hi, params.B2 / 2 - hi / 8
