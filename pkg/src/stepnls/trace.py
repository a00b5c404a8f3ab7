"""Continuation of the genus-2 branch downward in xi.

Each step is an RK4 predictor on the alpha ODE followed by Newton on F at fixed
xi. Failed steps are halved. The branch ends in one of four ways, each located
by a dedicated Newton solve on an augmented system.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CorrectorDivergence, DomainError, SolverError
from .genus2 import (
    ParamStateG2,
    correct,
    dF_dxi,
    F_eval,
    genus2_start,
    jacobian_alpha,
    ode_rhs,
    periods_matrix,
)
from .quadrature import newton_solve, ode_step_rk4
from .spectral import ProblemParams

MU_MERGE_TOL = 1e-5
ALPHA_REAL_TOL = 1e-5
HIT_E_TOL = 1e-4
ENDGAME_ALPHA2 = 1e-7
PINNED_TOL = 1e-12
# bound on |J^-1| * 1e-12 beyond which alpha1 counts as unresolved; the bound
# overestimates the observed run-to-run scatter by about three orders
PINNED_SENSITIVITY = 1e-4
FIT_POINTS = 6
FIT_DEGREE = 2
XI_MIN = -1.0
H_MIN = 1e-6


@dataclass(frozen=True)
class TraceSample:
    xi: float
    alpha1: float
    alpha2: float
    mu1: float
    mu2: float
    detP: float
    residual: float

    @classmethod
    def of(cls, state: ParamStateG2, residual: float):
        return cls(state.xi, state.alpha1, state.alpha2, state.mu1, state.mu2, state.detP, float(residual))


@dataclass
class TraceResult:
    params: ProblemParams
    samples: list
    termination: dict
    settings: dict = field(default_factory=dict)

    @property
    def xi_m(self) -> float:
        return self.termination["xi_m"]

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(s, name) for s in self.samples])


def _residual(state: ParamStateG2) -> float:
    return float(np.max(np.abs(F_eval(state))))


def _predict(state: ParamStateG2, h: float) -> ParamStateG2:
    params = state.params

    def rhs(xi, a):
        return ode_rhs(ParamStateG2(params, xi, a[0], a[1]))

    a = ode_step_rk4(rhs, np.array([state.alpha1, state.alpha2]), state.xi, -h)
    return ParamStateG2(params, state.xi - h, a[0], a[1])


# --------------------------------------------------------------- endgames

def _endgame_mu_merge(state: ParamStateG2, tol: float):
    """Solve F = 0 together with a vanishing discriminant for (xi, alpha1, alpha2)."""
    params = state.params

    def make(x):
        return ParamStateG2(params, x[0], x[1], x[2])

    def G(x):
        s = make(x)
        return np.concatenate([F_eval(s), [s.discriminant]])

    def J(x):
        s = make(x)
        pm = periods_matrix(s)
        top = np.column_stack([dF_dxi(s, pm), jacobian_alpha(s, pm)])
        a1, a2, xi = s.alpha1, s.alpha2, s.xi
        grad = [-8 * a1 + 2 * xi, -96 * a1 - 8 * xi, 64 * a2]
        return np.vstack([top, grad])

    res = newton_solve(G, J, state.x, tol=tol)
    return make(res.x)


def _solve_pinned(params, seed_x, alpha2, tol):
    """Solve F = 0 in (xi, alpha1) at fixed alpha2; also return the solve sensitivity."""
    def make(x):
        return ParamStateG2(params, x[0], x[1], alpha2)

    def G(x):
        return F_eval(make(x))

    def J(x):
        s = make(x)
        pm = periods_matrix(s)
        return np.column_stack([dF_dxi(s, pm), jacobian_alpha(s, pm)[:, 0]])

    res = newton_solve(G, J, np.asarray(seed_x, dtype=float), tol=tol)
    try:
        sens = 1e-12 * np.linalg.norm(np.linalg.inv(J(res.x)), np.inf)
    except np.linalg.LinAlgError:
        sens = math.inf
    return res.x, sens


def _endgame_alpha_real(state: ParamStateG2, tol: float):
    """Follow F = 0 in (xi, alpha1) while alpha2 is lowered toward the real axis.

    The pinned system loses rank as alpha meets the real axis (det P carries a
    factor alpha2). xi stays well resolved down to ENDGAME_ALPHA2, but alpha1
    does not, so once the solve sensitivity passes PINNED_SENSITIVITY alpha1 is
    taken from a least-squares quadratic in alpha2 over the resolved solutions.
    A higher degree amplifies the scatter in alpha1 more than it reduces the
    model error.
    """
    params = state.params
    a = state.alpha2
    x, _ = _solve_pinned(params, state.x[:2], a, min(tol, PINNED_TOL))
    pts = [(a, x[0], x[1])]
    resolved = True
    ratio = math.sqrt(0.5)
    while a > ENDGAME_ALPHA2:
        a_next = max(a * ratio, ENDGAME_ALPHA2)
        try:
            # past the resolved range only xi is used, at the caller's tolerance
            x_next, sens = _solve_pinned(params, x, a_next, min(tol, PINNED_TOL) if resolved else tol)
        except (SolverError, DomainError):
            ratio = math.sqrt(ratio)
            if ratio > 0.99:
                if len(pts) < 2:
                    raise
                break
            continue
        x, a = x_next, a_next
        resolved &= sens <= PINNED_SENSITIVITY or len(pts) < 2
        if resolved:
            pts.append((a, x[0], x[1]))
    if resolved and a <= ENDGAME_ALPHA2:
        return ParamStateG2(params, x[0], x[1], ENDGAME_ALPHA2)
    fit = np.array(pts[-FIT_POINTS:])
    deg = min(FIT_DEGREE, len(fit) - 1)
    a1 = float(np.polyval(np.polyfit(fit[:, 0], fit[:, 2], deg), ENDGAME_ALPHA2))
    if a <= ENDGAME_ALPHA2:
        xi = float(x[0])
    else:
        xi = float(np.polyval(np.polyfit(fit[:, 0], fit[:, 1], deg), ENDGAME_ALPHA2))
    return ParamStateG2(params, xi, a1, ENDGAME_ALPHA2)


def _finish(params, samples, ttype, state, settings, tol):
    if state is not None and (not samples or state.xi < samples[-1].xi):
        samples.append(TraceSample.of(state, _residual(state)))
    term = {"type": ttype, "xi_m": samples[-1].xi,
            "alpha": [samples[-1].alpha1, samples[-1].alpha2],
            "mu": [samples[-1].mu1, samples[-1].mu2]}
    return TraceResult(params, samples, term, settings)


def _try_endgames(last: ParamStateG2, tol: float):
    """Pick the endgame matching the geometry of the last good state."""
    order = []
    if last.alpha2 < 0.2 * max(1.0, abs(last.alpha1)):
        order.append(("alphaRealAxis", _endgame_alpha_real))
    order.append(("muMerge", _endgame_mu_merge))
    if ("alphaRealAxis", _endgame_alpha_real) not in order:
        order.append(("alphaRealAxis", _endgame_alpha_real))
    for name, fn in order:
        try:
            end = fn(last, tol)
        except (SolverError, DomainError):
            continue
        if end.xi <= last.xi + 1e-12 and abs(end.xi - last.xi) < 0.5:
            if name == "muMerge" and abs(end.discriminant) > 1e-8:
                continue
            return name, end
    return None, None


# ------------------------------------------------------------------ trace

def trace_genus2(params: ProblemParams, delta_start: float = 1e-3, h_init: float = 0.02,
                 xi_min: float = XI_MIN, tol: float = 1e-10, h_min: float = H_MIN,
                 max_steps: int = 20000) -> TraceResult:
    """Follow the genus-2 solution from xi_E1 - delta_start down to its end point."""
    settings = {"delta_start": delta_start, "h_init": h_init, "xi_min": xi_min, "tol": tol, "h_min": h_min}
    state = genus2_start(params, delta_start, tol=tol)
    samples = [TraceSample.of(state, _residual(state))]
    E1, E2 = params.E1, params.E2
    armed_E1 = abs(state.alpha - E1) > 10 * HIT_E_TOL
    h = h_init
    successes = 0
    for _ in range(max_steps):
        if state.xi <= xi_min:
            return _finish(params, samples, "reachedXiMin", None, settings, tol)
        step = min(h, state.xi - xi_min) if state.xi - xi_min > h_min else h
        try:
            pred = _predict(state, step)
            new, res, _ = correct(pred, tol=tol)
            if not new.alpha2 > 0:
                raise DomainError("alpha left the upper half plane")
        except (SolverError, DomainError):
            h *= 0.5
            successes = 0
            if h < h_min:
                name, end = _try_endgames(state, tol)
                if name is None:
                    raise CorrectorDivergence(f"corrector failed below h_min at xi={state.xi:.6g}",
                                              last_state=state)
                return _finish(params, samples, name, end, settings, tol)
            continue

        # events between state and new
        if state.discriminant > 0 and new.discriminant <= 0:
            try:
                end = _endgame_mu_merge(state, tol)
                return _finish(params, samples, "muMerge", end, settings, tol)
            except (SolverError, DomainError):
                h *= 0.5
                if h < h_min:
                    raise CorrectorDivergence("mu-merge endgame failed", last_state=state)
                continue
        if new.alpha2 < ALPHA_REAL_TOL:
            samples.append(TraceSample.of(new, res))
            return _finish(params, samples, "alphaRealAxis", None, settings, tol)
        if not armed_E1 and abs(new.alpha - E1) > 10 * HIT_E_TOL:
            armed_E1 = True
        if (armed_E1 and abs(new.alpha - E1) < HIT_E_TOL) or abs(new.alpha - E2) < HIT_E_TOL:
            samples.append(TraceSample.of(new, res))
            return _finish(params, samples, "alphaHitsE", None, settings, tol)

        samples.append(TraceSample.of(new, res))
        state = new
        successes += 1
        if successes >= 2 and h < h_init:
            h = min(2 * h, h_init)
            successes = 0
        if state.discriminant > 0 and state.mu2 - state.mu1 < MU_MERGE_TOL:
            return _finish(params, samples, "muMerge", None, settings, tol)
    raise CorrectorDivergence("step budget exhausted", last_state=state)
