import math

import numpy as np
import pytest

from stepnls.errors import DomainError, NewtonFailure
from stepnls.genus3 import (
    CYCLE_BASIS,
    ParamStateG3,
    degenerate_seed,
    continue_genus3,
    residual_imag_parts,
    residuals,
    solve_genus3,
    split_seed,
    xi0_reduction_residuals,
)
from stepnls.spectral import symmetric_shock
from stepnls.surfaces import check_conditions, g_eval

P = symmetric_shock(2.0)
A0 = 1j * math.sqrt(3)


@pytest.fixture(scope="module")
def sol005():
    return solve_genus3(P, 0.05, split_seed(P, 0.05))


def test_degenerate_seed():
    s = degenerate_seed(P)
    assert s.mu == 0.0 and s.alpha == s.beta == A0
    assert s.degenerate
    assert np.max(np.abs(xi0_reduction_residuals(P))) < 1e-10


def test_requires_A_above_B():
    with pytest.raises(DomainError):
        degenerate_seed(symmetric_shock(0.8))
    with pytest.raises(DomainError):
        solve_genus3(symmetric_shock(0.8), 0.05, np.zeros(5))


def test_small_xi_solution(sol005):
    st = sol005.state
    assert sol005.residual < 1e-8
    assert np.max(np.abs(residuals(st))) < 1e-8
    assert abs(st.alpha - A0) < 0.1 and abs(st.beta - A0) < 0.1
    assert st.alpha.real <= st.beta.real
    assert not st.degenerate


def test_residuals_real(sol005):
    assert np.max(np.abs(residual_imag_parts(sol005.state))) < 1e-9


def test_conditions_and_level_at_beta(sol005):
    spec = sol005.state.gprime_spec()
    check_conditions(spec)
    # Im g vanishes at the oblique branch point, approached from off the cut
    b = sol005.state.beta
    near = b + 1e-9 * (b - sol005.state.alpha) / abs(b - sol005.state.alpha)
    assert abs(g_eval(spec, near).imag) < 1e-6


def test_continuation_approaches_seed_as_xi_shrinks():
    sols = continue_genus3(P, [0.2, 0.1, 0.05, 0.02], split_seed(P, 0.2))
    d = [abs(s.state.alpha - A0) for s in sols]
    assert all(x > y for x, y in zip(d, d[1:]))
    assert all(s.residual < 1e-8 for s in sols)


def test_mirror_in_xi(sol005):
    neg = solve_genus3(P, -0.05, split_seed(P, -0.05))
    st, ns = sol005.state, neg.state
    assert abs(st.mu + ns.mu) < 1e-8
    # xi -> -xi reflects k -> -conj(k), which swaps the labels
    assert abs(ns.alpha + np.conj(st.beta)) < 1e-8


def test_bad_seed_fails_cleanly():
    with pytest.raises(NewtonFailure):
        solve_genus3(P, 0.05, [5.0, -3.0, 0.2, 3.0, 0.2], max_iter=3)


def test_cycle_basis_documented():
    assert len(CYCLE_BASIS) == 3
