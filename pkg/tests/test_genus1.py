import math

import numpy as np
import pytest

from stepnls.errors import DomainError, OutsideSector, WrongRegime
from stepnls.genus1 import (
    band_residuals,
    band_sector,
    band_imag_g_at_E1,
    find_xi_E1_new,
    genus0_merge_point,
    smallxi_residuals,
    solve_genus1_rarefaction,
    solve_genus1_smallxi,
)
from stepnls.spectral import ProblemParams, symmetric_shock
from stepnls.surfaces import check_conditions, genus0_zeros

RAR = ProblemParams(1, 1, 1, -1)


# ------------------------------------------------------- three real zeros

def test_smallxi_at_zero():
    s = solve_genus1_smallxi(symmetric_shock(0.6), 0.0)
    assert abs(s.mu2 - 0.8) < 1e-10
    assert s.mu0 == 0.0 and s.mu1 == -s.mu2
    assert s.residual < 1e-9


def test_smallxi_continuation():
    p = symmetric_shock(0.6)
    s = solve_genus1_smallxi(p, 0.3)
    assert s.residual < 1e-9
    assert s.mu1 < s.mu0 < s.mu2
    assert np.max(np.abs(smallxi_residuals(p, 0.3, (s.mu0, s.mu1, s.mu2)))) < 1e-9
    check_conditions(s.spec(p))


def test_smallxi_mirror_symmetry():
    p = symmetric_shock(0.6)
    a = solve_genus1_smallxi(p, 0.2)
    b = solve_genus1_smallxi(p, -0.2)
    assert abs(a.mu0 + b.mu0) < 1e-9
    assert abs(a.mu1 + b.mu2) < 1e-9


def test_smallxi_wrong_regime():
    with pytest.raises(WrongRegime):
        solve_genus1_smallxi(symmetric_shock(1.5), 0.0)


# ------------------------------------------------------------ single band

def test_band_sector():
    lo, hi = band_sector(RAR)
    assert lo == 4.0 and abs(hi - (4 + 4 * math.sqrt(2))) < 1e-14


def test_merge_point_is_double_zero():
    xm, mu = genus0_merge_point(RAR)
    real, pair = genus0_zeros(1.0, -1.0, xm + 1e-9)
    assert abs(real[0] - mu) < 1e-4 and abs(real[1] - mu) < 1e-4


def test_seed_from_merge_converges():
    xm, mu = genus0_merge_point(RAR)
    xi = xm - 1e-4
    seed_res = np.max(np.abs(band_residuals(RAR, xi, [mu, mu, 1e-12])))
    # the merge seed is exact only at xi_merge; its residual is the xi offset
    assert seed_res <= 2e-4
    sol = solve_genus1_rarefaction(RAR, xi, seed=(mu, complex(mu, 1e-3)))
    assert sol.residual < 1e-10
    assert abs(sol.beta - mu) < 0.02


def test_beta_approaches_E2_at_lower_edge():
    lo, _ = band_sector(RAR)
    sol = solve_genus1_rarefaction(RAR, lo + 1e-3)
    assert abs(sol.beta - RAR.E2) < 0.05


def test_mid_sector_residual():
    lo, hi = band_sector(RAR)
    sol = solve_genus1_rarefaction(RAR, 0.5 * (lo + hi))
    assert sol.residual < 1e-9
    check_conditions(sol.spec(RAR))


def test_band_domain_errors():
    with pytest.raises(OutsideSector):
        solve_genus1_rarefaction(RAR, 0.0)
    with pytest.raises(DomainError):
        solve_genus1_rarefaction(ProblemParams(1, 1, 1, 1), 5.0)


def test_xi_E1_new_for_ratio_two():
    p = symmetric_shock(2.0)
    x = find_xi_E1_new(p)
    lo, hi = band_sector(p)
    assert 0 < x < hi
    # Im g(E1) changes sign across the located point
    a = solve_genus1_rarefaction(p, x + 1e-4)
    b = solve_genus1_rarefaction(p, x - 1e-4, seed=(a.mu, a.beta))
    assert np.sign(band_imag_g_at_E1(p, a)) != np.sign(band_imag_g_at_E1(p, b))
