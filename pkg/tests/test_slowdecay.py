import math

import numpy as np
import pytest
from scipy.integrate import quad

from stepnls.errors import OnContour, OutsideSector
from stepnls.slowdecay import (
    chi_at_stationary,
    coefficients_from,
    dfunction,
    log_weight,
    nu_stationary,
    slow_decay_coeffs,
)
from stepnls.spectral import ProblemParams, step_scattering

P = ProblemParams(1, 1, 1, -1)
XI = -2.0
EPS = 1e-9


def test_normalised_at_infinity():
    for k in (1e5 + 1e5j, -1e5 + 1j, 1e5j):
        assert abs(dfunction(P, XI, k) - 1) < 1e-3


def test_jump_on_real_ray():
    for s in np.linspace(-5, 0.3, 10):
        if abs(s - P.B2) < 0.05:
            s += 0.1
        ratio = dfunction(P, XI, s + 1j * EPS) / dfunction(P, XI, s - 1j * EPS)
        target = math.exp(log_weight(P, np.array([s]))[0])
        assert abs(ratio / target - 1) < 1e-6


def test_jump_on_vertical_cut():
    # the left side of the upward cut is the + side
    for t in np.linspace(0.05, 0.95, 10):
        k = complex(P.B2, t)
        ratio = dfunction(P, XI, k - EPS) / dfunction(P, XI, k + EPS)
        am = step_scattering(P, np.array([k]), -1)[0][0]
        ap = step_scattering(P, np.array([k]), +1)[0][0]
        assert abs(ratio / (am / ap) - 1) < 1e-6


def test_chi_against_quad():
    x0 = -XI / 4
    F = lambda s: float(log_weight(P, np.array([s]))[0])
    F0 = F(x0)
    far = sum(quad(lambda s: F(s) / (s - x0), a, b, limit=400, epsabs=1e-14)[0]
              for a, b in ((-np.inf, -50), (-50, -1.0), (-1.0, x0 - 1)))
    near = quad(lambda s: (F(s) - F0) / (s - x0), x0 - 1, x0, limit=400, epsabs=1e-14)[0]
    assert abs(chi_at_stationary(P, XI) - (far + near) / (2j * math.pi)) < 1e-10


def test_coefficients():
    c = slow_decay_coeffs(P, XI)
    assert c.c1 == 1.0
    assert abs(c.c0 ** 2 + c.nu / 2) < 1e-10
    assert c.c2 == -c.nu > 0
    assert c.nu == nu_stationary(P, XI)
    assert math.isfinite(c.c3) and not c.zero_reflection


def test_zero_reflection():
    c = coefficients_from(0.5, 0j, 0j)
    assert c.c0 == 0 and c.nu == 0 and c.zero_reflection
    assert math.isnan(c.c3)
    assert c.as_dict()["c3"] is None


def test_sector_and_contour_errors():
    with pytest.raises(OutsideSector):
        slow_decay_coeffs(P, 5.0)
    with pytest.raises(OutsideSector):
        dfunction(ProblemParams(1, 1, -1, 1), 0.0, 1j)
    with pytest.raises(OnContour):
        dfunction(P, XI, -3.0)
    with pytest.raises(OnContour):
        dfunction(P, XI, complex(P.B2, 0.5))
