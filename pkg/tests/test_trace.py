import numpy as np
import pytest

from stepnls.errors import DomainError
from stepnls.genus2 import F_eval, ParamStateG2
from stepnls.spectral import ProblemParams, symmetric_shock
from stepnls.surfaces import xi_E1_closed
from stepnls.trace import trace_genus2


def test_scenario1_alpha_reaches_axis(trace_of):
    r = trace_of(0.5)
    assert r.termination["type"] == "alphaRealAxis"
    assert 0 < r.xi_m < xi_E1_closed(0.5, 1)


def test_scenario2_merges_at_origin(trace_of):
    r = trace_of(1.0)
    assert r.termination["type"] == "alphaRealAxis"
    assert abs(r.xi_m) < 0.05
    a = complex(*r.termination["alpha"])
    assert abs(a) < 0.05


def test_scenario3_mu_merge(trace_of):
    r = trace_of(1.5)
    assert r.termination["type"] == "muMerge"
    assert 0 < r.xi_m < xi_E1_closed(1.5, 1)
    m1, m2 = r.termination["mu"]
    assert abs(m1 - m2) < 1e-4


def test_samples_monotone_and_certified(trace_of):
    for ratio in (0.5, 1.0, 1.5):
        r = trace_of(ratio)
        xi = r.column("xi")
        assert np.all(np.diff(xi) < 0)
        assert np.max(r.column("residual")) < 1e-8
        assert np.all(r.column("alpha2") > 0)
        assert np.all(r.column("detP") > 0)


def test_recomputed_residuals(trace_of):
    r = trace_of(1.0)
    p = symmetric_shock(1.0)
    for s in r.samples[::50]:
        st = ParamStateG2(p, s.xi, s.alpha1, s.alpha2)
        assert np.max(np.abs(F_eval(st))) < 1e-8


def test_mu_ordering(trace_of):
    r = trace_of(0.5)
    assert np.all(r.column("mu1") <= r.column("mu2"))


def test_requires_symmetric_shock():
    with pytest.raises(DomainError):
        trace_genus2(ProblemParams(1, 2, -1, 1))
