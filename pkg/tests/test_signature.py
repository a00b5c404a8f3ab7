import math

import numpy as np
import pytest

from stepnls.errors import ConditionsNotSatisfied
from stepnls.genus1 import solve_genus1_smallxi
from stepnls.signature import (
    LEVEL_TOL,
    Window,
    default_window,
    real_zeros_of,
    sign_consistent,
    signature_table,
)
from stepnls.spectral import symmetric_shock
from stepnls.surfaces import (
    GPrimeSpec,
    SurfaceSpec,
    genus0_spec,
    genus1_xi0_spec,
    xi_E1_closed,
    xi_merge_closed,
)

P = symmetric_shock(1.0)
MARKS = {"hitsE1": P.E1, "hitsE2": P.E2}
COARSE = (200, 100)


@pytest.fixture(scope="module")
def tab6():
    return signature_table(genus0_spec(P, 6.0))


def test_genus0_crossings_at_default_resolution(tab6):
    assert tab6.shape == (400, 200)
    assert np.allclose(tab6.crossings, [-1.2807764, 0.7807764], atol=1e-6)
    assert tab6.level_residual < LEVEL_TOL


def test_sign_chart_consistent(tab6):
    assert sign_consistent(tab6, genus0_spec(P, 6.0))


def test_mirrored_polylines_are_conjugates(tab6):
    m = tab6.mirrored()
    n = len(tab6.polylines)
    assert len(m) == 2 * n
    for a, b in zip(m[:n], m[n:]):
        assert np.array_equal(np.conj(a), b)
    rows = list(tab6.rows())
    assert len(rows) == 2 * sum(len(p) for p in tab6.polylines)


def test_large_xi_infinite_branch():
    tab = signature_table(genus0_spec(P, 100.0), resolution=COARSE)
    assert tab.infinite
    assert abs(tab.crossings[0] + 25) < 0.1


def test_window_grows_with_xi():
    assert default_window(genus0_spec(P, 100.0)).re_max == pytest.approx(2 * 24.98075499, abs=1e-6)
    assert default_window(genus0_spec(P, 6.0)).re_max == 4.0


def test_hits_E1_event_at_boundary():
    tab = signature_table(genus0_spec(P, xi_E1_closed(1, 1)), resolution=COARSE, marks=MARKS)
    assert [e["type"] for e in tab.events] == ["hitsE1"]
    away = signature_table(genus0_spec(P, 6.0), resolution=COARSE, marks=MARKS)
    assert away.events == []


def test_zeros_merge_event():
    xm = xi_merge_closed(1, 1)
    tab = signature_table(genus0_spec(P, xm), resolution=COARSE)
    ev = [e for e in tab.events if e["type"] == "zerosMerge"]
    assert len(ev) == 1
    assert abs(ev[0]["at"] - (1 - math.sqrt(2) / 2)) < 1e-6


@pytest.mark.parametrize("xi", [-6.0, -3.0, 9.0])
def test_mirror_in_xi(xi):
    a = signature_table(genus0_spec(P, xi, 1 if xi < 0 else 2), resolution=COARSE)
    b = signature_table(genus0_spec(P, -xi, 1 if xi > 0 else 2), resolution=COARSE)
    assert np.allclose(np.sort(-a.crossings), b.crossings, atol=1e-9)


def test_genus1_xi0_crossings():
    spec = genus1_xi0_spec(symmetric_shock(2.0))
    tab = signature_table(spec, resolution=COARSE)
    assert np.allclose(tab.crossings, real_zeros_of(spec), atol=tab.cell[0])


def test_smallxi_crossings():
    p = symmetric_shock(0.5)
    spec = solve_genus1_smallxi(p, 0.7).spec(p)
    tab = signature_table(spec, resolution=COARSE)
    assert len(tab.crossings) == 3
    assert np.allclose(tab.crossings, real_zeros_of(spec), atol=tab.cell[0])
    assert sign_consistent(tab, spec)


def test_conditions_checked_unless_acknowledged():
    s = SurfaceSpec.from_points([P.E1, P.E2])
    bad = GPrimeSpec(0.0, s, (0.1, -0.5, 0.5))
    with pytest.raises(ConditionsNotSatisfied):
        signature_table(bad, resolution=(40, 20))
    signature_table(bad, resolution=(40, 20), acknowledge=True)


def test_threads_give_identical_tables():
    spec = genus0_spec(P, 6.0)
    w = Window(-4, 4, 4)
    a = signature_table(spec, w, (120, 60))
    b = signature_table(spec, w, (120, 60), threads=2)
    assert np.array_equal(a.crossings, b.crossings)
    assert np.array_equal(a.region_signs, b.region_signs)
