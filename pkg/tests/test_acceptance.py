"""Acceptance checks, one test per criterion, each printing a PASS/FAIL line."""
import math

import numpy as np
import pytest

from conftest import traced
from stepnls.cli import solve_genus3_at
from stepnls.errors import DomainError
from stepnls.genus1 import solve_genus1_rarefaction, solve_genus1_smallxi
from stepnls.genus2 import (
    F_eval,
    ParamStateG2,
    c1_constant,
    correct,
    detP_closed,
    genus2_start,
    jacobian_alpha,
)
from stepnls.genus3 import continue_genus3, residuals, split_seed, xi0_reduction_residuals
from stepnls.quadrature import fd_jacobian
from stepnls.scenarios import sector_diagram, threshold_ratio
from stepnls.signature import real_zeros_of, signature_table
from stepnls.slowdecay import dfunction, log_weight, slow_decay_coeffs
from stepnls.spectral import ProblemParams, scattering_matrix, step_scattering, symmetric_shock
from stepnls.surfaces import find_xi_E1, find_xi_merge, genus0_spec

BV = 2 / 7 * (2 + 3 * math.sqrt(2))
RATIOS = (0.5, 1.0, 1.5, BV, 2.0)


def test_c01_boundaries(report):
    worst = 0.0
    for A, B in ((1, 1), (0.5, 1), (1.5, 1), (2, 1), (0.7, 1.3)):
        p = ProblemParams(A, A, -B, B)
        e, m = find_xi_E1(p), find_xi_merge(p)
        assert abs(e.closed_form - 2 * (B + math.hypot(A, B))) < 1e-14
        assert abs(m.closed_form - 4 * (-B + math.sqrt(2) * A)) < 1e-14
        worst = max(worst, abs(e.numeric - e.closed_form), abs(m.numeric - m.closed_form))
    e, m = find_xi_E1(symmetric_shock(1.0)), find_xi_merge(symmetric_shock(1.0))
    ok = worst < 1e-8 and abs(e.numeric - 4.82842712) < 1e-8 and abs(m.numeric - 1.65685424) < 1e-8
    report(1, "boundary reproduction", ok, f"max|numeric-closed|={worst:.1e}")


def test_c02_threshold(report):
    r = threshold_ratio()
    report(2, "threshold ratio", abs(r - BV) < 5e-7 and round(r, 6) == round(BV, 6),
           f"ratio={r:.10f} formula={BV:.10f}")


def test_c03_detP(report):
    rng = np.random.default_rng(3)
    worst, positive, n = 0.0, True, 0
    for ratio in (0.5, 1.0, 1.5, 2.0, 0.8):
        p = symmetric_shock(ratio)
        k = 0
        while k < 10:
            xi, a1, a2 = rng.uniform(-2, 8), rng.uniform(-2, 2), rng.uniform(0.05, 3)
            try:
                s = ParamStateG2(p, xi, a1, a2)
            except DomainError:
                continue
            if not s.in_domain:
                continue
            worst = max(worst, abs(s.detP - detP_closed(s)) / s.detP)
            positive &= s.detP > 0
            k += 1
            n += 1
    report(3, "detP identity", n == 50 and worst <= 1e-9 and positive, f"{n} states, max rel={worst:.1e}")


def test_c04_jacobian(report):
    samples = traced(1.0).samples
    idx = np.linspace(3, len(samples) - 4, 20).astype(int)
    p = symmetric_shock(1.0)
    worst = 0.0
    for i in idx:
        s = samples[i]
        st = ParamStateG2(p, s.xi, s.alpha1, s.alpha2)
        J = jacobian_alpha(st)
        fd = fd_jacobian(lambda a: F_eval(st.replace(alpha1=a[0], alpha2=a[1])), np.array([st.alpha1, st.alpha2]))
        worst = max(worst, np.max(np.abs(J - fd)) / np.max(np.abs(J)))
    xs = [samples[i].xi for i in idx]
    report(4, "Jacobian identity", worst < 1e-5,
           f"20 states xi in [{min(xs):.3f}, {max(xs):.3f}], max rel={worst:.1e}")


def test_c05_start(report):
    p = symmetric_shock(1.0)
    s = genus2_start(p, 1e-3)
    c1 = c1_constant(1, 1)
    dmu = max(abs(s.mu1 + 0.95080), abs(s.mu2 - 0.74369))
    ang = abs(math.degrees(np.angle((s.alpha - p.E1) / c1)))
    ok = dmu < 1e-2 and ang < 5 and abs(c1 - (0.53616 + 0.04236j)) < 1e-5
    report(5, "genus-2 start", ok, f"|dmu|={dmu:.1e} angle={ang:.3f}deg c1={c1:.5f}")


def _common(a, b):
    fx = b.column("xi")
    diffs = []
    for s in a.samples:
        j = int(np.argmin(np.abs(fx - s.xi)))
        if abs(fx[j] - s.xi) < 1e-9:
            t = b.samples[j]
            diffs.append(max(abs(s.alpha1 - t.alpha1), abs(s.alpha2 - t.alpha2)))
    return len(diffs), max(diffs)


def test_c06_endgames(report):
    notes, ok = [], True
    for ratio, want in ((0.5, "alphaRealAxis"), (1.0, "alphaRealAxis"), (1.5, "muMerge")):
        a, b = traced(ratio, 0.02), traced(ratio, 0.01)
        xe = 2 * (1 + math.hypot(ratio, 1))
        ok &= a.termination["type"] == b.termination["type"] == want
        if ratio == 1.0:
            alpha = complex(*a.termination["alpha"])
            ok &= abs(a.xi_m) < 0.05 and abs(alpha) < 0.05
        else:
            ok &= 0 < a.xi_m < xe
        res = max(np.max(a.column("residual")), np.max(b.column("residual")))
        n, d = _common(a, b)
        dxm = abs(a.xi_m - b.xi_m)
        ok &= res < 1e-8 and n > 10 and d < 1e-6 and dxm < 1e-6
        notes.append(f"{ratio}:{want} xi_m={a.xi_m:.4g} |F|<{res:.0e} dh={max(d, dxm):.0e}")
    report(6, "scenario endgames", ok, "; ".join(notes))


def test_c07_genus13(report):
    s1 = solve_genus1_smallxi(symmetric_shock(0.6), 0.0)
    p = symmetric_shock(2.0)
    seed = np.max(np.abs(xi0_reduction_residuals(p)))
    sols = continue_genus3(p, [0.02, 0.035, 0.05], split_seed(p, 0.02))
    st = sols[-1].state
    r3 = np.max(np.abs(residuals(st)))
    a0 = 1j * math.sqrt(3)
    ok = (abs(s1.mu2 - 0.8) < 1e-10 and seed < 1e-10 and r3 < 1e-8
          and all(np.max(np.abs(residuals(s.state))) < 1e-8 for s in sols)
          and abs(st.alpha - a0) < 0.1 and abs(st.beta - a0) < 0.1)
    report(7, "genus-1/3 residuals", ok,
           f"|mu2-0.8|={abs(s1.mu2 - 0.8):.1e} seed={seed:.1e} g3(0.05)={r3:.1e}")


def test_c08_scattering(report):
    p = symmetric_shock(1.0)
    ks = np.linspace(-6, 6, 200)
    det = max(abs(np.linalg.det(scattering_matrix(p, complex(k))) - 1) for k in ks)
    same = ProblemParams(1.3, 1.3, 0.4, 0.4, 0.2, 0.2)
    a1, b1 = step_scattering(same, 0.7 + 0.2j)
    a0, b0 = step_scattering(p, 0j)
    a6, _ = step_scattering(p, 1e6 + 0j)
    ok = (det < 1e-12 and abs(a1 - 1) < 1e-15 and abs(b1) < 1e-15
          and abs(a0 - math.sqrt(2) / 2) < 1e-12 and abs(b0 - 1j * math.sqrt(2) / 2) < 1e-12
          and abs(a6 - 1) < 1e-5)
    report(8, "scattering suite", ok, f"max|detS-1|={det:.1e} |a(1e6)-1|={abs(a6 - 1):.1e}")


def test_c09_dfunction(report):
    p, xi, eps = ProblemParams(1, 1, 1, -1), -2.0, 1e-9
    worst = 0.0
    for s in np.linspace(-5, 0.3, 10):
        if abs(s - p.B2) < 0.05:
            s += 0.1
        ratio = dfunction(p, xi, s + 1j * eps) / dfunction(p, xi, s - 1j * eps)
        worst = max(worst, abs(ratio / math.exp(log_weight(p, np.array([s]))[0]) - 1))
    for t in np.linspace(0.05, 0.95, 10):
        k = complex(p.B2, t)
        ratio = dfunction(p, xi, k - eps) / dfunction(p, xi, k + eps)
        am = step_scattering(p, np.array([k]), -1)[0][0]
        ap = step_scattering(p, np.array([k]), +1)[0][0]
        worst = max(worst, abs(ratio / (am / ap) - 1))
    c = slow_decay_coeffs(p, xi)
    ident = abs(c.c0 ** 2 + c.nu / 2)
    report(9, "d-function jumps", worst < 1e-6 and c.c1 == 1.0 and ident < 1e-10,
           f"max rel jump err={worst:.1e} c1={c.c1} |c0^2+nu/2|={ident:.1e}")


def _g2_spec(p, ratio, xi):
    r = traced(ratio)
    xs = r.column("xi")
    s = r.samples[int(np.argmin(np.abs(xs - xi)))]
    return correct(ParamStateG2(p, xi, s.alpha1, s.alpha2))[0].gprime_spec()


def _scenario_specs(ratio):
    p = symmetric_shock(ratio)
    out = [genus0_spec(p, x) for x in (9.0, 12.0)]
    if ratio < 1:
        out += [solve_genus1_smallxi(p, x).spec(p) for x in (0.0, 0.7)]
    if ratio <= 1.5:
        out += [_g2_spec(p, ratio, x) for x in ((4.2, 5.0) if ratio > 1 else (2.5, 4.0))]
    if ratio > 1:
        out += [solve_genus3_at(p, x).state.gprime_spec() for x in (0.3, 0.6)]
    if ratio == 2.0:
        out.append(solve_genus1_rarefaction(p, 7.0).spec(p))
    return out


def test_c10_signature(report):
    worst, n, ok = 0.0, 0, True
    for ratio in RATIOS:
        for spec in _scenario_specs(ratio):
            tab = signature_table(spec)
            zeros = real_zeros_of(spec)
            n += 1
            if len(zeros) != len(tab.crossings):
                ok = False
                continue
            err = np.max(np.abs(zeros - tab.crossings)) / tab.cell[0] if len(zeros) else 0.0
            worst = max(worst, err)
    mirror = 0.0
    for ratio in RATIOS:
        b = sector_diagram(symmetric_shock(ratio)).boundary_values()
        mirror = max(mirror, np.max(np.abs(b + b[::-1])))
    p = symmetric_shock(1.0)
    for xi in (6.0, 9.0):
        a = signature_table(genus0_spec(p, xi), resolution=(200, 100)).crossings
        m = signature_table(genus0_spec(p, -xi, 1), resolution=(200, 100)).crossings
        mirror = max(mirror, np.max(np.abs(np.sort(-a) - m)))
    ok &= worst <= 1.0 and mirror < 1e-9
    report(10, "signature fidelity", ok, f"{n} tables, max err={worst:.1e} cells, mirror={mirror:.1e}")
