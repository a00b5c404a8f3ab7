"""Scalar RH factor d(k) and the slowly decaying oscillation coefficients.

All Cauchy integrals are evaluated on straight pieces. Near the contour the
integrand is regularised by subtracting its value at the closest contour point,
whose contribution is the exact logarithm of the endpoint ratio.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import loggamma

from .errors import OnContour, OutsideSector
from .quadrature import Path, Segment, integrate
from .spectral import ProblemParams, a_star, reflection, step_scattering

TRUNCATION = 1e3
TOL = 1e-12


def _check_sector(params: ProblemParams, xi: float):
    if params.case != "rarefaction" or not (-4 * params.B1 < xi < -4 * params.B2):
        raise OutsideSector("slow decay needs B1 > B2 and -4 B1 < xi < -4 B2")


def log_weight(params: ProblemParams, s):
    """log(1 + |r(s)|^2) on the real axis."""
    r, _ = reflection(params, np.asarray(s, dtype=float))
    return np.log1p(np.abs(r) ** 2)


def _cauchy_piece(F, a: complex, b: complex, k: complex) -> complex:
    """Integral of F(s)/(s - k) over the segment a -> b."""
    L = b - a
    t = ((k - a) * np.conj(L)).real / abs(L) ** 2
    t = min(max(t, 1e-9), 1 - 1e-9)
    p = a + t * L
    if abs(k - p) > 0.25 * abs(L):
        return integrate(lambda s: F(s) / (s - k), Path((Segment(a, b),)), tol=TOL).value
    Fp = complex(F(np.array([p]))[0])
    path = Path((Segment(a, p), Segment(p, b)))
    body = integrate(lambda s: (F(s) - Fp) / (s - k), path, tol=TOL).value
    return body + Fp * cmath.log((b - k) / (a - k))


def _cauchy_left_ray(F, c: float, k: complex) -> complex:
    """Integral of F(s)/(s - k) over (-inf, c] for F decaying like 1/s^2.

    Beyond |s| = TRUNCATION the weight is replaced by its 1/s^2 model.
    """
    L = TRUNCATION
    FL = float(F(np.array([-L]))[0])

    def f(u):
        u = u.real
        s = c + 1.0 - 1.0 / u
        far = s < -L
        val = np.empty(u.shape)
        if np.any(~far):
            val[~far] = F(s[~far])
        val[far] = FL * L * L / (s[far] * s[far])
        return val / (s - k) / (u * u)
    # u = 0 is never sampled by Gauss-Kronrod nodes
    return integrate(f, Path((Segment(0.0, 1.0),)), tol=TOL).value


def _ray_pieces(params: ProblemParams, x0: float, k: complex):
    breaks = sorted({b for b in (params.B1, params.B2) if b < x0})
    lo = min([x0, k.real] + breaks) - 2.0
    pts = [lo] + [b for b in breaks if b > lo] + [x0]
    return lo, list(zip(pts[:-1], pts[1:]))


def d0_log(params: ProblemParams, xi: float, k: complex) -> complex:
    """log d0(k): Cauchy integral of log(1 + |r|^2) over (-inf, -xi/4)."""
    x0 = -xi / 4
    F = lambda s: log_weight(params, np.real(s))
    lo, pieces = _ray_pieces(params, x0, k)
    total = _cauchy_left_ray(F, lo, k)
    for a, b in pieces:
        total += _cauchy_piece(F, complex(a), complex(b), k)
    return total / (2j * math.pi)


def _sigma2_weight_upper(params: ProblemParams):
    def F(s):
        am = step_scattering(params, s, -1)[0]
        ap = step_scattering(params, s, +1)[0]
        return np.log(am / ap)
    return F


def _sigma2_weight_lower(params: ProblemParams):
    def F(s):
        return np.log(a_star(params, s, +1) / a_star(params, s, -1))
    return F


def d12_log(params: ProblemParams, k: complex) -> complex:
    """log(d1 d2)(k): Cauchy integrals over the two halves of Sigma_2, both upward."""
    B2, E2 = complex(params.B2), params.E2
    up = _cauchy_piece(_sigma2_weight_upper(params), B2, E2, k)
    down = _cauchy_piece(_sigma2_weight_lower(params), np.conj(E2), B2, k)
    return (up + down) / (2j * math.pi)


def _on_contour(params: ProblemParams, xi: float, k: complex) -> bool:
    x0 = -xi / 4
    if abs(k.imag) < 1e-14 and k.real <= x0:
        return True
    return abs(k.real - params.B2) < 1e-14 and abs(k.imag) <= params.A2


def dfunction(params: ProblemParams, xi: float, k: complex) -> complex:
    """d = d0 d1 d2, normalised to 1 at infinity."""
    _check_sector(params, xi)
    k = complex(k)
    if _on_contour(params, xi, k):
        raise OnContour("d is evaluated off (-inf, -xi/4) and Sigma_2")
    return cmath.exp(d0_log(params, xi, k) + d12_log(params, k))


def chi_at_stationary(params: ProblemParams, xi: float) -> complex:
    """chi(-xi/4), the constant left after removing (k + xi/4)^(i nu) from d0."""
    x0 = -xi / 4
    F = lambda s: log_weight(params, np.real(s))
    F0 = float(F(np.array([x0]))[0])
    lo, pieces = _ray_pieces(params, x0, complex(x0))
    c = x0 - 1.0
    total = 0j
    # far part: F/(s - x0) is regular; near part: subtract F(x0)
    if c > lo:
        total += _cauchy_left_ray(F, lo, complex(x0))
        for a, b in pieces:
            hi = min(b, c)
            if hi > a:
                total += integrate(lambda s: F(s) / (s - x0), Path((Segment(a, hi),)), tol=TOL).value
    else:
        total += _cauchy_left_ray(F, c, complex(x0))
    near = [(max(a, c), b) for a, b in pieces if b > c]
    for a, b in near:
        total += integrate(lambda s: (F(s) - F0) / (s - x0), Path((Segment(a, b),)), tol=TOL).value
    return total / (2j * math.pi)


def chi_tilde(params: ProblemParams, xi: float) -> complex:
    return chi_at_stationary(params, xi) + d12_log(params, complex(-xi / 4))


def nu_stationary(params: ProblemParams, xi: float) -> float:
    return float(-log_weight(params, np.array([-xi / 4]))[0] / (2 * math.pi))


@dataclass(frozen=True)
class SlowDecayCoeffs:
    xi: float
    c0: float
    c1: float
    c2: float
    c3: float
    nu: float
    chi_tilde: complex
    zero_reflection: bool = False

    def as_dict(self):
        return {"xi": self.xi, "c0": self.c0, "c1": self.c1, "c2": self.c2,
                "c3": None if math.isnan(self.c3) else self.c3, "nu": self.nu,
                "chi_tilde_imag": self.chi_tilde.imag, "chi_tilde_real": self.chi_tilde.real,
                "zero_reflection": self.zero_reflection}


def coefficients_from(xi: float, r: complex, chi_t: complex) -> SlowDecayCoeffs:
    """Coefficients from the reflection coefficient and chi-tilde at -xi/4."""
    w = math.log1p(abs(r) ** 2)
    nu = -w / (2 * math.pi)
    c0 = math.sqrt(w / (4 * math.pi))
    c1 = xi * xi / 4
    c2 = -nu
    if r == 0:
        return SlowDecayCoeffs(xi, c0, c1, c2, math.nan, nu, chi_t, True)
    arg_gamma = float(loggamma(1j * nu).imag)
    c3 = -3 * math.log(2) * nu + math.pi / 4 + arg_gamma - cmath.phase(r) - 2j * chi_t
    return SlowDecayCoeffs(xi, c0, c1, c2, float(c3.real), nu, chi_t, False)


def slow_decay_coeffs(params: ProblemParams, xi: float) -> SlowDecayCoeffs:
    """Coefficients c0..c3 of the slowly decaying oscillation at ``xi``."""
    _check_sector(params, xi)
    x0 = -xi / 4
    r, _ = reflection(params, np.array([x0]))
    r = complex(r[0])
    chi_t = chi_tilde(params, xi) if r != 0 else 0j
    return coefficients_from(xi, r, chi_t)
