"""Scenario classification, parameter reduction and sector diagrams."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DomainError, EqualBCase, OutsideSector, SolverError
from .quadrature import find_root_1d
from .spectral import ProblemParams
from .surfaces import find_xi_E1, find_xi_merge, xi_E1_closed, xi_merge_closed

BV_THRESHOLD = 2.0 / 7.0 * (2.0 + 3.0 * math.sqrt(2.0))
RATIO_TOL = 1e-12
COLLAPSE_TOL = 1e-6


# ---------------------------------------------------------------- reduce

@dataclass(frozen=True)
class Transform:
    """q~(x,t) = A q(A(x + 4Bt), A^2 t) exp(-2iB(x + 2Bt)) with the phase of q_2 removed."""

    A: float
    B: float
    phase: float

    def apply(self, p: ProblemParams) -> ProblemParams:
        return ProblemParams(self.A * p.A1, self.A * p.A2, self.A * p.B1 + self.B, self.A * p.B2 + self.B,
                             p.phi1 - self.phase, p.phi2 - self.phase)

    def invert(self, p: ProblemParams) -> ProblemParams:
        return ProblemParams(p.A1 / self.A, p.A2 / self.A, (p.B1 - self.B) / self.A, (p.B2 - self.B) / self.A,
                             p.phi1 + self.phase, p.phi2 + self.phase)

    @property
    def is_identity(self) -> bool:
        return self.A == 1.0 and self.B == 0.0 and self.phase == 0.0


def reduce(params: ProblemParams):
    """Normalise to B2 = -B1 = 1 (shock), B1 = -B2 = 1 (rarefaction) or B = 0 (equal)."""
    B1, B2 = params.B1, params.B2
    if params.case == "shock":
        A = 2.0 / (B2 - B1)
        B = (B1 + B2) / (B1 - B2)
    elif params.case == "rarefaction":
        A = 2.0 / (B1 - B2)
        B = -(B1 + B2) / (B1 - B2)
    else:
        A, B = 1.0, -B1
    t = Transform(A, B + 0.0, params.phi2)
    return t.apply(params), t


# -------------------------------------------------------------- classify

@dataclass(frozen=True)
class Classification:
    case: str
    scenario: str
    ratio: float | None
    xi_E1: float | None
    xi_merge: float | None
    normalized: ProblemParams
    transform: Transform

    def as_dict(self):
        return {"case": self.case, "scenario": self.scenario, "A_over_B": self.ratio,
                "thresholds": {"one": 1.0, "bv": BV_THRESHOLD},
                "xi_E1": self.xi_E1, "xi_merge": self.xi_merge}


def scenario_for_ratio(r: float) -> str:
    """Shock scenario for the symmetric ratio A/B."""
    if abs(r - 1.0) <= RATIO_TOL:
        return "shock2"
    if r < 1.0:
        return "shock1"
    # the two boundaries coincide when A/B hits the threshold
    if abs(xi_E1_closed(r, 1.0) - xi_merge_closed(r, 1.0)) < COLLAPSE_TOL or abs(r - BV_THRESHOLD) <= RATIO_TOL:
        return "shock4"
    return "shock3" if r < BV_THRESHOLD else "shock5"


def classify(params: ProblemParams) -> Classification:
    if params.case == "equal":
        raise EqualBCase("B1 = B2 is not treated: only the cases B1 != B2 are analysed")
    norm, t = reduce(params)
    if params.case == "rarefaction":
        return Classification("rarefaction", "rarefaction", None, None, None, norm, t)
    if abs(norm.A1 - norm.A2) > 1e-12 * norm.A1:
        return Classification("shock", "shock-asymmetric", None, None, None, norm, t)
    r = norm.A1
    return Classification("shock", scenario_for_ratio(r), r, xi_E1_closed(r, 1.0), xi_merge_closed(r, 1.0), norm, t)


def threshold_ratio(tol: float = 1e-13) -> float:
    """A/B at which the numerically located xi_E1 and xi_merge coincide."""
    def f(a):
        p = ProblemParams(a, a, -1.0, 1.0)
        return find_xi_E1(p).numeric - find_xi_merge(p).numeric
    return find_root_1d(f, (1.2, 2.5), tol=tol)


# --------------------------------------------------------- sector diagram

@dataclass(frozen=True)
class Boundary:
    xi: float | None
    genus_left: str
    genus_right: str
    provenance: str
    label: str = ""


@dataclass(frozen=True)
class Sector:
    lo: float
    hi: float
    genus: str
    description: str


@dataclass
class SectorDiagram:
    scenario: str
    boundaries: list
    sectors: list
    metadata: dict = field(default_factory=dict)

    def as_dict(self):
        return {"scenario": self.scenario,
                "boundaries": [asdict(b) for b in self.boundaries],
                "sectors": [{"lo": _inf(s.lo), "hi": _inf(s.hi), "genus": s.genus, "description": s.description}
                            for s in self.sectors],
                "metadata": self.metadata}

    def boundary_values(self) -> np.ndarray:
        return np.array([b.xi for b in self.boundaries if b.xi is not None])


def _inf(v):
    if v == math.inf:
        return "inf"
    if v == -math.inf:
        return "-inf"
    return v


def _assemble(scenario, right, metadata, zero_point=None):
    """Mirror the xi >= 0 description ``right`` = [(xi, label, provenance)], genera outward."""
    # right: list of boundaries with increasing xi > 0; genera: list len(right)+1 from centre outward
    points, genera = right
    bnds = []
    for xi, label, prov in reversed(points):
        bnds.append(Boundary(None if xi is None else -xi, "", "", prov, label))
    if zero_point is not None:
        bnds.append(Boundary(0.0, "", "", "closedForm", zero_point))
    for xi, label, prov in points:
        bnds.append(Boundary(xi, "", "", prov, label))
    # genus sequence from -inf to +inf
    outer = list(reversed(genera))
    seq = outer + (genera if zero_point is not None else genera[1:])
    fixed = []
    for i, b in enumerate(bnds):
        fixed.append(Boundary(b.xi, seq[i], seq[i + 1], b.provenance, b.label))
    edges = [-math.inf] + [b.xi for b in fixed] + [math.inf]
    sectors = []
    for i, g in enumerate(seq):
        lo, hi = edges[i], edges[i + 1]
        sectors.append(Sector(lo if lo is not None else math.nan, hi if hi is not None else math.nan, g,
                              _DESCRIPTIONS.get(g, g)))
    return SectorDiagram(scenario, fixed, sectors, metadata)


_DESCRIPTIONS = {
    "0": "modulated plane wave",
    "1": "modulated elliptic wave",
    "2": "genus 2 hyperelliptic wave",
    "3": "genus 3 hyperelliptic wave",
    "slowDecay": "slowly decaying oscillation",
}


def _traced(fn):
    try:
        return fn(), "traced"
    except (SolverError, DomainError) as exc:
        return None, f"traced: failed ({type(exc).__name__})"


def sector_diagram(params: ProblemParams, threads: int = 1) -> SectorDiagram:
    """Sectors in xi = x/t with their genus labels."""
    from .genus1 import find_xi_E1_new
    from .trace import trace_genus2

    c = classify(params)
    meta = {"normalized": c.normalized.as_dict(), "transform": asdict(c.transform)}
    if c.scenario == "rarefaction":
        p = params
        b = [-4 * p.B1 - 4 * math.sqrt(2) * p.A1, -4 * p.B1, -4 * p.B2, -4 * p.B2 + 4 * math.sqrt(2) * p.A2]
        seq = ["0", "1", "slowDecay", "1", "0"]
        bnds = [Boundary(x, seq[i], seq[i + 1], "closedForm") for i, x in enumerate(b)]
        edges = [-math.inf] + b + [math.inf]
        secs = [Sector(edges[i], edges[i + 1], g, _DESCRIPTIONS[g]) for i, g in enumerate(seq)]
        return SectorDiagram("rarefaction", bnds, secs, meta)
    if c.scenario == "shock-asymmetric":
        raise DomainError("sector diagrams are available for the symmetric shock only")
    norm = c.normalized
    xe, xm = c.xi_E1, c.xi_merge
    meta.update({"xi_E1": xe, "xi_merge": xm})
    if c.scenario in ("shock1", "shock2", "shock3"):
        def run():
            return trace_genus2(norm)
        with ThreadPoolExecutor(max_workers=max(1, threads)) as ex:
            res, prov = ex.submit(_traced, run).result()
        xi_t = None if res is None else max(res.xi_m, 0.0)
        if res is not None:
            meta["trace_termination"] = res.termination
        if c.scenario == "shock1":
            return _assemble(c.scenario, ([(xi_t, "xi_alpha", prov), (xe, "xi_E1", "closedForm")],
                                          ["1", "2", "0"]), meta)
        if c.scenario == "shock2":
            return _assemble(c.scenario, ([(xe, "xi_E1", "closedForm")], ["2", "0"]), meta,
                             zero_point="genus 1 at xi = 0")
        return _assemble(c.scenario, ([(xi_t, "xi_mu", prov), (xe, "xi_E1", "closedForm")], ["3", "2", "0"]),
                         meta, zero_point="genus 1 at xi = 0")
    if c.scenario == "shock4":
        return _assemble(c.scenario, ([(xe, "xi_E1 = xi_merge", "closedForm")], ["3", "0"]), meta,
                         zero_point="genus 1 at xi = 0")
    new, prov = _traced(lambda: find_xi_E1_new(norm))
    meta["xi_E1_new"] = new
    return _assemble(c.scenario, ([(new, "xi_E1_new", prov), (xm, "xi_merge", "closedForm")], ["3", "1", "0"]),
                     meta, zero_point="genus 1 at xi = 0")


# ------------------------------------------------------ plane-wave region

@dataclass(frozen=True)
class PlaneWave:
    value: complex
    modulus: float
    phase_note: str = "leading order at |xi| -> infinity only; the xi-dependent phase correction is not computed"


def plane_wave_sector(params: ProblemParams, j: int):
    """xi-range where the plane wave j describes the solution."""
    if params.case == "rarefaction":
        if j == 1:
            return -math.inf, -4 * params.B1 - 4 * math.sqrt(2) * params.A1
        return -4 * params.B2 + 4 * math.sqrt(2) * params.A2, math.inf
    c = classify(params)
    if c.scenario == "shock-asymmetric":
        raise DomainError("plane-wave sectors are known for the symmetric shock only")
    # normalised frame: xi_orig = (xi_norm + 4B) / A
    t = c.transform
    edge = max(c.xi_E1, c.xi_merge)
    if j == 1:
        return -math.inf, (-edge + 4 * t.B) / t.A
    return (edge + 4 * t.B) / t.A, math.inf


def plane_wave_asym(params: ProblemParams, j: int, x: float, t: float) -> PlaneWave:
    """Leading plane-wave term A_j exp(-2i B_j x + 2i omega_j t + i phi_j)."""
    if t <= 0:
        raise DomainError("t > 0 required")
    lo, hi = plane_wave_sector(params, j)
    xi = x / t
    if not lo < xi < hi:
        raise OutsideSector(f"x/t = {xi:.6g} outside the plane-wave sector ({lo:.6g}, {hi:.6g})")
    A, B, w, ph = params.A(j), params.B(j), params.omega(j), params.phase(j)
    val = A * np.exp(1j * (-2 * B * x + 2 * w * t + ph))
    return PlaneWave(complex(val), float(abs(val)))


# ----------------------------------------------------------------- theta

def theta_jacobi(z: complex, tau: complex, m_max: int = 10) -> complex:
    """Truncated Jacobi theta series sum over |m| <= m_max of exp(2 pi i (tau m^2/2 + m z))."""
    if not complex(tau).imag > 0:
        raise DomainError("Im tau > 0 required")
    m = np.arange(-m_max, m_max + 1)
    return complex(np.sum(np.exp(2j * np.pi * (tau * m * m / 2 + m * z))))


def theta_truncation_bound(tau: complex, m_max: int = 10) -> float:
    return float(math.exp(-math.pi * complex(tau).imag * m_max * m_max))
