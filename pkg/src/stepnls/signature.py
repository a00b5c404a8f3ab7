"""Sign charts of Im g in the upper half plane and the zero level set.

Values of g at grid nodes are accumulated along a breadth-first spanning tree
of cut-free grid edges, starting from the real anchor point. Level curves are
located on the scaled field h = Im g / Im k, which equals g' on the real axis;
this keeps the real axis (where Im g vanishes identically) out of the level set
and turns real-axis crossings of Im g = 0 into ordinary zero crossings of h.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import breadth_first_order

from .quadrature import Path, Segment, integrate
from .surfaces import GPrimeSpec, check_conditions, g_eval, gprime

GL_X, GL_W = np.polynomial.legendre.leggauss(12)
LEVEL_TOL = 1e-8
HIT_E_TOL = 1e-3
MERGE_TOL = 1e-6
BISECTIONS = 48


@dataclass(frozen=True)
class Window:
    re_min: float
    re_max: float
    im_max: float

    def contains(self, k) -> bool:
        return self.re_min <= k.real <= self.re_max and 0 <= k.imag <= self.im_max


@dataclass
class SignatureTable:
    xi: float
    window: Window
    shape: tuple
    polylines: list
    region_signs: np.ndarray
    events: list
    crossings: np.ndarray
    level_residual: float
    infinite: list = field(default_factory=list)

    @property
    def cell(self) -> tuple:
        nx, ny = self.shape
        return ((self.window.re_max - self.window.re_min) / (nx - 1), self.window.im_max / (ny - 1))

    def mirrored(self) -> list:
        """Upper polylines followed by their conjugates (lower half plane)."""
        return list(self.polylines) + [np.conj(p) for p in self.polylines]

    def rows(self):
        """(branch_id, re_k, im_k) over both half planes."""
        for bid, pl in enumerate(self.mirrored()):
            for z in pl:
                yield bid, float(z.real), float(z.imag)


def default_window(spec: GPrimeSpec) -> Window:
    pts = list(spec.surface.branch_points)
    roots = [complex(z) for z in np.roots(spec.poly)] if len(spec.poly) > 1 else []
    R = max([abs(p) for p in pts + roots] + [1.0])
    half = max(2.0 * R, abs(spec.xi) / 4 + 2.0, 4.0)
    return Window(-half, half, half)


def _seg_hits_cut(p, q, a, b, tol):
    """Vectorised: segments p-q meet segment a-b (within ``tol``)."""
    d = q - p
    e = b - a

    def cross(u, v):
        return (np.conj(u) * v).imag
    den = cross(d, e)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = cross(a - p, e) / den
        s = cross(a - p, d) / den
    proper = (np.abs(den) > 0) & (t >= -tol) & (t <= 1 + tol) & (s >= -tol) & (s <= 1 + tol)
    near = np.zeros(np.shape(p), dtype=bool)
    for z in (a, b):
        # endpoints of the cut lying on the edge
        dd = np.abs(d) ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            tt = np.clip(((z - p) * np.conj(d)).real / dd, 0, 1)
        near |= np.abs(p + tt * d - z) <= tol
    return proper | near


def _blocked(spec, p, q, tol=1e-12):
    out = np.zeros(np.shape(p), dtype=bool)
    for c in spec.surface.cuts:
        out |= _seg_hits_cut(p, q, c.a, c.b, tol)
    return out


def _gl_integral(spec, p, q):
    """Fixed Gauss-Legendre integral of g' along each segment p -> q (vectorised)."""
    half = 0.5 * (q - p)
    mid = 0.5 * (q + p)
    k = mid[..., None] + half[..., None] * GL_X
    return half * (gprime(spec, k) @ GL_W)


def _adaptive_integral(spec, p, q):
    return integrate(lambda z: gprime(spec, z), Path((Segment(p, q),)), tol=1e-13).value


def _edge_integrals(spec, p, q, near_bp, threads):
    out = np.empty(p.shape, dtype=complex)
    idx = np.flatnonzero(~near_bp)
    chunks = np.array_split(idx, max(1, threads))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(lambda ch: _gl_integral(spec, p[ch], q[ch]), chunks))
    else:
        parts = [_gl_integral(spec, p[ch], q[ch]) for ch in chunks]
    for ch, val in zip(chunks, parts):
        out[ch] = val
    for i in np.flatnonzero(near_bp):
        out[i] = _adaptive_integral(spec, p[i], q[i])
    return out


def _h_on_segment(spec, g_start, p, q, t):
    """h at p + t(q - p), from g(p) plus a partial edge integral."""
    z = p + t * (q - p)
    gz = g_start + _gl_integral(spec, p, z)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = np.where(z.imag > 0, gz.imag / z.imag, np.real(gprime(spec, z + 0j)))
    return h, gz


def signature_table(spec: GPrimeSpec, window: Window | None = None, resolution=(400, 200),
                    acknowledge: bool = False, threads: int = 1, marks=None) -> SignatureTable:
    """Trace Im g = 0 for ``spec`` on a ``resolution`` grid over the upper half window.

    ``marks`` maps event names to the points the infinite branch is checked
    against; by default the tops of the first and last cuts stand for E1, E2.
    """
    if not acknowledge:
        check_conditions(spec)
    window = window or default_window(spec)
    nx, ny = resolution
    xs = np.linspace(window.re_min, window.re_max, nx)
    ys = np.linspace(0.0, window.im_max, ny)
    dx, dy = xs[1] - xs[0], ys[1] - ys[0]
    K = xs[:, None] + 1j * ys[None, :]  # K[i, j]
    node = np.arange(nx * ny).reshape(nx, ny)
    on_cut = spec.surface.on_cut(K, tol=1e-10)

    # edges: horizontal (i,j)-(i+1,j), vertical (i,j)-(i,j+1)
    hp, hq = node[:-1, :].ravel(), node[1:, :].ravel()
    vp, vq = node[:, :-1].ravel(), node[:, 1:].ravel()
    ep = np.concatenate([hp, vp])
    eq = np.concatenate([hq, vq])
    kf = K.ravel()
    P, Q = kf[ep], kf[eq]
    blocked = _blocked(spec, P, Q) | on_cut.ravel()[ep] | on_cut.ravel()[eq]
    bps = np.array(spec.surface.branch_points)
    near_bp = np.zeros(P.shape, dtype=bool)
    scale = 2 * max(dx, dy)
    for b in bps:
        dd = np.abs(Q - P) ** 2
        t = np.clip(((b - P) * np.conj(Q - P)).real / dd, 0, 1)
        near_bp |= np.abs(P + t * (Q - P) - b) < scale
    near_bp &= ~blocked

    ok = np.flatnonzero(~blocked)
    integ = np.zeros(P.shape, dtype=complex)
    integ[ok] = _edge_integrals(spec, P[ok], Q[ok], near_bp[ok], threads)

    # spanning tree from the real-axis node right of every cut
    start_i = int(np.searchsorted(xs, max(b.real for b in bps) + 1e-9))
    start_i = min(max(start_i, 0), nx - 1)
    start = node[start_i, 0]
    n = nx * ny
    graph = coo_matrix((np.ones(ok.size), (ep[ok], eq[ok])), shape=(n, n)).tocsr()
    graph = graph + graph.T
    order, pred = breadth_first_order(graph, start, directed=False, return_predecessors=True)
    edge_id = {}
    for e in ok:
        edge_id[(ep[e], eq[e])] = (e, 1.0)
        edge_id[(eq[e], ep[e])] = (e, -1.0)
    g = np.full(n, np.nan + 0j)
    g[start] = g_eval(spec, kf[start], acknowledge=True)
    for v in order[1:]:
        u = pred[v]
        e, sgn = edge_id[(u, v)]
        g[v] = g[u] + sgn * integ[e]
    gprime_axis = np.full(nx, np.nan)
    axis_ok = ~on_cut[:, 0]
    gprime_axis[axis_ok] = np.real(gprime(spec, K[axis_ok, 0]))
    G = g.reshape(nx, ny)
    with np.errstate(divide="ignore", invalid="ignore"):
        H = np.where(np.arange(ny)[None, :] > 0, G.imag / K.imag, gprime_axis[:, None])
    H[np.isnan(G.real)] = np.nan

    # sign changes on usable edges
    hf = H.ravel()
    sc = (~blocked) & np.isfinite(hf[ep]) & np.isfinite(hf[eq]) & (np.sign(hf[ep]) != np.sign(hf[eq]))
    sc_idx = np.flatnonzero(sc)
    lo = np.zeros(sc_idx.size)
    hi = np.ones(sc_idx.size)
    p0, q0 = P[sc_idx], Q[sc_idx]
    g0 = g[ep[sc_idx]]
    s0 = np.sign(hf[ep[sc_idx]])
    for _ in range(BISECTIONS):
        mid = 0.5 * (lo + hi)
        hm, _ = _h_on_segment(spec, g0, p0, q0, mid)
        same = np.sign(hm) == s0
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    tr = 0.5 * (lo + hi)
    pts = p0 + tr * (q0 - p0)
    _, gpts = _h_on_segment(spec, g0, p0, q0, tr)
    level = np.where(pts.imag > 0, np.abs(gpts.imag), 0.0)
    level_res = float(level.max()) if level.size else 0.0
    point_of_edge = {int(e): i for i, e in enumerate(sc_idx)}

    # cell centres: sign field
    nh = (nx - 1) * ny
    centers = (K[:-1, :-1] + K[1:, 1:]) / 2
    bl = K[:-1, :-1].ravel()
    cen = centers.ravel()
    gbl = G[:-1, :-1].ravel()
    usable = np.isfinite(gbl.real) & ~_blocked(spec, bl, cen)
    signs = np.zeros(cen.shape, dtype=np.int8)
    if usable.any():
        gc = gbl[usable] + _gl_integral(spec, bl[usable], cen[usable])
        signs[usable] = np.sign(gc.imag).astype(np.int8)
    signs = signs.reshape(nx - 1, ny - 1)

    # marching squares: connect crossing points within each cell
    def hedge(i, j):  # horizontal edge from (i,j) to (i+1,j)
        return i * ny + j

    def vedge(i, j):  # vertical edge from (i,j) to (i,j+1)
        return nh + i * (ny - 1) + j

    links = {}

    def link(a, b):
        links.setdefault(a, []).append(b)
        links.setdefault(b, []).append(a)

    for i in range(nx - 1):
        for j in range(ny - 1):
            es = [hedge(i, j), vedge(i + 1, j), hedge(i, j + 1), vedge(i, j)]  # bottom right top left
            if any(blocked[e] for e in es):
                continue
            corners = (H[i, j], H[i + 1, j], H[i + 1, j + 1], H[i, j + 1])
            if not all(np.isfinite(corners)):
                continue
            hits = [point_of_edge[e] for e in es if e in point_of_edge]
            if len(hits) == 2:
                link(hits[0], hits[1])
            elif len(hits) == 4:
                b_, r_, t_, l_ = (point_of_edge[e] for e in es)
                if signs[i, j] == np.sign(corners[0]):
                    link(b_, r_)
                    link(t_, l_)
                else:
                    link(b_, l_)
                    link(r_, t_)
    polylines = _chain(links, pts)

    # real-axis crossings and the infinite branch
    crossings = np.sort(pts[pts.imag == 0].real)
    edge_tol = 0.5 * min(dx, dy)

    def touches_boundary(pl):
        return np.any((pl.real <= window.re_min + edge_tol) | (pl.real >= window.re_max - edge_tol)
                      | (pl.imag >= window.im_max - edge_tol))
    infinite = [i for i, pl in enumerate(polylines) if touches_boundary(pl)]
    events = _events(spec, polylines, infinite, marks)
    return SignatureTable(float(spec.xi), window, (nx, ny), polylines, signs, events, crossings,
                          level_res, infinite)


def _chain(links, pts):
    seen = set()
    out = []
    ends = sorted(v for v, nb in links.items() if len(nb) == 1)
    for start in ends + sorted(links):
        if start in seen:
            continue
        chain = [start]
        seen.add(start)
        prev, cur = None, start
        while True:
            nxt = [v for v in links[cur] if v != prev and v not in seen]
            if not nxt:
                # close loops
                if len(chain) > 2 and start in links[cur] and prev is not None:
                    chain.append(start)
                break
            prev, cur = cur, min(nxt)
            chain.append(cur)
            seen.add(cur)
        out.append(pts[np.array(chain)])
    return out


def _min_distance(pl, z):
    if len(pl) == 1:
        return abs(pl[0] - z)
    a, b = pl[:-1], pl[1:]
    d = b - a
    dd = np.abs(d) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(dd > 0, np.clip(((z - a) * np.conj(d)).real / dd, 0, 1), 0)
    return float(np.min(np.abs(a + t * d - z)))


def _events(spec: GPrimeSpec, polylines, infinite, marks=None):
    events = []
    cuts = spec.surface.cuts
    if marks is None:
        marks = {"hitsE1": cuts[0].b, "hitsE2": cuts[-1].b}
    for name, E in marks.items():
        if infinite:
            d = min(_min_distance(polylines[i], E) for i in infinite)
            if d < HIT_E_TOL:
                events.append({"type": name, "xi": spec.xi, "distance": d})
    roots = np.roots(spec.poly) if len(spec.poly) > 1 else np.array([])
    real = np.sort(roots[np.abs(roots.imag) < 1e-7].real)
    if real.size >= 2:
        gaps = np.diff(real)
        i = int(np.argmin(gaps))
        if gaps[i] < MERGE_TOL:
            events.append({"type": "zerosMerge", "xi": spec.xi, "gap": float(gaps[i]),
                           "at": float(real[i:i + 2].mean())})
    return events


def sign_consistent(table: SignatureTable, spec: GPrimeSpec) -> bool:
    """Neighbouring cell signs differ only across a level curve or a cut."""
    s = table.region_signs
    nx, ny = s.shape
    dx, dy = table.cell
    pts = np.concatenate(table.polylines) if table.polylines else np.array([])
    reach = 2 * math.hypot(dx, dy)
    for i in range(nx - 1):
        for j in range(ny):
            a, b = s[i, j], s[i + 1, j]
            if a == 0 or b == 0 or a == b:
                continue
            c0 = table.window.re_min + (i + 0.5) * dx + 1j * (j + 0.5) * dy
            if _blocked(spec, np.array([c0]), np.array([c0 + dx]))[0]:
                continue
            if pts.size == 0 or np.min(np.abs(pts - (c0 + dx / 2))) > reach:
                return False
    return True


def real_zeros_of(spec: GPrimeSpec) -> np.ndarray:
    roots = np.roots(spec.poly) if len(spec.poly) > 1 else np.array([])
    return np.sort(roots[np.abs(roots.imag) < 1e-9].real)
