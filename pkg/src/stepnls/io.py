"""Deterministic CSV, JSON and SVG writers.

Floats are written with ``repr`` so identical runs give identical bytes.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict

import numpy as np

SCHEMA_VERSION = 1

G2_CYCLE_BASIS = ("loop around [conj E1, E1]", "loop around [conj E2, E2]")


def _clean(v):
    """JSON-safe copy: complex -> {re, im}, non-finite floats -> strings, numpy -> python."""
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_clean(x) for x in v.tolist()]
    if isinstance(v, (complex, np.complexfloating)):
        return {"re": _clean(float(v.real)), "im": _clean(float(v.imag))}
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return v


def dumps(obj) -> str:
    doc = {"schema_version": SCHEMA_VERSION, **_clean(obj)}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])
    return buf.getvalue()


def write_text(path, text: str):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


# --------------------------------------------------------------- signature

def signature_csv(table) -> str:
    return _csv(["xi", "branch_id", "re_k", "im_k"], ((table.xi, b, x, y) for b, x, y in table.rows()))


def _svg_frame(x0, x1, y0, y1, width=800):
    sx = width / (x1 - x0)
    height = int(round((y1 - y0) * sx))

    def tx(x, y):
        return f"{(x - x0) * sx:.3f},{(y1 - y) * sx:.3f}"
    return width, height, tx


def signature_svg(table, cuts=()) -> str:
    w = table.window
    width, height, tx = _svg_frame(w.re_min, w.re_max, -w.im_max, w.im_max)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">']
    # shaded sign regions on a coarse block grid, mirrored with the sign flipped
    signs = np.asarray(table.region_signs)
    nx, ny = signs.shape
    step = max(1, nx // 80)
    xs = np.linspace(w.re_min, w.re_max, nx)
    ys = np.linspace(0.0, w.im_max, ny)
    for i in range(0, nx - step, step):
        for j in range(0, ny - step, step):
            s = signs[i, j]
            if s == 0:
                continue
            for sgn in (1, -1):
                col = "#f4c7c3" if s * sgn > 0 else "#c6dbef"
                ya, yb = (ys[j + step], ys[j]) if sgn > 0 else (-ys[j], -ys[j + step])
                a = tx(xs[i], ya).split(",")
                b = tx(xs[i + step], yb).split(",")
                out.append(f'<rect x="{a[0]}" y="{a[1]}" width="{float(b[0]) - float(a[0]):.3f}" '
                           f'height="{float(b[1]) - float(a[1]):.3f}" fill="{col}"/>')
    out.append(f'<line x1="0" y1="{height / 2:.3f}" x2="{width}" y2="{height / 2:.3f}" stroke="#999"/>')
    for c in cuts:
        out.append(f'<polyline points="{tx(c.a.real, c.a.imag)} {tx(c.b.real, c.b.imag)}" '
                   'stroke="#000" stroke-width="3" fill="none"/>')
    for pl in table.mirrored():
        pts = " ".join(tx(z.real, z.imag) for z in pl)
        out.append(f'<polyline points="{pts}" stroke="#222" stroke-width="1.2" fill="none"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# ------------------------------------------------------------------- trace

TRACE_COLUMNS = ("xi", "alpha1", "alpha2", "mu1", "mu2", "detP", "residual")


def trace_csv(result) -> str:
    return _csv(TRACE_COLUMNS, ((getattr(s, c) for c in TRACE_COLUMNS) for s in result.samples))


def trace_json(result, extra=None) -> str:
    doc = {"params": result.params.as_dict(), "termination": result.termination,
           "settings": result.settings, "cycle_basis": list(G2_CYCLE_BASIS),
           "samples": len(result.samples),
           "max_residual": max(s.residual for s in result.samples)}
    doc.update(extra or {})
    return dumps(doc)


# ----------------------------------------------------------------- sectors

def sectors_json(diagram, extra=None) -> str:
    doc = diagram.as_dict()
    doc.update(extra or {})
    return dumps(doc)


def sectors_svg(diagram, width=600) -> str:
    """Half-plane (x, t > 0) fan: one ray x = xi t per finite boundary."""
    xis = [b.xi for b in diagram.boundaries if b.xi is not None and math.isfinite(b.xi)]
    span = max([abs(x) for x in xis] + [1.0]) * 1.25
    height = width // 2
    cx, cy = width / 2, height

    def at(xi, f):
        # point of the ray x = xi t at height fraction f
        return cx + f * xi / span * cx, cy - f * height
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height + 20}">',
           f'<line x1="0" y1="{cy}" x2="{width}" y2="{cy}" stroke="#000"/>']
    for b in diagram.boundaries:
        if b.xi is None:
            continue
        x, y = at(b.xi, 1.0)
        out.append(f'<polyline points="{cx:.3f},{cy:.3f} {x:.3f},{y:.3f}" stroke="#333" fill="none"/>')
    for s in diagram.sectors:
        lo = -span if not math.isfinite(s.lo) else s.lo
        hi = span if not math.isfinite(s.hi) else s.hi
        if math.isnan(lo) or math.isnan(hi):
            continue
        x, y = at(0.5 * (lo + hi), 0.6)
        out.append(f'<text x="{x:.3f}" y="{y:.3f}" font-size="12" '
                   f'text-anchor="middle">{s.genus}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# -------------------------------------------------------------- scattering

def scattering_csv(rows) -> str:
    """rows: (k, a, b, r, detS_minus_1)."""
    hdr = ["k", "a_re", "a_im", "b_re", "b_im", "r_re", "r_im", "detS_residual"]
    return _csv(hdr, ((float(k), a.real, a.imag, b.real, b.imag, r.real, r.imag, d) for k, a, b, r, d in rows))


def slowdecay_json(coeffs, params, extra=None) -> str:
    doc = {"params": params.as_dict(), **coeffs.as_dict()}
    doc["identity_residual"] = abs(coeffs.c0 ** 2 + coeffs.nu / 2)
    doc.update(extra or {})
    return dumps(doc)


def classification_json(c) -> str:
    doc = c.as_dict()
    doc["transform"] = asdict(c.transform)
    doc["normalized"] = c.normalized.as_dict()
    return dumps(doc)
