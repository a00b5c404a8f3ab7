"""Command-line front end.

Every command prints JSON on stdout and writes its files into ``--out``.
Exit codes: 0 ok, 2 input domain, 3 solver failure, 4 I/O.
"""
from __future__ import annotations

import functools
import json
import math
import os
import sys
from dataclasses import dataclass, field

import click
import numpy as np

from . import io as sio
from .errors import DomainError, OnCutWithoutSide, SolverError
from .spectral import ProblemParams, scattering_matrix, step_scattering

EXIT_OK, EXIT_DOMAIN, EXIT_SOLVER, EXIT_IO = 0, 2, 3, 4
FORMATS = ("csv", "json", "svg")


@dataclass
class RunConfig:
    params: ProblemParams
    out: str = "."
    formats: tuple = FORMATS
    normalize: bool = False
    threads: int = 1
    tol: float = 1e-10
    grid: tuple = (400, 200)
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.tol > 0:
            raise DomainError("tolerances must be positive")
        if min(self.grid) < 16:
            raise DomainError("grid dimensions must be at least 16")
        if not self.formats:
            raise DomainError("at least one output format is required")
        if self.threads < 1:
            raise DomainError("--threads must be at least 1")

    def working_params(self):
        """Parameters after the optional reduction, plus metadata describing it."""
        if not self.normalize:
            return self.params, {}
        from .scenarios import reduce
        norm, t = reduce(self.params)
        return norm, {"normalized_from": self.params.as_dict(),
                      "transform": {"A": t.A, "B": t.B, "phase": t.phase}}


def parse_sweep(text: str) -> np.ndarray:
    """``xi=a:b:n`` -> n equally spaced values from a to b."""
    try:
        name, rng = text.split("=", 1)
        a, b, n = rng.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError:
        raise DomainError(f"malformed sweep {text!r}; expected xi=a:b:n") from None
    if name.strip() != "xi" or n < 1:
        raise DomainError(f"malformed sweep {text!r}; expected xi=a:b:n with n >= 1")
    return np.linspace(a, b, n)


def _last_residual(exc):
    for name in ("residual", "last_residual"):
        v = getattr(exc, name, None)
        if v is not None:
            return float(np.max(np.abs(np.asarray(v, dtype=float))))
    st = getattr(exc, "last_state", None)
    if st is not None:
        from .genus2 import F_eval
        try:
            return float(np.max(np.abs(F_eval(st))))
        except (DomainError, SolverError):
            return None
    return None


def _fail(err):
    """Structured error JSON on stderr, then exit with the matching code."""
    code = EXIT_DOMAIN if isinstance(err, DomainError) else EXIT_SOLVER if isinstance(err, SolverError) else EXIT_IO
    payload = {"error": type(err).__name__, "message": str(err), "exit_code": code}
    if code == EXIT_SOLVER:
        payload["last_residual"] = _last_residual(err)
    click.echo(sio.dumps(payload), nl=False, err=True)
    sys.exit(code)


def _run(fn):
    try:
        doc = fn()
    except (DomainError, SolverError, OSError) as exc:
        _fail(exc)
    click.echo(sio.dumps(doc), nl=False)


def _write(cfg: RunConfig, name: str, fmt: str, text: str, written: list):
    if fmt not in cfg.formats:
        return
    os.makedirs(cfg.out, exist_ok=True)
    path = os.path.join(cfg.out, f"{name}.{fmt}")
    sio.write_text(path, text)
    written.append(os.path.basename(path))


def _split_formats(s: str):
    fm = tuple(x.strip() for x in s.split(",") if x.strip())
    bad = [f for f in fm if f not in FORMATS]
    if bad:
        raise click.BadParameter(f"unknown format(s) {bad}; choose from {FORMATS}")
    return fm


def param_options(f):
    opts = [
        click.option("--A1", "A1", type=float, required=True),
        click.option("--A2", "A2", type=float, required=True),
        click.option("--B1", "B1", type=float, required=True),
        click.option("--B2", "B2", type=float, required=True),
        click.option("--phi1", type=float, default=0.0, show_default=True),
        click.option("--phi2", type=float, default=0.0, show_default=True),
        click.option("--normalize", is_flag=True, help="Reduce the parameters before running."),
        click.option("--out", default=".", show_default=True, help="Output directory."),
        click.option("--format", "formats", default="csv,json,svg", show_default=True,
                     help="Comma separated subset of csv,json,svg."),
        click.option("--threads", type=int, default=1, show_default=True),
    ]
    for o in reversed(opts):
        f = o(f)
    return f


def _config(kw, **extra) -> RunConfig:
    p = ProblemParams(kw.pop("A1"), kw.pop("A2"), kw.pop("B1"), kw.pop("B2"), kw.pop("phi1"), kw.pop("phi2"))
    return RunConfig(p, out=kw.pop("out"), formats=_split_formats(kw.pop("formats")),
                     normalize=kw.pop("normalize"), threads=kw.pop("threads"), options=kw, **extra)


def _guarded_config(kw, **extra):
    try:
        return _config(kw, **extra)
    except DomainError as exc:
        _fail(exc)


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Long-time asymptotics toolkit for focusing NLS with step-like oscillating data."""


# ---------------------------------------------------------------- classify

@main.command()
@param_options
def classify(**kw):
    """Case and scenario of the parameters."""
    cfg = _guarded_config(kw)

    def go():
        from .scenarios import classify as _classify
        c = _classify(cfg.params)
        return json.loads(sio.classification_json(c))
    _run(go)


# --------------------------------------------------------------- signature

def _spec_for(source, params, xi, tol):
    from .surfaces import genus0_spec, genus1_xi0_spec
    if source == "genus0":
        # left plane-wave sector lives on the first background
        return genus0_spec(params, xi, 1 if xi < 0 else 2), {}
    if source == "genus1-xi0":
        return genus1_xi0_spec(params), {}
    if source == "traced-g2":
        from .genus2 import correct
        res = _trace(params, tol)
        xs = res.column("xi")
        if not xs.min() - 1e-12 <= xi <= xs.max() + 1e-12:
            raise DomainError(f"xi={xi} is outside the traced range [{xs.min():.6g}, {xs.max():.6g}]")
        i = int(np.argmin(np.abs(xs - xi)))
        from .genus2 import ParamStateG2
        s = res.samples[i]
        state, r, _ = correct(ParamStateG2(params, xi, s.alpha1, s.alpha2), tol=tol)
        return state.gprime_spec(), {"residual": r, "termination": res.termination}
    if source == "solved-g3":
        sol = solve_genus3_at(params, xi, tol)
        if sol is None:
            return genus1_xi0_spec(params), {"note": "xi = 0 reduces to genus 1"}
        return sol.state.gprime_spec(), {"residual": sol.residual}
    raise DomainError(f"unknown source {source!r}")


@functools.lru_cache(maxsize=4)
def _trace(params, tol):
    # one trace serves every xi of a sweep
    from .trace import trace_genus2
    return trace_genus2(params, tol=tol)


def solve_genus3_at(params, xi, tol=1e-10, step=0.05):
    """Genus-3 solution at ``xi`` continued from a split seed near the origin."""
    from .genus3 import continue_genus3, split_seed
    if xi == 0:
        return None
    sgn = math.copysign(1.0, xi)
    first = sgn * min(abs(xi), step)
    n = max(1, int(math.ceil(abs(xi - first) / step)))
    xis = [first] + list(np.linspace(first, xi, n + 1)[1:]) if abs(xi) > abs(first) else [first]
    return continue_genus3(params, xis, split_seed(params, first), tol=tol)[-1]


@main.command()
@param_options
@click.option("--xi", type=float, default=None)
@click.option("--sweep", default=None, help="xi=a:b:n grid instead of --xi.")
@click.option("--source", type=click.Choice(["genus0", "traced-g2", "solved-g3", "genus1-xi0"]),
              default="genus0", show_default=True)
@click.option("--nx", type=int, default=400, show_default=True)
@click.option("--ny", type=int, default=200, show_default=True)
@click.option("--tol", type=float, default=1e-10, show_default=True)
def signature(**kw):
    """Zero level set of Im g and the sign chart around it."""
    cfg = _guarded_config(kw, grid=(kw["nx"], kw["ny"]), tol=kw["tol"])

    def go():
        from .signature import signature_table
        o = cfg.options
        params, meta = cfg.working_params()
        if o["sweep"]:
            xis = parse_sweep(o["sweep"])
        elif o["xi"] is not None:
            xis = [o["xi"]]
        else:
            raise DomainError("give --xi or --sweep")
        written, runs = [], []
        for xi in xis:
            spec, info = _spec_for(o["source"], params, float(xi), cfg.tol)
            tab = signature_table(spec, resolution=cfg.grid, threads=cfg.threads,
                                  marks={"hitsE1": params.E1, "hitsE2": params.E2})
            name = f"signature_{o['source']}_xi{float(xi):+.6f}"
            _write(cfg, name, "csv", sio.signature_csv(tab), written)
            _write(cfg, name, "svg", sio.signature_svg(tab, spec.surface.cuts), written)
            runs.append({"xi": float(xi), "crossings": tab.crossings, "events": tab.events,
                         "level_residual": tab.level_residual, "branches": len(tab.polylines),
                         **info})
        doc = {"command": "signature", "source": o["source"], "runs": runs, "files": written, **meta}
        _write(cfg, "signature", "json", sio.dumps(doc), written)
        return doc
    _run(go)


# ------------------------------------------------------------ trace-genus2

@main.command("trace-genus2")
@param_options
@click.option("--delta", type=float, default=1e-3, show_default=True)
@click.option("--h", "h_init", type=float, default=0.02, show_default=True)
@click.option("--xi-min", type=float, default=-1.0, show_default=True)
@click.option("--tol", type=float, default=1e-10, show_default=True)
def trace_genus2_cmd(**kw):
    """Continue the genus-2 branch downward from xi_E1."""
    cfg = _guarded_config(kw, tol=kw["tol"])

    def go():
        from .trace import trace_genus2
        o = cfg.options
        if not (o["delta"] > 0 and o["h_init"] > 0):
            raise DomainError("--delta and --h must be positive")
        params, meta = cfg.working_params()
        res = trace_genus2(params, delta_start=o["delta"], h_init=o["h_init"], xi_min=o["xi_min"], tol=cfg.tol)
        written = []
        _write(cfg, "trace_genus2", "csv", sio.trace_csv(res), written)
        _write(cfg, "trace_genus2", "json", sio.trace_json(res, meta), written)
        return {"command": "trace-genus2", "termination": res.termination, "samples": len(res.samples),
                "max_residual": max(s.residual for s in res.samples), "files": written, **meta}
    _run(go)


# ------------------------------------------------------------ solve-genus3

@main.command("solve-genus3")
@param_options
@click.option("--xi", type=float, required=True)
@click.option("--tol", type=float, default=1e-10, show_default=True)
def solve_genus3_cmd(**kw):
    """Genus-3 parameters (mu, alpha, beta) at xi."""
    cfg = _guarded_config(kw, tol=kw["tol"])

    def go():
        from .genus3 import CYCLE_BASIS, degenerate_seed, residuals
        params, meta = cfg.working_params()
        xi = cfg.options["xi"]
        sol = solve_genus3_at(params, xi, cfg.tol)
        st = degenerate_seed(params) if sol is None else sol.state
        res = residuals(st)
        doc = {"command": "solve-genus3", "xi": xi, "mu": st.mu, "alpha": st.alpha, "beta": st.beta,
               "residuals": res, "residual": float(np.max(np.abs(res))), "cycle_basis": list(CYCLE_BASIS),
               "degenerate": sol is None, **meta}
        written = []
        _write(cfg, "solve_genus3", "json", sio.dumps(doc), written)
        doc["files"] = written
        return doc
    _run(go)


# ----------------------------------------------------------------- sectors

@main.command()
@param_options
def sectors(**kw):
    """Sector diagram in xi = x/t with genus labels."""
    cfg = _guarded_config(kw)

    def go():
        from .scenarios import sector_diagram
        params, meta = cfg.working_params()
        d = sector_diagram(params, threads=cfg.threads)
        written = []
        _write(cfg, "sectors", "json", sio.sectors_json(d, meta), written)
        _write(cfg, "sectors", "svg", sio.sectors_svg(d), written)
        doc = d.as_dict()
        doc.update(meta)
        doc["files"] = written
        return doc
    _run(go)


# -------------------------------------------------------------- scattering

def scattering_rows(params, ks):
    """(k, a, b, r, |det S - 1|) on real k; points on a cut use the + side."""
    rows = []
    for k in ks:
        k = float(k)
        try:
            a, b = step_scattering(params, complex(k))
            S = scattering_matrix(params, complex(k))
            det = abs(np.linalg.det(S) - 1)
        except OnCutWithoutSide:
            a, b = step_scattering(params, complex(k), side=+1)
            det = math.nan
        a, b = complex(a), complex(b)
        r = np.conj(b) / a if abs(a) > 0 else complex(math.nan, math.nan)
        rows.append((k, a, b, complex(r), det))
    return rows


@main.command()
@param_options
@click.option("--k", "krange", default="-5:5:201", show_default=True, help="a:b:n grid on the real axis.")
def scattering(**kw):
    """Spectral functions a, b and the reflection coefficient on the real axis."""
    cfg = _guarded_config(kw)

    def go():
        params, meta = cfg.working_params()
        try:
            a, b, n = cfg.options["krange"].split(":")
            ks = np.linspace(float(a), float(b), int(n))
        except ValueError:
            raise DomainError("malformed --k; expected a:b:n") from None
        rows = scattering_rows(params, ks)
        written = []
        _write(cfg, "scattering", "csv", sio.scattering_csv(rows), written)
        det = [d for *_, d in rows if not math.isnan(d)]
        doc = {"command": "scattering", "points": len(rows), "max_detS_residual": max(det) if det else None,
               "files": written, **meta}
        _write(cfg, "scattering", "json", sio.dumps(doc), written)
        return doc
    _run(go)


# --------------------------------------------------------------- slowdecay

@main.command()
@param_options
@click.option("--xi", type=float, default=None)
@click.option("--sweep", default=None, help="xi=a:b:n grid instead of --xi.")
def slowdecay(**kw):
    """Coefficients of the slowly decaying oscillation."""
    cfg = _guarded_config(kw)

    def go():
        from .slowdecay import slow_decay_coeffs
        params, meta = cfg.working_params()
        o = cfg.options
        if o["sweep"]:
            xis = parse_sweep(o["sweep"])
        elif o["xi"] is not None:
            xis = [o["xi"]]
        else:
            raise DomainError("give --xi or --sweep")
        items = [json.loads(sio.slowdecay_json(slow_decay_coeffs(params, float(x)), params)) for x in xis]
        for it in items:
            it.pop("schema_version")
        doc = items[0] if len(items) == 1 else {"command": "slowdecay", "runs": items}
        doc.update(meta)
        written = []
        _write(cfg, "slowdecay", "json", sio.dumps(doc), written)
        doc["files"] = written
        return doc
    _run(go)


if __name__ == "__main__":
    main()
