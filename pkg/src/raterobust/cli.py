"""Command-line front end.

Every subcommand builds a :class:`Report` (a little metadata plus a list of
rows) and renders it as an aligned table, CSV or JSON.  Numbers are rounded
to 12 significant digits when the report is built, so the JSON written to
disk parses back to exactly the in-memory report.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import cert, quad, sim, tradeoff
from .errors import AnalysisError, InstabilityError, NumericalError, ValidationError
from .linsys import AlgorithmSpec, Method, QuadraticSpectrum, robustness_h2

SCHEMA_VERSION = 1
EXIT_OK, EXIT_VALIDATION, EXIT_UNSTABLE, EXIT_NUMERICAL = 0, 2, 3, 4

DEFAULTS: dict[str, Any] = {
    "method": "gd",
    "d": None,
    "beta": 0.0,
    "format": "table",
    "out": None,
    "seed": 0,
    "sigma": 1.0,
    "replicas": 100,
    "kmax": 2000,
    "burnin": None,
    "grid": None,
    "objective": "quadratic",
    "delta": 0.1,
    "samples": 2000,
    "kappa": 1e3,
    "x0": None,
    "tail_fraction": 0.5,
    "trajectory": None,
    "panels": None,
}


def _num(x) -> float | None:
    """Round to 12 significant digits; non-finite values become ``None``."""
    x = float(x)
    if not math.isfinite(x):
        return None
    return float(f"{x:.12g}")


def _clean(value):
    if isinstance(value, (bool, str)) or value is None:
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return _num(value)
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    return str(value)


@dataclass
class Report:
    command: str
    columns: list[str]
    rows: list[dict] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.rows = [_clean(r) for r in self.rows]
        self.meta = _clean(self.meta)

    def to_dict(self) -> dict:
        return {"command": self.command, "schema_version": SCHEMA_VERSION,
                "meta": self.meta, "columns": self.columns, "rows": self.rows}

    @classmethod
    def from_dict(cls, payload: dict) -> "Report":
        return cls(payload["command"], payload["columns"], payload["rows"], payload["meta"])


# --------------------------------------------------------------------------- rendering

def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def render_csv(report: Report) -> str:
    out = io.StringIO()
    out.write(f"# schema-version: {SCHEMA_VERSION}\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(report.columns)
    for row in report.rows:
        writer.writerow([_cell(row.get(c)) for c in report.columns])
    return out.getvalue()


def render_json(report: Report) -> str:
    return json.dumps(report.to_dict(), indent=2, allow_nan=False) + "\n"


def render_table(report: Report) -> str:
    lines = [f"{k}: {_cell(v) if not isinstance(v, (list, dict)) else json.dumps(v)}"
             for k, v in report.meta.items()]
    if report.rows:
        cells = [[_cell(r.get(c)) if r.get(c) is not None else "-" for c in report.columns]
                 for r in report.rows]
        widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(report.columns)]
        if lines:
            lines.append("")
        lines.append("  ".join(c.rjust(w) for c, w in zip(report.columns, widths)))
        lines.extend("  ".join(v.rjust(w) for v, w in zip(row, widths)) for row in cells)
    return "\n".join(lines) + "\n"


RENDERERS = {"table": render_table, "csv": render_csv, "json": render_json}


# --------------------------------------------------------------------------- parsing helpers

def parse_grid(text: str) -> list[float]:
    """``a:b:n`` (n points from a to b), ``log:a:b:n`` (log-spaced) or a comma list."""
    text = str(text).strip()
    try:
        if text.startswith("log:"):
            a, b, n = text[4:].split(":")
            if float(a) <= 0 or float(b) <= 0:
                raise ValidationError("log grid endpoints must be positive", code="BAD_GRID")
            values = np.logspace(math.log10(float(a)), math.log10(float(b)), int(n))
        elif ":" in text:
            a, b, n = text.split(":")
            values = np.linspace(float(a), float(b), int(n))
        else:
            values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ValidationError(f"cannot parse grid {text!r}", code="BAD_GRID") from exc
    values = [float(v) for v in values]
    if not values:
        raise ValidationError(f"grid {text!r} is empty", code="EMPTY_SWEEP")
    if not all(math.isfinite(v) for v in values):
        raise ValidationError(f"grid {text!r} has non-finite entries", code="BAD_GRID")
    return values


def parse_spectrum(text: str) -> list[float]:
    """Comma list, or ``@path`` to a file of comma or whitespace separated values."""
    text = str(text).strip()
    if text.startswith("@"):
        try:
            text = Path(text[1:]).read_text()
        except OSError as exc:
            raise ValidationError(f"cannot read spectrum file: {exc}", code="BAD_SPECTRUM") from exc
    try:
        values = [float(v) for v in text.replace(",", " ").split()]
    except ValueError as exc:
        raise ValidationError("spectrum entries must be numbers", code="BAD_SPECTRUM") from exc
    if not values:
        raise ValidationError("empty spectrum", code="BAD_SPECTRUM")
    return values


def _finite(text: str) -> float:
    try:
        value = float(text)
    except ValueError as exc:
        raise ValidationError(f"not a number: {text!r}") from exc
    if not math.isfinite(value):
        raise ValidationError(f"value must be finite, got {text!r}", code="OUT_OF_RANGE")
    return value


def _count(text: str) -> int:
    try:
        return int(text)
    except ValueError as exc:
        raise ValidationError(f"not an integer: {text!r}") from exc


def read_config(path: str) -> dict[str, str]:
    """``key=value`` per line; blank lines and ``#`` comments are ignored."""
    entries = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ValidationError(f"cannot read config file: {exc}", code="BAD_CONFIG") from exc
    for number, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"config line {number} is not key=value", code="BAD_CONFIG")
        key, value = (s.strip() for s in line.split("=", 1))
        entries[key.lstrip("-").replace("-", "_")] = value
    return entries


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message, code="USAGE")


def _common(p: argparse.ArgumentParser, *, method=True) -> None:
    if method:
        p.add_argument("--method", choices=["gd", "ag"])
    p.add_argument("--mu", type=_finite)
    p.add_argument("--L", type=_finite, dest="L")
    p.add_argument("--d", type=_count)
    p.add_argument("--format", choices=sorted(RENDERERS))
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--config", metavar="PATH", help="key=value file; flags take precedence")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="raterobust",
                     description="Rate and noise-robustness analysis of GD and Nesterov acceleration.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", help="rate, robustness and stability of one parameter point")
    _common(p)
    p.add_argument("--spectrum", type=parse_spectrum, help="comma list or @file")
    p.add_argument("--alpha", type=_finite)
    p.add_argument("--beta", type=_finite)

    p = sub.add_parser("stability", help="stability-region membership over (alpha, beta) grids")
    _common(p)
    p.add_argument("--alpha", type=parse_grid)
    p.add_argument("--beta", type=parse_grid)

    p = sub.add_parser("tradeoff", help="rate-robustness curve over a tau or eps sweep")
    _common(p)
    p.add_argument("--spectrum", type=parse_spectrum)
    p.add_argument("--tau", type=_finite)
    p.add_argument("--tau-grid", type=parse_grid)
    p.add_argument("--eps", type=_finite)
    p.add_argument("--eps-grid", type=parse_grid)
    p.add_argument("--grid", type=_count, help="AG search grid size per axis")
    p.add_argument("--panels", metavar="DIR", help="also write tau-rho, tau-J and rho-J CSV files")

    p = sub.add_parser("pareto", help="for each GD trade-off point, the best AG point at least as fast")
    _common(p, method=False)
    p.add_argument("--spectrum", type=parse_spectrum)
    p.add_argument("--tau-grid", type=parse_grid)
    p.add_argument("--grid", type=_count)

    p = sub.add_parser("certify", help="matrix-inequality certificates for smooth strongly convex functions")
    _common(p)
    p.add_argument("--alpha", type=_finite)
    p.add_argument("--beta", type=_finite, help="AG momentum; defaults to the stepsize-tied value")
    p.add_argument("--rho", type=parse_grid, help="requested rates to certify")
    p.add_argument("--eps", type=_finite)
    p.add_argument("--eps-grid", type=parse_grid)
    p.add_argument("--grid", type=_count, help="SDP search grid size per axis")

    p = sub.add_parser("simulate", help="Monte-Carlo runs under additive gradient noise")
    _common(p)
    p.add_argument("--objective", choices=["quadratic", "laplacian", "logistic"])
    p.add_argument("--spectrum", type=parse_spectrum)
    p.add_argument("--alpha", type=_finite)
    p.add_argument("--beta", type=_finite)
    p.add_argument("--sigma", type=_finite)
    p.add_argument("--replicas", type=_count)
    p.add_argument("--kmax", type=_count)
    p.add_argument("--burnin", type=_count)
    p.add_argument("--seed", type=_count)
    p.add_argument("--delta", type=_finite, help="regularization of the Laplacian objective")
    p.add_argument("--samples", type=_count, help="data points of the logistic objective")
    p.add_argument("--kappa", type=_finite, help="condition number of the logistic objective")
    p.add_argument("--x0", type=_finite, help="constant initial point for the trajectory run")
    p.add_argument("--tail-fraction", type=_finite)
    p.add_argument("--trajectory", metavar="PATH", help="write per-step CSV")
    return parser


def parse_args(argv: Sequence[str] | None = None) -> argparse.Namespace:
    """Parse flags; unset options fall back to the config file, then to built-in defaults."""
    parser = build_parser()
    args = parser.parse_args(argv)
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    actions = {a.dest: a for a in subparser._actions}
    if args.config:
        for key, text in read_config(args.config).items():
            if key not in actions or key in ("config", "help"):
                raise ValidationError(f"unknown config key {key!r}", code="BAD_CONFIG")
            if getattr(args, key) is None:
                action = actions[key]
                value = action.type(text) if action.type else text
                if action.choices and value not in action.choices:
                    raise ValidationError(f"invalid value {text!r} for {key}", code="BAD_CONFIG")
                setattr(args, key, value)
    for key, value in DEFAULTS.items():
        if args.command == "certify" and key == "beta":
            continue
        if key in actions and getattr(args, key) is None:
            setattr(args, key, value)
    return args


# --------------------------------------------------------------------------- problem setup

def _curvature(args) -> tuple[float, float]:
    if args.mu is None or args.L is None:
        raise ValidationError("--mu and --L are required", code="MISSING")
    if not (0.0 < args.mu <= args.L):
        raise ValidationError(f"need 0 < mu <= L, got mu={args.mu}, L={args.L}", code="OUT_OF_RANGE")
    return args.mu, args.L


def resolve_spectrum(args) -> QuadraticSpectrum:
    """Explicit eigenvalues, or the two-point worst case built from ``mu``, ``L`` and ``d``."""
    if getattr(args, "spectrum", None) is not None:
        spectrum = QuadraticSpectrum(tuple(args.spectrum))
        if args.d is not None and args.d != spectrum.d:
            raise ValidationError("--d disagrees with the spectrum length", code="CONFLICT")
        if args.mu is not None and not math.isclose(spectrum.mu, args.mu, rel_tol=1e-12):
            raise ValidationError("--mu must equal the smallest eigenvalue", code="CONFLICT")
        if args.L is not None and not math.isclose(spectrum.L, args.L, rel_tol=1e-12):
            raise ValidationError("--L must equal the largest eigenvalue", code="CONFLICT")
        return spectrum
    mu, L = _curvature(args)
    d = 2 if args.d is None else args.d
    if d < 1:
        raise ValidationError("--d must be positive", code="OUT_OF_RANGE")
    if mu == L:
        return QuadraticSpectrum((mu,) * d)
    return QuadraticSpectrum.endpoints(mu, L, d)


def _spec(args) -> AlgorithmSpec:
    if args.alpha is None:
        raise ValidationError("--alpha is required", code="MISSING")
    if args.method == "gd":
        if args.beta not in (None, 0.0):
            raise ValidationError("gradient descent takes no --beta", code="CONFLICT")
        return AlgorithmSpec.gd(args.alpha)
    return AlgorithmSpec.ag(args.alpha, args.beta)


def _require_stable(spec: AlgorithmSpec, mu: float, L: float) -> quad.StabilityVerdict:
    if spec.method is Method.GD:
        rho = quad.gd_rate(spec.alpha, mu, L)
        inside = rho < 1.0
        verdict = quad.StabilityVerdict(inside, quad.Region.S1 if inside else quad.Region.OUTSIDE,
                                        1.0 - rho)
    else:
        verdict = quad.in_stability_region(spec.alpha, spec.beta, mu, L)
    if not verdict.inside:
        raise InstabilityError(f"({spec.alpha}, {spec.beta}) is outside the stability region",
                               code="NOT_STABLE", verdict=verdict.region_label.value,
                               margin=verdict.margin)
    return verdict


# --------------------------------------------------------------------------- commands

def cmd_analyze(args) -> Report:
    spectrum = resolve_spectrum(args)
    mu, L = spectrum.mu, spectrum.L
    spec = _spec(args)
    verdict = _require_stable(spec, mu, L)
    if spec.method is Method.GD:
        point = quad.gd_point(spec.alpha, spectrum)
        lower = quad.gd_lower_bound(spec.alpha, spectrum)
    else:
        point = quad.ag_point(spec.alpha, spec.beta, spectrum)
        lower = None
    h2 = robustness_h2(spec, spectrum, "J")
    row = {"method": spec.method.value, "alpha": spec.alpha, "beta": spec.beta,
           "rho": point.rho, "J": point.J, "Jprime": point.Jprime,
           "verdict": verdict.region_label.value, "margin": verdict.margin,
           "lower_bound": lower, "h2_residual": abs(point.J - h2) / max(abs(h2), 1e-300)}
    return Report("analyze", list(row), [row], {"mu": mu, "L": L, "d": spectrum.d})


def cmd_stability(args) -> Report:
    mu, L = _curvature(args)
    if args.alpha is None:
        raise ValidationError("--alpha is required", code="MISSING")
    betas = [0.0] if args.method == "gd" else (args.beta if isinstance(args.beta, list) else [args.beta])
    rows = []
    for a in args.alpha:
        for b in betas:
            if a < 0.0 or b < 0.0:
                raise ValidationError("need alpha >= 0 and beta >= 0", code="OUT_OF_RANGE")
            if a == 0.0:
                rho, inside, label, margin = 1.0, False, "OUTSIDE", 0.0
            elif args.method == "gd":
                rho = quad.gd_rate(a, mu, L)
                inside, label, margin = rho < 1.0, ("STABLE" if rho < 1.0 else "OUTSIDE"), 1.0 - rho
            else:
                v = quad.in_stability_region(a, b, mu, L)
                inside, label, margin = v.inside, v.region_label.value, v.margin
                rho = quad.ag_rate(a, b, mu, L)
            rows.append({"alpha": a, "beta": b, "inside": inside, "region": label,
                         "margin": margin, "rho": rho})
    return Report("stability", ["alpha", "beta", "inside", "region", "margin", "rho"], rows,
                  {"method": args.method, "mu": mu, "L": L})


def _sweep_values(args) -> tuple[tradeoff.Mode, list[float]]:
    tau = [args.tau] if args.tau is not None else args.tau_grid
    eps = [args.eps] if getattr(args, "eps", None) is not None else getattr(args, "eps_grid", None)
    if args.tau is not None and args.tau_grid is not None:
        raise ValidationError("give --tau or --tau-grid, not both", code="CONFLICT")
    if tau is not None and eps is not None:
        raise ValidationError("a sweep is over tau or over eps, not both", code="CONFLICT")
    if eps is not None:
        return tradeoff.Mode.EPS_CONSTRAINED, list(eps)
    return tradeoff.Mode.TAU_PENALIZED, list(tau) if tau is not None else list(tradeoff.default_tau_grid())


def _grid(args, default) -> tuple[int, int]:
    return (args.grid, args.grid) if args.grid is not None else tuple(default)


def _write_panels(directory: str, mode: tradeoff.Mode, values, points) -> list[str]:
    name = mode.value
    target = Path(directory)
    target.mkdir(parents=True, exist_ok=True)
    panels = {f"{name}_rho.csv": ([name, "rho"], [(v, p.rho) for v, p in zip(values, points)]),
              f"{name}_J.csv": ([name, "J"], [(v, p.J) for v, p in zip(values, points)]),
              "rho_J.csv": (["rho", "J"], [(p.rho, p.J) for p in points])}
    for filename, (header, rows) in panels.items():
        report = Report("panel", header, [dict(zip(header, r)) for r in rows])
        (target / filename).write_text(render_csv(report))
    return sorted(panels)


def cmd_tradeoff(args) -> Report:
    mode, values = _sweep_values(args)
    if args.spectrum is not None or args.mu is None or args.L is None or args.d is None:
        spectrum, kwargs = resolve_spectrum(args), {}
        mu, L = spectrum.mu, spectrum.L
    else:
        mu, L = _curvature(args)
        spectrum, kwargs = None, {"mu": mu, "L": L, "d": args.d}
    points, provenance = tradeoff.sweep(args.method, mode, values, spectrum,
                                        grid=_grid(args, tradeoff.DEFAULT_GRID), **kwargs)
    by_id = {id(p): v for p, v in zip(points, values)}
    kept = tradeoff.pareto_filter(points)
    rows = [{"rho": p.rho, "J": p.J, "alpha": p.params.alpha, "beta": p.params.beta,
             "param": by_id[id(p)]} for p in kept]
    meta = {"method": args.method, "mode": mode.value, "provenance": provenance.value,
            "mu": mu, "L": L, "points": len(points), "non_dominated": len(kept)}
    if args.panels:
        meta["panels"] = _write_panels(args.panels, mode, values, points)
    return Report("tradeoff", ["rho", "J", "alpha", "beta", "param"], rows, meta)


def cmd_pareto(args) -> Report:
    spectrum = resolve_spectrum(args)
    values = args.tau_grid if args.tau_grid is not None else list(tradeoff.default_tau_grid(20))
    gd_points = tradeoff.pareto_filter(tradeoff.sweep("gd", "tau", values, spectrum)[0])
    entries = tradeoff.dominance_report(gd_points, spectrum, _grid(args, tradeoff.DEFAULT_GRID))
    rows = [{"rho_gd": e.rho_gd, "J_gd": e.J_gd, "rho_ag": e.rho_ag, "J_ag": e.J_ag,
             "alpha_ag": e.alpha_ag, "beta_ag": e.beta_ag, "dominated": e.dominated} for e in entries]
    return Report("pareto", list(rows[0]) if rows else ["rho_gd"], rows,
                  {"mu": spectrum.mu, "L": spectrum.L, "d": spectrum.d,
                   "all_dominated": all(e.dominated for e in entries)})


def _certify_gd(args, mu, L, d) -> Report:
    alpha = args.alpha if args.alpha is not None else 2.0 / (mu + L)
    if not (0.0 < alpha < 2.0 / L):
        raise InstabilityError(f"stepsize {alpha} outside (0, 2/L)", code="NOT_STABLE")
    meta = {"method": "gd", "mu": mu, "L": L, "d": d, "alpha": alpha,
            "min_rho": cert.gd_min_rho(alpha, mu, L), "bound_R": cert.gd_bound_R(alpha, mu, L, d)}
    rows = []
    for rho in args.rho or []:
        if not (0.0 <= rho <= 1.0):
            raise ValidationError(f"requested rate {rho} outside [0, 1]", code="OUT_OF_RANGE")
        c = cert.gd_certificate(alpha, mu, L, d, rho)
        rows.append({"rho": rho, "status": "FEASIBLE" if c.feasible else "INFEASIBLE",
                     "bound": c.bound_R if c.feasible else None, "alpha": alpha, "beta": 0.0,
                     "slack_min_eig": c.slack_min_eig})
    eps = _eps_values(args)
    if eps:
        for p, e in zip(cert.gd_eps_curve(eps, mu, L, d).points, sorted(eps)):
            rows.append({"eps": e, "rho": p.rho, "status": "FEASIBLE", "bound": p.J,
                         "alpha": p.params.alpha, "beta": 0.0})
    return Report("certify", ["eps", "rho", "status", "bound", "alpha", "beta", "slack_min_eig"], rows, meta)


def _certify_ag(args, mu, L, d) -> Report:
    meta = {"method": "ag", "mu": mu, "L": L, "d": d,
            "fastest_certified_rate": tradeoff.ag_fastest_certified_rate(mu, L),
            "eps_limit": tradeoff.ag_eps_limit(mu, L)}
    rows = []
    if args.alpha is not None:
        beta = cert.momentum_for_stepsize(args.alpha, mu) if args.beta is None else args.beta
        meta["alpha"], meta["beta"] = args.alpha, beta
        if args.alpha <= 1.0 / L and math.isclose(beta, cert.momentum_for_stepsize(args.alpha, mu),
                                                  rel_tol=1e-12):
            meta["witness_rho"], meta["witness_bound"] = cert.ag_explicit_bound(args.alpha, mu, L, d)
        for rho in args.rho or []:
            if not (0.0 <= rho < 1.0):
                raise ValidationError(f"requested rate {rho} outside [0, 1)", code="OUT_OF_RANGE")
            value, result = cert.ag_sdp_bound(args.alpha, beta, mu, L, d, rho)
            rows.append({"rho": rho, "status": "FEASIBLE" if result.optimal else "INFEASIBLE",
                         "sdp": value, "alpha": args.alpha, "beta": beta})
    eps = _eps_values(args)
    if eps:
        grid = _grid(args, (30, 30))
        for e in eps:
            point = cert.ag_sdp_point(e, mu, L, d, grid)
            a_eps, _ = tradeoff.ag_alpha_for_eps(e, mu, L)
            a_gd = _gd_alpha_at_rate(point.rho, mu, L)
            rows.append({"eps": e, "rho": point.rho,
                         "status": "FEASIBLE" if math.isfinite(point.value) else "INFEASIBLE",
                         "sdp": point.value, "explicit": cert.ag_explicit_bound(a_eps, mu, L, d)[1],
                         "sqrt_alpha_bound": math.sqrt(a_eps) * d / math.sqrt(mu),
                         "gd": cert.gd_bound_R(a_gd, mu, L, d) if a_gd else None,
                         "alpha": point.alpha, "beta": point.beta})
    return Report("certify", ["eps", "rho", "status", "sdp", "explicit", "sqrt_alpha_bound", "gd",
                              "alpha", "beta"], rows, meta)


def _gd_alpha_at_rate(rho: float, mu: float, L: float) -> float | None:
    """GD stepsize whose certified rate equals ``rho``; ``None`` if GD cannot reach it."""
    eps = rho / tradeoff.gd_fastest_rate(mu, L) - 1.0
    if eps < 0.0 or eps > tradeoff.gd_eps_limit(mu, L):
        return None
    return tradeoff.gd_alpha_for_eps(eps, mu, L)


def _eps_values(args) -> list[float]:
    if args.eps is not None and args.eps_grid is not None:
        raise ValidationError("give --eps or --eps-grid, not both", code="CONFLICT")
    return [args.eps] if args.eps is not None else list(args.eps_grid or [])


def cmd_certify(args) -> Report:
    mu, L = _curvature(args)
    d = 1 if args.d is None else args.d
    if d < 1:
        raise ValidationError("--d must be positive", code="OUT_OF_RANGE")
    return _certify_gd(args, mu, L, d) if args.method == "gd" else _certify_ag(args, mu, L, d)


def _objective(args) -> sim.Objective:
    if args.objective == "quadratic":
        return sim.QuadraticObjective.from_spectrum(resolve_spectrum(args))
    if args.objective == "laplacian":
        return sim.make_laplacian_objective(100 if args.d is None else args.d, args.delta, args.seed)
    return sim.make_logistic_objective(args.samples, 100 if args.d is None else args.d,
                                       kappa=args.kappa, seed=args.seed)


def cmd_simulate(args) -> Report:
    objective = _objective(args)
    spec = _spec(args)
    if objective.is_quadratic:
        _require_stable(spec, objective.mu, objective.L)
    if not (0.0 < args.tail_fraction <= 1.0):
        raise ValidationError("--tail-fraction must lie in (0, 1]", code="OUT_OF_RANGE")
    noise = sim.NoiseModel(args.sigma)
    config = sim.EstimatorConfig(args.replicas, args.kmax, args.burnin, args.seed)
    meta = {"objective": args.objective, "method": spec.method.value, "alpha": spec.alpha,
            "beta": spec.beta, "sigma": args.sigma, "replicas": args.replicas, "kmax": args.kmax,
            "seed": args.seed, "mu": objective.mu, "L": objective.L, "d": objective.d}
    rows = []
    if args.sigma > 0.0:
        J, se = sim.estimate_J(spec, objective, noise, config)
        Jp, se_p = sim.estimate_Jprime(spec, objective, noise, config)
        exact = exact_p = None
        if objective.is_quadratic:
            spectrum = objective.spectrum
            exact = quad.gd_robustness(spec.alpha, spectrum) if spec.method is Method.GD else \
                quad.ag_robustness(spec.alpha, spec.beta, spectrum)
            exact_p = quad.gd_robustness_iterates(spec.alpha, spectrum) if spec.method is Method.GD else \
                quad.ag_robustness_iterates(spec.alpha, spec.beta, spectrum)
        rows += [{"measure": "J", "estimate": J, "stderr": se, "exact": exact},
                 {"measure": "Jprime", "estimate": Jp, "stderr": se_p, "exact": exact_p}]
    x0 = None if args.x0 is None else np.full(objective.d, args.x0)
    traj = sim.run_noisy(spec, objective, x0, noise, args.kmax, args.seed, args.replicas)
    meta["tail_average"] = sim.tail_average(traj, args.tail_fraction)
    meta["final_subopt"] = float(np.mean(traj.subopt[:, -1]))
    if args.trajectory:
        with open(args.trajectory, "w", newline="") as handle:
            traj.to_csv(handle, SCHEMA_VERSION)
    return Report("simulate", ["measure", "estimate", "stderr", "exact"], rows, meta)


COMMANDS = {"analyze": cmd_analyze, "stability": cmd_stability, "tradeoff": cmd_tradeoff,
            "pareto": cmd_pareto, "certify": cmd_certify, "simulate": cmd_simulate}


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, ValidationError):
        return EXIT_VALIDATION
    if isinstance(exc, InstabilityError):
        return EXIT_UNSTABLE
    return EXIT_NUMERICAL


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = parse_args(argv)
        report = COMMANDS[args.command](args)
        text = RENDERERS[args.format](report)
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
        return EXIT_OK
    except (AnalysisError, np.linalg.LinAlgError, ArithmeticError) as exc:
        payload = exc.to_dict() if isinstance(exc, AnalysisError) else \
            NumericalError(str(exc), code="NUMERICAL_FAILURE").to_dict()
        sys.stderr.write(json.dumps(_clean(payload), allow_nan=False) + "\n")
        return _exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
