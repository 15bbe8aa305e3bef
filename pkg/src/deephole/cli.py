"""Command-line front end.

Usage::

    deephole shells --r-max 1.6 --format csv
    deephole gradients --kind squared --k-range 50
    deephole hessian --kind linear --k-range 10
    deephole spectrum --kind linear --k-range 20
    deephole certify --shell 2 --kind linear --samples 1000 --scale 0.01 --seed 7
    deephole probe --shell 10 --kind convex --phi exp --direction 1,1
    deephole sweep --shell 2 --kind squared --nx 101 --ny 101 --format csv -o grid.csv

Exit codes: 0 every check passed, 1 a check failed, 2 invalid input.
``DEEPHOLE_SEED`` supplies the seed when ``--seed`` is not given.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from . import __version__
from ._backend import BACKEND
from .functional import PHI_CATALOG, DistanceKind, eig_sym2, hessian_at_origin, parse_kind
from .lattice import SQUARE, enumerate_shells, shell
from .verify import (
    HESSIAN_FD,
    MAX_SCALE,
    certify_inequality,
    chart_function,
    check_critical_point,
    fd_hessian,
    loglog_slope,
    min_eig_over_integers,
    quadratic_scaling_probe,
    sample_perturbations,
    shell_excess,
)

EXIT_OK, EXIT_FAILED, EXIT_INVALID = 0, 1, 2
COMMANDS = ("shells", "gradients", "hessian", "spectrum", "certify", "probe", "sweep")
SEED_ENV = "DEEPHOLE_SEED"

GRADIENT_TOL = 1e-8
HESSIAN_TOL = 1e-4
SLOPE_BAND = (1.95, 2.05)
# |x| <= 1/2 and this height band cover the standard fundamental domain near Z^2
SWEEP_X_BAND = (-0.5, 0.5)
SWEEP_Y_BAND = (0.87, 1.5)


class ConfigError(ValueError):
    """Invalid command-line configuration (exit code 2)."""


@dataclass
class RunConfig:
    command: str
    r_max: float = 1.6
    kind: str = "squared"
    k_range: int | None = None
    samples: int = 1000
    scale: float = 0.01
    seed: int = 0
    phi: str | None = None
    output_format: str = "text"
    output_path: str | None = None
    shell: int = 2
    workers: int = 1
    direction: tuple[float, float] = (1.0, 0.0)
    steps: int = 8
    nx: int = 101
    ny: int = 101
    x_min: float = -0.5
    x_max: float = 0.5
    y_min: float = 0.875
    y_max: float = 1.5
    extra: dict[str, Any] = field(default_factory=dict)

    def distance_kind(self) -> DistanceKind:
        try:
            return parse_kind(self.kind, self.phi)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.output_format not in ("csv", "json", "text"):
            raise ConfigError(f"unknown output format {self.output_format!r}")
        if self.phi is not None and self.phi not in PHI_CATALOG:
            raise ConfigError(f"unknown phi {self.phi!r}; choose from {', '.join(PHI_CATALOG)}")
        if self.command == "shells":
            if not math.isfinite(self.r_max) or self.r_max < 1 / math.sqrt(2):
                raise ConfigError("--r-max must be finite and at least 1/sqrt(2)")
        if self.command in ("gradients", "hessian", "spectrum"):
            floor = 2 if self.command == "spectrum" else 1
            if self.k_range is not None and self.k_range < floor:
                raise ConfigError(f"--k-range must be at least {floor}")
        if self.command in ("hessian", "spectrum") and self.distance_kind().tag == "convex":
            raise ConfigError(f"{self.command} supports only the squared and linear kinds")
        self.distance_kind()
        if self.command == "certify":
            if self.samples < 1:
                raise ConfigError("--samples must be at least 1")
            if not 0.0 < self.scale <= MAX_SCALE:
                raise ConfigError(f"--scale must lie in (0, {MAX_SCALE}]")
        if self.command in ("certify", "sweep") and self.workers < 1:
            raise ConfigError("--workers must be at least 1")
        if self.command in ("certify", "probe", "sweep"):
            try:
                shell(self.shell)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        if self.command == "probe":
            if self.steps < 4:
                raise ConfigError("--steps must be at least 4")
            if math.hypot(*self.direction) == 0.0:
                raise ConfigError("--direction must be nonzero")
        if self.command == "sweep":
            if self.nx < 2 or self.ny < 2:
                raise ConfigError("degenerate grid: need at least 2 points per axis")
            if not (self.x_min < self.x_max and self.y_min < self.y_max):
                raise ConfigError("degenerate grid: empty coordinate range")
            if self.x_min < SWEEP_X_BAND[0] or self.x_max > SWEEP_X_BAND[1]:
                raise ConfigError(f"sweep x range must lie within {SWEEP_X_BAND}")
            if self.y_min < SWEEP_Y_BAND[0] or self.y_max > SWEEP_Y_BAND[1]:
                raise ConfigError(f"sweep y range must lie within {SWEEP_Y_BAND}")
        if self.output_path is not None:
            parent = os.path.dirname(os.path.abspath(self.output_path))
            if not os.path.isdir(parent) or not os.access(parent, os.W_OK):
                raise ConfigError(f"cannot write to {self.output_path}")


@dataclass
class Outcome:
    passed: bool
    message: str
    results: dict[str, Any]
    rows: list[dict[str, Any]]
    lines: list[str]


# ---------------------------------------------------------------------------
# commands


def _cmd_shells(cfg: RunConfig) -> Outcome:
    shells = enumerate_shells(cfg.r_max)
    rows = [
        {"four_r_squared": s.four_r_squared, "r": s.radius, "cardinality": s.cardinality}
        for s in shells
    ]
    results = {
        "shells": [
            dict(row, indices=[list(kl) for kl in s.indices]) for row, s in zip(rows, shells)
        ]
    }
    lines = [f"4r^2={r['four_r_squared']:>4}  r={r['r']:.6f}  |A_r|={r['cardinality']}" for r in rows]
    return Outcome(True, f"{len(shells)} shells with r <= {cfg.r_max}", results, rows, lines)


def _cmd_gradients(cfg: RunConfig) -> Outcome:
    kind = cfg.distance_kind()
    k_range = cfg.k_range if cfg.k_range is not None else 50
    report = check_critical_point(kind, k_range, tolerance=GRADIENT_TOL)
    if report.ok:
        msg = f"all gradients ≤ {GRADIENT_TOL:g} at (0,1)"
    else:
        msg = f"{len(report.violations)} index pairs with gradient > {GRADIENT_TOL:g} at (0,1)"
    rows = [
        {"k": k, "l": l, "analytic_norm": a, "fd_norm": f} for k, l, a, f in report.violations
    ] or [
        {
            "kind": report.kind,
            "k_range": report.k_range,
            "checked": report.checked,
            "max_analytic_norm": report.max_analytic_norm,
            "max_fd_norm": report.max_fd_norm,
        }
    ]
    lines = [
        f"kind={report.kind} pairs={report.checked} "
        f"max|grad| analytic={report.max_analytic_norm:.3e} fd={report.max_fd_norm:.3e}"
    ]
    return Outcome(report.ok, msg, report.to_dict(), rows, lines)


def _cmd_hessian(cfg: RunConfig) -> Outcome:
    kind = cfg.distance_kind()
    k_range = cfg.k_range if cfg.k_range is not None else 10
    rows = []
    worst = 0.0
    positive = True
    for k in range(-k_range, k_range + 1):
        for l in range(-k_range, k_range + 1):
            h = hessian_at_origin(kind, (k, l))
            fd = fd_hessian(chart_function(kind, (k, l)), SQUARE, HESSIAN_FD)
            lo, hi = eig_sym2(h)
            diff = h.max_abs_diff(fd)
            worst = max(worst, diff)
            positive = positive and lo > 0.0
            rows.append(
                {
                    "k": k,
                    "l": l,
                    "h11": h.a11,
                    "h12": h.a12,
                    "h22": h.a22,
                    "det": h.det(),
                    "lambda_min": lo,
                    "lambda_max": hi,
                    "fd_max_abs_diff": diff,
                }
            )
    passed = worst <= HESSIAN_TOL and positive
    msg = (
        f"closed-form Hessians match FD within {worst:.2e} "
        f"({'≤' if worst <= HESSIAN_TOL else '>'} {HESSIAN_TOL:g}); "
        f"{'all' if positive else 'not all'} positive definite"
    )
    results = {"kind": kind.label, "k_range": k_range, "max_fd_abs_diff": worst,
               "positive_definite": positive, "rows": rows}
    return Outcome(passed, msg, results, rows, [msg])


def _cmd_spectrum(cfg: RunConfig) -> Outcome:
    kind = cfg.distance_kind()
    k_range = cfg.k_range if cfg.k_range is not None else 20
    rep = min_eig_over_integers(kind, k_range)
    d = rep.to_dict()
    row = {
        "kind": rep.kind,
        "search_range": rep.search_range,
        "min_eigenvalue": rep.min_eigenvalue,
        "argmin_pairs": " ".join(f"({k},{l})" for k, l in rep.argmin_pairs),
        "boundary_min_eigenvalue": rep.boundary_min_eigenvalue,
        "min_determinant": rep.min_determinant,
        "real_min_eigenvalue": rep.real_min_eigenvalue,
        "candidate_min_eigenvalue": rep.candidate_min_eigenvalue,
        "growth_certified": rep.growth_certified,
    }
    lines = [
        f"min eigenvalue over [-{k_range},{k_range}]^2: {rep.min_eigenvalue:.12f} at {row['argmin_pairs']}",
        f"min eigenvalue on the box boundary: {rep.boundary_min_eigenvalue:.6f}",
        f"min determinant: {rep.min_determinant:.12f} at "
        + " ".join(f"({k},{l})" for k, l in rep.det_argmin_pairs),
        f"real relaxation: {rep.real_min_eigenvalue:.6f} at "
        f"({rep.real_minimizer[0]:.6f}, {rep.real_minimizer[1]:.6f}); "
        f"floor/ceil candidates give {rep.candidate_min_eigenvalue:.12f}",
    ]
    for name, match in d["reference_matches"].items():
        lines.append(f"  {name} = {rep.reference_values[name]:.6f}: {match}")
    msg = "positive definite at every pair" if rep.growth_certified else "non-positive eigenvalue found"
    return Outcome(rep.growth_certified, msg, d, [row], lines)


def _cmd_certify(cfg: RunConfig) -> Outcome:
    kind = cfg.distance_kind()
    sh = shell(cfg.shell)
    samples = sample_perturbations(cfg.samples, cfg.scale, cfg.seed)
    rep = certify_inequality(sh, samples, kind, workers=cfg.workers)
    d = rep.to_dict()
    msg = (
        f"shell 4r^2={rep.shell_key} kind={rep.kind}: failures={rep.failures}, "
        f"ratio in [{rep.min_ratio:.4f}, {rep.max_ratio:.4f}]; "
        f"constant-1 bound {'holds' if rep.constant_one_holds else 'does not hold'} "
        f"({rep.constant_one_failures}/{rep.sample_count} below 1)"
    )
    detail = (
        f"samples={rep.sample_count} seed={cfg.seed} scale={cfg.scale:g} "
        f"d in [{rep.d_range[0]:.3e}, {rep.d_range[1]:.3e}] min lhs={rep.min_lhs:.3e}"
    )
    return Outcome(rep.passed, msg, d, [d], [detail])


def _cmd_probe(cfg: RunConfig) -> Outcome:
    kind = cfg.distance_kind()
    sh = shell(cfg.shell)
    pts = quadratic_scaling_probe(sh, cfg.direction, kind, cfg.steps)
    slope = loglog_slope(pts)
    passed = SLOPE_BAND[0] <= slope <= SLOPE_BAND[1]
    rows = [{"d": d, "lhs": v} for d, v in pts]
    msg = f"log-log slope over the last 3 points: {slope:.4f}"
    results = {"shell_key": sh.four_r_squared, "kind": kind.label,
               "direction": list(cfg.direction), "slope": slope, "points": rows}
    lines = [f"d={r['d']:.6e}  lhs={r['lhs']:.6e}" for r in rows] + [msg]
    return Outcome(passed, msg, results, rows, lines)


def _cmd_sweep(cfg: RunConfig) -> Outcome:
    kind = cfg.distance_kind()
    sh = shell(cfg.shell)
    gx = np.linspace(cfg.x_min, cfg.x_max, cfg.nx)
    gy = np.linspace(cfg.y_min, cfg.y_max, cfg.ny)
    X, Y = np.meshgrid(gx, gy, indexing="ij")
    xs, ys = X.ravel(), Y.ravel()
    lhs = shell_excess(kind, sh, xs, ys, workers=cfg.workers)
    rows = [{"x": float(x), "y": float(y), "lhs": float(v)} for x, y, v in zip(xs, ys, lhs)]
    i = int(np.argmin(lhs))
    nearest = int(np.argmin(np.hypot(xs - SQUARE.x, ys - SQUARE.y)))
    contains = math.hypot(xs[nearest] - SQUARE.x, ys[nearest] - SQUARE.y) <= 1e-9
    argmin = {"x": float(xs[i]), "y": float(ys[i]), "lhs": float(lhs[i])}
    passed = (i == nearest) if contains else True
    if contains:
        msg = f"grid minimum at ({argmin['x']:.6g}, {argmin['y']:.6g})" + (
            "" if passed else ", not at (0,1)"
        )
    else:
        msg = f"grid excludes (0,1); minimum at ({argmin['x']:.6g}, {argmin['y']:.6g})"
    results = {"shell_key": sh.four_r_squared, "kind": kind.label, "nx": cfg.nx, "ny": cfg.ny,
               "contains_square": contains, "argmin": argmin, "rows": rows}
    return Outcome(passed, msg, results, rows, [msg])


HANDLERS = {
    "shells": _cmd_shells,
    "gradients": _cmd_gradients,
    "hessian": _cmd_hessian,
    "spectrum": _cmd_spectrum,
    "certify": _cmd_certify,
    "probe": _cmd_probe,
    "sweep": _cmd_sweep,
}


# ---------------------------------------------------------------------------
# output


def _csv_value(v: Any) -> Any:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return f"{v:.17g}"
    if isinstance(v, (list, tuple)):
        return " ".join(str(_csv_value(x)) for x in v)
    return v


def render_csv(rows: list[dict[str, Any]]) -> str:
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _csv_value(v) for k, v in row.items()})
    return buf.getvalue()


def render_json(cfg: RunConfig, out: Outcome) -> str:
    config = asdict(cfg)
    config.pop("extra")
    config["direction"] = list(cfg.direction)
    doc = {
        "command": cfg.command,
        "config": config,
        "results": out.results,
        "verdict": {"passed": out.passed, "message": out.message, "backend": BACKEND},
    }
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def render_text(out: Outcome) -> str:
    status = "PASS" if out.passed else "FAIL"
    return "\n".join(out.lines + [f"{status}: {out.message}"]) + "\n"


def run(cfg: RunConfig, stdout=None) -> int:
    stdout = stdout if stdout is not None else sys.stdout
    try:
        cfg.validate()
        out = HANDLERS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"deephole: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if cfg.output_format == "csv":
        text = render_csv(out.rows)
    elif cfg.output_format == "json":
        text = render_json(cfg, out)
    else:
        text = render_text(out)
    if cfg.output_path:
        try:
            with open(cfg.output_path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"deephole: error: {exc}", file=sys.stderr)
            return EXIT_INVALID
        if cfg.output_format != "text":
            print(render_text(out), end="", file=stdout)
    else:
        stdout.write(text)
    return EXIT_OK if out.passed else EXIT_FAILED


def sweep(cfg: RunConfig, stdout=None) -> int:
    if cfg.command != "sweep":
        print("deephole: error: sweep() needs command='sweep'", file=sys.stderr)
        return EXIT_INVALID
    return run(cfg, stdout)


# ---------------------------------------------------------------------------
# argument parsing


def _direction(text: str) -> tuple[float, float]:
    try:
        dx, dy = (float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("direction must look like DX,DY") from None
    return dx, dy


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="deephole",
        description="Shell sums around the deep hole of Z^2 and checks on their growth.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", dest="output_format", choices=("csv", "json", "text"),
                        default="text", help="output format (default: text)")
    common.add_argument("-o", "--output", dest="output_path", default=None,
                        help="write output to this file instead of stdout")

    kind = argparse.ArgumentParser(add_help=False)
    kind.add_argument("--kind", default="squared",
                      help="squared, linear or convex (convex needs --phi)")
    kind.add_argument("--phi", choices=tuple(PHI_CATALOG), default=None,
                      help="convex function for --kind convex")

    shell_arg = argparse.ArgumentParser(add_help=False)
    shell_arg.add_argument("--shell", type=int, default=2,
                           help="shell key 4r^2, an integer (default: 2)")

    p = sub.add_parser("shells", parents=[common], help="list shells around the deep hole")
    p.add_argument("--r-max", type=float, default=1.6, help="largest radius to include")

    for name, default, what in (
        ("gradients", 50, "check that the gradients vanish at Z^2"),
        ("hessian", 10, "closed-form Hessians at Z^2 against finite differences"),
        ("spectrum", 20, "minimise the Hessian's smallest eigenvalue over integer pairs"),
    ):
        p = sub.add_parser(name, parents=[common, kind], help=what)
        p.add_argument("--k-range", type=int, default=default,
                       help=f"scan (k,l) in [-K,K]^2 (default: {default})")

    p = sub.add_parser("certify", parents=[common, kind, shell_arg],
                       help="Monte-Carlo certification of the quadratic growth bound")
    p.add_argument("--samples", type=int, default=1000, help="number of perturbations")
    p.add_argument("--scale", type=float, default=0.01, help=f"perturbation size, at most {MAX_SCALE}")
    p.add_argument("--seed", type=int, default=None,
                   help=f"RNG seed (precedence: flag, then ${SEED_ENV}, then 0)")
    p.add_argument("--workers", type=int, default=1, help="threads; results do not depend on it")

    p = sub.add_parser("probe", parents=[common, kind, shell_arg],
                       help="log-log slope of the shell excess along a direction")
    p.add_argument("--direction", type=_direction, default=(1.0, 0.0), help="DX,DY in the chart")
    p.add_argument("--steps", type=int, default=8, help="number of halvings (at least 4)")

    p = sub.add_parser("sweep", parents=[common, kind, shell_arg],
                       help="grid of shell excesses over the fundamental-domain band")
    p.add_argument("--nx", type=int, default=101)
    p.add_argument("--ny", type=int, default=101)
    p.add_argument("--x-min", type=float, default=-0.5)
    p.add_argument("--x-max", type=float, default=0.5)
    p.add_argument("--y-min", type=float, default=0.875)
    p.add_argument("--y-max", type=float, default=1.5)
    p.add_argument("--workers", type=int, default=1)
    return parser


def _resolve_seed(flag: int | None) -> int:
    if flag is not None:
        return flag
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"${SEED_ENV} must be an integer, got {env!r}") from None
    return 0


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    values = {k: v for k, v in vars(ns).items() if k in RunConfig.__dataclass_fields__}
    if ns.command == "certify":
        values["seed"] = _resolve_seed(ns.seed)
    else:
        values.pop("seed", None)
    return RunConfig(**values)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        cfg = config_from_args(ns)
    except ConfigError as exc:
        print(f"deephole: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
