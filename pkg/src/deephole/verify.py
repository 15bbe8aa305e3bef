"""Independent numerical checks of the shell-sum functionals.

Finite differences cross-check the closed-form derivatives, grid scans
minimise the Hessian spectrum over integer index pairs, and seeded
Monte-Carlo sampling certifies that shell excesses around the square
lattice grow at least quadratically in the lattice distance.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import minimize

from . import _backend
from .functional import (
    DistanceKind,
    SingularEvaluation,
    SymMatrix2,
    eig_sym2,
    f_kind,
    gap_lower_bound,
    grad_kind_analytic,
    hessian_at_origin,
    linear_hessian_entries,
    squared_hessian_entries,
)
from .lattice import SQUARE, IndexPair, InvalidChartPoint, LatticeParams, Shell, Vec2, lattice_distance

ChartFn = Callable[[float, float], float]

BLOCK_SIZE = 256
MAX_SCALE = 0.05


@dataclass(frozen=True)
class FdConfig:
    """Central differences with optional Richardson extrapolation.

    ``levels`` extrapolation steps are applied when ``richardson`` is set;
    each removes the next even power of the step from the error.
    """

    step: float = 1e-5
    richardson: bool = False
    levels: int = 1

    def __post_init__(self) -> None:
        if not 0.0 < self.step < 1e-2:
            raise ValueError(f"FD step must lie in (0, 1e-2), got {self.step}")
        if self.levels < 1:
            raise ValueError("levels must be at least 1")


# a wider step keeps roundoff below 1e-8; extrapolation recovers the accuracy
HESSIAN_FD = FdConfig(step=2e-3, richardson=True)
# |k|, |l| up to 50 puts f near 2e4; plain differences bottom out near 1e-6 there
CRITICAL_FD = FdConfig(step=8e-3, richardson=True, levels=2)


def chart_function(kind: DistanceKind, kl: tuple[int, int]) -> ChartFn:
    def fn(x: float, y: float) -> float:
        return f_kind(kind, LatticeParams(x, y), kl)

    return fn


def _extrapolate(estimate: Callable[[float], float], h: float, cfg: FdConfig) -> float:
    if not cfg.richardson:
        return estimate(h)
    row = [estimate(h / 2**j) for j in range(cfg.levels + 1)]
    for level in range(1, cfg.levels + 1):
        factor = 4.0**level
        row = [(factor * row[j + 1] - row[j]) / (factor - 1.0) for j in range(len(row) - 1)]
    return row[0]


def _check_margin(at: LatticeParams, margin: float) -> None:
    if at.y - margin <= 0.0:
        raise InvalidChartPoint(f"finite-difference stencil leaves the chart at y={at.y}")


def fd_gradient(fn: ChartFn, at: LatticeParams, cfg: FdConfig = FdConfig()) -> Vec2:
    _check_margin(at, cfg.step)
    x, y = at.x, at.y

    def dx(h: float) -> float:
        return (fn(x + h, y) - fn(x - h, y)) / (2.0 * h)

    def dy(h: float) -> float:
        return (fn(x, y + h) - fn(x, y - h)) / (2.0 * h)

    return Vec2(_extrapolate(dx, cfg.step, cfg), _extrapolate(dy, cfg.step, cfg))


def fd_hessian(fn: ChartFn, at: LatticeParams, cfg: FdConfig = HESSIAN_FD) -> SymMatrix2:
    _check_margin(at, 2.0 * cfg.step)
    x, y = at.x, at.y
    f0 = fn(x, y)

    def dxx(h: float) -> float:
        return (fn(x + h, y) - 2.0 * f0 + fn(x - h, y)) / (h * h)

    def dyy(h: float) -> float:
        return (fn(x, y + h) - 2.0 * f0 + fn(x, y - h)) / (h * h)

    def dxy(h: float) -> float:
        return (
            fn(x + h, y + h) - fn(x + h, y - h) - fn(x - h, y + h) + fn(x - h, y - h)
        ) / (4.0 * h * h)

    return SymMatrix2(
        _extrapolate(dxx, cfg.step, cfg),
        _extrapolate(dxy, cfg.step, cfg),
        _extrapolate(dyy, cfg.step, cfg),
    )


# ---------------------------------------------------------------------------
# critical point and spectrum


@dataclass
class CriticalPointReport:
    kind: str
    k_range: int
    tolerance: float
    checked: int
    max_analytic_norm: float
    max_fd_norm: float
    violations: list[tuple[int, int, float, float]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def to_dict(self) -> dict:
        d = asdict(self)
        d["violations"] = [list(v) for v in self.violations]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> CriticalPointReport:
        d = dict(d)
        d["violations"] = [tuple(v) for v in d["violations"]]
        return cls(**d)


def check_critical_point(
    kind: DistanceKind,
    k_range: int,
    cfg: FdConfig = CRITICAL_FD,
    tolerance: float = 1e-8,
) -> CriticalPointReport:
    """Check that both gradients vanish at Z^2 for every pair in the square box."""
    if k_range < 1:
        raise ValueError("k_range must be at least 1")
    max_a = max_fd = 0.0
    violations = []
    checked = 0
    for k in range(-k_range, k_range + 1):
        for l in range(-k_range, k_range + 1):
            ga = grad_kind_analytic(kind, SQUARE, (k, l)).norm()
            gf = fd_gradient(chart_function(kind, (k, l)), SQUARE, cfg).norm()
            max_a = max(max_a, ga)
            max_fd = max(max_fd, gf)
            checked += 1
            if not (ga <= tolerance and gf <= tolerance):
                violations.append((k, l, ga, gf))
    return CriticalPointReport(kind.label, k_range, tolerance, checked, max_a, max_fd, violations)


# Closed forms that have been quoted for these minima; compared against the scan.
REFERENCE_VALUES = {
    "squared": {
        "(7-sqrt5)/2": (7 - math.sqrt(5)) / 2,
        "4+(1+sqrt5)/2": 4 + (1 + math.sqrt(5)) / 2,
        "(9-sqrt2+sqrt5)/2": (9 - math.sqrt(2) + math.sqrt(5)) / 2,
    },
    "linear": {
        "(9-sqrt5)/(4sqrt2)": (9 - math.sqrt(5)) / (4 * math.sqrt(2)),
        "(9-sqrt5)/(2sqrt2)": (9 - math.sqrt(5)) / (2 * math.sqrt(2)),
        "(sqrt5-1)/2": (math.sqrt(5) - 1) / 2,
    },
}

ARGMIN_TOL = 1e-10


@dataclass
class SpectrumReport:
    kind: str
    search_range: int
    min_eigenvalue: float
    argmin_pairs: list[IndexPair]
    growth_certified: bool
    boundary_min_eigenvalue: float
    min_determinant: float
    det_argmin_pairs: list[IndexPair]
    real_minimizer: tuple[float, float]
    real_min_eigenvalue: float
    candidate_pairs: list[IndexPair]
    candidate_min_eigenvalue: float
    reference_values: dict[str, float] = field(default_factory=dict)

    def matching_references(self, tol: float = 1e-9) -> dict[str, str]:
        """Which quoted closed forms equal the integer minimum, the real minimum, or neither."""
        out = {}
        for name, value in self.reference_values.items():
            if abs(value - self.min_eigenvalue) <= tol:
                out[name] = "integer-minimum"
            elif abs(value - self.real_min_eigenvalue) <= 1e-6:
                out[name] = "real-relaxation-minimum"
            else:
                out[name] = "unmatched"
        return out

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("argmin_pairs", "det_argmin_pairs", "candidate_pairs"):
            d[key] = [list(p) for p in getattr(self, key)]
        d["real_minimizer"] = list(self.real_minimizer)
        d["reference_matches"] = self.matching_references()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> SpectrumReport:
        d = dict(d)
        d.pop("reference_matches", None)
        for key in ("argmin_pairs", "det_argmin_pairs", "candidate_pairs"):
            d[key] = [IndexPair(*p) for p in d[key]]
        d["real_minimizer"] = tuple(d["real_minimizer"])
        return cls(**d)


def _entries_fn(kind: DistanceKind) -> Callable[[float, float], SymMatrix2]:
    if kind.tag == "squared":
        return squared_hessian_entries
    if kind.tag == "linear":
        return linear_hessian_entries
    raise ValueError("spectral minimisation needs the squared or linear kind")


def _real_minimum(kind: DistanceKind) -> tuple[tuple[float, float], float]:
    entries = _entries_fn(kind)

    def objective(v: np.ndarray) -> float:
        try:
            return eig_sym2(entries(float(v[0]), float(v[1])))[0]
        except (SingularEvaluation, ValueError):
            return math.inf

    res = minimize(
        objective,
        np.array([0.6, 0.8]),
        method="Nelder-Mead",
        options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 4000},
    )
    return (float(res.x[0]), float(res.x[1])), float(res.fun)


def min_eig_over_integers(kind: DistanceKind, search_range: int) -> SpectrumReport:
    """Smallest Hessian eigenvalue at Z^2 over all ``(k, l)`` in the box.

    The grid scan is authoritative. The report also carries the real-valued
    relaxation and the floor/ceil candidates around its minimiser.
    """
    if search_range < 2:
        raise ValueError("search_range must be at least 2")
    lam: dict[IndexPair, float] = {}
    det: dict[IndexPair, float] = {}
    for k in range(-search_range, search_range + 1):
        for l in range(-search_range, search_range + 1):
            h = hessian_at_origin(kind, (k, l))
            kl = IndexPair(k, l)
            lam[kl] = eig_sym2(h)[0]
            det[kl] = h.det()
    lo = min(lam.values())
    argmin = sorted(kl for kl, v in lam.items() if v - lo <= ARGMIN_TOL)
    dlo = min(det.values())
    det_argmin = sorted(kl for kl, v in det.items() if v - dlo <= ARGMIN_TOL)
    boundary = min(
        v for (k, l), v in lam.items() if max(abs(k), abs(l)) == search_range
    )
    (rk, rl), rmin = _real_minimum(kind)
    candidates = sorted(
        {IndexPair(a, b) for a in (math.floor(rk), math.ceil(rk)) for b in (math.floor(rl), math.ceil(rl))}
    )
    cand_min = min(eig_sym2(hessian_at_origin(kind, kl))[0] for kl in candidates)
    return SpectrumReport(
        kind=kind.label,
        search_range=search_range,
        min_eigenvalue=lo,
        argmin_pairs=argmin,
        growth_certified=lo > 0.0,
        boundary_min_eigenvalue=boundary,
        min_determinant=dlo,
        det_argmin_pairs=det_argmin,
        real_minimizer=(rk, rl),
        real_min_eigenvalue=rmin,
        candidate_pairs=candidates,
        candidate_min_eigenvalue=cand_min,
        reference_values=dict(REFERENCE_VALUES[kind.tag]),
    )


# ---------------------------------------------------------------------------
# Monte-Carlo certification


@dataclass(frozen=True)
class PerturbationSample:
    params: LatticeParams
    d: float

    def __post_init__(self) -> None:
        if abs(self.d - lattice_distance(self.params, SQUARE)) > 1e-12:
            raise ValueError("cached lattice distance does not match the chart point")

    @classmethod
    def at(cls, x: float, y: float) -> PerturbationSample:
        params = LatticeParams(x, y)
        return cls(params, lattice_distance(params, SQUARE))


def sample_perturbations(n: int, scale: float, seed: int) -> list[PerturbationSample]:
    """Uniform perturbations ``(scale*u, 1 + scale*w)`` of the square lattice.

    Samples are drawn in fixed blocks, each from its own child of
    ``SeedSequence(seed)``, so sample ``i`` does not depend on ``n``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0.0 < scale <= MAX_SCALE:
        raise ValueError(f"scale must lie in (0, {MAX_SCALE}], got {scale}")
    nblocks = -(-n // BLOCK_SIZE)
    children = np.random.SeedSequence(seed).spawn(nblocks)
    out: list[PerturbationSample] = []
    for child in children:
        uw = np.random.default_rng(child).uniform(-1.0, 1.0, size=(BLOCK_SIZE, 2))
        for u, w in uw[: n - len(out)]:
            out.append(PerturbationSample.at(scale * float(u), 1.0 + scale * float(w)))
    return out


def shell_excess(
    kind: DistanceKind,
    sh: Shell,
    xs: Sequence[float],
    ys: Sequence[float],
    workers: int = 1,
) -> np.ndarray:
    """``sum_A g(|delta - p|) - |A| g(r)`` at each chart point ``(xs[i], ys[i])``.

    Work is split into fixed blocks, so the result does not depend on ``workers``.
    """
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    ys = np.ascontiguousarray(ys, dtype=np.float64)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValueError("xs and ys must be 1-d arrays of equal length")
    if np.any(~np.isfinite(xs)) or np.any(~np.isfinite(ys)) or np.any(ys <= 0.0):
        raise InvalidChartPoint("all chart points need finite x and y > 0")
    ks = np.array([kl.k for kl in sh.indices], dtype=np.int64)
    ls = np.array([kl.l for kl in sh.indices], dtype=np.int64)
    r = sh.radius
    r2 = sh.four_r_squared / 4.0
    out = np.empty_like(xs)
    code = kind.kernel_code

    def block(lo: int, hi: int) -> None:
        if code is not None:
            _backend.shell_excess(xs[lo:hi], ys[lo:hi], ks, ls, r, r2, code, out[lo:hi])
            return
        norms = np.empty((hi - lo, len(ks)))
        _backend.shell_norms(xs[lo:hi], ys[lo:hi], ks, ls, norms)
        g = kind.g
        base = g(r)
        for i, row in enumerate(norms):
            out[lo + i] = sum(g(float(t)) - base for t in row)

    bounds = [(lo, min(lo + BLOCK_SIZE, len(xs))) for lo in range(0, len(xs), BLOCK_SIZE)]
    if workers <= 1 or len(bounds) <= 1:
        for lo, hi in bounds:
            block(lo, hi)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(lambda b: block(*b), bounds))
    return out


@dataclass
class CertReport:
    shell_key: int
    kind: str
    sample_count: int
    min_ratio: float
    max_ratio: float
    failures: int
    d_range: tuple[float, float]
    undefined_ratios: int = 0
    constant_one_failures: int = 0
    min_lhs: float = 0.0

    @property
    def passed(self) -> bool:
        """Hard gate: no negative excess and every defined ratio positive."""
        return self.failures == 0 and self.min_ratio > 0.0

    @property
    def constant_one_holds(self) -> bool:
        return self.constant_one_failures == 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["d_range"] = list(self.d_range)
        for key in ("min_ratio", "max_ratio"):
            d[key] = _json_float(d[key])
        d["passed"] = self.passed
        d["constant_one_holds"] = self.constant_one_holds
        return d

    @classmethod
    def from_dict(cls, d: dict) -> CertReport:
        d = {k: v for k, v in d.items() if k not in ("passed", "constant_one_holds")}
        d["d_range"] = tuple(d["d_range"])
        for key in ("min_ratio", "max_ratio"):
            d[key] = float(d[key])
        return cls(**d)


def _json_float(v: float) -> float | str:
    return v if math.isfinite(v) else str(v)


def certify_inequality(
    sh: Shell,
    samples: Sequence[PerturbationSample],
    kind: DistanceKind,
    workers: int = 1,
) -> CertReport:
    """Compare each sample's shell excess with ``r g'(r) |A_r| d^2``.

    Samples with ``d == 0`` have no ratio and are counted in ``undefined_ratios``.
    """
    if not samples:
        raise ValueError("certification needs at least one sample")
    xs = [s.params.x for s in samples]
    ys = [s.params.y for s in samples]
    ds = np.array([s.d for s in samples])
    lhs = shell_excess(kind, sh, xs, ys, workers=workers)
    failures = int(np.count_nonzero(lhs < 0.0))
    defined = ds > 0.0
    if np.any(defined):
        bounds = np.array([gap_lower_bound(sh, kind, float(d)) for d in ds[defined]])
        ratios = lhs[defined] / bounds
        min_ratio, max_ratio = float(ratios.min()), float(ratios.max())
        below_one = int(np.count_nonzero(ratios < 1.0))
    else:
        min_ratio = max_ratio = math.inf
        below_one = 0
    return CertReport(
        shell_key=sh.four_r_squared,
        kind=kind.label,
        sample_count=len(samples),
        min_ratio=min_ratio,
        max_ratio=max_ratio,
        failures=failures,
        d_range=(float(ds.min()), float(ds.max())),
        undefined_ratios=int(np.count_nonzero(~defined)),
        constant_one_failures=below_one,
        min_lhs=float(lhs.min()),
    )


def quadratic_scaling_probe(
    sh: Shell,
    direction: tuple[float, float],
    kind: DistanceKind,
    steps: int = 8,
    t0: float = 0.05,
    shrink: float = 0.5,
) -> list[tuple[float, float]]:
    """``(d, excess)`` along ``(t*dx, 1 + t*dy)`` for ``t = t0 * shrink**i``."""
    dx, dy = direction
    norm = math.hypot(dx, dy)
    if norm == 0.0 or not math.isfinite(norm):
        raise ValueError("probe direction must be nonzero and finite")
    if steps < 4:
        raise ValueError("steps must be at least 4")
    ts = [t0 * shrink**i for i in range(steps)]
    xs = [t * dx / norm for t in ts]
    ys = [1.0 + t * dy / norm for t in ts]
    lhs = shell_excess(kind, sh, xs, ys)
    return [
        (lattice_distance(LatticeParams(x, y), SQUARE), float(v)) for x, y, v in zip(xs, ys, lhs)
    ]


def loglog_slope(points: Iterable[tuple[float, float]], last: int = 3) -> float:
    pts = list(points)[-last:]
    logd = np.log([d for d, _ in pts])
    logv = np.log([v for _, v in pts])
    return float(np.polyfit(logd, logv, 1)[0])
