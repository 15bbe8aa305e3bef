"""Distance functionals of a rotation quadruple and their derivatives at Z^2.

For a lattice point with indices ``(k, l)`` the quadruple is its orbit under
the quarter turn about the deep hole ``p = (1/2, 1/2)``. Each functional sums
``g(|delta - p|)`` over the four perturbed points, where ``g`` is ``t**2``
(squared), ``t`` (linear) or a monotone convex ``phi``.

Closed-form gradients are valid anywhere in the chart. Closed-form Hessians
are only available at the square lattice ``(x, y) = (0, 1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

from .lattice import (
    IndexPair,
    LatticeParams,
    Shell,
    Vec2,
    basis,
    deep_hole,
    quadruple_indices,
)

SINGULAR_DISTANCE = 1e-14


class SingularEvaluation(ArithmeticError):
    """A distance or denominator vanished where a closed form divides by it."""


@dataclass(frozen=True)
class SymMatrix2:
    a11: float
    a12: float
    a22: float

    def __post_init__(self) -> None:
        if not all(math.isfinite(v) for v in (self.a11, self.a12, self.a22)):
            raise ValueError("SymMatrix2 entries must be finite")

    def det(self) -> float:
        return self.a11 * self.a22 - self.a12 * self.a12

    def trace(self) -> float:
        return self.a11 + self.a22

    def matvec(self, v: tuple[float, float]) -> tuple[float, float]:
        return (self.a11 * v[0] + self.a12 * v[1], self.a12 * v[0] + self.a22 * v[1])

    def as_rows(self) -> list[list[float]]:
        return [[self.a11, self.a12], [self.a12, self.a22]]

    def max_abs_diff(self, other: SymMatrix2) -> float:
        return max(
            abs(self.a11 - other.a11), abs(self.a12 - other.a12), abs(self.a22 - other.a22)
        )


@dataclass(frozen=True)
class ConvexFn:
    """A monotonically increasing convex ``phi`` on (0, inf) with its derivative.

    ``kernel_code`` marks the built-in functions the compiled kernels know.
    """

    label: str
    phi: Callable[[float], float] = field(compare=False)
    dphi: Callable[[float], float] = field(compare=False)
    kernel_code: int | None = None


def _cube(t: float) -> float:
    return t * t * t


PHI_CATALOG: dict[str, ConvexFn] = {
    "square": ConvexFn("square", lambda t: t * t, lambda t: 2.0 * t, 0),
    "linear": ConvexFn("linear", lambda t: t, lambda t: 1.0, 1),
    "exp": ConvexFn("exp", math.exp, math.exp, 2),
    "pow3": ConvexFn("pow3", _cube, lambda t: 3.0 * t * t, 3),
}


@dataclass(frozen=True)
class DistanceKind:
    tag: str
    phi: ConvexFn | None = None

    def __post_init__(self) -> None:
        if self.tag not in ("squared", "linear", "convex"):
            raise ValueError(f"unknown distance kind {self.tag!r}")
        if (self.tag == "convex") != (self.phi is not None):
            raise ValueError("a ConvexFn is required exactly for the convex kind")

    @classmethod
    def squared(cls) -> DistanceKind:
        return cls("squared")

    @classmethod
    def linear(cls) -> DistanceKind:
        return cls("linear")

    @classmethod
    def convex(cls, phi: ConvexFn | str) -> DistanceKind:
        if isinstance(phi, str):
            phi = PHI_CATALOG[phi]
        return cls("convex", phi)

    @property
    def label(self) -> str:
        return f"convex:{self.phi.label}" if self.phi is not None else self.tag

    def g(self, t: float) -> float:
        if self.tag == "squared":
            return t * t
        if self.tag == "linear":
            return t
        return self.phi.phi(t)

    def dg(self, t: float) -> float:
        if self.tag == "squared":
            return 2.0 * t
        if self.tag == "linear":
            return 1.0
        return self.phi.dphi(t)

    @property
    def kernel_code(self) -> int | None:
        if self.tag == "squared":
            return 0
        if self.tag == "linear":
            return 1
        return self.phi.kernel_code


def parse_kind(text: str, phi: str | None = None) -> DistanceKind:
    """Build a kind from ``squared``, ``linear``, ``convex`` (+ ``phi``) or a catalog label."""
    if text in ("squared", "linear"):
        return DistanceKind(text)
    if text == "convex":
        if phi is None:
            raise ValueError("the convex kind needs a phi from " + ", ".join(PHI_CATALOG))
        if phi not in PHI_CATALOG:
            raise ValueError(f"unknown phi {phi!r}; choose from " + ", ".join(PHI_CATALOG))
        return DistanceKind.convex(phi)
    if text.startswith("convex:"):
        return parse_kind("convex", text.split(":", 1)[1])
    if text in PHI_CATALOG:
        return DistanceKind.convex(text)
    raise ValueError(f"unknown distance kind {text!r}")


def _offsets(params: LatticeParams, kl: tuple[int, int]) -> list[tuple[float, float]]:
    v, w = basis(params)
    p = deep_hole()
    return [
        (a * v.x + b * w.x - p.x, a * v.y + b * w.y - p.y) for a, b in quadruple_indices(kl)
    ]


def quadruple_distances(params: LatticeParams, kl: tuple[int, int]) -> list[float]:
    return [math.hypot(dx, dy) for dx, dy in _offsets(params, kl)]


def f_squared(params: LatticeParams, kl: tuple[int, int]) -> float:
    return math.fsum(dx * dx + dy * dy for dx, dy in _offsets(params, kl))


def f_linear(params: LatticeParams, kl: tuple[int, int]) -> float:
    return math.fsum(quadruple_distances(params, kl))


def f_convex(params: LatticeParams, kl: tuple[int, int], phi: ConvexFn) -> float:
    return math.fsum(phi.phi(t) for t in quadruple_distances(params, kl))


def f_kind(kind: DistanceKind, params: LatticeParams, kl: tuple[int, int]) -> float:
    if kind.tag == "squared":
        return f_squared(params, kl)
    if kind.tag == "linear":
        return f_linear(params, kl)
    return f_convex(params, kl, kind.phi)


def shell_sum(kind: DistanceKind, params: LatticeParams, sh: Shell) -> float:
    """Sum of ``g(|delta - p|)`` over a shell, assembled from its quadruples."""
    return math.fsum(f_kind(kind, params, rep) for rep in orbit_representatives(sh))


def orbit_representatives(sh: Shell) -> list[IndexPair]:
    seen: set[IndexPair] = set()
    reps = []
    for kl in sh.indices:
        if kl in seen:
            continue
        reps.append(kl)
        seen.update(quadruple_indices(kl))
    return reps


# ---------------------------------------------------------------------------
# closed-form gradients


def grad_f_squared_analytic(params: LatticeParams, kl: tuple[int, int]) -> Vec2:
    x, y = params.x, params.y
    k, l = kl
    s = math.sqrt(y)
    y32 = y * s
    a = -2 * l + 2 * (k - 1) * x + s
    b = -2 + 2 * l - 2 * k * x + s
    c = -2 + 2 * k + 2 * (l - 1) * x + s
    u = -0.5 + k / s + l * x / s
    dx = (k - 1) * a / y + (l - 1) * c / y - k * b / y + 2 * l * u / s
    dy = (
        2 * (-k / (2 * y32) - l * x / (2 * y32)) * u
        - (a * a + b * b + c * c) / (4 * y * y)
        + (a + b + c) / (4 * y32)
        + (k - 1) * (0.5 + (k - 1) * s) / s
        + k * (-0.5 + k * s) / s
        + (l - 1) * (0.5 + (l - 1) * s) / s
        + l * (-0.5 + l * s) / s
    )
    return Vec2(dx, dy)


def grad_f_linear_analytic(params: LatticeParams, kl: tuple[int, int]) -> Vec2:
    x, y = params.x, params.y
    k, l = kl
    s = math.sqrt(y)
    y32 = y * s
    a = -2 * l + 2 * (k - 1) * x + s
    b = -2 + 2 * l - 2 * k * x + s
    c = -2 + 2 * k + 2 * (l - 1) * x + s
    u = -0.5 + k / s + l * x / s
    n1 = math.sqrt((0.5 + (k - 1) * s) ** 2 + a * a / (4 * y))
    n2 = math.sqrt((-0.5 + k * s) ** 2 + b * b / (4 * y))
    n3 = math.sqrt((0.5 + (l - 1) * s) ** 2 + c * c / (4 * y))
    n4 = math.sqrt(u * u + (-0.5 + l * s) ** 2)
    if min(n1, n2, n3, n4) < SINGULAR_DISTANCE:
        raise SingularEvaluation(f"quadruple point of {tuple(kl)} coincides with the deep hole")
    dx = (
        (k - 1) * a / (2 * n1 * y)
        - k * b / (2 * n2 * y)
        + (l - 1) * c / (2 * n3 * y)
        + l * u / (n4 * s)
    )
    dy = (
        (-a * a / (4 * y * y) + a / (4 * y32) + (k - 1) * (0.5 + (k - 1) * s) / s) / (2 * n1)
        + (-b * b / (4 * y * y) + b / (4 * y32) + k * (-0.5 + k * s) / s) / (2 * n2)
        + (2 * (-k / (2 * y32) - l * x / (2 * y32)) * u + l * (-0.5 + l * s) / s) / (2 * n4)
        + (-c * c / (4 * y * y) + c / (4 * y32) + (l - 1) * (0.5 + (l - 1) * s) / s) / (2 * n3)
    )
    return Vec2(dx, dy)


def grad_f_convex(params: LatticeParams, kl: tuple[int, int], phi: ConvexFn) -> Vec2:
    """Chain rule over the four terms: sum phi'(|u|) u . du / |u|."""
    x, y = params.x, params.y
    s = math.sqrt(y)
    gx = gy = 0.0
    for a, b in quadruple_indices(kl):
        ux = (a + b * x) / s - 0.5
        uy = b * s - 0.5
        n = math.hypot(ux, uy)
        if n < SINGULAR_DISTANCE:
            raise SingularEvaluation(f"quadruple point of {tuple(kl)} coincides with the deep hole")
        w = phi.dphi(n) / n
        gx += w * ux * b / s
        gy += w * (-ux * (a + b * x) / (2 * y * s) + uy * b / (2 * s))
    return Vec2(gx, gy)


def grad_kind_analytic(kind: DistanceKind, params: LatticeParams, kl: tuple[int, int]) -> Vec2:
    if kind.tag == "squared":
        return grad_f_squared_analytic(params, kl)
    if kind.tag == "linear":
        return grad_f_linear_analytic(params, kl)
    return grad_f_convex(params, kl, kind.phi)


# ---------------------------------------------------------------------------
# Hessians at the square lattice


def _require_integer_pair(kl: tuple[int, int]) -> tuple[int, int]:
    k, l = kl
    if int(k) != k or int(l) != l:
        raise ValueError(f"integer index pair required, got {kl!r}")
    return int(k), int(l)


def hessian_squared_at_origin(kl: tuple[int, int]) -> SymMatrix2:
    k, l = _require_integer_pair(kl)
    h1 = 4 * (1 - k + k * k - l + l * l)
    h3 = 3 - 4 * k + 4 * k * k - 4 * l + 4 * l * l
    return SymMatrix2(float(h1), -1.0, float(h3))


def hessian_linear_at_origin(kl: tuple[int, int]) -> SymMatrix2:
    k, l = _require_integer_pair(kl)
    return linear_hessian_entries(k, l)


def linear_hessian_entries(k: float, l: float) -> SymMatrix2:  # noqa: E741
    """Closed-form linear Hessian at (0, 1), also evaluated at real ``(k, l)``."""
    den = 1 - 2 * k + 2 * k * k - 2 * l + 2 * l * l
    if abs(den) < 1e-12:
        raise SingularEvaluation(f"Hessian denominator vanishes at {(k, l)!r}")
    d32 = den**1.5
    r2 = math.sqrt(2.0)
    n1 = 1 - 3 * k + 7 * k**2 - 8 * k**3 + 4 * k**4 - 3 * l + 7 * l**2 - 8 * l**3 + 4 * l**4
    n2 = (
        -1
        + k**2 * (10 - 24 * l)
        + 6 * l
        - 14 * l**2
        + 8 * l**3
        + 8 * k**3 * (-1 + 2 * l)
        - 2 * k * (1 - 12 * l**2 + 8 * l**3)
    )
    n3 = (
        5
        - 16 * k**3
        + 8 * k**4
        - 18 * l
        + 26 * l**2
        - 16 * l**3
        + 8 * l**4
        - 6 * k * (3 - 8 * l + 8 * l**2)
        + k**2 * (26 - 48 * l + 48 * l**2)
    )
    return SymMatrix2(r2 * n1 / d32, n2 / (2 * r2 * d32), n3 / (2 * r2 * d32))


def squared_hessian_entries(k: float, l: float) -> SymMatrix2:  # noqa: E741
    h1 = 4 * (1 - k + k * k - l + l * l)
    return SymMatrix2(float(h1), -1.0, float(h1 - 1))


def det_hessian_linear(kl: tuple[int, int]) -> float:
    k, l = _require_integer_pair(kl)
    den = 1 - 2 * k + 2 * k * k - 2 * l + 2 * l * l
    num = (
        19
        - 192 * k**5
        + 64 * k**6
        - 82 * l
        + 194 * l**2
        - 304 * l**3
        + 320 * l**4
        - 192 * l**5
        + 64 * l**6
        + 64 * k**4 * (5 - 3 * l + 3 * l**2)
        - 16 * k**3 * (21 - 26 * l + 24 * l**2)
        + 2 * k**2 * (121 - 264 * l + 336 * l**2 - 192 * l**3 + 96 * l**4)
        - 2 * k * (49 - 144 * l + 216 * l**2 - 176 * l**3 + 96 * l**4)
    )
    # exact integer numerator and denominator; one rounding at the end
    return num / (8 * den * den)


def hessian_at_origin(kind: DistanceKind, kl: tuple[int, int]) -> SymMatrix2:
    if kind.tag == "squared":
        return hessian_squared_at_origin(kl)
    if kind.tag == "linear":
        return hessian_linear_at_origin(kl)
    raise ValueError("closed-form Hessians exist only for the squared and linear kinds")


def eig_sym2(m: SymMatrix2) -> tuple[float, float]:
    """Eigenvalues ``(lo, hi)`` of a symmetric 2x2 matrix."""
    mean = 0.5 * (m.a11 + m.a22)
    rad = math.hypot(0.5 * (m.a11 - m.a22), m.a12)
    return mean - rad, mean + rad


def eigvecs_sym2(m: SymMatrix2) -> tuple[tuple[float, float], tuple[float, float]]:
    """Unit eigenvectors matching ``eig_sym2`` order."""
    lo, hi = eig_sym2(m)
    if m.a12 == 0.0:
        if m.a11 <= m.a22:
            return (1.0, 0.0), (0.0, 1.0)
        return (0.0, 1.0), (1.0, 0.0)
    vecs = []
    for lam in (lo, hi):
        # pick the better conditioned of the two row equations
        if abs(m.a11 - lam) >= abs(m.a22 - lam):
            vx, vy = -m.a12, m.a11 - lam
        else:
            vx, vy = m.a22 - lam, -m.a12
        n = math.hypot(vx, vy)
        vecs.append((vx / n, vy / n))
    return vecs[0], vecs[1]


def gap_lower_bound(sh: Shell, kind: DistanceKind, d: float) -> float:
    """``r * g'(r) * |A_r| * d**2``: the growth the shell excess should dominate."""
    if not d >= 0.0:
        raise ValueError(f"lattice distance must be non-negative, got {d}")
    r = sh.radius
    return r * kind.dg(r) * sh.cardinality * d * d
