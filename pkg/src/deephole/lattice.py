"""Geometry of unimodular planar lattices in the horizontal-first-vector chart.

A lattice with covolume one, rotated so that its first basis vector is
horizontal, is described by a point ``(x, y)`` of the upper half plane::

    v1 = y**-0.5 * (1, 0)
    w1 = y**-0.5 * (x, y)

The square lattice Z^2 sits at ``(0, 1)``. Lattice points are addressed by
integer coefficients ``(k, l)`` so that the same index set can be embedded
in the square lattice and in any perturbation of it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple


class InvalidChartPoint(ValueError):
    """Raised for chart coordinates outside the upper half plane or non-finite."""


@dataclass(frozen=True)
class Vec2:
    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"Vec2 components must be finite, got ({self.x}, {self.y})")

    def __add__(self, other: Vec2) -> Vec2:
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: Vec2) -> Vec2:
        return Vec2(self.x - other.x, self.y - other.y)

    def __mul__(self, s: float) -> Vec2:
        return Vec2(s * self.x, s * self.y)

    __rmul__ = __mul__

    def dot(self, other: Vec2) -> float:
        return self.x * other.x + self.y * other.y

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def as_tuple(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class LatticeParams:
    """Chart point ``(x, y)``; ``x`` shears, ``y > 0`` sets the height."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise InvalidChartPoint(f"non-finite chart point ({self.x}, {self.y})")
        if self.y <= 0.0:
            raise InvalidChartPoint(f"chart height must be positive, got y={self.y}")


class IndexPair(NamedTuple):
    k: int
    l: int  # noqa: E741


SQUARE = LatticeParams(0.0, 1.0)

_DEEP_HOLE = Vec2(0.5, 0.5)


# doubled offsets from the deep hole are (2k - 1, 2l - 1), so 4r^2 is an integer
def _shell_key(kl: tuple[int, int]) -> int:
    k, l = kl
    return (2 * k - 1) ** 2 + (2 * l - 1) ** 2


@dataclass(frozen=True)
class Shell:
    """Lattice points of Z^2 at one fixed distance from the deep hole.

    Shells are keyed by the exact integer ``4 r^2`` rather than by a float
    radius. ``indices`` is stored sorted so equal shells compare equal.
    """

    four_r_squared: int
    indices: tuple[IndexPair, ...]

    def __post_init__(self) -> None:
        if self.four_r_squared <= 0:
            raise ValueError("four_r_squared must be positive")
        idx = tuple(sorted(IndexPair(int(k), int(l)) for k, l in self.indices))
        object.__setattr__(self, "indices", idx)
        for kl in idx:
            if _shell_key(kl) != self.four_r_squared:
                raise ValueError(f"{kl} is not at 4r^2={self.four_r_squared}")
        members = set(idx)
        if len(members) != len(idx):
            raise ValueError("duplicate indices in shell")
        for k, l in idx:
            if (1 - l, k) not in members:
                raise ValueError(f"shell not closed under rotation about p at {(k, l)}")

    @property
    def radius(self) -> float:
        return math.sqrt(self.four_r_squared) / 2.0

    @property
    def cardinality(self) -> int:
        return len(self.indices)

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)


def basis(params: LatticeParams) -> tuple[Vec2, Vec2]:
    """Return the chart basis ``(v1, w1)``; its determinant is one."""
    if not isinstance(params, LatticeParams):
        params = LatticeParams(*params)
    s = 1.0 / math.sqrt(params.y)
    return Vec2(s, 0.0), Vec2(s * params.x, s * params.y)


def determinant(v: Vec2, w: Vec2) -> float:
    return v.x * w.y - v.y * w.x


def hexagonal_basis() -> tuple[Vec2, Vec2]:
    """Basis of the covolume-one hexagonal lattice with horizontal first vector."""
    q = 3.0**0.25
    a = math.sqrt(2.0) / q
    b = 1.0 / (q * math.sqrt(2.0))
    return Vec2(a, 0.0), Vec2(b, b * math.sqrt(3.0))


def density(v: Vec2, w: Vec2) -> float:
    """Reciprocal covolume of the lattice spanned by ``v`` and ``w``."""
    return 1.0 / abs(determinant(v, w))


def deep_hole() -> Vec2:
    return _DEEP_HOLE


def quadruple_indices(kl: tuple[int, int]) -> list[IndexPair]:
    """Orbit of ``(k, l)`` under the quarter turn about the deep hole.

    The map is ``(k, l) -> (1 - l, k)``; the four pairs are always distinct
    because the deep hole is not a lattice point.
    """
    k, l = kl
    return [IndexPair(k, l), IndexPair(1 - l, k), IndexPair(1 - k, 1 - l), IndexPair(l, 1 - k)]


def rotate_about_p(q: Vec2, i: int) -> Vec2:
    """Return ``p + R^i (q - p)`` with R the counterclockwise quarter turn."""
    dx, dy = q.x - _DEEP_HOLE.x, q.y - _DEEP_HOLE.y
    for _ in range(i % 4):
        dx, dy = -dy, dx
    return Vec2(_DEEP_HOLE.x + dx, _DEEP_HOLE.y + dy)


def _index_bound(r_max: float) -> tuple[int, int]:
    lo = math.ceil((1.0 - 2.0 * r_max) / 2.0)
    hi = math.floor((1.0 + 2.0 * r_max) / 2.0)
    return lo, hi


def enumerate_shells(r_max: float) -> list[Shell]:
    """All nonempty shells with radius at most ``r_max``, by increasing radius."""
    if not math.isfinite(r_max) or r_max < 0:
        raise ValueError(f"r_max must be finite and non-negative, got {r_max}")
    # integer cutoff on 4r^2; the small slack absorbs r_max = sqrt(n)/2 round-off
    limit = math.floor(4.0 * r_max * r_max + 1e-9)
    lo, hi = _index_bound(r_max + 1e-9)
    groups: dict[int, list[IndexPair]] = {}
    for k in range(lo, hi + 1):
        for l in range(lo, hi + 1):
            key = _shell_key((k, l))
            if key <= limit:
                groups.setdefault(key, []).append(IndexPair(k, l))
    return [Shell(key, tuple(groups[key])) for key in sorted(groups)]


def shell(four_r_squared: int) -> Shell:
    """The shell with the given exact key ``4 r^2``.

    Raises ``ValueError`` if no lattice point of Z^2 lies at that distance.
    """
    n = int(four_r_squared)
    if n != four_r_squared or n <= 0:
        raise ValueError(f"shell key must be a positive integer, got {four_r_squared!r}")
    bound = math.isqrt(n) // 2 + 1
    indices = [
        IndexPair(k, l)
        for k in range(-bound, bound + 2)
        for l in range(-bound, bound + 2)
        if _shell_key((k, l)) == n
    ]
    if not indices:
        raise ValueError(f"no lattice point of Z^2 at 4r^2={n} from the deep hole")
    return Shell(n, tuple(indices))


def point(params: LatticeParams, kl: tuple[int, int]) -> Vec2:
    v, w = basis(params)
    k, l = kl
    return Vec2(k * v.x + l * w.x, k * v.y + l * w.y)


def lattice_distance(a: LatticeParams, b: LatticeParams) -> float:
    """Euclidean distance between the chart bases of two lattices, as a point of R^4."""
    va, wa = basis(a)
    vb, wb = basis(b)
    return math.hypot(va.x - vb.x, va.y - vb.y, wa.x - wb.x, wa.y - wb.y)
