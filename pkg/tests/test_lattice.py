import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deephole.lattice import (
    SQUARE,
    IndexPair,
    InvalidChartPoint,
    LatticeParams,
    Shell,
    Vec2,
    basis,
    deep_hole,
    density,
    determinant,
    enumerate_shells,
    hexagonal_basis,
    lattice_distance,
    point,
    quadruple_indices,
    rotate_about_p,
    shell,
)
from oracles import brute_shells, rotate_doubled

chart_x = st.floats(-3.0, 3.0)
chart_y = st.floats(0.05, 20.0)
indices = st.integers(-1000, 1000)


def test_basis_square_lattice():
    v, w = basis(LatticeParams(0.0, 1.0))
    assert v == Vec2(1.0, 0.0)
    assert w == Vec2(0.0, 1.0)


def test_basis_scaled():
    v, w = basis(LatticeParams(0.0, 4.0))
    assert v == Vec2(0.5, 0.0)
    assert w == Vec2(0.0, 2.0)


def test_basis_sheared():
    v, w = basis(LatticeParams(0.01, 1.0))
    assert v.as_tuple() == (1.0, 0.0)
    assert w.as_tuple() == pytest.approx((0.01, 1.0), abs=1e-15)
    assert determinant(v, w) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("x, y", [(0.0, 0.0), (0.0, -1.0), (math.nan, 1.0), (0.0, math.inf)])
def test_invalid_chart_points(x, y):
    with pytest.raises(InvalidChartPoint):
        basis(LatticeParams(x, y))


@settings(max_examples=300)
@given(chart_x, chart_y)
def test_basis_is_unimodular(x, y):
    v, w = basis(LatticeParams(x, y))
    assert abs(determinant(v, w) - 1.0) <= 1e-12


def test_vec2_rejects_non_finite():
    with pytest.raises(ValueError):
        Vec2(math.nan, 0.0)


def test_hexagonal_basis():
    v, w = hexagonal_basis()
    assert v.x == pytest.approx(1.07456993182354191955, abs=1e-14)
    assert v.y == 0.0
    assert w.x == pytest.approx(0.53728496591177095978, abs=1e-14)
    assert w.y == pytest.approx(0.93060485910209959894, abs=1e-14)
    assert abs(determinant(v, w) - 1.0) <= 1e-12
    assert v.norm() == pytest.approx(1.07457, abs=1e-5)
    assert density(v, w) == pytest.approx(1.0, abs=1e-12)
    # equilateral: both vectors have the same length, 60 degrees apart
    assert v.norm() == pytest.approx(w.norm(), rel=1e-14)
    assert v.dot(w) / (v.norm() * w.norm()) == pytest.approx(0.5, abs=1e-14)


def test_deep_hole():
    p = deep_hole()
    assert p == Vec2(0.5, 0.5)
    assert (p - Vec2(0.0, 0.0)).norm() == pytest.approx(1 / math.sqrt(2), abs=1e-15)
    v, w = basis(SQUARE)
    assert (v + w) * 0.5 == p


@pytest.mark.parametrize(
    "kl, expected",
    [
        ((0, 0), [(0, 0), (1, 0), (1, 1), (0, 1)]),
        ((2, 3), [(2, 3), (-2, 2), (-1, -2), (3, -1)]),
        ((1, 1), [(1, 1), (0, 1), (0, 0), (1, 0)]),
    ],
)
def test_quadruple_indices(kl, expected):
    assert quadruple_indices(kl) == [IndexPair(*e) for e in expected]


@given(indices, indices)
def test_quadruple_distinct_and_cyclic(k, l):
    quad = quadruple_indices((k, l))
    assert len(set(quad)) == 4
    assert quadruple_indices(quad[1]) == quad[1:] + quad[:1]


@given(indices, indices)
def test_quadruple_matches_rotation_about_p(k, l):
    z = point(SQUARE, (k, l))
    images = [rotate_about_p(z, i) for i in range(4)]
    assert [point(SQUARE, kl) for kl in quadruple_indices((k, l))] == images
    assert [IndexPair(*rotate_doubled(k, l, i)) for i in range(4)] == quadruple_indices((k, l))


def test_rotate_about_p_examples():
    assert rotate_about_p(Vec2(1.0, 0.0), 1) == Vec2(1.0, 1.0)
    assert rotate_about_p(Vec2(0.0, 0.0), 2) == Vec2(1.0, 1.0)
    assert rotate_about_p(Vec2(3.0, -1.0), 4) == Vec2(3.0, -1.0)
    assert rotate_about_p(Vec2(3.0, -1.0), 0) == Vec2(3.0, -1.0)


def test_enumerate_shells_small():
    shells = enumerate_shells(0.8)
    assert len(shells) == 1
    assert shells[0].four_r_squared == 2
    assert set(shells[0].indices) == {(0, 0), (1, 0), (1, 1), (0, 1)}
    assert shells[0].cardinality == 4


def test_enumerate_shells_two():
    shells = enumerate_shells(1.6)
    assert [s.four_r_squared for s in shells] == [2, 10]
    assert set(shells[1].indices) == {
        (0, -1), (0, 2), (1, -1), (1, 2), (-1, 0), (2, 0), (-1, 1), (2, 1)
    }


def test_enumerate_shells_boundary_included():
    shells = enumerate_shells(1 / math.sqrt(2))
    assert [s.four_r_squared for s in shells] == [2]
    assert [s.four_r_squared for s in enumerate_shells(math.sqrt(10) / 2)] == [2, 10]


@pytest.mark.parametrize("bad", [-1.0, math.nan, math.inf])
def test_enumerate_shells_rejects(bad):
    with pytest.raises(ValueError):
        enumerate_shells(bad)


@pytest.mark.parametrize("r_max", [0.71, 1.0, 1.6, 2.5, 3.3, 4.0, 5.05, 6.0])
def test_enumerate_shells_matches_brute_force(r_max):
    expected = brute_shells(r_max)
    got = {s.four_r_squared: set(s.indices) for s in enumerate_shells(r_max)}
    assert got == expected
    keys = [s.four_r_squared for s in enumerate_shells(r_max)]
    assert keys == sorted(keys)


def test_shell_invariants():
    for s in enumerate_shells(6.0):
        assert s.cardinality % 4 == 0
        members = set(s.indices)
        for k, l in s.indices:
            assert (2 * k - 1) ** 2 + (2 * l - 1) ** 2 == s.four_r_squared
            assert (1 - l, k) in members


def test_shell_by_key():
    assert shell(50).cardinality == 12
    assert shell(10) == enumerate_shells(1.6)[1]
    for bad in (0, 3, 4, 6, 2.5):
        with pytest.raises(ValueError):
            shell(bad)


def test_shell_constructor_validates():
    with pytest.raises(ValueError):
        Shell(2, ((0, 0), (1, 0), (1, 1)))
    with pytest.raises(ValueError):
        Shell(10, ((0, 0),))


@pytest.mark.parametrize(
    "params, kl, expected",
    [
        ((0.0, 1.0), (3, -2), (3.0, -2.0)),
        ((0.01, 1.0), (0, 1), (0.01, 1.0)),
        ((0.0, 4.0), (1, 1), (0.5, 2.0)),
    ],
)
def test_point(params, kl, expected):
    assert point(LatticeParams(*params), kl).as_tuple() == pytest.approx(expected, abs=1e-15)


def test_lattice_distance_examples():
    assert lattice_distance(SQUARE, LatticeParams(0.01, 1.0)) == pytest.approx(0.01, abs=1e-15)
    assert lattice_distance(SQUARE, SQUARE) == 0.0
    # 30-digit oracle value
    assert lattice_distance(SQUARE, LatticeParams(0.0, 1.02)) == pytest.approx(
        0.0140029724337688053592, abs=1e-15
    )


@settings(max_examples=200)
@given(chart_x, chart_y, chart_x, chart_y, chart_x, chart_y)
def test_lattice_distance_metric(x1, y1, x2, y2, x3, y3):
    a, b, c = LatticeParams(x1, y1), LatticeParams(x2, y2), LatticeParams(x3, y3)
    ab = lattice_distance(a, b)
    assert ab == lattice_distance(b, a)
    assert lattice_distance(a, a) == 0.0
    assert (ab == 0.0) == (a == b)
    assert ab <= lattice_distance(a, c) + lattice_distance(c, b) + 1e-12
