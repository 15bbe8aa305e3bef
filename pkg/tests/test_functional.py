import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st
from mpmath import exp as mexp
from mpmath import sqrt as msqrt

from deephole.functional import (
    PHI_CATALOG,
    ConvexFn,
    DistanceKind,
    SingularEvaluation,
    SymMatrix2,
    det_hessian_linear,
    eig_sym2,
    eigvecs_sym2,
    f_convex,
    f_kind,
    f_linear,
    f_squared,
    gap_lower_bound,
    grad_f_convex,
    grad_f_linear_analytic,
    grad_f_squared_analytic,
    hessian_linear_at_origin,
    hessian_squared_at_origin,
    parse_kind,
    shell_sum,
)
from deephole.lattice import SQUARE, LatticeParams, enumerate_shells, quadruple_indices, shell
from deephole.verify import FdConfig, HESSIAN_FD, chart_function, fd_gradient, fd_hessian
from oracles import quadruple_points_mp

SQRT2 = math.sqrt(2.0)
SQRT5 = math.sqrt(5.0)
small = st.integers(-30, 30)


def test_f_squared_examples():
    assert f_squared(SQUARE, (0, 0)) == 2.0
    assert f_squared(SQUARE, (1, 2)) == 10.0
    oracle = sum(a * a + b * b for a, b in quadruple_points_mp(0, "1.01", 0, 0))
    assert f_squared(LatticeParams(0.0, 1.01), (0, 0)) == pytest.approx(float(oracle), abs=1e-14)
    assert float(oracle) == pytest.approx(2.000148515157824, abs=1e-14)


def test_f_linear_examples():
    assert f_linear(SQUARE, (0, 0)) == pytest.approx(2 * SQRT2, abs=1e-15)
    assert f_linear(SQUARE, (1, 2)) == pytest.approx(4 * math.sqrt(2.5), abs=1e-14)
    oracle = sum(msqrt(a * a + b * b) for a, b in quadruple_points_mp("0.01", 1, 0, 0))
    assert f_linear(LatticeParams(0.01, 1.0), (0, 0)) == pytest.approx(float(oracle), abs=1e-14)


def test_f_convex_examples():
    sq, lin, ex = PHI_CATALOG["square"], PHI_CATALOG["linear"], PHI_CATALOG["exp"]
    assert f_convex(SQUARE, (0, 0), sq) == pytest.approx(2.0, abs=1e-15)
    assert f_convex(SQUARE, (1, 2), lin) == pytest.approx(4 * math.sqrt(2.5), abs=1e-14)
    assert f_convex(SQUARE, (0, 0), ex) == pytest.approx(float(4 * mexp(1 / msqrt(2))), abs=1e-14)
    assert f_convex(SQUARE, (0, 0), ex) == pytest.approx(8.112, abs=1e-3)


@given(small, small, st.floats(-0.3, 0.3), st.floats(0.7, 1.4))
def test_orbit_invariance(k, l, x, y):
    params = LatticeParams(x, y)
    for kind in ("squared", "linear", "exp", "pow3"):
        dk = parse_kind(kind)
        a = f_kind(dk, params, (k, l))
        b = f_kind(dk, params, (1 - l, k))
        assert a == pytest.approx(b, rel=1e-14, abs=1e-14)


def test_shell_sum_identity_at_square_lattice():
    for sh in enumerate_shells(6.0):
        r = sh.radius
        assert shell_sum(DistanceKind.squared(), SQUARE, sh) == pytest.approx(
            sh.cardinality * r * r, rel=1e-15
        )
        assert shell_sum(DistanceKind.linear(), SQUARE, sh) == pytest.approx(
            sh.cardinality * r, rel=1e-15
        )


@pytest.mark.parametrize("kl", [(7, -3), (0, 0), (-50, 50), (13, 2)])
def test_gradients_vanish_examples(kl):
    assert grad_f_squared_analytic(SQUARE, kl).as_tuple() == (0.0, 0.0)
    g = grad_f_linear_analytic(SQUARE, kl)
    assert g.norm() <= 1e-12


@pytest.mark.parametrize("kl", [(2, 2), (0, 1)])
def test_linear_gradient_vanishes(kl):
    assert grad_f_linear_analytic(SQUARE, kl).norm() <= 1e-12


def test_gradients_vanish_on_box():
    for k in range(-50, 51):
        for l in range(-50, 51):
            assert grad_f_squared_analytic(SQUARE, (k, l)).norm() <= 1e-12
            assert grad_f_linear_analytic(SQUARE, (k, l)).norm() <= 1e-12


def test_squared_gradient_against_fd_example():
    at = LatticeParams(0.05, 1.1)
    fd = fd_gradient(chart_function(DistanceKind.squared(), (1, 0)), at, FdConfig(1e-5))
    an = grad_f_squared_analytic(at, (1, 0))
    assert (an - fd).norm() <= 1e-6


def test_linear_gradient_against_fd_example():
    at = LatticeParams(0.02, 0.98)
    fd = fd_gradient(chart_function(DistanceKind.linear(), (0, 0)), at, FdConfig(1e-5))
    an = grad_f_linear_analytic(at, (0, 0))
    assert (an - fd).norm() <= 1e-6


def test_gradients_against_fd_random():
    rng = random.Random(20261015)
    cfg = FdConfig(1e-5)
    for _ in range(1000):
        at = LatticeParams(rng.uniform(-0.3, 0.3), rng.uniform(0.7, 1.4))
        kl = (rng.randint(-5, 5), rng.randint(-5, 5))
        for kind, grad in (
            (DistanceKind.squared(), grad_f_squared_analytic),
            (DistanceKind.linear(), grad_f_linear_analytic),
        ):
            fd = fd_gradient(chart_function(kind, kl), at, cfg)
            assert (grad(at, kl) - fd).norm() <= 1e-6, (kind, at, kl)


@pytest.mark.parametrize("phi", ["exp", "pow3", "square"])
def test_convex_gradient_against_fd(phi):
    rng = random.Random(3)
    fn = PHI_CATALOG[phi]
    kind = DistanceKind.convex(fn)
    for _ in range(50):
        at = LatticeParams(rng.uniform(-0.2, 0.2), rng.uniform(0.8, 1.2))
        kl = (rng.randint(-3, 3), rng.randint(-3, 3))
        fd = fd_gradient(chart_function(kind, kl), at, FdConfig(1e-4, richardson=True))
        an = grad_f_convex(at, kl, fn)
        assert (an - fd).norm() <= 1e-6 * max(1.0, fd.norm())


def test_convex_square_gradient_equals_squared():
    at = LatticeParams(0.1, 1.2)
    a = grad_f_convex(at, (2, -1), PHI_CATALOG["square"])
    b = grad_f_squared_analytic(at, (2, -1))
    assert (a - b).norm() <= 1e-12


def test_linear_gradient_singular():
    # half-integer indices put every quadruple point on p
    with pytest.raises(SingularEvaluation):
        grad_f_linear_analytic(SQUARE, (0.5, 0.5))


@pytest.mark.parametrize(
    "kl, expected",
    [((0, 0), (4, -1, 3)), ((1, 1), (4, -1, 3)), ((1, 2), (12, -1, 11))],
)
def test_hessian_squared_examples(kl, expected):
    assert hessian_squared_at_origin(kl) == SymMatrix2(*map(float, expected))


def test_hessian_squared_h3_is_h1_minus_one():
    for k in range(-100, 101):
        for l in range(-100, 101):
            h = hessian_squared_at_origin((k, l))
            assert h.a22 == h.a11 - 1.0
            assert h.a12 == -1.0


def test_hessian_squared_roots():
    for k in range(-20, 21):
        for l in range(-20, 21):
            h = hessian_squared_at_origin((k, l))
            lo, hi = eig_sym2(h)
            assert lo == pytest.approx(0.5 * (-1 - SQRT5) + h.a11, abs=1e-10)
            assert hi == pytest.approx(0.5 * (-1 + SQRT5) + h.a11, abs=1e-10)


def test_hessian_linear_origin():
    h = hessian_linear_at_origin((0, 0))
    assert h.a11 == pytest.approx(SQRT2, abs=1e-15)
    assert h.a12 == pytest.approx(-1 / (2 * SQRT2), abs=1e-15)
    assert h.a22 == pytest.approx(5 / (2 * SQRT2), abs=1e-15)
    assert h.det() == pytest.approx(19 / 8, abs=1e-14)
    assert hessian_linear_at_origin((1, 1)).max_abs_diff(h) <= 1e-15


@pytest.mark.parametrize("kind", ["squared", "linear"])
def test_closed_form_hessians_against_fd(kind):
    dk = parse_kind(kind)
    closed = hessian_squared_at_origin if kind == "squared" else hessian_linear_at_origin
    for k in range(-10, 11):
        for l in range(-10, 11):
            fd = fd_hessian(chart_function(dk, (k, l)), SQUARE, HESSIAN_FD)
            assert closed((k, l)).max_abs_diff(fd) <= 1e-4, (k, l)


def test_hessian_linear_rejects_non_integers():
    with pytest.raises(ValueError):
        hessian_linear_at_origin((0.5, 0.5))
    with pytest.raises(ValueError):
        det_hessian_linear((0.25, 1))


@pytest.mark.parametrize("kl", [(0, 0), (0, 1), (1, 0), (1, 1)])
def test_det_minimisers(kl):
    assert det_hessian_linear(kl) == pytest.approx(19 / 8, abs=1e-12)


def test_det_closed_form_matches_product_minus_square():
    for k in range(-20, 21):
        for l in range(-20, 21):
            h = hessian_linear_at_origin((k, l))
            assert det_hessian_linear((k, l)) == pytest.approx(h.det(), abs=1e-9, rel=1e-12)


def test_linear_hessian_positive_definite():
    for k in range(-20, 21):
        for l in range(-20, 21):
            assert det_hessian_linear((k, l)) > 0
            assert hessian_linear_at_origin((k, l)).a11 > 0


def test_eig_sym2_examples():
    lo, hi = eig_sym2(SymMatrix2(4.0, -1.0, 3.0))
    assert lo == pytest.approx((7 - SQRT5) / 2, abs=1e-14)
    assert hi == pytest.approx((7 + SQRT5) / 2, abs=1e-14)
    assert eig_sym2(SymMatrix2(2.0, 0.0, 2.0)) == (2.0, 2.0)
    lo, hi = eig_sym2(hessian_linear_at_origin((0, 0)))
    assert lo == pytest.approx((9 - SQRT5) / (4 * SQRT2), abs=1e-14)
    assert hi == pytest.approx((9 + SQRT5) / (4 * SQRT2), abs=1e-14)


@given(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3), st.floats(-1e3, 1e3))
def test_eig_sym2_residual(a, b, c):
    m = SymMatrix2(a, b, c)
    lo, hi = eig_sym2(m)
    assert lo <= hi
    scale = max(1.0, abs(a), abs(b), abs(c))
    for lam, v in zip((lo, hi), eigvecs_sym2(m)):
        mv = m.matvec(v)
        assert math.hypot(mv[0] - lam * v[0], mv[1] - lam * v[1]) <= 1e-10 * scale
        assert math.hypot(*v) == pytest.approx(1.0, abs=1e-12)
    assert lo + hi == pytest.approx(a + c, abs=1e-9 * scale)


def test_gap_lower_bound_examples():
    sh = shell(2)
    assert gap_lower_bound(sh, DistanceKind.linear(), 0.01) == pytest.approx(
        4e-4 / SQRT2, rel=1e-14
    )
    assert gap_lower_bound(sh, DistanceKind.squared(), 0.01) == pytest.approx(4e-4, rel=1e-14)
    for kind in ("squared", "linear", "exp", "pow3"):
        assert gap_lower_bound(shell(50), parse_kind(kind), 0.0) == 0.0
    with pytest.raises(ValueError):
        gap_lower_bound(sh, DistanceKind.linear(), -1e-3)


@pytest.mark.parametrize("label", sorted(PHI_CATALOG))
def test_catalog_is_monotone_convex(label):
    fn = PHI_CATALOG[label]
    ts = [0.05 * i for i in range(1, 200)]
    for t1, t2 in zip(ts, ts[1:]):
        assert fn.phi(t1) <= fn.phi(t2)
        mid = 0.5 * (t1 + t2)
        assert fn.phi(mid) <= 0.5 * (fn.phi(t1) + fn.phi(t2)) + 1e-9
    h = 1e-5
    for t in ts[::10]:
        fd = (fn.phi(t + h) - fn.phi(t - h)) / (2 * h)
        assert fd == pytest.approx(fn.dphi(t), rel=1e-7, abs=1e-7)


def test_parse_kind():
    assert parse_kind("squared") == DistanceKind.squared()
    assert parse_kind("convex", "exp").label == "convex:exp"
    assert parse_kind("pow3").label == "convex:pow3"
    assert parse_kind("convex:square").kernel_code == 0
    custom = DistanceKind.convex(ConvexFn("cosh", math.cosh, math.sinh))
    assert custom.kernel_code is None
    for bad in (("convex", None), ("convex", "log"), ("quartic", None)):
        with pytest.raises(ValueError):
            parse_kind(*bad)
    with pytest.raises(ValueError):
        DistanceKind("convex")


def test_quadruple_f_uses_all_four_points():
    params = LatticeParams(0.07, 1.13)
    direct = sum(
        math.dist((a * 1 / math.sqrt(1.13) + b * 0.07 / math.sqrt(1.13), b * math.sqrt(1.13)), (0.5, 0.5)) ** 2
        for a, b in quadruple_indices((3, -2))
    )
    assert f_squared(params, (3, -2)) == pytest.approx(direct, rel=1e-14)
