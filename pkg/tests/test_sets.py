import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polyconvex import Ball, BasicSet, Box, Halfspaces, parse, parse_set
from polyconvex.oracles import grid_min
from polyconvex.sets import UnboundedSetError, UnsupportedOperation

MOTZKIN = "1 + x1^2*x2^2*(x1^2 + x2^2 - 3)"

coord = st.floats(-5, 5, allow_nan=False)


def sets_2d():
    return [
        Ball([0.0, 0.0], 0.5),
        Ball([1.0, -0.5], 2.0),
        Box([-1.0, -2.0], [1.0, 0.5]),
        Halfspaces([[1, 0], [0, 1], [-1, -1]], [1, 1, 1]),
        Halfspaces([[1, 1], [-1, 1], [0, -1]], [1, 1, 0.5]),
    ]


# -- membership -----------------------------------------------------------------------

def test_contains_examples():
    B = Ball([0, 0], 1)
    assert B.contains([0, 0])
    assert not B.contains([1 + 1e-9, 0])
    assert B.contains([1 + 1e-11, 0], tol=1e-10)
    S = BasicSet([parse("4 - x1^2 - x2^2", 2)], 2.0)
    assert S.contains([1, 1]) and not S.contains([2, 1])
    M = BasicSet([parse(MOTZKIN + " - 1/2", 2)], 3.0, check_concave=False)
    assert M.contains([0, 0]) and M.contains([2, 2])
    assert not M.contains([1, 1]) and not M.contains([-1, 1])  # Motzkin vanishes at (+-1, +-1)


def test_basic_set_rejects_convex_constraint():
    with pytest.raises(ValueError):
        BasicSet([parse("x1^2 + x2^2 - 1", 2)], 2.0)


def test_validation():
    with pytest.raises(ValueError):
        Ball([0, 0], 0)
    with pytest.raises(ValueError):
        Box([1, 0], [0, 1])
    with pytest.raises(ValueError):
        Halfspaces([[1, 0], [-1, 0]], [-1, -1])  # x <= -1 and x >= 1


# -- projection -----------------------------------------------------------------------

def test_projection_examples():
    assert np.allclose(Ball([0, 0], 0.5).project([3, 0]), [0.5, 0])
    assert np.allclose(Box([-1, -1], [1, 1]).project([2, 0.5]), [1, 0.5])
    assert np.allclose(Halfspaces([[1, 0], [0, 1]], [0, 0]).project([1, 1]), [0, 0], atol=1e-10)


def test_projection_halfspace_corner():
    X = Halfspaces([[1, 1], [-1, 1], [0, -1]], [1, 1, 0.5])
    # triangle-ish region; (0, 3) projects to the apex (0, 1)
    assert np.allclose(X.project([0, 3]), [0, 1], atol=1e-8)
    assert np.allclose(X.project([0, 0]), [0, 0])


def test_basic_set_has_no_projection():
    S = BasicSet([parse("1 - x1^2 - x2^2", 2)], 1.0)
    with pytest.raises(UnsupportedOperation):
        S.project([2, 0])


@settings(max_examples=60, deadline=None)
@given(st.tuples(coord, coord), st.integers(0, 4))
def test_projection_idempotent_and_feasible(y, k):
    X = sets_2d()[k]
    p = X.project(np.array(y))
    assert X.contains(p, tol=1e-10)
    assert np.allclose(X.project(p), p, atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.tuples(coord, coord), st.integers(0, 4))
def test_projection_optimal(y, k):
    X = sets_2d()[k]
    y = np.array(y)
    p = X.project(y)
    pts = X.grid_sample(X.radius_bound() / 6)[:100]
    d = np.linalg.norm(p - y)
    assert np.all(np.linalg.norm(pts - y, axis=1) >= d - 1e-8)
    # variational inequality <y - p, x - p> <= 0 for x in X
    assert np.all((pts - p) @ (y - p) <= 1e-8)


# -- radius bounds and grids ----------------------------------------------------------------

def test_radius_bound_examples():
    assert Ball([0, 0], 2).radius_bound() == 2
    assert math.isclose(Box([-1, -2], [1, 2]).radius_bound(), math.sqrt(5))
    assert Ball([1, 0], 1).radius_bound() == 2
    assert math.isclose(Halfspaces([[1, 0], [0, 1], [-1, 0], [0, -1]], [1, 2, 1, 2]).radius_bound(), math.sqrt(5))


def test_radius_bound_exact_is_upper():
    for X in sets_2d():
        assert float(X.radius_bound_exact()) >= X.radius_bound()
    assert Box([-1], [1]).radius_bound_exact() == 1


def test_grid_sample_examples():
    g = Box([0], [1]).grid_sample(0.5)
    assert sorted(g[:, 0].tolist()) == [0.0, 0.5, 1.0]
    assert len(Ball([0, 0], 1).grid_sample(1.0)) == 5
    tiny = Ball([0.3, 0.3], 0.01).grid_sample(1.0)
    assert len(tiny) >= 1 and Ball([0.3, 0.3], 0.01).contains(tiny[0])


def test_grid_sample_inside_and_deterministic():
    for X in sets_2d():
        a, b = X.grid_sample(0.1), X.grid_sample(0.1)
        assert np.array_equal(a, b)
        assert X.contains_many(a, tol=1e-9).all()
    with pytest.raises(ValueError):
        Ball([0], 1).grid_sample(0)


def test_box_vertices():
    V = Box([0, -1], [1, 1]).vertices()
    assert len(V) == 4 and {tuple(v) for v in V} == {(0, -1), (0, 1), (1, -1), (1, 1)}


# -- normalisation ----------------------------------------------------------------------

def test_normalize_ball():
    tau, Xn = Ball([0, 0], 5).normalize()
    assert tau.scale == 10 and np.allclose(tau.center, 0)
    assert isinstance(Xn, Ball) and math.isclose(Xn.radius, 0.5)
    assert np.allclose(tau.inverse(tau([3, -4])), [3, -4])


def test_normalize_box():
    tau, Xn = Box([0, 0], [2, 2]).normalize()
    assert np.allclose(tau.center, [1, 1]) and math.isclose(tau.scale, 2 * math.sqrt(2))
    assert Xn.radius_bound() <= 0.5 + 1e-12


def test_normalize_every_set_into_half_ball():
    for X in sets_2d():
        tau, Xn = X.normalize()
        assert Xn.radius_bound() <= 0.5 + 1e-9
        pts = X.grid_sample(X.radius_bound() / 10)
        assert Xn.contains_many(np.array([tau(p) for p in pts]), tol=1e-9).all()


def test_normalize_unbounded():
    with pytest.raises(UnboundedSetError):
        Halfspaces([[1, 0], [0, 1]], [0, 0]).normalize()


def test_normalize_preserves_argmin():
    f = parse("x1", 2)
    X = Ball([0, 0], 5)
    tau, Xn = X.normalize()
    fn = f.affine_substitute(list(tau.center), tau.scale)
    assert fn == parse("10*x1", 2)
    mesh = 0.01
    orig = grid_min(f, X, mesh * tau.scale)
    norm = grid_min(fn, Xn, mesh)
    assert np.linalg.norm(tau(orig.argmin) - norm.argmin) <= mesh * math.sqrt(2)
    assert np.allclose(norm.argmin, [-0.5, 0], atol=mesh)


# -- descriptors ----------------------------------------------------------------------------

def test_parse_set():
    B = parse_set("ball:0,0:1")
    assert isinstance(B, Ball) and B.radius == 1 and B.dim == 2
    X = parse_set("box:-1/2:1/2")
    assert isinstance(X, Box) and X.lo[0] == -0.5 and X.hi[0] == 0.5
    H = parse_set("hs:1,0:0;0,1:0")
    assert isinstance(H, Halfspaces) and H.dim == 2
    S = parse_set("basic:4 - x1^2 - x2^2@2", 2)
    assert isinstance(S, BasicSet) and S.contains([0, 0])
    with pytest.raises(ValueError):
        parse_set("disc:0:1")
    with pytest.raises(ValueError):
        parse_set("basic:1 - x1^2", 1)
