import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polyconvex import (Ball, Box, Polynomial, coercive_augment, convexify_on_compact, falsify_convexity,
                        leading_form_positive, parse, phi_N, script_N, sylvester_psd)
from polyconvex.certify import convexified_is_convex, is_positive_on_interval
from polyconvex.convexify import (Convexified, PositivityError, TermBudgetExceeded, certified_lower_bound,
                                  falsify_at_points, strict_exponent)
from polyconvex.oracles import fd_hessian, naive_eval

MOTZKIN = "1 + x1^2*x2^2*(x1^2 + x2^2 - 3)"


# -- the exponent bound ------------------------------------------------------------

def test_script_N_examples():
    assert script_N(1, 1, 1) == 6
    assert script_N(2, 1, 1) == 3
    assert script_N(1, 3, 6) == 146
    assert isinstance(script_N(1, 1, 1), Fraction)


def test_script_N_rejects_nonpositive():
    for args in ((0, 1, 1), (1, 0, 1), (1, 1, -1)):
        with pytest.raises(ValueError):
            script_N(*args)


pos = st.fractions(min_value=Fraction(1, 16), max_value=16, max_denominator=16)


@settings(max_examples=200, deadline=None)
@given(pos, pos, pos, pos)
def test_script_N_monotone(m, R, D, t):
    # D/m + m/(16D) is monotone in m and D only while m <= 4D; in use m <= min f <= D
    if m + t <= 4 * D:
        assert script_N(m + t, R, D) <= script_N(m, R, D)
    if m <= 4 * D:
        assert script_N(m, R, D + t) >= script_N(m, R, D)
    if R >= 1:
        assert script_N(m, R + t, D) >= script_N(m, R, D)


def test_script_N_not_monotone_in_m_beyond_4D():
    D = Fraction(1, 16)
    assert script_N(Fraction(2), Fraction(1, 16), D) > script_N(Fraction(31, 16), Fraction(1, 16), D)


def test_strict_exponent():
    assert strict_exponent(Fraction(6)) == 7
    assert strict_exponent(Fraction(54, 25)) == 3
    assert strict_exponent(2.5) == 3


# -- phi_N ----------------------------------------------------------------------------

def test_phi_N_examples():
    f = parse("x^2 + 1", 1)
    assert phi_N(f, 1) == parse("x^4 + 2*x^2 + 1", 1)
    assert phi_N(f, 0) == f
    assert phi_N(parse("1", 1), 2) == parse("(1 + x^2)^2", 1)
    assert phi_N(parse("x1", 2), 1, xi=[1, 0]) == parse("x1*(1 + (x1-1)^2 + x2^2)", 2)


def test_phi_N_lazy_fallback():
    f = parse(MOTZKIN, 2)
    lazy = phi_N(f, 400, term_budget=1000)
    assert isinstance(lazy, Convexified)
    with pytest.raises(TermBudgetExceeded):
        phi_N(f, 400, term_budget=1000, lazy=False)
    with pytest.raises(ValueError):
        phi_N(f, -1)


def test_lazy_and_expanded_agree():
    rng = random.Random(1)
    for f_text, n, N, xi in [(MOTZKIN, 2, 3, None), ("x1^3 - x2 + 2", 2, 5, [0.25, -0.5]), ("x^2 - x + 1", 1, 7, [0.5])]:
        f = parse(f_text, n)
        lazy = Convexified(f, N, xi)
        full = Convexified(f, N, xi).expand().to_float()
        for _ in range(10):
            x = np.array([rng.uniform(-1.5, 1.5) for _ in range(n)])
            v = full.evaluate_many(x[None, :])[0]
            assert abs(lazy(x) - v) <= 1e-10 * max(1.0, abs(v))
            assert np.allclose(lazy.gradient(x), full.gradient_at(x), rtol=1e-10, atol=1e-10 * max(1.0, abs(v)))
            H = full.hessian_at(x)
            assert np.allclose(lazy.hessian(x), H, rtol=1e-10, atol=1e-10 * max(1.0, np.max(np.abs(H))))


def test_lazy_exact_evaluation():
    f = parse("x^2 + 1", 1)
    assert Convexified(f, 3)([Fraction(1, 2)]) == Fraction(5, 4) ** 4


def test_lazy_hessian_matches_fd():
    f = parse(MOTZKIN, 2)
    phi = Convexified(f, 4, [0.1, 0.2])
    x = np.array([0.7, -0.4])
    H = phi.hessian(x)
    assert np.allclose(H, fd_hessian(phi, x), rtol=1e-6, atol=1e-6 * np.max(np.abs(H)))


# -- convexify_on_compact -----------------------------------------------------------

def test_convexify_ball_example():
    cert = convexify_on_compact(parse("x1^2 + x2^2 + 1", 2), Ball([0, 0], 1))
    assert (cert.m, cert.R, cert.D, cert.scriptN, cert.N) == (1, 1, 8, 258, 259)


def test_convexify_interval_example():
    cert = convexify_on_compact(parse("x^2 + 1", 1), Box([-1], [1]))
    assert (cert.m, cert.R, cert.D, cert.scriptN, cert.N) == (1, 1, 4, 66, 67)
    assert cert.method == "univariate-sturm" and cert.certified is True


def test_convexify_constant():
    cert = convexify_on_compact(parse("5", 1), Box([-1], [1]))
    assert (cert.m, cert.R, cert.D) == (5, 1, 1)
    # the four terms are 0.5125, 1.4, 2.16 and 0.2
    assert cert.scriptN == Fraction(54, 25)
    assert cert.N == 3


def test_convexify_off_centre_doubles_R():
    f = parse("x^2 + 1", 1)
    cert = convexify_on_compact(f, Box([-1], [1]), xi=[Fraction(1, 2)])
    assert cert.R == 2 and cert.N > 67 and cert.certified
    assert cert.center == (Fraction(1, 2),)


def test_convexify_errors():
    with pytest.raises(PositivityError):
        convexify_on_compact(parse("x", 1), Box([-1], [1]))
    with pytest.raises(ValueError):
        convexify_on_compact(parse("x + 2", 1), Box([1], [1]))
    with pytest.raises(ValueError):
        convexify_on_compact(parse("x1 + 2", 2), Box([-1], [1]))


def test_certified_lower_bound_is_below_minimum():
    f = parse(MOTZKIN, 2) + Fraction(1, 2)
    X = Box([-1.2, -1.2], [1.2, 1.2])
    m, method = certified_lower_bound(f, X)
    assert 0 < m <= Fraction(1, 2)
    vals = naive_eval(f, X.grid_sample(0.01))
    assert float(m) <= vals.min()
    assert method == "lipschitz-grid"
    assert certified_lower_bound(parse("x1^2 + x2^2 + 1", 2), Ball([0, 0], 1)) == (1, "even-monomials")
    assert certified_lower_bound(parse("x^2 - x + 1", 1), Box([-1], [1]))[1] == "sturm"


def test_certified_lower_bound_gives_up_honestly():
    # minimum 1/10 at (1, 1) is too thin for the Lipschitz margin at the refinement cap
    with pytest.raises(PositivityError):
        certified_lower_bound(parse(MOTZKIN, 2) + Fraction(1, 10), Box([-1.5, -1.5], [1.5, 1.5]), max_refine=2)


def _random_positive_case(rng):
    while True:
        deg = rng.randint(0, 4)
        f = Polynomial.univariate([Fraction(rng.randint(-24, 24), 8) for _ in range(deg + 1)])
        a = Fraction(rng.randint(-16, 12), 8)
        b = a + Fraction(rng.randint(1, 16), 8)
        if b <= 2 and not f.is_zero() and is_positive_on_interval(f, a, b):
            return f, a, b


def test_random_univariate_certificates_hold():
    rng = random.Random(99)
    for _ in range(12):
        f, a, b = _random_positive_case(rng)
        X = Box([float(a)], [float(b)])
        cert = convexify_on_compact(f, X)
        assert cert.certified, (f, a, b)
        for N in (cert.N, cert.N + 1):
            assert convexified_is_convex(f, N, a, b)
            # the sampled falsifier must agree with the Sturm certificate
            assert falsify_convexity(Convexified(f, N), X, float(b - a) / 200) is None


def test_multivariate_sampled_certificate():
    f = parse("x1^2 + x2^2 - x1*x2 + 2", 2)
    cert = convexify_on_compact(f, Ball([0, 0], 1), sample_mesh=0.1)
    assert cert.method == "line-sampled" and cert.certified


# -- Sylvester and falsification -----------------------------------------------------

def test_sylvester_examples():
    assert sylvester_psd([[2, 0], [0, 2]]) == "positive-definite"
    assert sylvester_psd([[1, 2], [2, 1]]) == "indefinite"
    assert sylvester_psd([[0, 0], [0, 0]]) == "positive-semidefinite"
    assert sylvester_psd([[0, 0], [0, -1]]) == "indefinite"
    assert sylvester_psd(np.array([[2.0, 1.0], [1.0, 2.0]])) == "positive-definite"


def test_sylvester_errors():
    with pytest.raises(ValueError):
        sylvester_psd([[1, 2], [0, 1]])
    with pytest.raises(ValueError):
        sylvester_psd(np.eye(13))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**31 - 1))
def test_sylvester_matches_eigenvalues(n, seed):
    rng = np.random.default_rng(seed)
    B = rng.integers(-3, 4, size=(n, n))
    H = (B @ B.T) if seed % 2 else (B + B.T)
    Hf = [[Fraction(int(v)) for v in row] for row in H]
    eig = np.linalg.eigvalsh(H.astype(float))
    got = sylvester_psd(Hf)
    if eig.min() > 1e-9:
        assert got == "positive-definite"
    elif eig.min() < -1e-9:
        assert got == "indefinite"
    else:
        assert got in ("positive-semidefinite", "positive-definite")


def test_falsify_examples():
    phi1 = phi_N(parse("(x-4)^2 + 1", 1), 1)
    w = falsify_convexity(phi1, Box([0], [4]), 0.1)
    assert w is not None and 0 < w[0] < 4
    assert phi1.to_float().hessian_at(w)[0, 0] < 0
    assert falsify_convexity(parse("x1^2 + x2^2", 2), Ball([0, 0], 1), 0.1) is None
    assert falsify_convexity(parse("-x1^2", 2), Ball([0, 0], 1), 0.5) is not None


def test_motzkin_phi_not_convex_far_out():
    f = parse(MOTZKIN, 2)
    lf = leading_form_positive(f)
    assert lf.status == "witness-zero-or-negative"
    sphere = Ball([0.0, 0.0], 10.0).boundary_points(720)
    found = [N for N in (1, 2, 3) if falsify_at_points(Convexified(f, N), sphere) is not None]
    assert found


# -- leading form and augmentation ------------------------------------------------------

def test_leading_form_examples():
    assert leading_form_positive(parse("x1^2 + x2^2", 2)).status == "certified-positive"
    assert leading_form_positive(parse("x1^4 + x2^4", 2)).status == "certified-positive"
    res = leading_form_positive(parse(MOTZKIN, 2))
    assert res.status == "witness-zero-or-negative"
    assert parse(MOTZKIN, 2).leading_form().evaluate([Fraction(v) for v in res.point]) <= 0
    with pytest.raises(ValueError):
        leading_form_positive(parse("0", 2))


def test_leading_form_negative_and_three_variables():
    assert leading_form_positive(parse("x1^3 + 1", 1)).status == "witness-zero-or-negative"
    assert leading_form_positive(parse("x1^2 + x2^2 + x3^2 - x1*x2", 3)).status == "certified-positive"
    assert leading_form_positive(parse("x1^2 - x2^2 + x3^2", 3)).status == "witness-zero-or-negative"


def test_coercive_augment_examples():
    m = parse(MOTZKIN, 2)
    aug = coercive_augment(m, 1, 1, 8)
    assert aug == m + parse("(x1^2 + x2^2)^4 + 1", 2)
    assert aug.leading_form() == parse("(x1^2 + x2^2)^4", 2)
    assert leading_form_positive(aug).status == "certified-positive"
    assert coercive_augment(parse("0", 1), 1, 1, 2) == parse("x^2 + 1", 1)
    q = coercive_augment(parse("-x1", 2), 1, 2, 2)
    assert q == parse("x1^2 + x2^2 - x1 + 2", 2)
    # (x1 - 1/2)^2 + x2^2 + 7/4
    assert q - parse("(x1 - 1/2)^2 + x2^2", 2) == parse("7/4", 2)


def test_coercive_augment_errors():
    with pytest.raises(ValueError):
        coercive_augment(parse("x1^2", 1), 1, 1, 3)
    with pytest.raises(ValueError):
        coercive_augment(parse("x1^2", 1), 1, 1, 2)
    with pytest.raises(ValueError):
        coercive_augment(parse("x1", 1), 0, 1, 2)
