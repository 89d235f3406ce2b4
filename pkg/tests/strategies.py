"""Hypothesis strategies and seeded generators shared by the test modules."""
from fractions import Fraction
import random

from hypothesis import strategies as st

from polyconvex import LineParam, Polynomial

small_fracs = st.fractions(min_value=-3, max_value=3, max_denominator=8)


@st.composite
def polynomials(draw, nvars=None, max_deg=4, max_terms=6, exact=True):
    n = draw(st.integers(1, 3)) if nvars is None else nvars
    monos = st.tuples(*[st.integers(0, max_deg) for _ in range(n)]).filter(lambda m: sum(m) <= max_deg)
    terms = draw(st.dictionaries(monos, small_fracs, max_size=max_terms))
    if not exact:
        terms = {m: float(c) for m, c in terms.items()}
    return Polynomial(terms, n, exact=exact)


@st.composite
def univariate(draw, max_deg=6, nonconstant=False):
    deg = draw(st.integers(1 if nonconstant else 0, max_deg))
    coeffs = [draw(small_fracs) for _ in range(deg + 1)]
    if nonconstant and coeffs[-1] == 0:
        coeffs[-1] = Fraction(1)
    return Polynomial.univariate(coeffs)


def rational_line(rng: random.Random, n: int) -> LineParam:
    """Exact line with 1 + |alpha|^2 a rational square, so the scale is exact."""
    if n == 1:
        return LineParam((Fraction(0),), (Fraction(rng.choice([-1, 1])),))
    s = Fraction(rng.randint(-9, 9), rng.randint(1, 9))
    e = [(1 - s * s) / (1 + s * s), 2 * s / (1 + s * s)]
    t = Fraction(rng.randint(1, 12), rng.randint(1, 12))
    a = (t * t - 1) / (2 * t)
    i, j = rng.sample(range(n), 2)
    alpha = [Fraction(0)] * n
    beta = [Fraction(0)] * n
    alpha[i], alpha[j] = a * e[0], a * e[1]
    beta[i], beta[j] = -e[1], e[0]
    return LineParam(tuple(alpha), tuple(beta))


def seeded_poly(rng: random.Random, n: int, max_deg: int, terms: int = 6, lo=-3, hi=3) -> Polynomial:
    out = {}
    for _ in range(terms):
        while True:
            m = tuple(rng.randint(0, max_deg) for _ in range(n))
            if sum(m) <= max_deg:
                break
        out[m] = Fraction(rng.randint(lo * 8, hi * 8), 8)
    return Polynomial(out, n)
