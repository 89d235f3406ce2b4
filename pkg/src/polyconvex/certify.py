"""Exact univariate sign certification with Sturm sequences.

Everything here runs on rational coefficients.  Internally polynomials
are dense lists of :class:`~fractions.Fraction`, lowest degree first.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .poly import Polynomial, as_exact

Dense = list  # list[Fraction], lowest degree first


# -- dense helpers -------------------------------------------------------

def _trim(p: Dense) -> Dense:
    while p and p[-1] == 0:
        p.pop()
    return p


def _dense(p) -> Dense:
    if isinstance(p, Polynomial):
        if p.nvars != 1:
            raise ValueError("expected a univariate polynomial")
        return _trim([as_exact(c) for c in p.univariate_coeffs()])
    return _trim([as_exact(c) for c in p])


def _eval(p: Dense, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def _deriv(p: Dense) -> Dense:
    return [k * p[k] for k in range(1, len(p))]


def _divmod(a: Dense, b: Dense) -> tuple[Dense, Dense]:
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    a = list(a)
    db = len(b) - 1
    lead = b[-1]
    q = [Fraction(0)] * max(len(a) - db, 1)
    while len(a) - 1 >= db and a:
        k = len(a) - 1 - db
        c = a[-1] / lead
        q[k] = c
        for i in range(db + 1):
            a[k + i] -= c * b[i]
        a.pop()
        _trim(a)
    return _trim(q), a


def _monic(p: Dense) -> Dense:
    lead = p[-1]
    return [c / lead for c in p]


def _gcd(a: Dense, b: Dense) -> Dense:
    a, b = list(a), list(b)
    while b:
        _, r = _divmod(a, b)
        a, b = b, r
    return _monic(a) if a else a


def squarefree_part(p: Dense) -> Dense:
    """p / gcd(p, p')."""
    p = _dense(p)
    if len(p) <= 2:
        return p
    g = _gcd(p, _deriv(p))
    if len(g) <= 1:
        return p
    q, r = _divmod(p, g)
    assert not r
    return q


def _sign(x: Fraction) -> int:
    return (x > 0) - (x < 0)


# -- Sturm sequences -----------------------------------------------------

@dataclass(frozen=True)
class SturmSequence:
    """Chain p0 = sqf(p), p1 = p0', p_{k+1} = -rem(p_{k-1}, p_k)."""

    chain: tuple

    @classmethod
    def of(cls, p) -> "SturmSequence":
        p0 = squarefree_part(_dense(p))
        if not p0:
            raise ValueError("Sturm sequence of the zero polynomial")
        chain = [p0]
        p1 = _deriv(p0)
        if p1:
            chain.append(p1)
            while True:
                _, r = _divmod(chain[-2], chain[-1])
                if not r:
                    break
                chain.append([-c for c in r])
        return cls(tuple(tuple(c) for c in chain))

    def polynomials(self) -> list[Polynomial]:
        return [Polynomial.univariate(c) for c in self.chain]

    def variations(self, x) -> int:
        x = as_exact(x)
        signs = [s for s in (_sign(_eval(list(c), x)) for c in self.chain) if s]
        return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def count_real_roots(p, a, b) -> int:
    """Number of distinct real roots of ``p`` in the half-open interval (a, b]."""
    a, b = as_exact(a), as_exact(b)
    if a >= b:
        raise ValueError("need a < b")
    dp = _dense(p)
    if not dp:
        raise ValueError("zero polynomial has infinitely many roots")
    if len(dp) == 1:
        return 0
    s = SturmSequence.of(dp)
    return s.variations(a) - s.variations(b)


def _count_closed(dp: Dense, a: Fraction, b: Fraction) -> int:
    if a == b:
        return int(_eval(dp, a) == 0)
    at_a = int(_eval(dp, a) == 0)
    return at_a + count_real_roots(dp, a, b)


def is_positive_on_interval(p, a, b) -> bool:
    """True iff ``p > 0`` on the closed interval [a, b]."""
    a, b = as_exact(a), as_exact(b)
    if a > b:
        raise ValueError("need a <= b")
    dp = _dense(p)
    if not dp:
        raise ValueError("zero polynomial")
    if _count_closed(dp, a, b):
        return False
    return _eval(dp, (a + b) / 2) > 0


def isolate_roots(p, a, b) -> list[tuple[Fraction, Fraction]]:
    """Disjoint isolating items for the distinct roots of ``p`` in [a, b].

    Each item is ``(lo, hi)``; ``lo == hi`` marks an exact rational root,
    otherwise the unique root lies in the open interval (lo, hi) and ``p``
    is nonzero at both ends.
    """
    a, b = as_exact(a), as_exact(b)
    dp = _dense(p)
    if not dp:
        raise ValueError("zero polynomial")
    if len(dp) == 1:
        return []
    sturm = SturmSequence.of(dp)
    sq = list(sturm.chain[0])
    exact_roots = set()
    if _eval(sq, a) == 0:
        exact_roots.add(a)
    intervals = []
    stack = [(a, b)] if a < b else []
    while stack:
        lo, hi = stack.pop()
        k = sturm.variations(lo) - sturm.variations(hi)  # roots in (lo, hi]
        hi_root = _eval(sq, hi) == 0
        if hi_root:
            exact_roots.add(hi)
            k -= 1
        if k == 0:
            continue
        if k == 1 and not hi_root and _eval(sq, lo) != 0:
            intervals.append((lo, hi))
            continue
        mid = (lo + hi) / 2
        stack.append((lo, mid))
        stack.append((mid, hi))
    return sorted(intervals + [(r, r) for r in exact_roots])


def _has_sign_change_or_negative(dp: Dense, a: Fraction, b: Fraction) -> bool:
    """True iff ``dp`` takes a negative value somewhere in [a, b]."""
    roots = isolate_roots(dp, a, b)
    samples = [a, b]
    prev_hi = a
    for lo, hi in roots:
        samples.append((prev_hi + lo) / 2)
        prev_hi = hi
    samples.append((prev_hi + b) / 2)
    return any(_eval(dp, s) < 0 for s in samples)


def is_nonnegative_on_interval(p, a, b) -> bool:
    """True iff ``p >= 0`` on [a, b] (exact; zero polynomial counts as nonnegative)."""
    a, b = as_exact(a), as_exact(b)
    if a > b:
        raise ValueError("need a <= b")
    dp = _dense(p)
    if not dp:
        return True
    if a == b:
        return _eval(dp, a) >= 0
    return not _has_sign_change_or_negative(dp, a, b)


def second_derivative(p) -> Polynomial:
    dp = _dense(p)
    return Polynomial.univariate(_deriv(_deriv(dp)) or [0])


def is_convex_on_interval(p, a, b, strict: bool = True) -> bool:
    """Convexity of a univariate polynomial on [a, b] from the sign of p''.

    ``strict`` asks for p'' > 0 on the whole closed interval; otherwise
    p'' >= 0 is enough (decided by isolating the roots of p'' and testing
    its sign between them).
    """
    d2 = _deriv(_deriv(_dense(p)))
    if not d2:
        return not strict
    if strict:
        return is_positive_on_interval(d2, a, b)
    return is_nonnegative_on_interval(d2, a, b)


# -- the (1 + (x - xi)^2)^N f family ----------------------------------------

def convexified_curvature_factor(f, N: int, xi=0) -> Polynomial:
    """Polynomial P_N with phi'' = (1 + (x-xi)^2)^(N-2) * P_N for phi = (1+(x-xi)^2)^N f.

    P_N = 4N(N-1) y^2 f + 2N(1+y^2) f + 4N(1+y^2) y f' + (1+y^2)^2 f'' with
    y = x - xi.  Since the prefactor is positive, phi'' and P_N share signs,
    so convexity is certified on a polynomial of degree deg f + 4 whatever N is.
    """
    if N < 0:
        raise ValueError("N must be nonnegative")
    f = _dense(f)
    xi = as_exact(xi)
    y = [-xi, Fraction(1)]
    w = _add([Fraction(1)], _mul(y, y))
    f1 = _deriv(f)
    f2 = _deriv(f1)
    parts = [
        _scale(_mul(_mul(y, y), f), 4 * N * (N - 1)),
        _scale(_mul(w, f), 2 * N),
        _scale(_mul(_mul(w, y), f1), 4 * N),
        _mul(_mul(w, w), f2),
    ]
    total: Dense = []
    for q in parts:
        total = _add(total, q)
    return Polynomial.univariate(_trim(total) or [0])


def _mul(a: Dense, b: Dense) -> Dense:
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _trim(out)


def _add(a: Dense, b: Dense) -> Dense:
    n = max(len(a), len(b))
    out = [(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)]
    return _trim([Fraction(c) for c in out])


def _scale(a: Dense, k) -> Dense:
    return _trim([c * k for c in a])


def convexified_is_convex(f, N: int, a, b, xi=0, strict: bool = True) -> bool:
    """Is (1 + (x-xi)^2)^N f convex on [a, b]?  Decided on the curvature factor."""
    P = _dense(convexified_curvature_factor(f, N, xi))
    if not P:
        return not strict
    if strict:
        return is_positive_on_interval(P, a, b)
    return is_nonnegative_on_interval(P, a, b)


def min_convexifying_N(f, a, b, N_max: int = 64, strict: bool = True, xi=0) -> int | None:
    """Smallest N0 <= N_max such that (1+(x-xi)^2)^N f is convex on [a, b] for every N in [N0, N_max].

    This is the convexity threshold: phi_0 = f may already be convex while
    some larger N is not, so the first convex N alone says nothing.  Returns
    None when phi_{N_max} itself is not convex.  Requires f > 0 on [a, b].
    """
    if not is_positive_on_interval(f, a, b):
        raise ValueError("f must be positive on the interval")
    threshold = None
    for N in range(N_max, -1, -1):
        if not convexified_is_convex(f, N, a, b, xi=xi, strict=strict):
            break
        threshold = N
    return threshold
