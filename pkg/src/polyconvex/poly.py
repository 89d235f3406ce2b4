"""Sparse multivariate polynomials over exact rationals or doubles.

A :class:`Polynomial` is an immutable map from exponent tuples to nonzero
coefficients.  ``exact=True`` keeps every coefficient as a
:class:`fractions.Fraction`; ``exact=False`` stores Python floats.  Mixed
arithmetic degrades to floats.

The coefficient bounds used by the convexification and shift
constructions (``bound_A``, ``bound_B``, ``bound_DD``, ``bound_D_uni``,
``cauchy_K``) live here too, since they only depend on coefficients.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping, Sequence

import numpy as np

Monomial = tuple[int, ...]

#: degree reported for the zero polynomial
ZERO_DEGREE = -1


def as_exact(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, Rational)):
        return Fraction(c)
    if isinstance(c, float):
        if not math.isfinite(c):
            raise ValueError(f"non-finite coefficient {c!r}")
        return Fraction(c)
    if isinstance(c, str):
        return Fraction(c)
    if isinstance(c, np.integer):
        return Fraction(int(c))
    if isinstance(c, np.floating):
        return Fraction(float(c))
    raise TypeError(f"cannot convert {type(c).__name__} to an exact scalar")


def isqrt_frac_upper(q: Fraction, digits: int = 13) -> Fraction:
    """Smallest-ish rational >= sqrt(q); exact when q is a rational square.

    The over-estimate is at most ``10**-digits / denominator(q)``.
    """
    q = as_exact(q)
    if q < 0:
        raise ValueError("square root of a negative number")
    p, d = q.numerator, q.denominator
    pd = p * d
    s = math.isqrt(pd)
    if s * s == pd:
        return Fraction(s, d)
    scale = 10**digits
    r = math.isqrt(pd * scale * scale) + 1
    return Fraction(r, d * scale)


def _iroot(n: int, k: int) -> int:
    """floor(n ** (1/k)) for n >= 0."""
    if n < 2:
        return n
    x = 1 << ((n.bit_length() + k - 1) // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    while x**k > n:
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


def root_frac_upper(q: Fraction, k: int, digits: int = 13) -> Fraction:
    """Rational >= q**(1/k) for q >= 0; exact for perfect k-th powers."""
    q = as_exact(q)
    if q < 0:
        raise ValueError("root of a negative number")
    if k == 1:
        return q
    p, d = q.numerator, q.denominator
    n = p * d ** (k - 1)
    r = _iroot(n, k)
    if r**k == n:
        return Fraction(r, d)
    scale = 10**digits
    n2 = n * scale**k
    r2 = _iroot(n2, k)
    if r2**k != n2:
        r2 += 1
    return Fraction(r2, d * scale)


class Polynomial:
    """Immutable sparse polynomial in ``nvars`` variables."""

    __slots__ = ("_terms", "nvars", "exact", "_compiled")

    def __init__(self, terms: Mapping[Monomial, object] | Iterable, nvars: int, exact: bool = True):
        if nvars < 1:
            raise ValueError("nvars must be positive")
        items = terms.items() if isinstance(terms, Mapping) else terms
        conv = as_exact if exact else float
        out: dict[Monomial, object] = {}
        for mono, c in items:
            mono = tuple(int(e) for e in mono)
            if len(mono) != nvars:
                raise ValueError(f"monomial {mono} has length {len(mono)}, expected {nvars}")
            if any(e < 0 for e in mono):
                raise ValueError(f"negative exponent in {mono}")
            c = conv(c)
            if c:
                out[mono] = out.get(mono, 0) + c
                if not out[mono]:
                    del out[mono]
        object.__setattr__(self, "_terms", out)
        object.__setattr__(self, "nvars", nvars)
        object.__setattr__(self, "exact", exact)
        object.__setattr__(self, "_compiled", None)

    def __setattr__(self, name, value):
        raise AttributeError("Polynomial is immutable")

    # -- constructors -------------------------------------------------
    @classmethod
    def zero(cls, nvars: int, exact: bool = True) -> "Polynomial":
        return cls({}, nvars, exact)

    @classmethod
    def constant(cls, c, nvars: int, exact: bool = True) -> "Polynomial":
        return cls({(0,) * nvars: c}, nvars, exact)

    @classmethod
    def variable(cls, i: int, nvars: int, exact: bool = True) -> "Polynomial":
        """The coordinate ``x_{i+1}`` (``i`` is 0-based)."""
        if not 0 <= i < nvars:
            raise ValueError(f"variable index {i} out of range for {nvars} variables")
        mono = tuple(1 if j == i else 0 for j in range(nvars))
        return cls({mono: 1}, nvars, exact)

    @classmethod
    def univariate(cls, coeffs: Sequence, exact: bool = True) -> "Polynomial":
        """Build ``sum coeffs[k] * x**k`` (lowest degree first)."""
        return cls({(k,): c for k, c in enumerate(coeffs)}, 1, exact)

    @classmethod
    def norm_squared(cls, nvars: int, exact: bool = True, center: Sequence | None = None) -> "Polynomial":
        """|x - center|^2."""
        p = cls.zero(nvars, exact)
        for i in range(nvars):
            xi = cls.variable(i, nvars, exact)
            if center is not None and center[i]:
                xi = xi - center[i]
            p = p + xi * xi
        return p

    # -- basic access -------------------------------------------------
    @property
    def terms(self) -> Mapping[Monomial, object]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def coeff(self, mono: Monomial):
        return self._terms.get(tuple(mono), Fraction(0) if self.exact else 0.0)

    @property
    def degree(self) -> int:
        if not self._terms:
            return ZERO_DEGREE
        return max(sum(m) for m in self._terms)

    def constant_term(self):
        return self.coeff((0,) * self.nvars)

    def is_constant(self) -> bool:
        return self.degree <= 0

    def to_float(self) -> "Polynomial":
        if not self.exact:
            return self
        return Polynomial({m: float(c) for m, c in self._terms.items()}, self.nvars, exact=False)

    def to_exact(self) -> "Polynomial":
        if self.exact:
            return self
        return Polynomial(self._terms, self.nvars, exact=True)

    def univariate_coeffs(self) -> list:
        """Dense coefficients, lowest degree first (univariate only)."""
        if self.nvars != 1:
            raise ValueError("univariate_coeffs needs a polynomial in one variable")
        zero = Fraction(0) if self.exact else 0.0
        out = [zero] * (self.degree + 1)
        for (k,), c in self._terms.items():
            out[k] = c
        return out

    # -- arithmetic ---------------------------------------------------
    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.nvars != self.nvars:
                raise ValueError(f"variable count mismatch: {self.nvars} vs {other.nvars}")
            return other
        if isinstance(other, (float, np.floating)):
            return Polynomial.constant(float(other), self.nvars, exact=False)
        return Polynomial.constant(other, self.nvars, exact=self.exact)

    def __add__(self, other):
        other = self._coerce(other)
        exact = self.exact and other.exact
        terms = dict(self._terms)
        for m, c in other._terms.items():
            terms[m] = terms.get(m, 0) + c
        return Polynomial(terms, self.nvars, exact)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial({m: -c for m, c in self._terms.items()}, self.nvars, self.exact)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        exact = self.exact and other.exact
        terms: dict[Monomial, object] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                terms[m] = terms.get(m, 0) + c1 * c2
        return Polynomial(terms, self.nvars, exact)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Polynomial):
            if not other.is_constant() or other.is_zero():
                raise ZeroDivisionError("can only divide by a nonzero constant")
            other = other.constant_term()
        if not other:
            raise ZeroDivisionError("division by zero")
        if self.exact and not isinstance(other, (float, np.floating)):
            inv = 1 / as_exact(other)
            return Polynomial({m: c * inv for m, c in self._terms.items()}, self.nvars, True)
        return Polynomial({m: float(c) / float(other) for m, c in self._terms.items()}, self.nvars, False)

    def __pow__(self, k: int):
        if not isinstance(k, (int, np.integer)) or k < 0:
            raise ValueError("exponent must be a nonnegative integer")
        result = Polynomial.constant(1, self.nvars, self.exact)
        base = self
        k = int(k)
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.nvars == other.nvars and self._terms == other._terms
        if isinstance(other, (int, float, Fraction)):
            return self == self._coerce(other)
        return NotImplemented

    def __hash__(self):
        return hash((self.nvars, frozenset(self._terms.items())))

    def __repr__(self):
        from .parse import format_polynomial

        return f"Polynomial({format_polynomial(self)!r}, nvars={self.nvars}, exact={self.exact})"

    def __str__(self):
        from .parse import format_polynomial

        return format_polynomial(self)

    # -- evaluation ---------------------------------------------------
    def evaluate(self, x: Sequence):
        """Term-sum value at ``x``; exact when both polynomial and point are rational."""
        x = list(x)
        if len(x) != self.nvars:
            raise ValueError(f"point has dimension {len(x)}, polynomial has {self.nvars} variables")
        if self.exact and all(isinstance(v, (int, Fraction)) for v in x):
            total = Fraction(0)
        else:
            x = [float(v) for v in x]
            total = 0.0
        for mono, c in self._terms.items():
            t = c if isinstance(total, Fraction) else float(c)
            for v, e in zip(x, mono):
                if e:
                    t = t * v**e
            total += t
        return total

    __call__ = evaluate

    def compiled(self) -> "CompiledPoly":
        if self._compiled is None:
            object.__setattr__(self, "_compiled", CompiledPoly(self))
        return self._compiled

    def evaluate_many(self, points) -> np.ndarray:
        """Vectorised double-precision evaluation at the rows of ``points``."""
        return self.compiled()(points)

    # -- calculus -----------------------------------------------------
    def derivative(self, i: int) -> "Polynomial":
        terms = {}
        for mono, c in self._terms.items():
            e = mono[i]
            if e:
                m = list(mono)
                m[i] = e - 1
                terms[tuple(m)] = c * e
        return Polynomial(terms, self.nvars, self.exact)

    def gradient(self) -> list["Polynomial"]:
        return [self.derivative(i) for i in range(self.nvars)]

    def hessian(self) -> list[list["Polynomial"]]:
        grad = self.gradient()
        n = self.nvars
        H = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                H[i][j] = H[j][i] = grad[i].derivative(j)
        return H

    def gradient_at(self, x) -> np.ndarray:
        return self.compiled().gradient(np.asarray(x, dtype=float))

    def hessian_at(self, x) -> np.ndarray:
        return self.compiled().hessian(np.asarray(x, dtype=float))

    # -- structure ----------------------------------------------------
    def homogeneous_part(self, j: int) -> "Polynomial":
        return Polynomial({m: c for m, c in self._terms.items() if sum(m) == j}, self.nvars, self.exact)

    def leading_form(self) -> "Polynomial":
        if self.is_zero():
            raise ValueError("the zero polynomial has no leading form")
        return self.homogeneous_part(self.degree)

    def substitute(self, polys: Sequence["Polynomial"]) -> "Polynomial":
        """Compose: replace ``x_i`` by ``polys[i]`` (all in a common ring)."""
        if len(polys) != self.nvars:
            raise ValueError("need one polynomial per variable")
        if not polys:
            raise ValueError("empty substitution")
        target = polys[0].nvars
        exact = self.exact and all(p.exact for p in polys)
        powers: list[dict[int, Polynomial]] = [{0: Polynomial.constant(1, target, exact)} for _ in polys]

        def power(i: int, e: int) -> Polynomial:
            cache = powers[i]
            if e not in cache:
                k = max(k for k in cache if k < e)
                p = cache[k]
                for kk in range(k + 1, e + 1):
                    p = p * polys[i]
                    cache[kk] = p
            return cache[e]

        out = Polynomial.zero(target, exact)
        for mono, c in self._terms.items():
            t = Polynomial.constant(c, target, exact)
            for i, e in enumerate(mono):
                if e:
                    t = t * power(i, e)
            out = out + t
        return out

    def affine_substitute(self, shift: Sequence, scale) -> "Polynomial":
        """p(shift + scale * u) as a polynomial in ``u``."""
        subs = []
        for i in range(self.nvars):
            u = Polynomial.variable(i, self.nvars, self.exact)
            subs.append(u * scale + shift[i])
        return self.substitute(subs)

    def restrict_to_line(self, line: "LineParam") -> "Polynomial":
        """Univariate ``t -> p(gamma(t))`` with ``gamma(t) = s*beta*t + alpha``.

        ``s`` is ``line.scale``, i.e. sqrt(1+|alpha|^2) (a rational upper
        bound in exact mode when the square root is irrational).
        """
        if len(line.alpha) != self.nvars:
            raise ValueError("line dimension does not match polynomial")
        exact = self.exact and line.exact
        t = Polynomial.variable(0, 1, exact)
        s = line.scale
        subs = [t * (s * b) + a for a, b in zip(line.alpha, line.beta)]
        return self.substitute(subs)

    def l1_norm(self):
        return sum((abs(c) for c in self._terms.values()), Fraction(0) if self.exact else 0.0)


class CompiledPoly:
    """Numpy evaluator for a fixed polynomial (value, gradient, Hessian)."""

    def __init__(self, p: Polynomial):
        self.nvars = p.nvars
        if len(p):
            self.exps = np.array(list(p._terms.keys()), dtype=np.int64)
            self.coefs = np.array([float(c) for c in p._terms.values()])
        else:
            self.exps = np.zeros((0, p.nvars), dtype=np.int64)
            self.coefs = np.zeros(0)
        self._grad = None
        self._hess = None
        self._poly = p

    def __call__(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        if single:
            pts = pts[None, :]
        if pts.shape[1] != self.nvars:
            raise ValueError(f"points have dimension {pts.shape[1]}, expected {self.nvars}")
        if not len(self.coefs):
            vals = np.zeros(len(pts))
        else:
            mons = np.ones((len(pts), len(self.coefs)))
            for i in range(self.nvars):
                e = self.exps[:, i]
                if e.any():
                    mons *= pts[:, i : i + 1] ** e[None, :]
            vals = mons @ self.coefs
        return vals[0] if single else vals

    def gradient(self, x: np.ndarray) -> np.ndarray:
        if self._grad is None:
            self._grad = [g.compiled() for g in self._poly.gradient()]
        return np.array([g(x) for g in self._grad])

    def hessian(self, x: np.ndarray) -> np.ndarray:
        if self._hess is None:
            self._hess = [[h.compiled() for h in row] for row in self._poly.hessian()]
        return np.array([[h(x) for h in row] for row in self._hess])


@dataclass(frozen=True)
class LineParam:
    """Affine line ``t -> sqrt(1+|alpha|^2) * beta * t + alpha`` with alpha _|_ beta, |beta| = 1."""

    alpha: tuple
    beta: tuple

    def __post_init__(self):
        exact = all(isinstance(v, (int, Fraction)) for v in (*self.alpha, *self.beta))
        if exact:
            alpha = tuple(as_exact(v) for v in self.alpha)
            beta = tuple(as_exact(v) for v in self.beta)
        else:
            alpha = tuple(float(v) for v in self.alpha)
            beta = tuple(float(v) for v in self.beta)
        if len(alpha) != len(beta) or not alpha:
            raise ValueError("alpha and beta must be nonempty vectors of equal length")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        dot = sum(a * b for a, b in zip(alpha, beta))
        nb2 = sum(b * b for b in beta)
        if exact:
            if dot != 0:
                raise ValueError("alpha and beta must be orthogonal")
            if nb2 != 1:
                raise ValueError("beta must have unit length")
        else:
            na = math.sqrt(sum(a * a for a in alpha))
            if abs(dot) > 1e-12 * max(na, 1e-300) and abs(dot) > 0:
                raise ValueError("alpha and beta must be orthogonal")
            if abs(math.sqrt(nb2) - 1) > 1e-12:
                raise ValueError("beta must have unit length")

    @property
    def exact(self) -> bool:
        return isinstance(self.alpha[0], Fraction)

    @property
    def scale(self):
        """sqrt(1+|alpha|^2); rational upper bound in exact mode."""
        s2 = 1 + sum(a * a for a in self.alpha)
        if self.exact:
            return isqrt_frac_upper(s2)
        return math.sqrt(s2)

    @property
    def scale_is_exact(self) -> bool:
        if not self.exact:
            return False
        s = self.scale
        return s * s == 1 + sum(a * a for a in self.alpha)

    def point(self, t):
        s = self.scale
        return tuple(s * b * t + a for a, b in zip(self.alpha, self.beta))


# -- coefficient bounds --------------------------------------------------

def _check_radius(R):
    if R <= 0:
        raise ValueError(f"radius must be positive, got {R}")


def _graded_sums(p: Polynomial, R, order: int):
    """sum_nu |a_nu| * j(j-1)..(j-order+1) * R^(j-order), j = |nu|."""
    total = Fraction(0) if p.exact and isinstance(R, (int, Fraction)) else 0.0
    if isinstance(total, float):
        R = float(R)
    for mono, c in p.items():
        j = sum(mono)
        if j < order:
            continue
        fall = 1
        for k in range(order):
            fall *= j - k
        total += fall * abs(c) * R ** (j - order)
    return total


def bound_A(h: Polynomial, R):
    """Bound on |h| over the ball B(R): sum |a_nu| R^|nu|."""
    _check_radius(R)
    return _graded_sums(h, R, 0)


def bound_B(h: Polynomial, R):
    """Bound on |grad h| over B(R): sum |nu| |a_nu| R^(|nu|-1)."""
    _check_radius(R)
    return _graded_sums(h, R, 1)


def bound_DD(f: Polynomial, R, line_radius=None):
    """Bound for first and second derivatives of ``f`` along the lines ``gamma_{alpha,beta}``.

    ``line_radius`` bounds |alpha|; it defaults to ``R`` (lines meeting
    B(R)).  When the point set is B(R) but the lines are centred elsewhere
    (shifted weights), pass the larger radius here.  In exact mode the
    irrational sqrt(1+r^2) is replaced by a rational upper bound.
    """
    _check_radius(R)
    r = R if line_radius is None else line_radius
    _check_radius(r)
    s1 = _graded_sums(f, R, 1)
    s2 = _graded_sums(f, R, 2)
    if isinstance(s1, Fraction):
        r = as_exact(r)
        root = isqrt_frac_upper(1 + r * r)
        one = Fraction(1)
    else:
        r = float(r)
        root = math.sqrt(1 + r * r)
        one = 1.0
    return max(one, root * s1, (1 + r * r) * s2)


def bound_D_uni(f: Polynomial, R):
    """max{1, sum (d-i)|a_i| R^(d-i-1), sum (d-i)(d-i-1)|a_i| R^(d-i-2)} for univariate f."""
    if f.nvars != 1:
        raise ValueError("bound_D_uni needs a univariate polynomial")
    _check_radius(R)
    one = Fraction(1) if f.exact and isinstance(R, (int, Fraction)) else 1.0
    return max(one, _graded_sums(f, R, 1), _graded_sums(f, R, 2))


def cauchy_K(f: Polynomial):
    """1 + 2 max_i |a_i/a_0|^(1/i) (coefficients indexed from the leading one).

    Every complex root of f (hence every real root of f, f', f'') has
    modulus below K.  Exact mode returns a rational upper bound.
    """
    if f.nvars != 1:
        raise ValueError("cauchy_K needs a univariate polynomial")
    d = f.degree
    if d < 1:
        raise ValueError("cauchy_K needs a polynomial of degree >= 1")
    c = f.univariate_coeffs()
    lead = c[d]
    if f.exact:
        best = Fraction(0)
        for i in range(1, d + 1):
            r = abs(c[d - i] / lead)
            if r:
                best = max(best, root_frac_upper(r, i))
        return 1 + 2 * best
    best = 0.0
    for i in range(1, d + 1):
        r = abs(c[d - i] / lead)
        if r:
            best = max(best, r ** (1.0 / i))
    return 1 + 2 * best
