"""Constructive shift h = sum_i phi(g_i) g_i for minimising f on X = {g_i >= 0}.

phi(t) = (t/A - 1 + delta/(2A))^(2N) is an even power of an affine
polynomial, so phi(g_i) is a square.  With the parameters from
``shift_params``, 0 <= h < eps on X and every value of f - h on the ball
B(R) is at least min_X (f - h) - eps.

N is usually enormous (10^5 and up), so h is kept in closed form and
evaluated in the log domain; it is never expanded.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import certify
from .poly import Polynomial, as_exact, bound_A, bound_B
from .convexify import TermBudgetExceeded, strict_exponent

STURM_MAX_DEGREE = 200


def lojasiewicz_exponent_bound(d: int, n: int, r: int) -> int:
    """Exponent bound d (6d - 3)^(n + r - 1) for the distance inequality of {g_i >= 0}."""
    for v in (d, n, r):
        if not isinstance(v, int) or v < 1:
            raise ValueError("d, n and r must be positive integers")
    return d * (6 * d - 3) ** (n + r - 1)


def delta0_lojasiewicz(C_prime, eta, L):
    """C' eta^L."""
    if C_prime <= 0:
        raise ValueError("C' must be positive")
    if eta < 0:
        raise ValueError("eta must be nonnegative")
    return C_prime * eta**L


def delta0_concave(eta, mu):
    """eta^2 mu / 2, valid for strongly concave constraints."""
    if mu <= 0:
        raise ValueError("mu must be positive")
    if eta < 0:
        raise ValueError("eta must be nonnegative")
    return eta * eta * mu / 2


# -- the univariate interpolant -----------------------------------------------

@dataclass(frozen=True)
class AffinePower:
    """(scale * t + offset)^exponent, kept unexpanded."""

    scale: object
    offset: object
    exponent: int

    @classmethod
    def from_params(cls, A, delta, N: int) -> "AffinePower":
        return cls(1 / A, -1 + delta / (2 * A), 2 * N)

    def base(self, t):
        return self.scale * t + self.offset

    def __call__(self, t):
        """Exact for rational t and small exponents; log domain otherwise."""
        if isinstance(t, (int, Fraction)) and isinstance(self.scale, Fraction) and self.exponent <= 4096:
            return self.base(t) ** self.exponent
        return float(np.exp(self.log_abs(np.array([float(t)]))[0]))

    def log_abs(self, t: np.ndarray) -> np.ndarray:
        """log |phi(t)|, -inf where the base vanishes."""
        c = float(self.offset + 1)
        return _big_times(self.exponent, _log_abs_base(float(self.scale), c, t))

    def to_polynomial(self, term_budget: int = 100_000) -> Polynomial:
        if self.exponent + 1 > term_budget:
            raise TermBudgetExceeded(f"phi has {self.exponent + 1} terms")
        exact = isinstance(self.scale, Fraction)
        return Polynomial.univariate([self.offset, self.scale], exact=exact) ** self.exponent

    def __str__(self):
        return f"({self.scale}*t + {self.offset})^{self.exponent}"


def _log_abs_base(a: float, c: float, t) -> np.ndarray:
    """log |a t + c - 1| with u = a t + c; log1p keeps precision when the base is near -1."""
    u = a * np.asarray(t, dtype=float) + c
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(u < 1, np.log1p(-np.minimum(u, 1.0)), np.log(np.abs(u - 1)))


def _big_times(k: int, x: np.ndarray) -> np.ndarray:
    """k * x for a possibly huge integer k, saturating to +-inf."""
    kf = float(k) if k < 10**300 else math.inf
    with np.errstate(invalid="ignore", over="ignore"):
        out = kf * x
    return np.where(x == 0, 0.0, out)


def _phi_conditions(eps, delta, A, B):
    u = delta / (2 * A)
    return (
        (1 - u) ** 2,  # need base^N < eps
        u**2,  # need base^N < eps
        (1 + u) ** 2,  # need base^N > B
    )


def weierstrass_phi(epsilon, delta, A, B) -> AffinePower:
    """phi = (t/A - 1 + delta/(2A))^(2N) with the least N >= 1 such that

    phi < eps on [0, A], phi > B on [-A, -delta] and (trivially) phi >= 0.
    The three conditions reduce to N log(1-u)^2 < log eps,
    N log u^2 < log eps and N log(1+u)^2 > log B with u = delta/(2A).
    """
    if not (0 < delta < A):
        raise ValueError("need 0 < delta < A")
    if epsilon <= 0 or B <= 0:
        raise ValueError("epsilon and B must be positive")
    exact = all(isinstance(v, (int, Fraction)) for v in (epsilon, delta, A, B))
    if exact:
        epsilon, delta, A, B = (Fraction(v) for v in (epsilon, delta, A, B))
    low_a, low_b, high = _phi_conditions(epsilon, delta, A, B)
    N = 1
    for q, want_small in ((low_a, True), (low_b, True), (high, False)):
        lq, lt = math.log(q), math.log(epsilon if want_small else B)
        if want_small and lt < 0:
            N = max(N, math.floor(lt / lq) + 1)  # lq < 0
        elif not want_small and lt > 0:
            N = max(N, math.floor(lt / lq) + 1)  # lq > 0
    # float logs can land one off; settle with exact comparisons when cheap
    if exact:
        def ok(k):
            return low_a**k < epsilon and low_b**k < epsilon and high**k > B

        while N > 1 and ok(N - 1):
            N -= 1
        while not ok(N):
            N += 1
    phi = AffinePower.from_params(A, delta, N)
    if exact and not verify_phi(phi, epsilon, delta, A, B):
        raise ArithmeticError("interpolant failed verification")
    return phi


def verify_phi(phi: AffinePower, epsilon, delta, A, B) -> bool:
    """Check phi < eps on [0, A] and phi > B on [-A, -delta].

    Uses Sturm sequences on phi - eps and phi - B when the degree is small;
    otherwise the endpoint values, which bound |base| from above on [0, A]
    and from below on [-A, -delta] because the base is affine.
    """
    if phi.exponent <= STURM_MAX_DEGREE:
        p = phi.to_polynomial()
        below = certify.is_positive_on_interval(epsilon - p, 0, A)
        above = certify.is_positive_on_interval(p - B, -A, -delta)
        return below and above
    k = phi.exponent
    top = max(abs(phi.base(0)), abs(phi.base(A)))
    bottom = min(abs(phi.base(-A)), abs(phi.base(-delta)))
    return k * math.log(top) < math.log(epsilon) and k * math.log(bottom) > math.log(B)


# -- parameters -----------------------------------------------------------------

@dataclass
class ShiftSpec:
    M: object
    A: object
    delta: object
    N: int
    phi: AffinePower
    g_list: list
    R: object
    epsilon: object
    mode: str
    n_bounds: tuple = ()
    assumptions: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"M": self.M, "A": self.A, "delta": self.delta, "N": self.N}


def check_strong_concavity(g: Polynomial, mu, R, mesh: float | None = None, tol: float = 1e-9) -> bool:
    """Sampled test: largest Hessian eigenvalue of g on B(R) is at most -mu."""
    from .sets import Ball

    n = g.nvars
    if mesh is None:
        mesh = 2 * float(R) / (40 if n <= 2 else 8)
    pts = Ball(np.zeros(n), float(R)).grid_sample(mesh)
    cg = g.to_float().compiled()
    for x in pts:
        if np.max(np.linalg.eigvalsh(cg.hessian(x))) > -float(mu) + tol * max(1.0, float(mu)):
            return False
    return True


def shift_params(f: Polynomial, g_list: Sequence[Polynomial], R, epsilon, mode: str = "strongly-concave",
                 mu=None, C=None, L=None, check_mu: bool = True) -> ShiftSpec:
    """M, A, delta, N and phi for the shift, in exact arithmetic when the inputs are exact.

    mode "strongly-concave" takes mu (checked by sampling unless check_mu is
    False); mode "lojasiewicz" takes the constant C and exponent L, which
    are recorded as assumptions.
    """
    if not g_list:
        raise ValueError("g_list must not be empty")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if R <= 0:
        raise ValueError("R must be positive")
    exact = f.exact and all(g.exact for g in g_list)
    if exact:
        R, epsilon = as_exact(R), as_exact(epsilon)
        one = Fraction(1)
    else:
        R, epsilon = float(R), float(epsilon)
        one = 1.0
    r = len(g_list)
    M = max(one, bound_A(f, R), bound_B(f, R))
    A = max(max(one, bound_A(g, R)) for g in g_list)
    assumptions = []
    if mode == "strongly-concave":
        if mu is None or mu <= 0:
            raise ValueError("strongly-concave mode needs mu > 0")
        mu = as_exact(mu) if exact else float(mu)
        if check_mu:
            for g in g_list:
                if not check_strong_concavity(g, mu, R):
                    raise ValueError(f"constraint {g} is not {float(mu)}-strongly concave on B(R)")
        delta = min(A, epsilon * epsilon * mu / (8 * M * M))
    elif mode == "lojasiewicz":
        if C is None or L is None or C <= 0 or L <= 0:
            raise ValueError("lojasiewicz mode needs C > 0 and L > 0")
        C = as_exact(C) if exact else float(C)
        delta = min(A, C * (epsilon / (2 * M)) ** L)
        assumptions.append(f"distance inequality holds with C={C}, L={L}")
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if delta <= 0:
        raise ValueError("delta underflowed to zero")
    bounds = (
        ((r - 1) * A - 1) / 2,
        A * (2 * M + 1 - delta) / (delta * delta),
        (2 * r * A - epsilon) / (2 * epsilon),
    )
    N = max(1, strict_exponent(max(bounds)))
    phi = AffinePower.from_params(A, delta, N)
    return ShiftSpec(M=M, A=A, delta=delta, N=N, phi=phi, g_list=list(g_list), R=R, epsilon=epsilon,
                     mode=mode, n_bounds=bounds, assumptions=assumptions)


# -- the lazy shift ---------------------------------------------------------------

class LazyShift:
    """x -> sum_i phi(g_i(x)) g_i(x) without expanding phi."""

    def __init__(self, spec: ShiftSpec):
        self.spec = spec
        self._g = [g.to_float().compiled() for g in spec.g_list]
        self._base = (float(spec.phi.scale), float(spec.phi.offset + 1))

    def _term(self, gv: np.ndarray) -> np.ndarray:
        lv = _big_times(self.spec.phi.exponent, _log_abs_base(*self._base, gv))
        with np.errstate(over="ignore"):
            return np.exp(lv) * gv

    def evaluate_many(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        total = np.zeros(len(pts))
        for cg in self._g:
            total += self._term(cg(pts))
        return total

    def __call__(self, x) -> float:
        return float(self.evaluate_many([np.atleast_1d(x)])[0])


def build_shift(spec: ShiftSpec) -> LazyShift:
    return LazyShift(spec)


def verify_shift(f: Polynomial, g_list: Sequence[Polynomial], h, epsilon, X_grid, ball_grid,
                 mesh: float | None = None, f_star=None) -> dict:
    """Grid checks of 0 <= h < eps on X, dominance on the ball, and the sandwich.

    ``h`` is a LazyShift or any callable with ``evaluate_many``.  The
    existential "some x in X" is replaced by the grid minimum of f - h over
    X_grid.  ``f_star`` overrides the grid minimum of f on X in the sandwich.
    """
    eps = float(epsilon)
    X_grid = np.atleast_2d(np.asarray(X_grid, dtype=float))
    ball_grid = np.atleast_2d(np.asarray(ball_grid, dtype=float))
    ff = f.to_float().compiled()
    hx = h.evaluate_many(X_grid)
    hb = h.evaluate_many(ball_grid)
    fx = ff(X_grid)
    fb = ff(ball_grid)
    range_ok = bool(np.all(hx >= 0) and np.all(hx < eps))
    min_X = float(np.min(fx - hx))
    diff_b = fb - hb
    dominance_ok = bool(np.all(diff_b >= min_X - eps))
    f_star_grid = float(np.min(fx))
    fs = f_star_grid if f_star is None else float(f_star)
    min_ball = float(np.min(diff_b))
    sandwich_ok = fs - 2 * eps <= min_ball <= fs + 2 * eps
    report = {
        "flags": {"range_ok": range_ok, "dominance_ok": dominance_ok, "sandwich_ok": bool(sandwich_ok)},
        "h_min": float(np.min(hx)),
        "h_max": float(np.max(hx)),
        "min_X_f_minus_h": min_X,
        "f_star_grid": f_star_grid,
        "f_star": fs,
        "min_ball_grid": min_ball,
        "mesh": mesh,
        "points": {"X": len(X_grid), "ball": len(ball_grid)},
    }
    if isinstance(h, LazyShift):
        report["spec"] = h.spec.to_dict()
    return report
