"""Convexification exponents for polynomials positive on a compact convex set.

For f > 0 on X the weighted polynomial

    phi_{N,xi}(x) = (1 + |x - xi|^2)^N f(x)

is strongly convex on X once N exceeds ``script_N(m, R, D)`` where m is a
positive lower bound of f on X, R bounds |x| on X (2R when the weight is
centred at xi != 0) and D bounds the first two derivatives of f along
lines (``bound_DD``).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import certify
from .poly import Polynomial, as_exact, bound_B, bound_DD, isqrt_frac_upper
from .sets import Ball, Box, ConvexSet


class TermBudgetExceeded(RuntimeError):
    pass


class PositivityError(ValueError):
    """f could not be certified positive on X."""


def script_N(m, R, D):
    """max{ D/m + m/(16D), (1+R^2)D/(Rm) + 1, 4D^2/m^2 + 2, (1+R^2)D/(2m) }.

    Exact when all arguments are rational.
    """
    if m <= 0 or R <= 0 or D <= 0:
        raise ValueError("m, R and D must be positive")
    if all(isinstance(v, (int, Fraction)) for v in (m, R, D)):
        m, R, D = Fraction(m), Fraction(R), Fraction(D)
    else:
        m, R, D = float(m), float(R), float(D)
    return max(
        D / m + m / (16 * D),
        (1 + R * R) * D / (R * m) + 1,
        4 * D * D / (m * m) + 2,
        (1 + R * R) * D / (2 * m),
    )


def strict_exponent(bound) -> int:
    """Smallest integer strictly above ``bound``."""
    if isinstance(bound, Fraction):
        return bound.numerator // bound.denominator + 1
    return math.floor(bound) + 1


# -- phi_{N, xi} ------------------------------------------------------------

class Convexified:
    """Lazy (1 + |x - xi|^2)^N f(x) with product-rule derivatives."""

    def __init__(self, f: Polynomial, N: int, xi=None):
        if N < 0:
            raise ValueError("N must be nonnegative")
        self.f = f
        self.N = int(N)
        self.nvars = f.nvars
        self.xi = np.zeros(f.nvars) if xi is None else np.asarray(xi, dtype=float)
        self._xi_raw = xi
        self._cf = f.compiled()

    def _parts(self, x):
        x = np.asarray(x, dtype=float)
        y = x - self.xi
        w = 1.0 + y @ y
        return x, y, w

    def evaluate(self, x):
        if self.f.exact and all(isinstance(v, (int, Fraction)) for v in x):
            xi = [0] * self.nvars if self._xi_raw is None else [as_exact(v) for v in self._xi_raw]
            w = 1 + sum((as_exact(a) - b) ** 2 for a, b in zip(x, xi))
            return w**self.N * self.f.evaluate(x)
        x, y, w = self._parts(x)
        return w**self.N * self._cf(x)

    __call__ = evaluate

    def gradient(self, x) -> np.ndarray:
        x, y, w = self._parts(x)
        fx = self._cf(x)
        g = self._cf.gradient(x)
        return w**self.N * g + 2 * self.N * w ** (self.N - 1) * fx * y

    def scaled_hessian(self, x) -> np.ndarray:
        """Hessian divided by the positive factor w^N (same definiteness, no overflow)."""
        x, y, w = self._parts(x)
        N = self.N
        fx = self._cf(x)
        g = self._cf.gradient(x)
        H = self._cf.hessian(x)
        n = len(x)
        out = H + (2 * N / w) * (np.outer(y, g) + np.outer(g, y))
        out = out + fx * ((2 * N / w) * np.eye(n) + (4 * N * (N - 1) / w**2) * np.outer(y, y))
        return out

    def hessian(self, x) -> np.ndarray:
        x, y, w = self._parts(x)
        return w**self.N * self.scaled_hessian(x)

    def expand(self, term_budget: int | None = None) -> Polynomial:
        if term_budget is not None and estimate_terms(self.f, self.N, self._xi_raw) > term_budget:
            raise TermBudgetExceeded("expansion of phi_N exceeds the term budget")
        xi = None if self._xi_raw is None else list(self._xi_raw)
        weight = Polynomial.norm_squared(self.nvars, self.f.exact, center=xi) + 1
        return weight**self.N * self.f


def estimate_terms(f: Polynomial, N: int, xi=None) -> int:
    n = f.nvars
    centred = xi is None or not any(xi)
    weight_terms = math.comb(N + n, n) if centred else math.comb(2 * N + n, n)
    return weight_terms * max(len(f), 1)


def phi_N(f: Polynomial, N: int, xi=None, term_budget: int = 100_000, lazy: bool = True):
    """(1 + |x - xi|^2)^N f, expanded when it fits the term budget, else lazy."""
    if N < 0:
        raise ValueError("N must be nonnegative")
    if estimate_terms(f, N, xi) <= term_budget:
        return Convexified(f, N, xi).expand()
    if not lazy:
        raise TermBudgetExceeded(f"phi_{N} would need about {estimate_terms(f, N, xi)} terms")
    return Convexified(f, N, xi)


# -- lower bound m ----------------------------------------------------------

def _even_monomial_certificate(p: Polynomial) -> bool:
    """p >= 0 on R^n when every term is an even monomial with a nonnegative coefficient."""
    return all(c >= 0 and all(e % 2 == 0 for e in mono) for mono, c in p.items())


def _interval_of(X: ConvexSet) -> tuple[Fraction, Fraction]:
    lo, hi = X.bounding_box()
    return as_exact(float(lo[0])), as_exact(float(hi[0]))


def certified_lower_bound(f: Polynomial, X: ConvexSet, mesh: float | None = None, max_refine: int = 6):
    """A positive m <= min_X f together with how it was certified.

    Tries, in order: an exact univariate Sturm bisection (n = 1), an
    even-monomial certificate for f - (grid minimum), and a grid minimum
    over a covering lattice minus a Lipschitz margin.
    """
    n = f.nvars
    R = X.radius_bound()
    if mesh is None:
        mesh = 2 * R / (200 if n == 1 else 60 if n == 2 else 12)
    pts = X.grid_sample(mesh)
    vals = f.evaluate_many(pts)
    k = int(np.argmin(vals))
    if f.exact:
        m0 = f.evaluate([as_exact(float(v)) for v in pts[k]])
    else:
        m0 = float(vals[k])
    if m0 <= 0:
        raise PositivityError(f"f({pts[k]}) = {float(m0)} is not positive")

    if f.exact and n == 1 and isinstance(X, (Box, Ball)):
        a, b = _interval_of(X)
        if not certify.is_positive_on_interval(f, a, b):
            raise PositivityError("f is not positive on the interval")
        if certify.is_nonnegative_on_interval(f - m0, a, b):
            return m0, "sturm"
        lo, hi = Fraction(0), m0
        for _ in range(48):
            mid = (lo + hi) / 2
            if certify.is_nonnegative_on_interval(f - mid, a, b):
                lo = mid
            else:
                hi = mid
        if lo > 0:
            return lo, "sturm"

    if f.exact and _even_monomial_certificate(f - m0):
        return m0, "even-monomials"

    h = mesh
    ff = f.to_float()
    for _ in range(max_refine + 1):
        rho = h * math.sqrt(n) / 2
        cover = X.neighbourhood_sample(h, rho)
        if len(cover):
            lip = float(bound_B(ff, R + rho))
            low = float(np.min(ff.evaluate_many(cover))) - lip * rho
            low -= 1e-12 * max(1.0, abs(low))
            if low > 0:
                return (as_exact(low) if f.exact else low), "lipschitz-grid"
        h /= 2
    raise PositivityError("could not certify a positive lower bound; refine the mesh or pass m")


# -- the certificate --------------------------------------------------------

@dataclass
class ConvexifyCertificate:
    N: int
    m: object
    R: object
    D: object
    scriptN: object
    center: tuple
    method: str  # univariate-sturm | line-sampled | formula-only
    m_method: str = ""
    certified: bool | None = None
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "m": self.m,
            "R": self.R,
            "D": self.D,
            "scriptN": self.scriptN,
            "center": list(self.center),
            "method": self.method,
            "m_method": self.m_method,
            "certified": self.certified,
        }


def convexify_on_compact(
    f: Polynomial,
    X: ConvexSet,
    xi=None,
    m=None,
    mesh: float | None = None,
    sample_mesh: float | None = None,
) -> ConvexifyCertificate:
    """Exponent N = floor(script_N) + 1 making phi_{N,xi} strongly convex on X.

    In one variable the result is re-checked exactly with Sturm sequences on
    the curvature factor; in several variables ``sample_mesh`` enables a
    sampled Hessian falsification pass.
    """
    if X.dim != f.nvars:
        raise ValueError("dimension mismatch between f and X")
    if X.is_degenerate():
        raise ValueError("X must contain at least two points")
    exact = f.exact
    R = X.radius_bound_exact() if exact else X.radius_bound()
    if R <= 0:
        raise ValueError("X must contain at least two points")

    xi_vals = None if xi is None or not any(float(v) for v in xi) else list(xi)
    if xi_vals is None:
        R_eff, line_radius = R, None
    else:
        if exact:
            xi_exact = [as_exact(v) for v in xi_vals]
            xi_norm = isqrt_frac_upper(sum(v * v for v in xi_exact))
        else:
            xi_norm = math.sqrt(sum(float(v) ** 2 for v in xi_vals))
        # |x - xi| <= R + |xi|, which is 2R for centres inside B(R)
        R_eff = 2 * R if xi_norm <= R else R + xi_norm
        line_radius = R_eff

    D = bound_DD(f, R, line_radius=line_radius)
    if m is None:
        m, m_method = certified_lower_bound(f, X, mesh=mesh)
    else:
        m_method = "given"
        m = as_exact(m) if exact else float(m)
        if m <= 0:
            raise PositivityError("m must be positive")
    bound = script_N(m, R_eff, D)
    N = strict_exponent(bound)
    center = tuple(xi_vals) if xi_vals is not None else tuple([0] * f.nvars)
    cert = ConvexifyCertificate(N=N, m=m, R=R_eff, D=D, scriptN=bound, center=center, method="formula-only", m_method=m_method)

    if f.nvars == 1 and exact:
        a, b = _interval_of(X)
        xi0 = as_exact(xi_vals[0]) if xi_vals is not None else 0
        cert.certified = certify.convexified_is_convex(f, N, a, b, xi=xi0, strict=True)
        cert.method = "univariate-sturm"
    elif sample_mesh is not None:
        witness = falsify_convexity(Convexified(f, N, xi_vals), X, sample_mesh)
        cert.certified = witness is None
        cert.method = "line-sampled"
        if witness is not None:
            cert.notes.append(f"indefinite Hessian at {list(witness)}")
    return cert


# -- Sylvester criterion ----------------------------------------------------

def _det_exact(M: list[list[Fraction]]) -> Fraction:
    M = [row[:] for row in M]
    n = len(M)
    det = Fraction(1)
    for i in range(n):
        piv = next((r for r in range(i, n) if M[r][i] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != i:
            M[i], M[piv] = M[piv], M[i]
            det = -det
        det *= M[i][i]
        for r in range(i + 1, n):
            fac = M[r][i] / M[i][i]
            if fac:
                for c in range(i, n):
                    M[r][c] -= fac * M[i][c]
    return det


def principal_minors(H) -> dict[tuple, object]:
    n = len(H)
    exact = all(isinstance(v, (int, Fraction)) for row in H for v in row)
    out = {}
    for k in range(1, n + 1):
        for E in itertools.combinations(range(n), k):
            if exact:
                out[E] = _det_exact([[Fraction(H[i][j]) for j in E] for i in E])
            else:
                sub = np.asarray(H, dtype=float)[np.ix_(E, E)]
                out[E] = float(np.linalg.det(sub))
    return out


def sylvester_psd(H, tol: float = 0.0) -> str:
    """Classify a symmetric matrix by the signs of all its principal minors.

    Returns ``"positive-definite"``, ``"positive-semidefinite"`` or
    ``"indefinite"`` (anything that is not positive semidefinite).  For
    float input a minor of size k counts as nonnegative when it is at least
    ``-tol * scale**k`` with ``scale`` the largest entry magnitude.
    """
    exact = all(isinstance(v, (int, Fraction)) for row in H for v in row)
    A = H if exact else np.asarray(H, dtype=float)
    n = len(A)
    if n > 12:
        raise ValueError("Sylvester test limited to n <= 12")
    for i in range(n):
        if len(A[i]) != n:
            raise ValueError("matrix is not square")
        for j in range(i):
            a, b = A[i][j], A[j][i]
            if exact:
                if a != b:
                    raise ValueError("matrix is not symmetric")
            elif abs(a - b) > 1e-9 * max(1.0, abs(a), abs(b)):
                raise ValueError("matrix is not symmetric")
    minors = principal_minors(A)
    if exact:
        if all(v > 0 for v in minors.values()):
            return "positive-definite"
        if all(v >= 0 for v in minors.values()):
            return "positive-semidefinite"
        return "indefinite"
    scale = float(np.max(np.abs(A))) if n else 0.0
    if all(v > 0 for v in minors.values()):
        return "positive-definite"
    if all(v >= -tol * scale ** len(E) for E, v in minors.items()):
        return "positive-semidefinite"
    return "indefinite"


# -- sampled falsifier ------------------------------------------------------

def _curvature(p, x) -> np.ndarray:
    if isinstance(p, Convexified):
        return p.scaled_hessian(x)
    return p.hessian_at(x)


def falsify_at_points(p, points, tol: float = 1e-10):
    """First point (in the given order) where the Hessian of ``p`` is indefinite."""
    for x in points:
        if sylvester_psd(_curvature(p, x), tol=tol) == "indefinite":
            return np.asarray(x, dtype=float)
    return None


def falsify_convexity(p, X: ConvexSet, mesh: float, tol: float = 1e-10):
    """Grid search for a point of X where ``p`` has an indefinite Hessian; None if not found.

    A ``None`` result is not a convexity certificate.
    """
    return falsify_at_points(p, X.grid_sample(mesh), tol=tol)


# -- leading form -----------------------------------------------------------

@dataclass
class LeadingFormResult:
    status: str  # certified-positive | witness-zero-or-negative | inconclusive
    point: np.ndarray | None
    min_value: float
    margin: float
    mesh: float
    samples: int


def cube_surface_lattice(n: int, mesh: float) -> np.ndarray:
    """Lattice points of spacing <= mesh on the faces of [-1, 1]^n."""
    k = int(math.ceil(2 / mesh - 1e-9)) + 1
    axis = np.linspace(-1.0, 1.0, k)
    if n == 1:
        return np.array([[-1.0], [1.0]])
    face = np.stack([g.ravel() for g in np.meshgrid(*([axis] * (n - 1)), indexing="ij")], axis=1)
    out = []
    for i in range(n):
        for s in (-1.0, 1.0):
            pts = np.insert(face, i, s, axis=1)
            out.append(pts)
    return np.vstack(out)


def leading_form_positive(
    f: Polynomial,
    margin_tol: float = 0.0,
    mesh: float = 0.1,
    max_points: int = 2_000_000,
) -> LeadingFormResult:
    """Decide f_d > 0 on R^n \\ {0} by sampling the faces of the cube [-1,1]^n.

    Every direction meets the cube surface, and f_d is homogeneous, so it
    suffices to look there.  A sample with f_d <= margin_tol is returned as
    a witness (re-checked exactly for rational input).  Otherwise the result
    is certified when the smallest sample exceeds the Lipschitz margin
    B(f_d, sqrt n) * mesh * sqrt(n-1)/2.  The mesh is halved until one of
    those happens or the sample budget runs out (inconclusive).
    """
    if f.is_zero():
        raise ValueError("zero polynomial has no leading form")
    fd = f.leading_form()
    n = f.nvars
    lip = float(bound_B(fd.to_float(), math.sqrt(n) * (1 + 1e-12)))
    h = mesh
    while True:
        pts = cube_surface_lattice(n, h)
        vals = fd.evaluate_many(pts)
        bad = np.nonzero(vals <= margin_tol)[0]
        for idx in bad:
            x = pts[idx]
            if fd.exact:
                if fd.evaluate([as_exact(float(v)) for v in x]) <= margin_tol:
                    return LeadingFormResult("witness-zero-or-negative", x, float(vals[idx]), 0.0, h, len(pts))
            else:
                return LeadingFormResult("witness-zero-or-negative", x, float(vals[idx]), 0.0, h, len(pts))
        spacing = 2 / (int(math.ceil(2 / h - 1e-9)))
        margin = lip * spacing * math.sqrt(max(n - 1, 0)) / 2
        vmin = float(np.min(vals))
        if vmin > margin * (1 + 1e-9):
            return LeadingFormResult("certified-positive", None, vmin, margin, h, len(pts))
        nxt = len(cube_surface_lattice(n, h / 2)) if n <= 3 else 2 * n * (int(math.ceil(4 / h)) + 1) ** (n - 1)
        if nxt > max_points:
            return LeadingFormResult("inconclusive", None, vmin, margin, h, len(pts))
        h /= 2


def coercive_augment(f: Polynomial, a, b, d: int) -> Polynomial:
    """f + a|x|^d + b for even d > deg f and a, b > 0."""
    if d % 2 or d <= f.degree:
        raise ValueError("d must be an even integer larger than deg f")
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    r2 = Polynomial.norm_squared(f.nvars, f.exact)
    return f + r2 ** (d // 2) * a + b
