"""Brute-force references for testing.

Nothing here calls the compiled evaluators, Sturm code or derivative
routines it is meant to check: polynomials are read as raw
(monomial, coefficient) pairs and evaluated with plain loops.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np


def _pairs(p):
    if hasattr(p, "items"):
        return [(tuple(m), c) for m, c in p.items()]
    return list(p)


def naive_eval(p, points) -> np.ndarray:
    """sum c * prod x_i^e_i, term by term, in doubles."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.zeros(len(pts))
    for mono, c in _pairs(p):
        term = np.full(len(pts), float(c))
        for i, e in enumerate(mono):
            for _ in range(e):
                term = term * pts[:, i]
        out += term
    return out


def _callable(f):
    if callable(f) and not hasattr(f, "items"):
        return lambda x: float(f(x))
    return lambda x: float(naive_eval(f, [x])[0])


@dataclass
class GridReport:
    argmin: np.ndarray
    min_value: float
    mesh: float
    count: int


def grid_min(f, X, mesh: float) -> GridReport:
    """Exhaustive minimum of f over X.grid_sample(mesh); first minimiser in grid order."""
    pts = X.grid_sample(mesh)
    vals = naive_eval(f, pts)
    k = int(np.argmin(vals))
    return GridReport(argmin=pts[k], min_value=float(vals[k]), mesh=mesh, count=len(pts))


def fd_gradient(f, x, h: float | None = None) -> np.ndarray:
    """Central differences with step h = 1e-5 (1 + |x|) by default."""
    x = np.asarray(x, dtype=float)
    h = 1e-5 * (1 + float(np.linalg.norm(x))) if h is None else h
    fn = _callable(f)
    g = np.zeros(len(x))
    for i in range(len(x)):
        e = np.zeros(len(x))
        e[i] = h
        g[i] = (fn(x + e) - fn(x - e)) / (2 * h)
    return g


def _central_hessian(fn, x: np.ndarray, h: float) -> np.ndarray:
    n = len(x)
    H = np.zeros((n, n))
    f0 = fn(x)
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = h
        H[i, i] = (fn(x + ei) - 2 * f0 + fn(x - ei)) / (h * h)
        for j in range(i):
            ej = np.zeros(n)
            ej[j] = h
            v = (fn(x + ei + ej) - fn(x + ei - ej) - fn(x - ei + ej) + fn(x - ei - ej)) / (4 * h * h)
            H[i, j] = H[j, i] = v
    return H


def fd_hessian(f, x, h: float | None = None) -> np.ndarray:
    """Central second differences with one Richardson step (error O(h^4)).

    Default h = 1e-3 (1 + |x|): second differences lose eps |f| / h^2 to
    rounding, so the small gradient step would cost about 1e-6 relative.
    """
    x = np.asarray(x, dtype=float)
    h = 1e-3 * (1 + float(np.linalg.norm(x))) if h is None else h
    fn = _callable(f)
    return (4 * _central_hessian(fn, x, h / 2) - _central_hessian(fn, x, h)) / 3


def gradient_norm_bound(p, R: float) -> float:
    """sum |nu| |c| R^(|nu|-1): bounds |grad p| on B(R)."""
    total = 0.0
    for mono, c in _pairs(p):
        d = sum(mono)
        if d:
            total += d * abs(float(c)) * R ** (d - 1)
    return total


def level_set_distance(f, X, start, level: float, mesh: float, grid=None, R: float | None = None) -> float:
    """min |x - start| over grid points of X with |f(x) - level| <= Lip * mesh.

    Lip bounds |grad f| on B(R), R = radius bound of X.  Returns inf when no
    grid point is close enough to the level.
    """
    pts = X.grid_sample(mesh) if grid is None else grid
    R = X.radius_bound() if R is None else R
    band = gradient_norm_bound(f, R) * mesh
    vals = naive_eval(f, pts)
    sel = pts[np.abs(vals - level) <= band]
    if not len(sel):
        return math.inf
    return float(np.min(np.linalg.norm(sel - np.asarray(start, dtype=float), axis=1)))


def _coeffs(p) -> list:
    """Univariate coefficients, lowest degree first, from a polynomial or a list."""
    if hasattr(p, "items"):
        pairs = _pairs(p)
        d = max((m[0] for m, _ in pairs), default=0)
        c = [0] * (d + 1)
        for m, v in pairs:
            c[m[0]] = v
        return c
    return list(p)


def _horner(c: list, x: Fraction) -> Fraction:
    v = Fraction(0)
    for coef in reversed(c):
        v = v * x + coef
    return v


def _deflate(c: list, z: Fraction) -> list:
    """Quotient of the polynomial by (x - z), assuming z is a root."""
    out = [Fraction(0)] * (len(c) - 1)
    carry = Fraction(0)
    for i in range(len(c) - 1, 0, -1):
        carry = carry * z + c[i]
        out[i - 1] = carry
    return out


def sign_scan_roots(p, a, b, mesh: float | None = None, samples: int = 10_000) -> int:
    """Count distinct roots of a univariate polynomial in (a, b] by scanning signs.

    Signs are read at ``samples + 1`` equally spaced points (doubles, with
    near-zero values re-evaluated exactly).  Samples that are exact roots
    are divided out and the quotient is scanned again.  Sign changes are
    counted; every local minimum of |p| without a sign change is refined by
    golden-section search in 60-digit arithmetic, which catches roots of
    even multiplicity and pairs of roots inside one cell.
    """
    exact = [Fraction(c) for c in _coeffs(p)]
    while len(exact) > 1 and exact[-1] == 0:
        exact.pop()
    if all(c == 0 for c in exact):
        raise ValueError("zero polynomial")
    a, b = Fraction(a), Fraction(b)
    if mesh is not None:
        samples = max(int(math.ceil(float(b - a) / mesh)), 1)
    fc = np.array([float(c) for c in exact])
    xs = float(a) + (float(b) - float(a)) * np.arange(samples + 1) / samples
    vals = np.zeros_like(xs)
    for c in fc[::-1]:
        vals = vals * xs + c
    scale = float(np.max(np.abs(fc))) * max(1.0, abs(float(a)), abs(float(b))) ** (len(fc) - 1)

    def grid_q(k):
        return a + (b - a) * k / samples

    # near-zero samples are rational: settle their signs exactly
    signs = np.sign(vals).astype(int)
    zeros = []
    for k in np.nonzero(np.abs(vals) <= 1e-9 * scale)[0]:
        v = _horner(exact, grid_q(int(k)))
        signs[k] = (v > 0) - (v < 0)
        if v == 0:
            zeros.append(grid_q(int(k)))
    if zeros:
        # divide the sampled roots out and scan the quotient, which has no
        # zero at any sample, so roots hiding next to them are not lost
        q = exact
        for z in zeros:
            while _horner(q, z) == 0:
                q = _deflate(q, z)
        inside = sum(1 for z in zeros if a < z <= b)
        return inside + (sign_scan_roots(q, a, b, samples=samples) if len(q) > 1 else 0)

    with mpmath.workdps(60):
        mc = [mpmath.mpf(c.numerator) / c.denominator for c in exact][::-1]

        def ev(x):
            return mpmath.polyval(mc, x)

        def grid_x(k):
            v = grid_q(k)
            return mpmath.mpf(v.numerator) / v.denominator

        tiny = scale * mpmath.mpf(10) ** -45
        count = 0
        last = 0
        for s in signs:
            if s == 0:
                last = 0
                continue
            if last and s != last:
                count += 1
            last = s
        absv = np.abs(vals)
        gr = (mpmath.sqrt(5) - 1) / 2
        for k in range(1, samples):
            if signs[k] == 0 or signs[k - 1] != signs[k] or signs[k + 1] != signs[k]:
                continue
            if not (absv[k] <= absv[k - 1] and absv[k] <= absv[k + 1]):
                continue
            lo, hi = grid_x(k - 1), grid_x(k + 1)
            for _ in range(200):
                m1 = hi - gr * (hi - lo)
                m2 = lo + gr * (hi - lo)
                if abs(ev(m1)) < abs(ev(m2)):
                    hi = m2
                else:
                    lo = m1
            vm = ev((lo + hi) / 2)
            if abs(vm) <= tiny:
                count += 1
            elif (vm > 0) != (signs[k] > 0):
                count += 2
        return count
