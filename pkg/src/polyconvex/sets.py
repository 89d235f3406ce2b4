"""Feasible sets: balls, boxes, halfspace intersections and basic sets {g_i >= 0}.

All geometry is done in double precision.  Sets are immutable; ``project``
is available for every variant except :class:`BasicSet`.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from .poly import Polynomial, as_exact, isqrt_frac_upper


class UnsupportedOperation(NotImplementedError):
    pass


class UnboundedSetError(ValueError):
    pass


@dataclass(frozen=True)
class AffineMap:
    """u = (x - center) / scale, the normalising map onto a ball of radius 1/2."""

    center: np.ndarray
    scale: float

    def __call__(self, x) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.center) / self.scale

    def inverse(self, u) -> np.ndarray:
        return self.center + self.scale * np.asarray(u, dtype=float)


def _vec(v) -> np.ndarray:
    return np.atleast_1d(np.asarray(v, dtype=float))


def _lattice(lo: np.ndarray, hi: np.ndarray, mesh: float, anchor: np.ndarray) -> np.ndarray:
    """Points anchor + mesh*k inside the box [lo, hi]."""
    axes = []
    for l, h, a in zip(lo, hi, anchor):
        kmin = math.ceil((l - a) / mesh - 1e-9)
        kmax = math.floor((h - a) / mesh + 1e-9)
        axes.append(a + mesh * np.arange(kmin, kmax + 1))
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


class ConvexSet:
    """Common interface; concrete variants below."""

    dim: int

    def contains(self, x, tol: float = 0.0) -> bool:
        raise NotImplementedError

    def contains_many(self, pts: np.ndarray, tol: float = 0.0) -> np.ndarray:
        return np.array([self.contains(p, tol) for p in pts], dtype=bool)

    def project(self, y) -> np.ndarray:
        raise UnsupportedOperation(f"{type(self).__name__} has no projection oracle")

    def radius_bound(self) -> float:
        raise NotImplementedError

    def radius_bound_exact(self) -> Fraction:
        """Rational upper bound on max |x| over the set."""
        return as_exact(self.radius_bound()) * (1 + Fraction(1, 10**12))

    def center(self) -> np.ndarray:
        raise NotImplementedError

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def witness(self) -> np.ndarray:
        return self.center()

    def grid_sample(self, mesh: float) -> np.ndarray:
        """Deterministic lattice points of mesh ``mesh`` inside the set (plus a witness)."""
        if mesh <= 0:
            raise ValueError("mesh must be positive")
        lo, hi = self.bounding_box()
        pts = _lattice(lo, hi, mesh, self.center())
        if len(pts):
            pts = pts[self.contains_many(pts, tol=1e-12)]
        w = self.witness()[None, :]
        if not len(pts) or not np.any(np.all(np.isclose(pts, w, rtol=0, atol=1e-15), axis=1)):
            pts = np.vstack([w, pts]) if len(pts) else w
        return pts

    def neighbourhood_sample(self, mesh: float, rho: float) -> np.ndarray:
        """Lattice points within distance ``rho`` of the set (a superset cover)."""
        lo, hi = self.bounding_box()
        pts = _lattice(lo - rho, hi + rho, mesh, self.center())
        return pts[self.contains_many(pts, tol=rho)]

    def is_degenerate(self) -> bool:
        lo, hi = self.bounding_box()
        return bool(np.all(hi - lo <= 0))

    def normalize(self) -> tuple[AffineMap, "ConvexSet"]:
        """Map the set into the ball of radius 1/2 around the origin."""
        c = self.center()
        r = self.radius_about(c)
        if not np.isfinite(r):
            raise UnboundedSetError("cannot normalise an unbounded set")
        if r <= 0:
            raise ValueError("cannot normalise a single point")
        tau = AffineMap(c, 2.0 * r)
        return tau, self.transformed(tau)

    def radius_about(self, c: np.ndarray) -> float:
        raise NotImplementedError

    def transformed(self, tau: AffineMap) -> "ConvexSet":
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Ball(ConvexSet):
    center_: np.ndarray
    radius: float

    def __init__(self, center, radius):
        object.__setattr__(self, "center_", _vec(center))
        object.__setattr__(self, "radius", float(radius))
        if self.radius <= 0:
            raise ValueError("ball radius must be positive")

    @property
    def dim(self):
        return len(self.center_)

    def contains(self, x, tol=0.0):
        return bool(np.linalg.norm(_vec(x) - self.center_) <= self.radius + tol)

    def contains_many(self, pts, tol=0.0):
        return np.linalg.norm(pts - self.center_, axis=1) <= self.radius + tol

    def project(self, y):
        y = _vec(y)
        d = y - self.center_
        r = np.linalg.norm(d)
        if r <= self.radius:
            return y.copy()
        return self.center_ + d * (self.radius / r)

    def radius_bound(self):
        return float(np.linalg.norm(self.center_) + self.radius)

    def radius_bound_exact(self):
        c2 = sum(as_exact(v) ** 2 for v in self.center_)
        return isqrt_frac_upper(c2) + as_exact(self.radius)

    def center(self):
        return self.center_.copy()

    def bounding_box(self):
        return self.center_ - self.radius, self.center_ + self.radius

    def radius_about(self, c):
        return float(np.linalg.norm(self.center_ - c) + self.radius)

    def transformed(self, tau):
        return Ball(tau(self.center_), self.radius / tau.scale)

    def boundary_points(self, count: int) -> np.ndarray:
        """Deterministic points on the sphere (exact circle for n=2)."""
        n = self.dim
        if n == 1:
            return np.array([self.center_ - self.radius, self.center_ + self.radius])
        if n == 2:
            th = 2 * np.pi * np.arange(count) / count
            return self.center_ + self.radius * np.stack([np.cos(th), np.sin(th)], axis=1)
        rng = np.random.default_rng(0)
        v = rng.standard_normal((count, n))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        return self.center_ + self.radius * v


@dataclass(frozen=True, eq=False)
class Box(ConvexSet):
    lo: np.ndarray
    hi: np.ndarray

    def __init__(self, lo, hi):
        lo, hi = _vec(lo), _vec(hi)
        if lo.shape != hi.shape:
            raise ValueError("lo and hi must have the same length")
        if np.any(lo > hi):
            raise ValueError("box needs lo <= hi componentwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self):
        return len(self.lo)

    def contains(self, x, tol=0.0):
        x = _vec(x)
        return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))

    def contains_many(self, pts, tol=0.0):
        return np.all((pts >= self.lo - tol) & (pts <= self.hi + tol), axis=1)

    def project(self, y):
        return np.clip(_vec(y), self.lo, self.hi)

    def radius_bound(self):
        return float(np.sqrt(np.sum(np.maximum(self.lo**2, self.hi**2))))

    def radius_bound_exact(self):
        s = sum(max(as_exact(l) ** 2, as_exact(h) ** 2) for l, h in zip(self.lo, self.hi))
        return isqrt_frac_upper(s)

    def center(self):
        return (self.lo + self.hi) / 2

    def bounding_box(self):
        return self.lo.copy(), self.hi.copy()

    def radius_about(self, c):
        return float(np.sqrt(np.sum(np.maximum((self.lo - c) ** 2, (self.hi - c) ** 2))))

    def transformed(self, tau):
        return Box(tau(self.lo), tau(self.hi))

    def grid_sample(self, mesh):
        if mesh <= 0:
            raise ValueError("mesh must be positive")
        axes = [np.linspace(l, h, max(int(math.ceil((h - l) / mesh - 1e-9)), 0) + 1) for l, h in zip(self.lo, self.hi)]
        grids = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def vertices(self) -> np.ndarray:
        return np.array(list(itertools.product(*zip(self.lo, self.hi))))


@dataclass(frozen=True, eq=False)
class Halfspaces(ConvexSet):
    """{x : <a_i, x> <= b_i for all i}; must be bounded for most operations."""

    normals: np.ndarray
    offsets: np.ndarray
    witness_: np.ndarray = field(default=None)
    box_: tuple = field(default=None)

    def __init__(self, normals, offsets):
        A = np.atleast_2d(np.asarray(normals, dtype=float))
        b = _vec(offsets)
        if A.shape[0] != len(b):
            raise ValueError("need one offset per normal")
        object.__setattr__(self, "normals", A)
        object.__setattr__(self, "offsets", b)
        object.__setattr__(self, "witness_", self._chebyshev_center())
        object.__setattr__(self, "box_", self._bounding_box_lp())

    @property
    def dim(self):
        return self.normals.shape[1]

    def _chebyshev_center(self):
        A, b = self.normals, self.offsets
        n = A.shape[1]
        norms = np.linalg.norm(A, axis=1)
        c = np.zeros(n + 1)
        c[-1] = -1.0
        A_ub = np.hstack([A, norms[:, None]])
        bounds = [(None, None)] * n + [(0, 1e6)]
        res = linprog(c, A_ub=A_ub, b_ub=b, bounds=bounds, method="highs")
        if res.status == 2:
            raise ValueError("halfspace system is infeasible")
        if res.status != 0:
            # unbounded radius: fall back to any feasible point
            res = linprog(np.zeros(n), A_ub=A, b_ub=b, bounds=[(None, None)] * n, method="highs")
            if res.status != 0:
                raise ValueError("halfspace system is infeasible")
            return res.x
        return res.x[:n]

    def _bounding_box_lp(self):
        n = self.dim
        lo, hi = np.empty(n), np.empty(n)
        for i in range(n):
            for sign, arr in ((1.0, lo), (-1.0, hi)):
                c = np.zeros(n)
                c[i] = sign
                res = linprog(c, A_ub=self.normals, b_ub=self.offsets, bounds=[(None, None)] * n, method="highs")
                arr[i] = res.x[i] if res.status == 0 else (-np.inf if sign > 0 else np.inf)
        return lo, hi

    def contains(self, x, tol=0.0):
        x = _vec(x)
        return bool(np.all(self.normals @ x <= self.offsets + tol * np.linalg.norm(self.normals, axis=1)))

    def contains_many(self, pts, tol=0.0):
        slack = self.offsets + tol * np.linalg.norm(self.normals, axis=1)
        return np.all(pts @ self.normals.T <= slack, axis=1)

    def project(self, y, tol: float = 1e-12, max_iter: int = 10_000) -> np.ndarray:
        """Dykstra's alternating projections onto the individual halfspaces."""
        y = _vec(y)
        if self.contains(y):
            return y.copy()
        A, b = self.normals, self.offsets
        norms2 = np.sum(A * A, axis=1)
        x = y.copy()
        incr = np.zeros((len(b), len(y)))
        for _ in range(max_iter):
            x_prev = x.copy()
            for i in range(len(b)):
                z = x + incr[i]
                viol = A[i] @ z - b[i]
                p = z - (viol / norms2[i]) * A[i] if viol > 0 else z
                incr[i] = z - p
                x = p
            if np.linalg.norm(x - x_prev) < tol:
                break
        object.__setattr__(self, "last_residual", float(np.linalg.norm(x - x_prev)))
        return x

    def radius_bound(self):
        lo, hi = self.box_
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            return math.inf
        return float(np.sqrt(np.sum(np.maximum(lo**2, hi**2))))

    def center(self):
        return self.witness_.copy()

    def witness(self):
        return self.witness_.copy()

    def bounding_box(self):
        lo, hi = self.box_
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise UnboundedSetError("halfspace intersection is unbounded")
        return lo.copy(), hi.copy()

    def radius_about(self, c):
        lo, hi = self.box_
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            return math.inf
        return float(np.sqrt(np.sum(np.maximum((lo - c) ** 2, (hi - c) ** 2))))

    def transformed(self, tau):
        # <a, c + s u> <= b  <=>  <a, u> <= (b - <a, c>) / s
        return Halfspaces(self.normals, (self.offsets - self.normals @ tau.center) / tau.scale)


@dataclass(frozen=True, eq=False)
class BasicSet(ConvexSet):
    """{x : g_i(x) >= 0}, each g_i concave, known to lie in the ball B(center, radius)."""

    g_list: tuple
    enclosing_center: np.ndarray
    enclosing_radius: float

    def __init__(self, g_list: Sequence[Polynomial], radius: float, center=None, check_concave: bool = True):
        g_list = tuple(g_list)
        if not g_list:
            raise ValueError("need at least one constraint")
        n = g_list[0].nvars
        if any(g.nvars != n for g in g_list):
            raise ValueError("constraints have different variable counts")
        object.__setattr__(self, "g_list", g_list)
        object.__setattr__(self, "enclosing_center", np.zeros(n) if center is None else _vec(center))
        object.__setattr__(self, "enclosing_radius", float(radius))
        if check_concave:
            self.check_concavity()

    @property
    def dim(self):
        return self.g_list[0].nvars

    def check_concavity(self, mesh: float | None = None, tol: float = 1e-9) -> None:
        """Sampled Sylvester test that every -Hess g_i is positive semidefinite."""
        from .convexify import sylvester_psd

        box = Box(self.enclosing_center - self.enclosing_radius, self.enclosing_center + self.enclosing_radius)
        mesh = mesh or self.enclosing_radius / (4 if self.dim > 2 else 8)
        pts = box.grid_sample(mesh)
        for g in self.g_list:
            if g.degree <= 1:
                continue
            for x in pts:
                if sylvester_psd(-g.hessian_at(x), tol=tol) == "indefinite":
                    raise ValueError(f"constraint {g} is not concave near {x}")

    def contains(self, x, tol=0.0):
        x = _vec(x)
        return all(float(g.evaluate(x)) >= -tol for g in self.g_list)

    def contains_many(self, pts, tol=0.0):
        ok = np.ones(len(pts), dtype=bool)
        for g in self.g_list:
            ok &= g.evaluate_many(pts) >= -tol
        ok &= np.linalg.norm(pts - self.enclosing_center, axis=1) <= self.enclosing_radius + tol
        return ok

    def neighbourhood_sample(self, mesh, rho):
        from .poly import bound_B

        lo, hi = self.bounding_box()
        pts = _lattice(lo - rho, hi + rho, mesh, self.center())
        R = self.radius_bound() + rho
        ok = np.linalg.norm(pts - self.enclosing_center, axis=1) <= self.enclosing_radius + rho
        for g in self.g_list:
            ok &= g.evaluate_many(pts) >= -float(bound_B(g.to_float(), R)) * rho
        return pts[ok]

    def radius_bound(self):
        return float(np.linalg.norm(self.enclosing_center) + self.enclosing_radius)

    def center(self):
        return self.enclosing_center.copy()

    def witness(self):
        c = self.enclosing_center
        if self.contains(c):
            return c.copy()
        lo, hi = self.bounding_box()
        for mesh in (self.enclosing_radius / 8, self.enclosing_radius / 64):
            pts = _lattice(lo, hi, mesh, c)
            ok = self.contains_many(pts)
            if ok.any():
                return pts[np.argmax(ok)]
        raise ValueError("could not find a feasible point")

    def bounding_box(self):
        return self.enclosing_center - self.enclosing_radius, self.enclosing_center + self.enclosing_radius

    def radius_about(self, c):
        return float(np.linalg.norm(self.enclosing_center - c) + self.enclosing_radius)

    def transformed(self, tau):
        gs = [g.affine_substitute(list(tau.center), tau.scale) for g in self.g_list]
        return BasicSet(gs, self.enclosing_radius / tau.scale, center=tau(self.enclosing_center), check_concave=False)


# -- textual set descriptors ---------------------------------------------------

def parse_set(text: str, nvars: int | None = None, exact: bool = True) -> ConvexSet:
    """Parse ``ball:c1,c2:r``, ``box:lo1,lo2:hi1,hi2``, ``hs:a11,a12:b1;a21,a22:b2`` or
    ``basic:g1;g2[@R]``.
    """
    kind, _, rest = text.partition(":")
    kind = kind.strip().lower()

    def nums(s):
        return [float(Fraction(v.strip())) for v in s.split(",") if v.strip()]

    if kind == "ball":
        c, _, r = rest.rpartition(":")
        return Ball(nums(c), float(Fraction(r.strip())))
    if kind == "box":
        lo, _, hi = rest.partition(":")
        return Box(nums(lo), nums(hi))
    if kind == "hs":
        normals, offsets = [], []
        for part in rest.split(";"):
            a, _, b = part.partition(":")
            normals.append(nums(a))
            offsets.append(float(Fraction(b.strip())))
        return Halfspaces(normals, offsets)
    if kind == "basic":
        from .parse import parse

        body, _, radius = rest.partition("@")
        if nvars is None:
            raise ValueError("basic sets need nvars")
        gs = [parse(s, nvars, exact) for s in body.split(";") if s.strip()]
        if not radius:
            raise ValueError("basic sets need an enclosing radius: basic:g1;g2@R")
        return BasicSet(gs, float(Fraction(radius.strip())))
    raise ValueError(f"unknown set kind {kind!r}")
