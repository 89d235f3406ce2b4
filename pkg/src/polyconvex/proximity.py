"""Proximal minimisation of a polynomial over a compact convex set.

After mapping X into the ball of radius 1/2 and adding c = 2D to f (so the
shifted F satisfies F >= D on X), every weighted function

    phi_{N, xi}(x) = (1 + |x - xi|^2)^N F(x),   N = 6,

is strongly convex on X.  The iteration a_{k+1} = argmin_X phi_{N, a_k}
decreases F and converges to a lower critical point of f on X.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .convexify import Convexified
from .poly import Polynomial, bound_A, bound_DD
from .sets import AffineMap, Ball, Box, ConvexSet, Halfspaces, UnsupportedOperation

ARMIJO = 1e-4


@dataclass
class ProximityConfig:
    N: int = 6
    tol_outer: float = 1e-8
    tol_inner: float = 1e-10
    max_outer: int = 10_000
    max_inner: int = 100_000
    mu_floor: float = 1e-12
    crit_tol: float = 1e-6

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be at least 1")
        for name in ("tol_outer", "tol_inner", "mu_floor", "crit_tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.max_outer < 1 or self.max_inner < 1:
            raise ValueError("iteration caps must be positive")


class InnerSolverError(RuntimeError):
    def __init__(self, message: str, best: np.ndarray):
        super().__init__(message)
        self.best = best


@dataclass
class Prepared:
    F: Polynomial  # shifted polynomial in normalised coordinates
    X: ConvexSet  # normalised set, inside B(0, 1/2)
    tau: AffineMap
    c: float
    D: float


def prepare(f: Polynomial, X: ConvexSet) -> Prepared:
    """Normalise X into B(0, 1/2) and shift f by c = 2D so that F >= D there."""
    if not isinstance(X, (Ball, Box, Halfspaces)):
        raise UnsupportedOperation("proximal iteration needs a set with a projection")
    tau, Xn = X.normalize()
    fn = f.to_float().affine_substitute(list(tau.center), float(tau.scale))
    D = max(1.0, float(bound_A(fn, 0.5)), float(bound_DD(fn, 0.5)))
    c = 2 * D
    return Prepared(F=fn + c, X=Xn, tau=tau, c=c, D=D)


# -- inner solver --------------------------------------------------------------

def inner_argmin(phi, X: ConvexSet, start, cfg: ProximityConfig | None = None) -> np.ndarray:
    """Projected gradient with Armijo backtracking and Barzilai-Borwein trial steps.

    ``phi`` must be callable and provide ``gradient``.  Stops when the
    projected-gradient residual |x - P(x - grad phi(x))| is at most
    ``cfg.tol_inner``.
    """
    cfg = cfg or ProximityConfig()
    x = X.project(np.asarray(start, dtype=float))
    fx = float(phi(x))
    g = np.asarray(phi.gradient(x), dtype=float)
    res = float(np.linalg.norm(x - X.project(x - g)))
    t = 1.0 / max(1.0, float(np.linalg.norm(g)))
    for _ in range(cfg.max_inner):
        if res <= cfg.tol_inner:
            return x
        noise = 64 * np.finfo(float).eps * max(1.0, abs(fx))
        while True:
            x_new = X.project(x - t * g)
            if np.array_equal(x_new, x):
                return x  # no representable progress left
            f_new = float(phi(x_new))
            g_new = np.asarray(phi.gradient(x_new), dtype=float)
            res_new = float(np.linalg.norm(x_new - X.project(x_new - g_new)))
            if f_new <= fx + ARMIJO * float(g @ (x_new - x)):
                break
            # decrease below the resolution of phi: fall back on the residual
            if f_new <= fx + noise and res_new < res:
                break
            t /= 2
        s, y = x_new - x, g_new - g
        sy = float(s @ y)
        t = float(s @ s) / sy if sy > 0 else 2 * t
        t = min(max(t, 1e-20), 1e20)
        x, fx, g, res = x_new, f_new, g_new, res_new
    raise InnerSolverError("inner solver hit max_inner", x)


# -- outer loop ----------------------------------------------------------------

@dataclass
class ProximityTrace:
    iterates: list  # original coordinates
    iterates_norm: list  # normalised coordinates
    values: list  # F at the normalised iterates
    steps: list  # normalised step lengths
    status: str  # converged | max-iterations | inner-failure
    prepared: Prepared
    N: int
    mu_est: float | None = None
    lemma_checks: list = field(default_factory=list)

    @property
    def a_star(self) -> np.ndarray:
        return self.iterates[-1]

    def to_jsonl(self) -> str:
        lines = []
        checks = {c["nu"]: c for c in self.lemma_checks}
        for nu, a in enumerate(self.iterates):
            rec = {"nu": nu, "a": [float(v) for v in a], "f": self.values[nu],
                   "step": self.steps[nu] if nu < len(self.steps) else None}
            if nu in checks:
                rec["lemma1_slack"] = checks[nu]["lemma1_slack"]
                rec["lemma2_pass"] = checks[nu]["lemma2_pass"]
            lines.append(json.dumps(rec))
        return "\n".join(lines)


def iterate(f: Polynomial, X: ConvexSet, a0, cfg: ProximityConfig | None = None) -> ProximityTrace:
    """Run a_{k+1} = argmin_X (1 + |x - a_k|^2)^N F(x) until the step drops below tol_outer."""
    cfg = cfg or ProximityConfig()
    prep = prepare(f, X)
    a = prep.tau(a0)
    if not prep.X.contains(a, tol=1e-10):
        raise ValueError("starting point is not in X")
    a = prep.X.project(a)
    Fc = prep.F.compiled()
    assert Fc(a[None, :])[0] > 0, "shifted polynomial must be positive on X"
    its, vals, steps = [a], [float(Fc(a[None, :])[0])], []
    status = "max-iterations"
    for _ in range(cfg.max_outer):
        phi = Convexified(prep.F, cfg.N, xi=a)
        try:
            nxt = inner_argmin(phi, prep.X, a, cfg)
        except InnerSolverError as exc:
            its.append(exc.best)
            vals.append(float(Fc(exc.best[None, :])[0]))
            steps.append(float(np.linalg.norm(exc.best - a)))
            status = "inner-failure"
            break
        step = float(np.linalg.norm(nxt - a))
        if step <= cfg.tol_outer:
            status = "converged"
            break
        its.append(nxt)
        vals.append(float(Fc(nxt[None, :])[0]))
        steps.append(step)
        a = nxt
    orig = [prep.tau.inverse(u) for u in its]
    return ProximityTrace(iterates=orig, iterates_norm=its, values=vals, steps=steps, status=status,
                          prepared=prep, N=cfg.N)


# -- checks --------------------------------------------------------------------

def _kkt(grad: np.ndarray, X: ConvexSet, a: np.ndarray, tol: float) -> bool | None:
    """Closed-form normal-cone test for balls and boxes; None for other sets."""
    scale = tol * max(1.0, float(np.linalg.norm(grad)))
    if isinstance(X, Ball):
        d = a - X.center_
        r = float(np.linalg.norm(d))
        if r < X.radius * (1 - 1e-9):
            return float(np.linalg.norm(grad)) <= scale
        lam = -float(grad @ d) / (r * r)
        return lam >= -scale and float(np.linalg.norm(grad + lam * d)) <= scale
    if isinstance(X, Box):
        ok = True
        for gi, ai, lo, hi in zip(grad, a, X.lo, X.hi):
            at_lo = ai <= lo + 1e-9 * max(1.0, abs(lo))
            at_hi = ai >= hi - 1e-9 * max(1.0, abs(hi))
            if at_lo and at_hi:
                continue
            if at_lo:
                ok &= gi >= -scale
            elif at_hi:
                ok &= gi <= scale
            else:
                ok &= abs(gi) <= scale
        return bool(ok)
    return None


def _extreme_points(X: ConvexSet) -> np.ndarray:
    if isinstance(X, Ball):
        return X.boundary_points(64 if X.dim == 2 else 8)
    if isinstance(X, Box) and X.dim <= 10:
        return X.vertices()
    return np.empty((0, X.dim))


def check_lower_critical(f: Polynomial, X: ConvexSet, a, tol: float = 1e-6, mesh: float | None = None,
                         radius: float | None = None) -> bool:
    """<grad f(a), x - a> >= -tol |x - a| for sampled x in X near a and at extreme points.

    For balls and boxes the closed-form normal-cone condition must agree.
    """
    a = np.asarray(a, dtype=float)
    if not X.contains(a, tol=1e-10):
        raise ValueError("point is not in X")
    grad = f.to_float().gradient_at(a)
    R = X.radius_bound()
    mesh = mesh or R / (200 if X.dim == 1 else 20)
    radius = radius or 0.25 * R
    pts = X.grid_sample(mesh)
    near = pts[np.linalg.norm(pts - a, axis=1) <= radius]
    samples = np.vstack([near, _extreme_points(X), X.project(a - radius * grad / max(np.linalg.norm(grad), 1e-300))[None, :]])
    d = samples - a
    lens = np.linalg.norm(d, axis=1)
    keep = lens > 1e-9 * max(R, 1.0)  # directions to near-coincident samples are noise
    sampled_ok = bool(np.all(d[keep] @ grad >= -tol * max(1.0, float(np.linalg.norm(grad))) * lens[keep]))
    kkt = _kkt(grad, X, a, tol)
    return sampled_ok if kkt is None else (sampled_ok and kkt)


def _min_eig_on_segment(phi: Convexified, a: np.ndarray, b: np.ndarray, samples: int = 21) -> float:
    best = math.inf
    for s in np.linspace(0.0, 1.0, samples):
        H = phi.hessian(a + s * (b - a))
        best = min(best, float(np.min(np.linalg.eigvalsh(H))))
    return best


def verify_step_lemmas(trace: ProximityTrace, grid_mesh: float = 1e-3, cfg: ProximityConfig | None = None) -> dict:
    """Per-step checks on the normalised problem stored in the trace.

    (i) step length equals the grid distance from a_k to the level set
    {F = F(a_{k+1})} in X.  The oracle's level band |F - level| <= B(F,R) mesh
    admits points up to B mesh / |grad F| inside the level set, so the
    distance may fall short of the step by that much and exceed it by half a
    cell diagonal; the tolerance is at least one grid mesh.  (ii) the decrease
    F(a_{k+1}) <= (F(a_k) - mu/2 |d|^2) / (1 + |d|^2)^N with mu the smallest
    sampled Hessian eigenvalue of phi_{N, a_k} on the segment.
    """
    from .oracles import gradient_norm_bound, level_set_distance

    cfg = cfg or ProximityConfig(N=trace.N)
    prep = trace.prepared
    F = prep.F
    Fc = F.compiled()
    grid = prep.X.grid_sample(grid_mesh)
    lip = gradient_norm_bound(F, prep.X.radius_bound())
    hi_tol = grid_mesh * max(1.0, math.sqrt(prep.X.dim) / 2)
    checks = []
    mu_min = math.inf
    for k, step in enumerate(trace.steps):
        a, b = trace.iterates_norm[k], trace.iterates_norm[k + 1]
        Fa, Fb = float(Fc(a[None, :])[0]), float(Fc(b[None, :])[0])
        dist = level_set_distance(F, prep.X, a, Fb, grid_mesh, grid=grid)
        slack = dist - step
        gb = float(np.linalg.norm(Fc.gradient(b)))
        lo_tol = grid_mesh * max(1.0, lip / gb) if gb > 0 else math.inf
        phi = Convexified(F, trace.N, xi=a)
        mu = max(_min_eig_on_segment(phi, a, b), cfg.mu_floor)
        mu_min = min(mu_min, mu)
        rhs = (Fa - mu / 2 * step**2) / (1 + step**2) ** trace.N
        checks.append({
            "nu": k,
            "lemma1_slack": slack,
            "lemma1_tol": [lo_tol, hi_tol],
            "lemma1_pass": bool(-lo_tol <= slack <= hi_tol),
            "mu_hat": mu,
            "lemma2_lhs": Fb,
            "lemma2_rhs": rhs,
            "lemma2_pass": bool(Fb <= rhs + 1e-12 * abs(rhs)),
        })
    trace.lemma_checks = checks
    trace.mu_est = None if not checks else mu_min
    return {
        "steps": len(checks),
        "lemma1_all": all(c["lemma1_pass"] for c in checks),
        "lemma2_all": all(c["lemma2_pass"] for c in checks),
        "mu_est": trace.mu_est,
        "grid_mesh": grid_mesh,
        "checks": checks,
    }
