"""Chebyshev radii and centers, diameters, diameter-radius profiles, regular
simplices and the planar rotation used by the zero-slack responder."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.spatial import ConvexHull, QhullError

from .errors import DomainError, ResourceError
from .spaces import (
    ENUMERATION_CAP,
    DiscreteUniform,
    EuclideanBall,
    EuclideanBox,
    Space,
    UltrametricStrings,
)


@dataclass
class BallCertificate:
    center: object
    radius: float
    support: list = field(default_factory=list)

    def to_json(self, space: Space | None = None) -> dict:
        enc = space.point_to_json if space is not None else _plain
        return {"center": enc(self.center), "radius": float(self.radius),
                "support": [enc(s) for s in self.support]}


def _plain(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    return x.item() if isinstance(x, np.generic) else x


# ---------------------------------------------------------------------------
# diameters

def set_diameter(space: Space, points) -> float:
    """Exact max pairwise distance; chunked so large sets stay in memory."""
    if space.is_euclidean:
        P = np.asarray(points, float).reshape(-1, space.dim)
    else:
        P = np.asarray(points, np.int64).reshape(-1)
    m = len(P)
    if m == 0:
        raise DomainError("diameter of an empty set")
    best = 0.0
    chunk = max(1, 4_000_000 // max(m, 1))
    for i in range(0, m, chunk):
        best = max(best, float(space.cdist(P[i:i + chunk], P).max()))
    return best


def hull_reduce(P: np.ndarray) -> np.ndarray:
    """Convex-hull vertices for n <= 3 (diameters and enclosing balls depend on those only)."""
    m, n = P.shape
    if n > 3 or m <= n + 2:
        return P
    if n == 1:
        return np.array([P.min(axis=0), P.max(axis=0)])
    try:
        return P[ConvexHull(P).vertices]
    except (QhullError, ValueError):
        return P


def euclidean_diameter(P: np.ndarray) -> float:
    P = hull_reduce(np.asarray(P, float))
    best = 0.0
    for i in range(0, len(P), 2048):
        blk = P[i:i + 2048]
        d2 = np.sum((blk[:, None, :] - P[None, :, :]) ** 2, axis=2)
        best = max(best, float(d2.max()))
    return math.sqrt(best)


# ---------------------------------------------------------------------------
# minimal enclosing ball (move-to-front, exact up to dim 8)

def _circumball(S: np.ndarray) -> tuple[np.ndarray, float]:
    p0 = S[0]
    if len(S) == 1:
        return p0.copy(), 0.0
    A = S[1:] - p0
    b = 0.5 * np.einsum("ij,ij->i", A, A)
    lam = np.linalg.lstsq(A @ A.T, b, rcond=None)[0]
    c = p0 + lam @ A
    return c, float(np.max(np.sum((S - c) ** 2, axis=1)))


def _mtf(P: np.ndarray, order: np.ndarray, end: int, support: list[int], dim: int, tol: float):
    if support:
        c, r2 = _circumball(P[support])
    else:
        c, r2 = P[order[0]].copy(), -1.0
    if len(support) == dim + 1:
        return c, r2, list(support)
    best_support = list(support)
    i = 0
    while i < end:
        idx = order[i:end]
        d2 = np.sum((P[idx] - c) ** 2, axis=1)
        out = np.nonzero(d2 > r2 + tol * max(r2, 1e-300) + 1e-300)[0] if r2 >= 0 else np.array([0])
        if len(out) == 0:
            break
        j = i + int(out[0])
        p = int(order[j])
        c, r2, best_support = _mtf(P, order, j, support + [p], dim, tol)
        order[: j + 1] = np.roll(order[: j + 1], 1)
        i = j + 1
    return c, r2, best_support


def min_enclosing_ball(points, seed: int = 0) -> BallCertificate:
    P = np.asarray(points, dtype=float)
    if P.ndim == 1:
        P = P[:, None]
    if P.size == 0 or len(P) == 0:
        raise DomainError("minimal enclosing ball of an empty set")
    n = P.shape[1]
    if n > 8:
        return _meb_subgradient(P)
    H = np.unique(hull_reduce(P), axis=0)
    order = np.random.default_rng(seed).permutation(len(H))
    c, r2, sup = _mtf(H, order, len(H), [], n, 1e-12)
    r = float(np.sqrt(np.max(np.sum((H - c) ** 2, axis=1))))
    return BallCertificate(c, r, [H[k] for k in sup])


def _meb_subgradient(P: np.ndarray) -> BallCertificate:
    c = P.mean(axis=0)
    best_c, best = c, np.inf
    for k in range(20_000):
        d = np.linalg.norm(P - c, axis=1)
        j = int(d.argmax())
        if d[j] < best:
            best, best_c = d[j], c.copy()
        g = (c - P[j]) / max(d[j], 1e-300)
        c = c - g * (best * 0.5 / (k + 1))
    return BallCertificate(best_c, float(best), [])


# ---------------------------------------------------------------------------
# Chebyshev center with the center constrained to a box or ball body

def chebyshev_center_constrained(points, body: Space, seed: int = 0,
                                 iterations: int = 10_000, starts: int = 5) -> BallCertificate:
    if not isinstance(body, (EuclideanBox, EuclideanBall)):
        raise DomainError("constrained Chebyshev centers need a Euclidean box or ball; "
                          "use finite_center for finite spaces")
    P = np.asarray(points, float).reshape(-1, body.dim)
    if len(P) == 0:
        raise DomainError("Chebyshev center of an empty set")
    P = np.unique(hull_reduce(P), axis=0)
    meb = min_enclosing_ball(P, seed)
    if body.contains(meb.center):
        c = body.project(meb.center)
        r = float(np.max(np.linalg.norm(P - c, axis=1)))
        return BallCertificate(c, r, meb.support)

    def f(x):
        return float(np.max(np.linalg.norm(P - x, axis=1)))

    rng = np.random.default_rng(seed)
    X = np.stack([body.project(meb.center), body.chebyshev_center(),
                  body.project(P.mean(axis=0))]
                 + [body.sample(1, rng)[0] for _ in range(max(0, starts - 3))])[:starts]
    scale = max(meb.radius, 1e-12)
    fbest = np.array([f(x) for x in X])
    xbest = X.copy()
    for k in range(iterations):
        diff = X[:, None, :] - P[None, :, :]
        d = np.sqrt(np.einsum("sij,sij->si", diff, diff))
        j = d.argmax(axis=1)
        fx = d[np.arange(len(X)), j]
        better = fx < fbest
        fbest = np.where(better, fx, fbest)
        xbest[better] = X[better]
        g = diff[np.arange(len(X)), j] / np.maximum(fx, 1e-300)[:, None]
        step = fx - fbest + scale / (k + 1)  # Polyak step with a decaying target offset
        X = X - g * step[:, None]
        X = np.array([body.project(x) for x in X])
    x0 = xbest[int(fbest.argmin())]
    cand = _slsqp_polish(P, body, x0)
    c = x0 if cand is None or f(cand) >= f(x0) else cand
    c = body.project(c)
    d = np.linalg.norm(P - c, axis=1)
    r = float(d.max())
    return BallCertificate(c, r, [P[k] for k in np.nonzero(d >= r - 1e-7)[0]])


def _slsqp_polish(P: np.ndarray, body, x0: np.ndarray):
    n = P.shape[1]
    t0 = float(np.max(np.linalg.norm(P - x0, axis=1)))
    cons = [{"type": "ineq",
             "fun": lambda z: z[n] ** 2 - np.sum((P - z[:n]) ** 2, axis=1),
             "jac": lambda z: np.hstack([2 * (P - z[:n]), np.full((len(P), 1), 2 * z[n])])}]
    bounds = None
    if isinstance(body, EuclideanBox):
        bounds = list(zip(body.lower, body.upper)) + [(0, None)]
    else:
        c, R = body.c, body.radius
        cons.append({"type": "ineq", "fun": lambda z: R ** 2 - np.sum((z[:n] - c) ** 2),
                     "jac": lambda z: np.concatenate([-2 * (z[:n] - c), [0.0]])})
    try:
        res = minimize(lambda z: z[n], np.append(x0, t0), jac=lambda z: np.eye(n + 1)[n],
                       method="SLSQP", bounds=bounds, constraints=cons,
                       options={"maxiter": 200, "ftol": 1e-14})
    except (ValueError, np.linalg.LinAlgError):
        return None
    if not np.all(np.isfinite(res.x)):
        return None
    return body.project(res.x[:n])


# ---------------------------------------------------------------------------
# finite spaces

def finite_center(space: Space, subset, cap: int = ENUMERATION_CAP) -> BallCertificate:
    """Exact minimizer over all points of a finite space of the max distance to `subset`."""
    if not space.is_finite:
        raise DomainError("finite_center needs a finite space")
    S = np.unique(np.asarray(subset, np.int64).reshape(-1))
    if len(S) == 0:
        raise DomainError("Chebyshev center of an empty set")
    centers = space.enumerate(cap)
    best_r, best_c = np.inf, -1
    chunk = max(1, 2_000_000 // len(S))
    for i in range(0, len(centers), chunk):
        blk = centers[i:i + chunk]
        worst = space.cdist(blk, S).max(axis=1)
        k = int(worst.argmin())
        if worst[k] < best_r:
            best_r, best_c = float(worst[k]), int(blk[k])
    d = space.dists(best_c, S)
    return BallCertificate(best_c, best_r, [int(s) for s in S[d == best_r]])


def hausdorff_distance(space: Space, a, b) -> float:
    D = space.cdist(a, b)
    return float(max(D.min(axis=1).max(), D.min(axis=0).max()))


# ---------------------------------------------------------------------------
# diameter-radius profiles

def jung_constant(n: int) -> float:
    return math.sqrt(n / (2.0 * (n + 1)))


def profile_euclidean(alpha: float, n: int) -> float:
    if alpha < 0:
        raise DomainError("alpha must be nonnegative")
    return jung_constant(n) * alpha


def profile_finite_bruteforce(space: Space, alpha: float, max_points: int = 15) -> float:
    if not space.is_finite:
        raise DomainError("brute-force profile needs a finite space")
    m = space.size()
    if m > max_points:
        raise ResourceError(f"brute-force profile enumerates 2^{m} subsets; cap is {max_points} points")
    D = space.cdist(np.arange(m), np.arange(m))
    masks = np.arange(1, 1 << m, dtype=np.int64)
    member = ((masks[:, None] >> np.arange(m)) & 1).astype(bool)
    ok = np.ones(len(masks), bool)
    for i, j in zip(*np.nonzero(np.triu(D > alpha, 1))):
        ok &= ~(member[:, i] & member[:, j])
    sub = member[ok]
    if len(sub) == 0:
        return 0.0
    radius = np.full(len(sub), np.inf)
    for c in range(m):
        radius = np.minimum(radius, np.where(sub, D[c][None, :], 0.0).max(axis=1))
    return float(radius.max())


def profile_value(space: Space, alpha: float, seed: int = 0, trials: int = 400) -> tuple[float, str]:
    """e_X(alpha) with a tag saying how it was obtained."""
    if alpha < 0:
        raise DomainError("alpha must be nonnegative")
    if alpha == 0:
        return 0.0, "closed-form"
    if space.is_euclidean:
        n = space.dim
        simplex = build_regular_simplex(n, alpha, space.chebyshev_center())
        if np.all(space.boundary_gap(simplex.vertices) >= 0):
            return profile_euclidean(alpha, n), "closed-form"
        return _profile_estimate(space, alpha, seed, trials), "estimate"
    if isinstance(space, UltrametricStrings):
        # every point of an ultrametric ball is a center, so r(S) = diam(S)
        j = max(1, math.ceil(-math.log2(alpha)))
        return (0.5 ** j if j <= space.depth else 0.0), "closed-form"
    if space.size() <= 15:
        return profile_finite_bruteforce(space, alpha), "brute-force"
    if isinstance(space, DiscreteUniform):
        return (1.0 if alpha >= 1 and space.count > 1 else 0.0), "closed-form"
    return profile_finite_bruteforce(space, alpha), "brute-force"


def _profile_estimate(body, alpha: float, seed: int, trials: int) -> float:
    """Lower bound on the profile of a body too small for the extremal simplex."""
    rng = np.random.default_rng(seed)
    n = body.dim
    best = 0.0
    for _ in range(trials):
        c = body.sample(1, rng)[0]
        rot, _ = np.linalg.qr(rng.standard_normal((n, n)))
        scale = rng.uniform(0.2, 1.0) * alpha
        V = build_regular_simplex(n, scale, np.zeros(n)).vertices @ rot.T + c
        V = np.array([body.project(v) for v in V])
        if set_diameter(body, V) <= alpha:
            best = max(best, chebyshev_center_constrained(V, body, iterations=300, starts=2).radius)
    return best


# ---------------------------------------------------------------------------
# regular simplex and the rotation plan

@dataclass
class RegularSimplex:
    vertices: np.ndarray  # (n+1, n)
    edge: float

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    @property
    def centroid(self) -> np.ndarray:
        return self.vertices.mean(axis=0)

    @property
    def circumradius(self) -> float:
        return jung_constant(self.dim) * self.edge

    def translated(self, v) -> "RegularSimplex":
        return RegularSimplex(self.vertices + np.asarray(v, float), self.edge)


def helmert_basis(n: int) -> np.ndarray:
    """Orthonormal basis (n rows) of the hyperplane orthogonal to the all-ones vector in R^{n+1}."""
    H = np.zeros((n, n + 1))
    for k in range(1, n + 1):
        H[k - 1, :k] = 1.0
        H[k - 1, k] = -k
        H[k - 1] /= math.sqrt(k * (k + 1))
    return H


def build_regular_simplex(n: int, edge: float, center=None) -> RegularSimplex:
    if n < 1:
        raise DomainError("simplex dimension must be positive")
    if not edge > 0:
        raise DomainError("simplex edge must be positive")
    # vertex i sits at e_i / sqrt(2) in R^{n+1}: pairwise distance 1
    V = (np.eye(n + 1) / math.sqrt(2.0)) @ helmert_basis(n).T
    V = V * edge
    V -= V.mean(axis=0)
    if center is not None:
        V += np.asarray(center, float).reshape(1, n)
    return RegularSimplex(V, float(edge))


def far_near(vertices: np.ndarray, q) -> tuple[int, int, np.ndarray]:
    """Indices of the farthest and nearest vertex to q.

    Distances within a relative 1e-12 of the extreme count as ties, which go to
    the lowest index, so rounding in q does not decide the choice.
    """
    d = np.linalg.norm(vertices - np.asarray(q, float), axis=1)
    tol = 1e-12 * max(1.0, float(d.max()))
    far = int(np.flatnonzero(d >= d.max() - tol)[0])
    near = int(np.flatnonzero(d <= d.min() + tol)[0])
    return far, near, d


@dataclass
class RotationPlan:
    A: np.ndarray
    B: np.ndarray
    Q: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    theta: float
    far: int = -1
    near: int = -1

    def angle_from_AB(self, x) -> float:
        """Angle at A between the ray AB and the ray Ax."""
        y = np.asarray(x, float) - self.A
        along = float(y @ self.d1)
        perp = float(np.linalg.norm(y - along * self.d1))
        return math.atan2(perp, along)


def plan_rotation(simplex: RegularSimplex, far: int, near: int, theta: float) -> RotationPlan:
    V = simplex.vertices
    if simplex.dim < 2:
        raise DomainError("rotation unavailable: a one-dimensional simplex has no third vertex")
    if far == near:
        raise DomainError("far and near vertices must differ")
    if not 0 < theta < math.pi / 2:
        raise DomainError("theta must lie in (0, pi/2)")
    A, B = V[far], V[near]
    rest = np.delete(V, [far, near], axis=0)
    Q = rest.mean(axis=0)
    AB = B - A
    d1 = AB / np.linalg.norm(AB)
    w = 2.0 * (Q - A) - AB
    w = w - (w @ d1) * d1
    d2 = w / np.linalg.norm(w)
    return RotationPlan(A.copy(), B.copy(), Q, d1, d2, float(theta), far, near)


def apply_rotation(plan: RotationPlan, x, inverse: bool = False) -> np.ndarray:
    """Rotate by 2*theta in the (d1, d2) plane about A; identity on the complement."""
    x = np.asarray(x, float)
    phi = -2.0 * plan.theta if inverse else 2.0 * plan.theta
    cs, sn = math.cos(phi), math.sin(phi)
    y = x - plan.A
    a = y @ plan.d1
    b = y @ plan.d2
    a2 = cs * a - sn * b
    b2 = sn * a + cs * b
    if y.ndim == 1:
        return x + (a2 - a) * plan.d1 + (b2 - b) * plan.d2
    return x + np.outer(a2 - a, plan.d1) + np.outer(b2 - b, plan.d2)
