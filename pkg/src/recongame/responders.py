"""Responder strategies.  Each one keeps a witness set that stays inside the
feasible region after every answer; the engine checks this obligation."""

from __future__ import annotations

import math
from fractions import Fraction

import mpmath
import numpy as np

from .errors import ConfigurationError, DomainError, ProtocolViolation
from .feasible import goodness_angle, good_query_test, neighborhood_from_rho
from .geometry import (
    RegularSimplex,
    build_regular_simplex,
    chebyshev_center_constrained,
    far_near,
    finite_center,
    plan_rotation,
    apply_rotation,
    set_diameter,
    profile_finite_bruteforce,
)
from .spaces import (
    DiscreteUniform,
    EuclideanBall,
    EuclideanBox,
    NoiseParams,
    Space,
    UltrametricStrings,
)

BOUNDARY_SAMPLES = 64
mpmath.mp.dps = 60


class Responder:
    name = "responder"

    def __init__(self, space: Space, noise: NoiseParams):
        self.space = space
        self.noise = noise
        self.witness_version = 0
        self.log: list[dict] = []
        self._radius_cache: tuple[int, float] | None = None

    def respond(self, q) -> float:
        raise NotImplementedError

    def witness(self) -> np.ndarray:
        raise NotImplementedError

    def adversarial_points(self, guess) -> np.ndarray:
        """Extra witness-region points chosen after seeing the guess."""
        return self.witness()[:0]

    def witness_radius(self) -> float:
        """Chebyshev radius of the current witness set (center ranges over the space)."""
        if self._radius_cache and self._radius_cache[0] == self.witness_version:
            return self._radius_cache[1]
        W = self.witness()
        if len(W) == 0:
            r = float("nan")
        elif self.space.is_euclidean:
            r = chebyshev_center_constrained(W, self.space, iterations=2000).radius
        else:
            r = finite_center(self.space, W).radius
        self._radius_cache = (self.witness_version, r)
        return r

    def info(self) -> dict:
        return {"strategy": self.name}


def _unit_directions(n: int, count: int = BOUNDARY_SAMPLES) -> np.ndarray:
    if n == 1:
        return np.array([[1.0], [-1.0]])
    if n == 2:
        ang = 2 * math.pi * np.arange(count) / count
        return np.stack([np.cos(ang), np.sin(ang)], axis=1)
    g = np.random.default_rng(20240917).standard_normal((count - 2 * n, n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return np.vstack([np.eye(n), -np.eye(n), g])


def _require_convex_body(space: Space) -> None:
    if not isinstance(space, (EuclideanBox, EuclideanBall)):
        raise DomainError("this responder needs a convex Euclidean body (box or ball)")


# ---------------------------------------------------------------------------

class ExtremalSetResponder(Responder):
    """Answers (1+eps) * dist(q, S) + delta, which keeps every point of S feasible."""

    name = "extremal_set"

    def __init__(self, space: Space, noise: NoiseParams, points):
        super().__init__(space, noise)
        if space.is_euclidean:
            S = np.asarray(points, float).reshape(-1, space.dim)
            for s in S:
                space.validate(s)
        else:
            S = space.validate_many(points)
        if len(S) == 0:
            raise DomainError("extremal set must be nonempty")
        diam = set_diameter(space, S)
        limit = (2.0 + noise.eps) * noise.delta
        if diam > limit * (1 + 1e-12) + 1e-15:
            raise DomainError(f"extremal set has diameter {diam} > (2+eps)*delta = {limit}")
        self.S = S

    def respond(self, q) -> float:
        return (1.0 + self.noise.eps) * float(self.space.dists(q, self.S).min()) + self.noise.delta

    def witness(self):
        return self.S


def extremal_simplex(space: Space, noise: NoiseParams) -> np.ndarray:
    """Regular simplex of diameter (2+eps)*delta centered in a Euclidean body."""
    _require_convex_body(space)
    edge = (2.0 + noise.eps) * noise.delta
    if edge <= 0:
        return space.chebyshev_center()[None, :]
    return build_regular_simplex(space.dim, edge, space.chebyshev_center()).vertices


def extremal_finite_subset(space: Space, noise: NoiseParams) -> np.ndarray:
    """A subset of diameter <= (2+eps)*delta with the largest Chebyshev radius (brute force)."""
    alpha = (2.0 + noise.eps) * noise.delta
    target = profile_finite_bruteforce(space, alpha)
    m = space.size()
    D = space.cdist(np.arange(m), np.arange(m))
    for mask in range(1, 1 << m):
        idx = [i for i in range(m) if mask >> i & 1]
        if D[np.ix_(idx, idx)].max() <= alpha and D[:, idx].max(axis=1).min() == target:
            return np.array(idx, dtype=np.int64)
    return np.array([0], dtype=np.int64)


def extremal_set_responder(s, space: Space, noise: NoiseParams) -> ExtremalSetResponder:
    return ExtremalSetResponder(space, noise, s)


# ---------------------------------------------------------------------------
# simplex strategies

def simplex_fit(body, edge: float) -> tuple[RegularSimplex, float]:
    """Centered simplex of the given edge and the largest alpha whose balls stay in the body."""
    simplex = build_regular_simplex(body.dim, edge, body.chebyshev_center())
    return simplex, float(body.boundary_gap(simplex.vertices).min())


def max_feasible_delta(body, edge_per_delta: float, need=lambda fit, d: fit > 0) -> float:
    lo, hi = 0.0, body.diameter() / max(edge_per_delta, 1e-300) + 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if need(simplex_fit(body, edge_per_delta * mid)[1], mid):
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-9:
            break
    return lo


class _SimplexResponder(Responder):
    def __init__(self, space, noise, seed):
        super().__init__(space, noise)
        self.seed = seed
        self.dirs = _unit_directions(space.dim)
        self.round = 0

    def _alpha_float(self) -> float:
        raise NotImplementedError

    def witness(self):
        V = self.simplex.vertices
        a = self._alpha_float()
        rim = (V[:, None, :] + a * self.dirs[None, :, :]).reshape(-1, V.shape[1])
        return np.vstack([V, rim])

    def adversarial_points(self, guess):
        V = self.simplex.vertices
        a = self._alpha_float()
        u = V - np.asarray(guess, float)
        nu = np.linalg.norm(u, axis=1, keepdims=True)
        u = np.where(nu > 0, u / np.where(nu > 0, nu, 1.0), self.dirs[:1])
        return V + a * u

    def witness_radius(self) -> float:
        return self.simplex.circumradius + self._alpha_float()


class SimplexTranslationResponder(_SimplexResponder):
    """Positive-eps strategy: shrink alpha by a constant factor, translating the simplex
    away from queries that leave too little room."""

    name = "simplex_translation"

    def __init__(self, body, noise: NoiseParams, seed: int = 0):
        _require_convex_body(body)
        if noise.eps <= 0:
            raise ConfigurationError("simplex_translation needs eps > 0")
        if noise.delta <= 0:
            raise ConfigurationError("simplex_translation needs delta > 0")
        super().__init__(body, noise, seed)
        edge = (2.0 + noise.eps) * noise.delta
        self.simplex, fit = simplex_fit(body, edge)
        if fit <= 0:
            dmax = max_feasible_delta(body, 2.0 + noise.eps)
            raise ConfigurationError(
                f"no simplex of diameter {edge} fits in the body; delta must be below {dmax:.9g}")
        self.alpha0 = min(fit, edge / 4.0)
        eps = Fraction(noise.eps)
        self.factor = ((1 + eps) ** 2 - 1) / (2 * (1 + eps) ** 2)
        self.alpha = Fraction(self.alpha0)
        self._dir_rng = np.random.default_rng(seed)

    def _alpha_float(self) -> float:
        return float(self.alpha)

    def respond(self, q) -> float:
        q = np.asarray(q, float)
        a = float(self.alpha)
        nxt = self.factor * self.alpha
        a_next = float(nxt)
        V = self.simplex.vertices
        far, near, d = far_near(V, q)
        sn = neighborhood_from_rho(self.noise, float(d.min()), float(d.max()))
        shift = 0.0
        if sn.alpha_star < a_next:
            u = V[near] - q
            nu = float(np.linalg.norm(u))
            if nu <= 1e-15:
                u = self._dir_rng.standard_normal(len(q))
                nu = float(np.linalg.norm(u))
            v = (a - a_next) * u / nu
            shift = float(np.linalg.norm(v))
            self.simplex = self.simplex.translated(v)
            far, near, d = far_near(self.simplex.vertices, q)
            sn = neighborhood_from_rho(self.noise, float(d.min()), float(d.max()))
            if sn.alpha_star < a_next * (1 - 1e-9) - 1e-15:
                raise ProtocolViolation(
                    f"translation left alpha*={sn.alpha_star} below alpha'={a_next}")
            if float(self.space.boundary_gap(self.simplex.vertices).min()) < a_next - 1e-12:
                raise ProtocolViolation("translated neighborhood left the body")
        self.alpha = nxt
        self.round += 1
        self.witness_version += 1
        self.log.append({"round": self.round, "alpha": a_next, "translated": shift > 0,
                         "displacement": shift, "budget": a - a_next,
                         "alpha_star": sn.alpha_star})
        return sn.r_star

    def info(self):
        return {"strategy": self.name, "alpha0": self.alpha0, "factor": str(self.factor),
                "alpha_T": float(self.alpha),
                "translations": sum(1 for e in self.log if e["translated"])}


class SimplexRotationResponder(_SimplexResponder):
    """Zero-eps strategy: alpha' = alpha^2/(162 delta); bad queries are fixed by rotating
    the simplex about its far vertex by 2*theta."""

    name = "simplex_rotation"

    def __init__(self, body, delta: float, seed: int = 0):
        _require_convex_body(body)
        if body.dim < 2:
            raise ConfigurationError(
                "pseudo-finite: rotation unavailable in dimension 1 (the interval is solved exactly)")
        if not delta > 0:
            raise ConfigurationError("simplex_rotation needs delta > 0")
        super().__init__(body, NoiseParams(0.0, delta), seed)
        self.delta = float(delta)
        self.simplex, fit = simplex_fit(body, 2.0 * delta)
        if fit <= 0:
            dmax = max_feasible_delta(body, 2.0)
            raise ConfigurationError(
                f"no simplex of diameter {2 * delta} fits in the body; delta must be below {dmax:.9g}")
        self.alpha0 = min(fit, np.nextafter(delta / 4.0, 0.0))
        self.alpha = mpmath.mpf(self.alpha0)
        self.rotations: list[dict] = []

    def _alpha_float(self) -> float:
        return float(self.alpha)

    @staticmethod
    def closed_form(alpha0: float, delta: float, t: int):
        c = mpmath.mpf(162) * mpmath.mpf(delta)
        return c * (mpmath.mpf(alpha0) / c) ** (2 ** t)

    def respond(self, q) -> float:
        q = np.asarray(q, float)
        a = float(self.alpha)
        nxt = self.alpha * self.alpha / (mpmath.mpf(162) * mpmath.mpf(self.delta))
        a_next = float(nxt)
        V = self.simplex.vertices
        far, near, d = far_near(V, q)
        record = None
        if a_next > 0 and far != near and not good_query_test(self.delta, a_next, self.simplex, q):
            theta = goodness_angle(self.delta, a_next)
            if not theta < math.pi / 18:
                raise ProtocolViolation(f"rotation angle {theta} is not below pi/18")
            plan = plan_rotation(self.simplex, far, near, theta)
            V2 = apply_rotation(plan, V, inverse=True)
            far2, near2, d2 = far_near(V2, q)
            tol = 1e-12 * max(1.0, float(d2.max()))
            kept = d2[far] >= d2.max() - tol and d2[near] <= d2.min() + tol
            angle = math.atan2(*_perp_along(V2[near] - V2[far], q - V2[far]))
            moved = float(np.linalg.norm(V2 - V, axis=1).max())
            b_move = 2 * self.delta * math.sqrt(2 * (1 - math.cos(2 * theta)))
            record = {"round": self.round + 1, "theta": theta, "angle_after": angle,
                      "near_far_kept": bool(kept), "max_vertex_move": moved,
                      "b_move_formula": b_move, "budget": a - a_next}
            if not kept:
                raise ProtocolViolation("rotation changed the near/far vertices")
            if not angle > theta:
                raise ProtocolViolation(f"rotated angle {angle} does not exceed theta {theta}")
            if moved > a - a_next + 1e-12:
                raise ProtocolViolation("rotation moved a vertex further than alpha - alpha'")
            self.simplex = RegularSimplex(V2, self.simplex.edge)
            self.rotations.append(record)
            d = d2
        self.alpha = nxt
        self.round += 1
        self.witness_version += 1
        self.log.append({"round": self.round, "alpha": a_next, "rotated": record is not None})
        return 0.5 * (float(d[far]) + float(d[near]))

    def info(self):
        return {"strategy": self.name, "alpha0": self.alpha0,
                "alpha_T": mpmath.nstr(self.alpha, 20), "rotations": len(self.rotations)}


def _perp_along(u: np.ndarray, w: np.ndarray) -> tuple[float, float]:
    un = u / np.linalg.norm(u)
    along = float(w @ un)
    return float(np.linalg.norm(w - along * un)), along


def simplex_translation_responder(body, noise: NoiseParams, seed: int = 0):
    return SimplexTranslationResponder(body, noise, seed)


def simplex_rotation_responder(body, delta: float, seed: int = 0):
    return SimplexRotationResponder(body, delta, seed)


# ---------------------------------------------------------------------------

class IntervalShrinkResponder(Responder):
    """On the line with eps > 0: keep the sub-interval anchored at the endpoint
    farther from the query; its length shrinks by at most the factor c per round."""

    name = "interval_shrink"

    def __init__(self, space, noise: NoiseParams, L0: float):
        super().__init__(space, noise)
        if not space.is_euclidean or space.dim != 1:
            raise DomainError("interval_shrink needs a one-dimensional Euclidean space")
        if noise.eps <= 0:
            raise DomainError("interval_shrink needs eps > 0")
        if not (space.contains([0.0]) and space.contains([L0])):
            raise DomainError("the space must contain [0, L0]")
        self.a, self.b = 0.0, float(L0)
        self.L0 = float(L0)
        k = 1.0 + noise.eps
        self.factor = (k * k - 1) / (2 * k * k)

    def respond(self, q) -> float:
        q = float(np.asarray(q, float).reshape(-1)[0])
        k = 1.0 + self.noise.eps
        a, b = self.a, self.b
        anchor_b = q <= 0.5 * (a + b)
        far = b if anchor_b else a
        D = abs(far - q)
        r = (D - self.noise.delta) / k
        thr = (D - (2.0 + self.noise.eps) * self.noise.delta) / (k * k)
        if anchor_b:
            self.a = max(a, q + thr) if thr > 0 else a
        else:
            self.b = min(b, q - thr) if thr > 0 else b
        self.witness_version += 1
        self.log.append({"a": self.a, "b": self.b, "anchor": "b" if anchor_b else "a"})
        return r

    @property
    def length(self) -> float:
        return self.b - self.a

    def witness(self):
        return np.linspace(self.a, self.b, BOUNDARY_SAMPLES + 2)[:, None]

    def witness_radius(self) -> float:
        return 0.5 * (self.b - self.a)


def interval_shrink_responder(L0: float, noise: NoiseParams, space=None):
    return IntervalShrinkResponder(space if space is not None else EuclideanBox([0.0], [L0]), noise, L0)


# ---------------------------------------------------------------------------

class UltrametricLazyResponder(Responder):
    """Commit one bit per informative query, always disagreeing with the query."""

    name = "ultrametric_lazy"

    def __init__(self, space: UltrametricStrings, noise: NoiseParams | None = None,
                 rounds: int | None = None):
        noise = noise or NoiseParams()
        if not isinstance(space, UltrametricStrings):
            raise DomainError("ultrametric_lazy needs UltrametricStrings")
        if noise.eps != 0 or noise.delta != 0:
            raise ConfigurationError("ultrametric_lazy is defined for eps = delta = 0")
        if rounds is not None and rounds >= space.depth:
            raise ConfigurationError(f"T={rounds} exhausts the truncation depth {space.depth}")
        super().__init__(space, noise)
        self.prefix = 0
        self.committed = 0

    def respond(self, q) -> float:
        q = int(q)
        mask = (1 << self.committed) - 1
        diff = (q ^ self.prefix) & mask
        if diff:
            j = (diff & -diff).bit_length()
            return 0.5 ** j
        if self.committed >= self.space.depth:
            raise ConfigurationError("truncation depth exhausted")
        bit = 1 - ((q >> self.committed) & 1)
        self.prefix |= bit << self.committed
        self.committed += 1
        self.witness_version += 1
        return 0.5 ** self.committed

    def witness(self):
        free = self.space.depth - self.committed
        count = min(1 << free, 256)
        ext = np.arange(count, dtype=np.int64) if count == 1 << free else \
            np.random.default_rng(self.committed).integers(0, 1 << free, count)
        return self.prefix | (ext << self.committed)

    def adversarial_points(self, guess):
        g = int(guess)
        mask = (1 << self.committed) - 1
        if (g ^ self.prefix) & mask:
            return np.array([self.prefix], dtype=np.int64)
        if self.committed >= self.space.depth:
            return np.array([g], dtype=np.int64)
        return np.array([g ^ (1 << self.committed)], dtype=np.int64)

    def witness_radius(self) -> float:
        return 0.5 ** (self.committed + 1) if self.committed < self.space.depth else 0.0


def ultrametric_lazy_responder(depth: int, rounds: int | None = None):
    return UltrametricLazyResponder(UltrametricStrings(depth), rounds=rounds)


# ---------------------------------------------------------------------------

class ConstantOneResponder(Responder):
    name = "constant_one"

    def __init__(self, space: DiscreteUniform, noise: NoiseParams | None = None, rounds: int = 0):
        noise = noise or NoiseParams()
        if not isinstance(space, DiscreteUniform):
            raise DomainError("constant_one needs DiscreteUniform")
        if noise.eps != 0 or noise.delta != 0:
            raise ConfigurationError("constant_one is defined for eps = delta = 0")
        if space.count < rounds + 2:
            raise DomainError(f"DiscreteUniform({space.count}) is too small for {rounds} rounds")
        super().__init__(space, noise)
        self.queried: set[int] = set()

    def respond(self, q) -> float:
        q = int(q)
        if q not in self.queried:
            self.queried.add(q)
            self.witness_version += 1
        return 1.0

    def witness(self):
        return np.array([i for i in range(self.space.count) if i not in self.queried], dtype=np.int64)


def constant_one_responder(space: DiscreteUniform, rounds: int = 0):
    return ConstantOneResponder(space, rounds=rounds)


# ---------------------------------------------------------------------------

NOISE_MODES = ("none", "seeded-uniform", "adversarial-max")


class HonestResponder(Responder):
    """Fixed secret; answers inside the (eps, delta) window of the true distance."""

    name = "honest"

    def __init__(self, space: Space, noise: NoiseParams, secret, noise_mode: str = "none",
                 seed: int = 0):
        super().__init__(space, noise)
        if noise_mode not in NOISE_MODES:
            raise ConfigurationError(f"noise_mode must be one of {NOISE_MODES}")
        self.secret = space.validate(secret)
        self.mode = noise_mode
        self.rng = np.random.default_rng(seed)

    def respond(self, q) -> float:
        d = self.space.dist(q, self.secret)
        k = 1.0 + self.noise.eps
        if self.mode == "none":
            return d
        if self.mode == "adversarial-max":
            return k * d + self.noise.delta
        lo, hi = max(0.0, (d - self.noise.delta) / k), k * d + self.noise.delta
        return float(self.rng.uniform(lo, hi))

    def witness(self):
        if self.space.is_euclidean:
            return np.asarray(self.secret, float)[None, :]
        return np.array([self.secret], dtype=np.int64)

    def witness_radius(self) -> float:
        return 0.0


def honest_responder(secret, noise: NoiseParams, noise_mode: str, space: Space, seed: int = 0):
    return HonestResponder(space, noise, secret, noise_mode, seed)


def closed_form_alpha(kind: str, alpha0: float, noise: NoiseParams, t: int):
    """alpha_t of the simplex schedules in exact arithmetic."""
    if kind == "translation":
        eps = Fraction(noise.eps)
        c = ((1 + eps) ** 2 - 1) / (2 * (1 + eps) ** 2)
        return c ** t * Fraction(alpha0)
    return SimplexRotationResponder.closed_form(alpha0, noise.delta, t)
