"""Reconstructor strategies: a query policy plus a final guess."""

from __future__ import annotations

import warnings
from typing import Callable

import numpy as np

from .errors import ConfigurationError
from .feasible import Transcript, feasible_mask, feasible_point_search, region_estimate
from .geometry import chebyshev_center_constrained, finite_center, jung_constant
from .spaces import EuclideanBox, NoiseParams, Space, build_cover


class Reconstructor:
    name = "reconstructor"

    def __init__(self):
        self.space: Space | None = None
        self.noise: NoiseParams | None = None
        self.rounds = 0
        self.seed = 0
        self.samples = 10_000

    def reset(self, space: Space, noise: NoiseParams, rounds: int, seed: int = 0,
              samples: int = 10_000) -> "Reconstructor":
        self.space, self.noise, self.rounds = space, noise, rounds
        self.seed, self.samples = seed, samples
        self._setup()
        return self

    def _setup(self) -> None:
        pass

    def next_query(self, transcript: Transcript):
        raise NotImplementedError

    def final_guess(self, transcript: Transcript):
        return region_guess(transcript, self.samples, self.seed)

    def guarantee(self, transcript: Transcript) -> float | None:
        """A proven bound on the worst-case error of the final guess, if the strategy has one."""
        return None

    def info(self) -> dict:
        return {"strategy": self.name}


def body_center(space: Space):
    if space.is_euclidean:
        return space.chebyshev_center()
    return finite_center(space, space.enumerate()).center


def region_guess(t: Transcript, samples: int, seed: int):
    """Chebyshev center of the (sampled or enumerated) feasible region."""
    if len(t) == 0:
        return body_center(t.space)
    est = region_estimate(t, samples, seed, center=False, quiet=True)
    pts = est.feasible_points
    if t.space.is_euclidean:
        if len(pts) < 32:
            extra = feasible_point_search(t)
            pts = np.vstack([pts.reshape(-1, t.space.dim), extra])
        if len(pts) == 0:
            return body_center(t.space)
        return t.space.project(chebyshev_center_constrained(pts, t.space, seed).center)
    if len(pts) == 0:
        return body_center(t.space)
    return finite_center(t.space, pts).center


# ---------------------------------------------------------------------------

class NetCoverReconstructor(Reconstructor):
    """Query every point of an alpha-cover, then guess the center of the feasible region."""

    name = "net_cover"

    def __init__(self, alpha: float):
        super().__init__()
        if not alpha > 0:
            raise ConfigurationError("net_cover needs alpha > 0")
        self.alpha = float(alpha)

    def _setup(self):
        self.cover = build_cover(self.space, self.alpha)
        if len(self.cover) > self.rounds:
            raise ConfigurationError(
                f"the {self.alpha}-cover has {len(self.cover)} points but only T={self.rounds} rounds")

    def next_query(self, transcript):
        return self.cover.points[len(transcript) % len(self.cover)]

    def guarantee(self, transcript):
        """Radius bound once the whole cover has been queried.

        The feasible region then has diameter at most (2+eps)delta + ((1+eps)^2+1)alpha;
        Jung's constant turns that into a radius bound in R^n.
        """
        if len(transcript) < len(self.cover):
            return None
        eps, delta = self.noise.eps, self.noise.delta
        width = (2 + eps) * delta + ((1 + eps) ** 2 + 1) * self.alpha
        if self.space.is_euclidean:
            return jung_constant(self.space.dim) * width
        return width

    def info(self):
        return {"strategy": self.name, "alpha": self.alpha, "cover_size": len(self.cover)}


def net_cover_reconstructor(alpha: float):
    return NetCoverReconstructor(alpha)


class GridRefinementReconstructor(Reconstructor):
    """Query a fixed grid in a box, recenter on the smallest answer, shrink the box."""

    name = "grid_refinement"

    def __init__(self, grid_per_round: int | None = None, zoom: float = 0.5,
                 require_multiplicative: bool = True):
        super().__init__()
        if not 0 < zoom < 1:
            raise ConfigurationError("zoom must lie in (0, 1)")
        self.grid_per_round = grid_per_round
        self.zoom = float(zoom)
        self.require_multiplicative = require_multiplicative

    def _setup(self):
        if not self.space.is_euclidean:
            raise ConfigurationError("grid_refinement needs a Euclidean body")
        if self.require_multiplicative and (self.noise.delta > 0 or self.noise.eps <= 0):
            raise ConfigurationError("grid_refinement covers the purely multiplicative case: "
                                     "delta = 0 and eps > 0")
        n = self.space.dim
        g = self.grid_per_round or 3 ** n
        per_axis = round(g ** (1.0 / n))
        if per_axis ** n != g or per_axis < 2:
            raise ConfigurationError("grid_per_round must be a perfect n-th power >= 2^n")
        self.per_axis = per_axis
        lo, hi = self.space.bbox()
        self.center = 0.5 * (lo + hi)
        self.half = 0.5 * (hi - lo)
        self.phase_grid = self._grid()
        self.phase_answers: list[float] = []
        self.history = [(self.center.copy(), self.half.copy())]

    @property
    def phase_size(self) -> int:
        return self.per_axis ** self.space.dim

    def _grid(self) -> np.ndarray:
        k = self.per_axis
        offsets = (np.arange(k) + 0.5) / k * 2.0 - 1.0  # cell centers in [-1, 1]
        axes = [self.center[i] + self.half[i] * offsets for i in range(self.space.dim)]
        G = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.space.dim)
        return np.array([self.space.project(p) for p in G])

    def _advance(self, transcript):
        # consume answers of the finished phase
        Q, R = transcript.arrays()
        start = len(transcript) - self.phase_size
        best = start + int(np.argmin(R[start:]))
        self.center = np.asarray(Q[best], float).copy()
        self.half = self.half * self.zoom
        self.phase_grid = self._grid()
        self.history.append((self.center.copy(), self.half.copy()))

    def next_query(self, transcript):
        k = len(transcript)
        if k and k % self.phase_size == 0 and len(self.history) <= k // self.phase_size:
            self._advance(transcript)
        return self.phase_grid[k % self.phase_size]

    def final_guess(self, transcript):
        k = len(transcript)
        if k and k % self.phase_size == 0 and len(self.history) <= k // self.phase_size:
            self._advance(transcript)
        self.lost = len(transcript) > 0 and not self._box_has_feasible(transcript)
        if self.lost:
            warnings.warn("grid refinement: no feasible sample left in the zoom box; "
                          "the zoom probably excluded the secret", RuntimeWarning, stacklevel=2)
        return self.space.project(self.center)

    def _box_has_feasible(self, transcript, samples: int = 4096) -> bool:
        rng = np.random.default_rng(self.seed)
        lo, hi = self.center - self.half, self.center + self.half
        X = np.array([self.space.project(p) for p in rng.uniform(lo, hi, (samples, self.space.dim))])
        X = np.vstack([X, self.space.project(self.center)[None, :]])
        return bool(feasible_mask(transcript, X, transcript.slack()).any())

    def info(self):
        return {"strategy": self.name, "grid_per_round": self.phase_size, "zoom": self.zoom,
                "lost": getattr(self, "lost", False)}


def grid_refinement_reconstructor(grid_per_round: int | None = None, zoom: float = 0.5):
    return GridRefinementReconstructor(grid_per_round, zoom)


class IntervalEndpointReconstructor(Reconstructor):
    """One query at the left endpoint; the feasible set is an interval of length <= 2 delta."""

    name = "interval_endpoint"

    def _setup(self):
        if not self.space.is_euclidean or self.space.dim != 1:
            raise ConfigurationError("interval_endpoint needs a one-dimensional body")
        if self.noise.eps != 0:
            raise ConfigurationError("interval_endpoint needs eps = 0")
        self.left = self.space.bbox()[0].copy()

    def next_query(self, transcript):
        return self.left

    def final_guess(self, transcript):
        if len(transcript) == 0:
            return body_center(self.space)
        r = transcript.arrays()[1][0]
        return self.space.project(self.left + r)

    def guarantee(self, transcript):
        return self.noise.delta if len(transcript) else None


def interval_endpoint_reconstructor():
    return IntervalEndpointReconstructor()


class ExhaustiveFiniteReconstructor(Reconstructor):
    """Query points in index order, still-feasible points first; guess the finite center."""

    name = "exhaustive_finite"

    def _setup(self):
        if not self.space.is_finite:
            raise ConfigurationError("exhaustive_finite needs a finite space")
        self.points = self.space.enumerate()

    def next_query(self, transcript):
        Q = set(int(q) for q in transcript.arrays()[0])
        unasked = np.array([p for p in self.points if int(p) not in Q], dtype=np.int64)
        if len(unasked) == 0:
            return int(self.points[len(transcript) % len(self.points)])
        alive = unasked[feasible_mask(transcript, unasked)]
        return int(alive[0] if len(alive) else unasked[0])

    def final_guess(self, transcript):
        X = self.points
        alive = X[feasible_mask(transcript, X)]
        if len(alive) == 0:
            alive = X
        return int(finite_center(self.space, alive).center)


def exhaustive_finite_reconstructor():
    return ExhaustiveFiniteReconstructor()


class TrilaterationReconstructor(Reconstructor):
    """Noiseless localization from n+1 affinely independent queries."""

    name = "trilateration"

    def _setup(self):
        if not self.space.is_euclidean:
            raise ConfigurationError("trilateration needs a Euclidean body")
        if self.noise.eps != 0 or self.noise.delta != 0:
            raise ConfigurationError("trilateration needs the noiseless regime eps = delta = 0")
        n = self.space.dim
        if self.rounds < n + 1:
            raise ConfigurationError(f"trilateration needs T >= n+1 = {n + 1}")
        if isinstance(self.space, EuclideanBox):
            lo, hi = self.space.bbox()
            frame = [lo] + [lo + np.eye(n)[i] * (hi - lo)[i] for i in range(n)]
        else:
            c, R = self.space.c, self.space.radius
            frame = [c] + [c + 0.5 * R * np.eye(n)[i] for i in range(n)]
        self.frame = np.array(frame, float)
        A = self.frame[1:] - self.frame[0]
        if np.linalg.matrix_rank(A) < n:
            raise np.linalg.LinAlgError("degenerate trilateration frame")

    def next_query(self, transcript):
        return self.frame[len(transcript) % len(self.frame)]

    def final_guess(self, transcript):
        n = self.space.dim
        if len(transcript) < n + 1:
            return region_guess(transcript, self.samples, self.seed)
        R = transcript.arrays()[1][: n + 1]
        P = self.frame
        A = 2.0 * (P[1:] - P[0])
        b = np.sum(P[1:] ** 2, axis=1) - np.sum(P[0] ** 2) - R[1:] ** 2 + R[0] ** 2
        x = np.linalg.solve(A, b)
        return self.space.project(x)


def trilateration_reconstructor():
    return TrilaterationReconstructor()


class RandomBaselineReconstructor(Reconstructor):
    """Uniform random queries; the guess is the center of the sampled feasible region.

    On finite spaces queries are drawn from the still-feasible points, so every
    query carries information.
    """

    name = "random_baseline"

    def __init__(self, seed: int | None = None):
        super().__init__()
        self.own_seed = seed

    def _setup(self):
        self.rng = np.random.default_rng(self.seed if self.own_seed is None else self.own_seed)

    def next_query(self, transcript):
        sp = self.space
        if sp.is_finite and sp.size() <= 10**6:
            X = sp.enumerate()
            alive = X[feasible_mask(transcript, X)]
            pool = alive if len(alive) else X
            return int(pool[self.rng.integers(len(pool))])
        return sp.sample(1, self.rng)[0]


def random_baseline_reconstructor(seed: int = 0):
    return RandomBaselineReconstructor(seed)


class CallbackReconstructor(Reconstructor):
    """Queries produced by a user callable of the transcript (scripted or adversarial probes)."""

    name = "callback"

    def __init__(self, query_fn: Callable[[Transcript], object], label: str = "callback"):
        super().__init__()
        self.query_fn = query_fn
        self.name = label

    def next_query(self, transcript):
        q = self.query_fn(transcript)
        return self.space.project(q) if self.space.is_euclidean else q


def make_reconstructor(cfg: dict) -> Reconstructor:
    kind = cfg.get("strategy")
    if kind == "net_cover":
        return NetCoverReconstructor(cfg["alpha"])
    if kind == "grid_refinement":
        return GridRefinementReconstructor(cfg.get("grid_per_round"), cfg.get("zoom", 0.5),
                                           cfg.get("require_multiplicative", True))
    if kind == "interval_endpoint":
        return IntervalEndpointReconstructor()
    if kind == "exhaustive_finite":
        return ExhaustiveFiniteReconstructor()
    if kind == "trilateration":
        return TrilaterationReconstructor()
    if kind == "random_baseline":
        return RandomBaselineReconstructor(cfg.get("seed"))
    raise ConfigurationError(f"unknown reconstructor strategy {kind!r}")


RECONSTRUCTORS = ("net_cover", "grid_refinement", "interval_endpoint", "exhaustive_finite",
                  "trilateration", "random_baseline")
