"""Feasible-region calculus: transcripts, consistency predicates, the answer
window, the largest surviving neighborhood and sample/box based region bounds."""

from __future__ import annotations

import heapq
import itertools
import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .geometry import (
    BallCertificate,
    RegularSimplex,
    chebyshev_center_constrained,
    euclidean_diameter,
    far_near,
    finite_center,
    set_diameter,
)
from .spaces import EuclideanBall, NoiseParams, Space, space_from_json, window_ok

EUCLID_SLACK = 1e-9


@dataclass(frozen=True)
class QueryRecord:
    q: object
    r: float


class Transcript:
    """Append-only list of (query, answer) records backed by growable arrays."""

    def __init__(self, space: Space, noise: NoiseParams, records=()):
        self.space = space
        self.noise = noise
        self._n = 0
        shape = (16, space.dim) if space.is_euclidean else (16,)
        self._Q = np.zeros(shape, float if space.is_euclidean else np.int64)
        self._R = np.zeros(16, float)
        for rec in records:
            self.append(rec.q, rec.r)

    def append(self, q, r: float) -> None:
        if self._n == len(self._R):
            self._Q = np.concatenate([self._Q, np.zeros_like(self._Q)])
            self._R = np.concatenate([self._R, np.zeros_like(self._R)])
        self._Q[self._n] = q
        self._R[self._n] = float(r)
        self._n += 1

    def __len__(self) -> int:
        return self._n

    @property
    def records(self) -> list[QueryRecord]:
        Q, R = self.arrays()
        conv = (lambda q: q.copy()) if self.space.is_euclidean else int
        return [QueryRecord(conv(q), float(r)) for q, r in zip(Q, R)]

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Read-only views of the queries and answers recorded so far."""
        return self._Q[: self._n], self._R[: self._n]

    def prefix(self, k: int) -> "Transcript":
        t = Transcript(self.space, self.noise)
        Q, R = self.arrays()
        t._Q, t._R, t._n = Q[:k].copy(), R[:k].copy(), min(k, self._n)
        if t._n == 0:
            t._Q = np.zeros_like(self._Q[:16])
            t._R = np.zeros(16, float)
        return t

    def slack(self) -> float:
        return EUCLID_SLACK if self.space.is_euclidean else 0.0

    # -- JSON lines -------------------------------------------------------
    def to_jsonl(self) -> str:
        head = {"space": self.space.to_json(), "noise": self.noise.to_json()}
        lines = [json.dumps(head, sort_keys=True)]
        enc = self.space.point_to_json
        Q, R = self.arrays()
        lines += [json.dumps({"q": enc(q), "r": _fmt(r)}) for q, r in zip(Q, R)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "Transcript":
        rows = [json.loads(line) for line in text.splitlines() if line.strip()]
        space = space_from_json(rows[0]["space"])
        t = cls(space, NoiseParams.from_json(rows[0]["noise"]))
        for row in rows[1:]:
            t.append(space.point_from_json(row["q"]), float(row["r"]))
        return t


def _fmt(x: float) -> float:
    return float(repr(float(x)))


# ---------------------------------------------------------------------------
# membership

def is_consistent(t: Transcript, x, slack: float = 0.0) -> bool:
    if len(t) == 0:
        return True
    Q, R = t.arrays()
    d = t.space.dists(x, Q)
    return bool(np.all(window_ok(d, R, t.noise, slack)))


def feasible_mask(t: Transcript, X, slack: float = 0.0, records=None, chunk: int = 256) -> np.ndarray:
    """Membership of each point of X in the feasible region.

    Records are applied most-constraining first (small answers) so that most points
    are eliminated after a handful of records.
    """
    Q, R = t.arrays()
    if records is not None:
        Q, R = Q[records], R[records]
    m = len(X)
    alive = np.ones(m, bool)
    if len(R) == 0 or m == 0:
        return alive
    order = np.argsort(R, kind="stable")
    idx = np.arange(m)
    space = t.space
    for i in range(0, len(order), chunk):
        if len(idx) == 0:
            break
        rec = order[i:i + chunk]
        D = space.cdist(X[idx], Q[rec])
        ok = np.all(window_ok(D, R[rec][None, :], t.noise, slack), axis=1)
        alive[idx[~ok]] = False
        idx = idx[ok]
    return alive


# ---------------------------------------------------------------------------
# window and surviving neighborhood

@dataclass(frozen=True)
class ConsistencyWindow:
    r_min: float
    r_max: float
    rho_min: float
    rho_max: float

    @property
    def empty(self) -> bool:
        return self.r_min > self.r_max

    def contains(self, r: float) -> bool:
        return self.r_min <= r <= self.r_max


def _rho(space: Space, q, S) -> tuple[float, float]:
    if space.is_euclidean:
        S = np.asarray(S, float).reshape(-1, space.dim)
    else:
        S = np.asarray(S, np.int64).reshape(-1)
    if len(S) == 0:
        raise DomainError("the set S must be nonempty")
    d = space.dists(q, S)
    return float(d.min()), float(d.max())


def consistency_window(noise: NoiseParams, space: Space, q, s) -> ConsistencyWindow:
    """Answers r for which every point of s stays feasible: r in [r_min, r_max]."""
    lo, hi = _rho(space, q, s)
    k = 1.0 + noise.eps
    return ConsistencyWindow((hi - noise.delta) / k, k * lo + noise.delta, lo, hi)


@dataclass(frozen=True)
class SurvivingNeighborhood:
    alpha_star: float
    r_star: float
    alpha1: float
    alpha2: float


def neighborhood_from_rho(noise: NoiseParams, rho_min: float, rho_max: float) -> SurvivingNeighborhood:
    k = 1.0 + noise.eps
    K = k * k + 1.0
    d = noise.delta
    alpha_star = (k * k * rho_min - rho_max + (2.0 + noise.eps) * d) / K
    r_star = (k * (rho_min + rho_max) - noise.eps * d) / K
    alpha1 = ((2.0 + noise.eps) * d - (rho_max - rho_min)) / K
    alpha2 = (k * k - 1.0) / K * rho_min
    return SurvivingNeighborhood(alpha_star, r_star, alpha1, alpha2)


def surviving_neighborhood(noise: NoiseParams, space: Space, q, s) -> SurvivingNeighborhood:
    """Largest alpha with s_alpha inside one single-query region, and the answer achieving it.

    alpha_star may be nonpositive; its sign tells strategies the query is bad.
    """
    if not space.is_euclidean:
        raise DomainError("surviving neighborhoods are defined with Euclidean balls")
    lo, hi = _rho(space, q, s)
    return neighborhood_from_rho(noise, lo, hi)


def goodness_angle(delta: float, alpha: float) -> float:
    """theta with cos(theta) = 1 - alpha/delta, via 2*asin(sqrt(alpha/(2 delta)))."""
    return 2.0 * math.asin(math.sqrt(alpha / (2.0 * delta)))


def good_query_test(delta: float, alpha: float, simplex: RegularSimplex, q) -> bool:
    """Zero-slack criterion: the angle at the far vertex A between AB and Aq is wide enough.

    cos(angle BAq) <= 1 - alpha/delta is tested in its angle form, which stays
    accurate when alpha/delta is far below machine epsilon.
    """
    if not (0 < alpha < delta):
        raise DomainError("good_query_test needs 0 < alpha < delta")
    V = simplex.vertices
    q = np.asarray(q, float)
    far, near, d = far_near(V, q)
    A, B = V[far], V[near]
    if far == near or d[far] <= 1e-15 * max(1.0, simplex.edge):
        sn = neighborhood_from_rho(NoiseParams(0.0, delta), float(d.min()), float(d.max()))
        return sn.alpha_star >= alpha
    u, w = B - A, q - A
    along = float(u @ w) / float(np.linalg.norm(u))
    perp = float(np.linalg.norm(w - along * u / np.linalg.norm(u)))
    angle = math.atan2(perp, along)
    return angle >= goodness_angle(delta, alpha)


# ---------------------------------------------------------------------------
# boxes: record pruning and bounds used by sampling and branch-and-bound

def _box_dist_range(Q: np.ndarray, lo: np.ndarray, hi: np.ndarray):
    gap = np.maximum(np.maximum(lo - Q, Q - hi), 0.0)
    far = np.maximum(np.abs(Q - lo), np.abs(Q - hi))
    return np.sqrt(np.sum(gap * gap, axis=-1)), np.sqrt(np.sum(far * far, axis=-1))


def _classify_box(Q, R, noise, lo, hi, slack):
    """(infeasible, undecided-record mask) for all records against a box."""
    k = 1.0 + noise.eps
    dmin, dmax = _box_dist_range(Q, lo, hi)
    upper = k * R + noise.delta + slack
    dead = (dmin > upper) | (k * dmax + noise.delta + slack < R)
    if np.any(dead):
        return True, None
    implied = (dmax <= upper) & (R <= k * dmin + noise.delta + slack)
    return False, ~implied


def proposal_box(t: Transcript, body) -> tuple[np.ndarray, np.ndarray]:
    """A box containing the feasible region: body box cut by each record's outer ball."""
    lo, hi = body.bbox()
    lo, hi = lo.copy(), hi.copy()
    if len(t):
        Q, R = t.arrays()
        rad = (1.0 + t.noise.eps) * R + t.noise.delta + t.slack()
        keep = rad >= 0
        if not np.all(keep):
            return lo, lo - 1.0  # some answer is unsatisfiable: empty box
        lo = np.maximum(lo, (Q - rad[:, None]).max(axis=0))
        hi = np.minimum(hi, (Q + rad[:, None]).min(axis=0))
    return lo, hi


@dataclass
class RegionEstimate:
    feasible_points: np.ndarray
    diameter_lb: float
    radius_ub_center: BallCertificate | None
    empty: bool
    drawn: int = 0
    exact: bool = False
    warning: str = ""


def region_estimate(t: Transcript, samples: int, seed: int, slack: float | None = None,
                    center: bool = True, quiet: bool = False) -> RegionEstimate:
    if samples < 1:
        raise DomainError("samples must be positive")
    space = t.space
    slack = t.slack() if slack is None else slack
    if space.is_finite and space.size() <= 10**6:
        X = space.enumerate()
        pts = X[feasible_mask(t, X, slack)]
        if len(pts) == 0:
            return RegionEstimate(pts, 0.0, None, True, len(X), True, "no feasible point")
        cert = finite_center(space, pts) if center else None
        return RegionEstimate(pts, set_diameter(space, pts), cert, False, len(X), True)
    rng = np.random.default_rng(seed)
    if space.is_euclidean:
        pts, drawn = _sample_euclidean(t, samples, rng, slack)
    else:
        X = space.sample(samples, rng)
        pts, drawn = X[feasible_mask(t, X, slack)], samples
    if len(pts) == 0:
        msg = "zero feasible samples; the region may still be nonempty"
        if not quiet:
            warnings.warn(msg, RuntimeWarning, stacklevel=2)
        return RegionEstimate(pts, 0.0, None, True, drawn, False, msg)
    if space.is_euclidean:
        diam = euclidean_diameter(pts)
        cert = chebyshev_center_constrained(pts, space, seed) if center else None
    else:
        diam = set_diameter(space, pts)
        cert = None
    return RegionEstimate(pts, diam, cert, False, drawn)


def _sample_euclidean(t: Transcript, samples: int, rng, slack: float):
    body = t.space
    lo, hi = proposal_box(t, body)
    if np.any(lo > hi):
        return np.zeros((0, body.dim)), 0
    Q, R = t.arrays()
    records = None
    if len(t):
        dead, undecided = _classify_box(Q, R, t.noise, lo, hi, slack)
        if dead:
            return np.zeros((0, body.dim)), 0
        records = np.nonzero(undecided)[0]
    X = rng.uniform(lo, hi, size=(samples, body.dim))
    if isinstance(body, EuclideanBall):
        X = X[body.contains_many(X)]
    if records is not None and len(records):
        X = X[feasible_mask(t, X, slack, records=records)]
    return X, samples


def feasible_point_search(t: Transcript, target: int = 64, slack: float | None = None,
                          min_width: float = 1e-12, max_boxes: int = 50_000) -> np.ndarray:
    """Feasible points found by breadth-first box refinement.

    Used when the region is too thin for rejection sampling (for instance when it
    collapses onto a finite witness set).
    """
    body = t.space
    slack = t.slack() if slack is None else slack
    lo, hi = proposal_box(t, body)
    if np.any(lo > hi):
        return np.zeros((0, body.dim))
    Q, R = t.arrays()
    ball = body if isinstance(body, EuclideanBall) else None
    level = [(lo, hi, np.arange(len(R)))]
    found: list[np.ndarray] = []
    seen = 0
    while level and len(found) < target and seen < max_boxes:
        nxt = []
        for a, b, rec in level:
            seen += 1
            if len(rec):
                dead, undecided = _classify_box(Q[rec], R[rec], t.noise, a, b, slack)
                if dead:
                    continue
                rec = rec[undecided]
            c = 0.5 * (a + b)
            if (ball is None or ball.contains(c)) and (len(rec) == 0 or np.all(
                    window_ok(np.linalg.norm(Q[rec] - c, axis=1), R[rec], t.noise, slack))):
                found.append(c)
                continue
            w = b - a
            if float(w.max()) <= min_width:
                continue
            ax = int(np.argmax(w))
            mid = 0.5 * (a[ax] + b[ax])
            b1, a2 = b.copy(), a.copy()
            b1[ax] = mid
            a2[ax] = mid
            nxt += [(a, b1, rec), (a2, b, rec)]
        level = nxt
    return np.array(found).reshape(-1, body.dim)


# ---------------------------------------------------------------------------
# certified sup of the distance from a guess over the feasible region

@dataclass
class SupCertificate:
    upper: float
    lower: float
    point: object
    boxes: int = 0
    exact: bool = False


def certify_sup_distance(t: Transcript, guess, lower: float = 0.0, point=None,
                         slack: float | None = None, tol: float = 1e-6,
                         max_boxes: int = 200_000) -> SupCertificate:
    """Upper bound on sup over the feasible region of dist(guess, x).

    Euclidean bodies use best-first branch and bound over boxes with exact
    point-to-box distance ranges per record; finite spaces enumerate.
    """
    space = t.space
    slack = t.slack() if slack is None else slack
    if space.is_finite:
        X = space.enumerate()
        pts = X[feasible_mask(t, X, slack)]
        if len(pts) == 0:
            return SupCertificate(0.0, 0.0, None, exact=True)
        d = space.dists(guess, pts)
        k = int(d.argmax())
        return SupCertificate(float(d[k]), float(d[k]), int(pts[k]), exact=True)
    body = space
    g = np.asarray(guess, float)
    Q, R = t.arrays()
    lo, hi = proposal_box(t, body)
    if np.any(lo > hi):
        return SupCertificate(lower, lower, point)
    ball = body if isinstance(body, EuclideanBall) else None
    best, best_pt = lower, point
    counter = 0
    all_rec = np.arange(len(R))

    def far_corner(a, b):
        return np.where(np.abs(a - g) > np.abs(b - g), a, b)

    def box_max(a, b):
        return float(np.linalg.norm(far_corner(a, b) - g))

    tick = itertools.count(1)
    heap = [(-box_max(lo, hi), 0, lo, hi, all_rec)]
    floor = 0.0
    top = 0.0
    while heap:
        negd, _, a, b, rec = heapq.heappop(heap)
        dmax = -negd
        if dmax <= best + tol:
            top = dmax
            break
        if ball is not None:
            gap = np.maximum(np.maximum(a - ball.c, ball.c - b), 0.0)
            if np.linalg.norm(gap) > ball.radius + slack:
                continue
        if len(rec):
            dead, undecided = _classify_box(Q[rec], R[rec], t.noise, a, b, slack)
            if dead:
                continue
            rec = rec[undecided]
        corner = far_corner(a, b)
        inside = ball is None or ball.contains(corner)
        if len(rec) == 0 and inside:
            # every point of the box is feasible, the far corner included
            if dmax > best:
                best, best_pt = dmax, corner
            continue
        c = 0.5 * (a + b)
        if ball is None or ball.contains(c):
            dc = float(np.linalg.norm(c - g))
            if dc > best and (len(rec) == 0 or np.all(
                    window_ok(np.linalg.norm(Q[rec] - c, axis=1), R[rec], t.noise, slack))):
                best, best_pt = dc, c
        counter += 1
        w = b - a
        if counter >= max_boxes or float(w.max()) <= tol * 1e-3:
            floor = max(floor, dmax)
            continue
        ax = int(np.argmax(w))
        mid = 0.5 * (a[ax] + b[ax])
        b1 = b.copy()
        b1[ax] = mid
        a2 = a.copy()
        a2[ax] = mid
        for lo_c, hi_c in ((a, b1), (a2, b)):
            heapq.heappush(heap, (-box_max(lo_c, hi_c), next(tick), lo_c, hi_c, rec))
    upper = max(best, floor, top)
    return SupCertificate(upper, best, best_pt, counter)
