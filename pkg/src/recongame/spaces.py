"""Metric spaces, point encodings, the (eps, delta) relation, sampling and covers.

Point encodings:
  * Euclidean spaces use float vectors of shape (n,); point sets are (m, n) arrays.
  * FiniteExplicit and DiscreteUniform use integer indices.
  * HammingCube and UltrametricStrings use integer bitmasks where bit k-1 holds
    coordinate k (so coordinate 1 is the least significant bit).  The JSON form
    is a '0'/'1' string whose k-th character is coordinate k.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .errors import DomainError, ResourceError

EUCLID_TOL = 1e-12
TRIANGLE_TOL = 1e-9
DEFAULT_COVER_CAP = 10**7
ENUMERATION_CAP = 10**6


@dataclass(frozen=True)
class NoiseParams:
    eps: float = 0.0
    delta: float = 0.0

    def __post_init__(self):
        if not (self.eps >= 0 and math.isfinite(self.eps)):
            raise DomainError(f"eps must be a finite nonnegative number, got {self.eps}")
        if not (self.delta >= 0 and math.isfinite(self.delta)):
            raise DomainError(f"delta must be a finite nonnegative number, got {self.delta}")

    @property
    def scale(self) -> float:
        return 1.0 + self.eps

    def to_json(self) -> dict:
        return {"eps": self.eps, "delta": self.delta}

    @classmethod
    def from_json(cls, doc: dict) -> "NoiseParams":
        return cls(float(doc.get("eps", 0.0)), float(doc.get("delta", 0.0)))


def approx_eq(p: NoiseParams, a: float, b: float) -> bool:
    """a ~ b under (eps, delta): each is within (1+eps)*other + delta."""
    if a < 0 or b < 0:
        raise DomainError("approx_eq takes nonnegative reals")
    s = 1.0 + p.eps
    return a <= s * b + p.delta and b <= s * a + p.delta


def window_ok(d, r, p: NoiseParams, slack: float = 0.0):
    """Vectorized consistency of true distance(s) d with answer(s) r.

    Unlike approx_eq the answer may be negative, in which case nothing is consistent
    unless delta absorbs it.
    """
    s = 1.0 + p.eps
    return (d <= s * r + p.delta + slack) & (r <= s * d + p.delta + slack)


def _popcount(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(a.astype(np.uint64)).astype(np.int64)


class Space:
    """Common interface.  Concrete spaces are immutable."""

    kind: str = ""
    is_euclidean = False
    is_finite = False

    # -- points ---------------------------------------------------------
    def validate(self, x) -> Any:
        raise NotImplementedError

    def validate_many(self, xs) -> np.ndarray:
        raise NotImplementedError

    # -- distances ------------------------------------------------------
    def dist(self, x, y) -> float:
        raise NotImplementedError

    def dists(self, x, Y) -> np.ndarray:
        """Distances from one point to each row/entry of Y."""
        raise NotImplementedError

    def cdist(self, X, Y) -> np.ndarray:
        X = self.validate_many(X) if not isinstance(X, np.ndarray) else X
        return np.stack([self.dists(x, Y) for x in X]) if len(X) else np.zeros((0, len(Y)))

    # -- sampling / enumeration ----------------------------------------
    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def size(self) -> int:
        raise DomainError(f"{self.kind} is not finite")

    def enumerate(self, cap: int = ENUMERATION_CAP) -> np.ndarray:
        n = self.size()
        if n > cap:
            raise ResourceError(f"{self.kind} has {n} points, above the enumeration cap {cap}")
        return np.arange(n, dtype=np.int64)

    def diameter(self) -> float:
        raise NotImplementedError

    # -- serialization --------------------------------------------------
    def to_json(self) -> dict:
        raise NotImplementedError

    def point_to_json(self, x):
        return int(x)

    def point_from_json(self, obj):
        return self.validate(obj)

    def describe(self) -> str:
        return self.kind


# ---------------------------------------------------------------------------
# Euclidean bodies

class _Euclidean(Space):
    is_euclidean = True
    dim: int

    def validate(self, x) -> np.ndarray:
        try:
            v = np.asarray(x, dtype=float).reshape(-1)
        except (TypeError, ValueError) as exc:
            raise DomainError(f"not a real vector: {x!r}") from exc
        if v.shape != (self.dim,):
            raise DomainError(f"expected a point of dimension {self.dim}, got shape {v.shape}")
        if not self.contains(v):
            raise DomainError(f"point {v.tolist()} lies outside the body")
        return v

    def validate_many(self, xs) -> np.ndarray:
        arr = np.asarray(xs, dtype=float)
        if arr.ndim == 1:
            arr = arr.reshape(-1, self.dim) if self.dim > 1 or arr.size == 0 else arr[:, None]
        if arr.ndim != 2 or arr.shape[1] != self.dim:
            raise DomainError(f"expected points of dimension {self.dim}")
        return arr

    def dist(self, x, y) -> float:
        return float(np.linalg.norm(np.asarray(x, float) - np.asarray(y, float)))

    def dists(self, x, Y) -> np.ndarray:
        Y = np.asarray(Y, dtype=float).reshape(-1, self.dim)
        return np.sqrt(np.sum((Y - np.asarray(x, float)) ** 2, axis=1))

    def cdist(self, X, Y) -> np.ndarray:
        X = np.asarray(X, float).reshape(-1, self.dim)
        Y = np.asarray(Y, float).reshape(-1, self.dim)
        diff = X[:, None, :] - Y[None, :, :]
        return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))

    def point_to_json(self, x):
        return [float(v) for v in np.asarray(x).reshape(-1)]

    def contains(self, x, tol: float = EUCLID_TOL) -> bool:
        raise NotImplementedError

    def contains_many(self, X, tol: float = EUCLID_TOL) -> np.ndarray:
        raise NotImplementedError

    def project(self, x) -> np.ndarray:
        raise NotImplementedError

    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def chebyshev_center(self) -> np.ndarray:
        raise NotImplementedError

    def boundary_gap(self, X) -> np.ndarray:
        """Distance from each (inside) point to the complement of the body."""
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class EuclideanBox(_Euclidean):
    lower: tuple
    upper: tuple
    kind = "euclidean_box"

    def __init__(self, lower: Sequence[float], upper: Sequence[float]):
        lo = tuple(float(v) for v in np.atleast_1d(lower))
        hi = tuple(float(v) for v in np.atleast_1d(upper))
        if len(lo) != len(hi) or len(lo) < 1:
            raise DomainError("box corners must have equal positive dimension")
        if any(a > b for a, b in zip(lo, hi)):
            raise DomainError("box requires lower <= upper coordinatewise")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def cube(cls, n: int, side: float = 1.0, origin: float = 0.0) -> "EuclideanBox":
        return cls([origin] * n, [origin + side] * n)

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def lo(self) -> np.ndarray:
        return np.array(self.lower)

    @property
    def hi(self) -> np.ndarray:
        return np.array(self.upper)

    def contains(self, x, tol=EUCLID_TOL) -> bool:
        x = np.asarray(x, float)
        return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))

    def contains_many(self, X, tol=EUCLID_TOL) -> np.ndarray:
        X = np.asarray(X, float).reshape(-1, self.dim)
        return np.all((X >= self.lo - tol) & (X <= self.hi + tol), axis=1)

    def project(self, x) -> np.ndarray:
        return np.clip(np.asarray(x, float), self.lo, self.hi)

    def bbox(self):
        return self.lo, self.hi

    def chebyshev_center(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    def boundary_gap(self, X) -> np.ndarray:
        X = np.asarray(X, float).reshape(-1, self.dim)
        return np.minimum(X - self.lo, self.hi - X).min(axis=1)

    def sample(self, count, rng) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, size=(count, self.dim))

    def diameter(self) -> float:
        return float(np.linalg.norm(self.hi - self.lo))

    def to_json(self) -> dict:
        return {"kind": self.kind, "lower": list(self.lower), "upper": list(self.upper)}

    def describe(self) -> str:
        return f"box{list(self.lower)}-{list(self.upper)}"


@dataclass(frozen=True, eq=False)
class EuclideanBall(_Euclidean):
    center: tuple
    radius: float
    kind = "euclidean_ball"

    def __init__(self, center: Sequence[float], radius: float):
        c = tuple(float(v) for v in np.atleast_1d(center))
        if len(c) < 1:
            raise DomainError("ball needs dimension >= 1")
        if not radius >= 0:
            raise DomainError("ball radius must be nonnegative")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(radius))

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def c(self) -> np.ndarray:
        return np.array(self.center)

    def contains(self, x, tol=EUCLID_TOL) -> bool:
        return bool(np.linalg.norm(np.asarray(x, float) - self.c) <= self.radius + tol)

    def contains_many(self, X, tol=EUCLID_TOL) -> np.ndarray:
        X = np.asarray(X, float).reshape(-1, self.dim)
        return np.linalg.norm(X - self.c, axis=1) <= self.radius + tol

    def project(self, x) -> np.ndarray:
        x = np.asarray(x, float)
        v = x - self.c
        nv = np.linalg.norm(v)
        if nv <= self.radius:
            return x.copy()
        return self.c + v * (self.radius / nv)

    def bbox(self):
        return self.c - self.radius, self.c + self.radius

    def chebyshev_center(self) -> np.ndarray:
        return self.c

    def boundary_gap(self, X) -> np.ndarray:
        X = np.asarray(X, float).reshape(-1, self.dim)
        return self.radius - np.linalg.norm(X - self.c, axis=1)

    def sample(self, count, rng) -> np.ndarray:
        g = rng.standard_normal((count, self.dim))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        u = rng.random(count) ** (1.0 / self.dim)
        return self.c + g * (self.radius * u)[:, None]

    def diameter(self) -> float:
        return 2.0 * self.radius

    def to_json(self) -> dict:
        return {"kind": self.kind, "center": list(self.center), "radius": self.radius}

    def describe(self) -> str:
        return f"ball{list(self.center)}r{self.radius}"


# ---------------------------------------------------------------------------
# Finite spaces

class _Finite(Space):
    is_finite = True

    def validate(self, x) -> int:
        if isinstance(x, (bool, np.bool_)) or not isinstance(x, (int, np.integer)):
            raise DomainError(f"{self.kind} points are integer indices, got {x!r}")
        x = int(x)
        if not 0 <= x < self.size():
            raise DomainError(f"index {x} out of range for {self.kind}")
        return x

    def validate_many(self, xs) -> np.ndarray:
        arr = np.asarray(xs)
        if arr.size and not np.issubdtype(arr.dtype, np.integer):
            raise DomainError(f"{self.kind} points are integers")
        arr = arr.astype(np.int64).reshape(-1)
        if arr.size and (arr.min() < 0 or arr.max() >= self.size()):
            raise DomainError(f"index out of range for {self.kind}")
        return arr

    def cdist(self, X, Y) -> np.ndarray:
        X = np.asarray(X, np.int64).reshape(-1)
        Y = np.asarray(Y, np.int64).reshape(-1)
        return self._pair(X[:, None], Y[None, :])

    def dists(self, x, Y) -> np.ndarray:
        return self._pair(np.int64(x), np.asarray(Y, np.int64).reshape(-1))

    def dist(self, x, y) -> float:
        return float(self._pair(np.int64(self.validate(x)), np.int64(self.validate(y))))

    def _pair(self, a, b):
        raise NotImplementedError

    def sample(self, count, rng) -> np.ndarray:
        return rng.integers(0, self.size(), size=count, dtype=np.int64)


@dataclass(frozen=True, eq=False)
class DiscreteUniform(_Finite):
    count: int
    kind = "discrete_uniform"

    def __post_init__(self):
        if self.count < 1:
            raise DomainError("DiscreteUniform needs at least one point")

    def size(self) -> int:
        return self.count

    def _pair(self, a, b):
        return (a != b).astype(float)

    def diameter(self) -> float:
        return 1.0 if self.count > 1 else 0.0

    def to_json(self) -> dict:
        return {"kind": self.kind, "count": self.count}


@dataclass(frozen=True, eq=False)
class FiniteExplicit(_Finite):
    labels: tuple
    matrix: np.ndarray = field(repr=False)
    kind = "finite_explicit"

    def __init__(self, matrix, labels: Sequence[str] | None = None):
        D = np.array(matrix, dtype=float)
        if D.ndim != 2 or D.shape[0] != D.shape[1] or D.shape[0] < 1:
            raise DomainError("distance matrix must be square and nonempty")
        m = D.shape[0]
        if not np.all(np.isfinite(D)) or np.any(D < 0):
            raise DomainError("distances must be finite and nonnegative")
        if not np.allclose(D, D.T, rtol=0, atol=TRIANGLE_TOL):
            raise DomainError("distance matrix is not symmetric")
        if np.any(np.diag(D) != 0):
            raise DomainError("distance matrix must have a zero diagonal")
        off = D + np.eye(m)
        if np.any(off <= 0):
            raise DomainError("distinct points must have positive distance")
        # d(i,k) <= d(i,j) + d(j,k) for every j
        via = (D[:, :, None] + D[None, :, :]).min(axis=1)
        if np.any(D > via + TRIANGLE_TOL):
            raise DomainError("distance matrix violates the triangle inequality")
        D = 0.5 * (D + D.T)
        D.setflags(write=False)
        labs = tuple(str(s) for s in labels) if labels is not None else tuple(f"p{i}" for i in range(m))
        if len(labs) != m:
            raise DomainError("label count differs from matrix size")
        object.__setattr__(self, "labels", labs)
        object.__setattr__(self, "matrix", D)

    def size(self) -> int:
        return self.matrix.shape[0]

    def _pair(self, a, b):
        return self.matrix[a, b]

    def diameter(self) -> float:
        return float(self.matrix.max())

    def to_json(self) -> dict:
        return {"kind": self.kind, "labels": list(self.labels), "matrix": self.matrix.tolist()}


class _BitSpace(_Finite):
    bits: int

    def size(self) -> int:
        return 1 << self.bits

    def validate(self, x) -> int:
        if isinstance(x, str):
            return self.parse_bits(x)
        return super().validate(x)

    def parse_bits(self, s: str) -> int:
        if len(s) != self.bits or set(s) - {"0", "1"}:
            raise DomainError(f"expected a {self.bits}-character 0/1 string, got {s!r}")
        return sum(1 << k for k, ch in enumerate(s) if ch == "1")

    def format_bits(self, x: int) -> str:
        return "".join("1" if (int(x) >> k) & 1 else "0" for k in range(self.bits))

    def point_to_json(self, x):
        return self.format_bits(x)

    def sample(self, count, rng) -> np.ndarray:
        return rng.integers(0, 1 << self.bits, size=count, dtype=np.int64)


@dataclass(frozen=True, eq=False)
class HammingCube(_BitSpace):
    n: int
    kind = "hamming_cube"

    def __post_init__(self):
        if not 1 <= self.n <= 24:
            raise DomainError("HammingCube supports 1 <= n <= 24")

    @property
    def bits(self) -> int:
        return self.n

    def _pair(self, a, b):
        return _popcount(np.bitwise_xor(a, b)).astype(float)

    def diameter(self) -> float:
        return float(self.n)

    def to_json(self) -> dict:
        return {"kind": self.kind, "n": self.n}


@dataclass(frozen=True, eq=False)
class UltrametricStrings(_BitSpace):
    """Length-D bit strings; distance 2^-j where j is the first differing index."""

    depth: int
    kind = "ultrametric_strings"

    def __post_init__(self):
        if not 1 <= self.depth <= 30:
            raise DomainError("UltrametricStrings supports 1 <= depth <= 30")

    @property
    def bits(self) -> int:
        return self.depth

    def _pair(self, a, b):
        z = np.bitwise_xor(a, b)
        low = np.bitwise_and(z, -z)
        with np.errstate(divide="ignore"):
            out = np.where(z == 0, 0.0, 0.5 / np.maximum(low, 1))
        return out

    def diameter(self) -> float:
        return 0.5

    def to_json(self) -> dict:
        return {"kind": self.kind, "depth": self.depth}


# ---------------------------------------------------------------------------
# JSON

def _read_matrix_csv(path: Path) -> tuple[list[str] | None, list[list[float]]]:
    rows = [r for r in csv.reader(path.read_text().splitlines()) if r and not r[0].startswith("#")]
    labels = None
    try:
        [float(v) for v in rows[0]]
    except ValueError:
        labels, rows = rows[0], rows[1:]
    return labels, [[float(v) for v in r] for r in rows]


def space_from_json(doc: dict, base_dir: str | Path | None = None) -> Space:
    kind = doc.get("kind")
    if kind == "euclidean_box":
        return EuclideanBox(doc["lower"], doc["upper"])
    if kind == "euclidean_ball":
        return EuclideanBall(doc["center"], doc["radius"])
    if kind == "finite_explicit":
        labels = doc.get("labels")
        if "matrix" in doc:
            matrix = doc["matrix"]
        elif "csv" in doc:
            path = Path(doc["csv"])
            if base_dir is not None and not path.is_absolute():
                path = Path(base_dir) / path
            csv_labels, matrix = _read_matrix_csv(path)
            labels = labels or csv_labels
        else:
            raise DomainError("finite_explicit needs 'matrix' or 'csv'")
        return FiniteExplicit(matrix, labels)
    if kind == "hamming_cube":
        return HammingCube(int(doc["n"]))
    if kind == "ultrametric_strings":
        return UltrametricStrings(int(doc["depth"]))
    if kind == "discrete_uniform":
        return DiscreteUniform(int(doc["count"]))
    raise DomainError(f"unknown space kind {kind!r}")


def distance(space: Space, x, y) -> float:
    """Checked distance between two points of `space`."""
    return space.dist(space.validate(x), space.validate(y))


def sample_uniform(space: Space, count: int, seed: int) -> np.ndarray:
    if count < 1:
        raise DomainError("count must be positive")
    return space.sample(count, np.random.default_rng(seed))


# ---------------------------------------------------------------------------
# Covers

@dataclass(frozen=True)
class Cover:
    alpha: float
    points: np.ndarray

    def __len__(self) -> int:
        return len(self.points)


def _grid_axes(lo: np.ndarray, hi: np.ndarray, h: float) -> list[np.ndarray]:
    axes = []
    for a, b in zip(lo, hi):
        length = b - a
        m = max(1, math.ceil(length / h - 1e-12)) if length > 0 else 1
        step = length / m
        axes.append(a + step * (np.arange(m) + 0.5))
    return axes


def build_cover(space: Space, alpha: float, cap: int = DEFAULT_COVER_CAP) -> Cover:
    if not alpha > 0:
        raise DomainError("cover radius must be positive")
    if space.is_euclidean:
        n = space.dim
        h = 2.0 * alpha / math.sqrt(n)
        lo, hi = space.bbox()
        axes = _grid_axes(lo, hi, h)
        total = math.prod(len(a) for a in axes)
        if total > cap:
            raise ResourceError(f"cover needs {total} points, above the cap {cap}")
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
        if isinstance(space, EuclideanBall):
            # keep cells meeting the ball, then pull their centers onto it
            half = np.array([(a[1] - a[0]) / 2 if len(a) > 1 else (hi[i] - lo[i]) / 2
                             for i, a in enumerate(axes)])
            gap = np.maximum(np.abs(grid - space.c) - half, 0.0)
            grid = grid[np.linalg.norm(gap, axis=1) <= space.radius]
            grid = np.array([space.project(g) for g in grid])
        return Cover(alpha, grid)
    if isinstance(space, DiscreteUniform):
        pts = np.array([0]) if alpha >= 1 else space.enumerate(cap)
        return Cover(alpha, pts.astype(np.int64))
    if isinstance(space, UltrametricStrings):
        if alpha >= 0.5:
            return Cover(alpha, np.array([0], dtype=np.int64))
        k = min(space.depth, math.ceil(-math.log2(alpha)) - 1)
        if (1 << k) > cap:
            raise ResourceError(f"cover needs {1 << k} points, above the cap {cap}")
        return Cover(alpha, np.arange(1 << k, dtype=np.int64))
    if isinstance(space, HammingCube):
        if alpha >= space.n:
            return Cover(alpha, np.array([0], dtype=np.int64))
        return Cover(alpha, space.enumerate(cap))
    if isinstance(space, FiniteExplicit):
        chosen: list[int] = []
        covered = np.zeros(space.size(), bool)
        for i in range(space.size()):
            if not covered[i]:
                chosen.append(i)
                covered |= space.matrix[i] <= alpha
        return Cover(alpha, np.array(chosen, dtype=np.int64))
    raise DomainError(f"no cover construction for {space.kind}")
