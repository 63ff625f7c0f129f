"""Counting queries on a binary dataset versus Hamming-distance queries.

A dataset D in {0,1}^n is answered either by subset counts sum_{i in q} D_i
(up to additive noise) or by Hamming distances to query bit vectors. Each side
can simulate the other: one Hamming query per counting query plus one shared
query to the all-ones vector, and conversely.

Bit vectors are ints with bit i holding coordinate i, the same encoding as
``HammingCube`` points.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .feasible import Transcript
from .spaces import HammingCube, NoiseParams, _popcount

# Noise dilation of each simulation direction (see ``dilation_report``).
COUNT_FROM_HAMMING = 1.0
INNER_FROM_COUNT = 6.0
HAMMING_FROM_COUNT = 3.0


def _bits_to_array(x: int, n: int) -> np.ndarray:
    return (np.right_shift(int(x), np.arange(n)) & 1).astype(np.int64)


def _array_to_bits(a) -> int:
    return sum(1 << i for i, v in enumerate(a) if v)


@dataclass(frozen=True)
class PmOneVector:
    entries: tuple[int, ...]

    def __post_init__(self):
        if any(v not in (-1, 1) for v in self.entries):
            raise DomainError("PmOneVector entries must be -1 or +1")

    @classmethod
    def from_bits(cls, x: int, n: int) -> "PmOneVector":
        return cls(tuple(int(v) for v in 2 * _bits_to_array(x, n) - 1))

    @classmethod
    def ones(cls, n: int) -> "PmOneVector":
        return cls((1,) * n)

    def __len__(self) -> int:
        return len(self.entries)

    def __neg__(self) -> "PmOneVector":
        return PmOneVector(tuple(-v for v in self.entries))

    def to_bits(self) -> int:
        return _array_to_bits(v > 0 for v in self.entries)

    def inner(self, other: "PmOneVector") -> int:
        if len(self) != len(other):
            raise DomainError(f"length mismatch: {len(self)} vs {len(other)}")
        return int(np.dot(self.entries, other.entries))


@dataclass(frozen=True)
class CountingQuery:
    mask: int
    n: int
    delta: float = 0.0

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("n must be positive")
        if not 0 <= self.mask < (1 << self.n):
            raise DomainError(f"subset mask {self.mask} does not fit in {self.n} bits")
        if self.delta < 0:
            raise DomainError("delta must be nonnegative")

    @classmethod
    def from_indices(cls, indices, n: int, delta: float = 0.0) -> "CountingQuery":
        mask = 0
        for i in indices:
            if not 0 <= i < n:
                raise DomainError(f"index {i} outside [0, {n})")
            mask |= 1 << i
        return cls(mask, n, delta)

    @property
    def size(self) -> int:
        return bin(self.mask).count("1")

    def sign_vector(self) -> PmOneVector:
        """+1 on the subset, -1 elsewhere."""
        return PmOneVector.from_bits(self.mask, self.n)

    def count(self, data: int) -> int:
        return bin(self.mask & int(data)).count("1")


def counting_to_inner(q: CountingQuery, answers) -> float:
    """Subset count from the inner products <D', w_q> and <D', 1>.

    Uses <D', w_q> + <D', 1> = 4 <D, v_q> - 2|q|, where D' = 2D - 1 and
    w_q is the sign vector of q. Integer in, integer out when noiseless.
    """
    ip_w, ip_ones = answers
    total = ip_w + ip_ones + 2 * q.size
    if isinstance(total, (int, np.integer)) and total % 4 == 0:
        return int(total) // 4
    return total / 4


def inner_from_counts(q: CountingQuery, count_q: float, count_all: float) -> float:
    """<D', w_q> = 4 a_q - 2 a_all - 2|q| + n."""
    return 4 * count_q - 2 * count_all - 2 * q.size + q.n


def inner_to_hamming(x: PmOneVector, y: PmOneVector) -> int:
    ip = x.inner(y)
    n = len(x)
    # n - <x, y> is twice the number of disagreeing coordinates
    assert (n - ip) % 2 == 0
    return (n - ip) // 2


def count_from_hamming(q: CountingQuery, h_query: float, h_ones: float) -> float:
    """Subset count from Hamming distances to v_q and to the all-ones vector."""
    total = q.n - h_query - h_ones + q.size
    if isinstance(total, (int, np.integer)) and total % 2 == 0:
        return int(total) // 2
    return total / 2


def hamming_from_counts(q: CountingQuery, count_q: float, count_all: float) -> float:
    """Hamming distance between D and v_q from the counts on q and on [n]."""
    return count_all - 2 * count_q + q.size


def dilation_report(delta: float) -> dict:
    """Worst-case noise after simulation when every native answer is off by at most delta."""
    return {
        "count_from_hamming": {"factor": COUNT_FROM_HAMMING, "bound": COUNT_FROM_HAMMING * delta},
        "inner_from_count": {"factor": INNER_FROM_COUNT, "bound": INNER_FROM_COUNT * delta},
        "hamming_from_count": {"factor": HAMMING_FROM_COUNT, "bound": HAMMING_FROM_COUNT * delta},
    }


def _noisy(value: float, delta: float, rng, mode: str) -> float:
    if delta == 0 or mode == "none":
        return value
    if mode == "uniform":
        return value + float(rng.uniform(-delta, delta))
    if mode == "extreme":
        return value + delta * float(rng.choice([-1.0, 1.0]))
    raise DomainError(f"unknown noise mode {mode!r}")


@dataclass
class BridgeRun:
    counting: list[dict]
    hamming: Transcript
    metadata: dict = field(default_factory=dict)

    def to_jsonl(self) -> tuple[str, str]:
        import json

        head = json.dumps({"metadata": self.metadata}, sort_keys=True)
        rows = [json.dumps(r, sort_keys=True) for r in self.counting]
        return "\n".join([head] + rows) + "\n", self.hamming.to_jsonl()


def _check_dataset(data: int, n: int) -> None:
    if not 1 <= n <= 24:
        raise DomainError("dataset length must lie in [1, 24]")
    if not 0 <= int(data) < (1 << n):
        raise DomainError("dataset does not fit in n bits")


def simulate_counting_game_on_hamming(data: int, n: int, queries, delta: float = 0.0,
                                      seed: int = 0, noise_mode: str = "uniform") -> BridgeRun:
    """Answer counting queries through a delta-noisy Hamming oracle for D.

    Each counting query becomes one Hamming query at v_q; the all-ones query
    is issued once, on first need, and reused.
    """
    _check_dataset(data, n)
    cube = HammingCube(n)
    rng = np.random.default_rng(seed)
    ham = Transcript(cube, NoiseParams(0.0, delta))
    ones = (1 << n) - 1
    h_ones = None
    rows = []
    for q in queries:
        if q.n != n:
            raise DomainError("query length differs from dataset length")
        if h_ones is None:
            h_ones = _noisy(float(_popcount(np.int64(data ^ ones))), delta, rng, noise_mode)
            ham.append(ones, h_ones)
        h_q = _noisy(float(_popcount(np.int64(data ^ q.mask))), delta, rng, noise_mode)
        ham.append(q.mask, h_q)
        rows.append({"mask": cube.format_bits(q.mask), "decoded": count_from_hamming(q, h_q, h_ones),
                     "true": q.count(data)})
    meta = {"direction": "counting-on-hamming", "n": n, "delta": delta, "queries": len(rows),
            "hamming_queries": len(ham), "dilation": dilation_report(delta),
            "decoded_bound": COUNT_FROM_HAMMING * delta}
    return BridgeRun(rows, ham, meta)


def simulate_hamming_game_on_counting(data: int, n: int, points, delta: float = 0.0,
                                      seed: int = 0, noise_mode: str = "uniform") -> BridgeRun:
    """Answer Hamming-distance queries through a delta-noisy counting oracle for D.

    Query point y is read as the subset {i : y_i = 1}; the count over [n] is
    asked once and reused.
    """
    _check_dataset(data, n)
    cube = HammingCube(n)
    rng = np.random.default_rng(seed)
    full = CountingQuery((1 << n) - 1, n, delta)
    a_all = None
    rows = []
    ham = Transcript(cube, NoiseParams(0.0, HAMMING_FROM_COUNT * delta))
    for y in points:
        y = cube.validate(y)
        q = CountingQuery(y, n, delta)
        if a_all is None:
            a_all = _noisy(float(full.count(data)), delta, rng, noise_mode)
            rows.append({"mask": cube.format_bits(full.mask), "answer": a_all})
        a_q = _noisy(float(q.count(data)), delta, rng, noise_mode)
        rows.append({"mask": cube.format_bits(q.mask), "answer": a_q})
        ham.append(y, hamming_from_counts(q, a_q, a_all))
    meta = {"direction": "hamming-on-counting", "n": n, "delta": delta, "queries": len(ham),
            "counting_queries": len(rows), "dilation": dilation_report(delta),
            "decoded_bound": HAMMING_FROM_COUNT * delta}
    return BridgeRun(rows, ham, meta)
