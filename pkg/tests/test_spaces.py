import itertools
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from recongame import (
    DiscreteUniform,
    DomainError,
    EuclideanBall,
    EuclideanBox,
    FiniteExplicit,
    HammingCube,
    NoiseParams,
    UltrametricStrings,
    approx_eq,
    build_cover,
    distance,
    sample_uniform,
    space_from_json,
)
from recongame.spaces import window_ok

noise_params = st.builds(NoiseParams, st.floats(0, 3), st.floats(0, 1))
nonneg = st.floats(0, 100, allow_nan=False)


def bit_hamming(x, y, n):
    return sum(((x >> k) & 1) != ((y >> k) & 1) for k in range(n))


def bit_ultrametric(x, y, depth):
    for k in range(depth):
        if ((x >> k) & 1) != ((y >> k) & 1):
            return 0.5 ** (k + 1)
    return 0.0


def test_distance_examples():
    assert distance(HammingCube(5), "00000", "11111") == 5
    # first disagreement at (1-based) index 3
    assert distance(UltrametricStrings(12), "110000000000", "111000000000") == 0.125
    assert distance(EuclideanBox([0, 0], [5, 5]), [0, 0], [3, 4]) == 5


def test_distance_rejects_points_outside():
    with pytest.raises(DomainError):
        distance(EuclideanBox([0, 0], [1, 1]), [0, 0], [2, 0])
    with pytest.raises(DomainError):
        distance(HammingCube(3), "0101", "000")
    with pytest.raises(DomainError):
        distance(DiscreteUniform(3), 0, 3)


def test_approx_eq_examples():
    p = NoiseParams(0.0, 0.1)
    assert approx_eq(p, 1.0, 1.05)
    assert not approx_eq(p, 1.0, 1.2)
    q = NoiseParams(1.0, 0.0)
    assert approx_eq(q, 2, 4)
    assert not approx_eq(q, 2, 4.01)


def test_noise_params_validation():
    with pytest.raises(DomainError):
        NoiseParams(-0.1, 0.0)
    with pytest.raises(DomainError):
        NoiseParams(0.0, float("nan"))
    assert NoiseParams.from_json(NoiseParams(0.5, 0.25).to_json()) == NoiseParams(0.5, 0.25)


@given(noise_params, nonneg)
def test_approx_eq_reflexive(p, a):
    assert approx_eq(p, a, a)


@given(st.floats(0, 3), st.floats(0, 1), st.floats(0, 1), nonneg, nonneg)
def test_approx_eq_monotone_in_delta(eps, d1, extra, a, b):
    if approx_eq(NoiseParams(eps, d1), a, b):
        assert approx_eq(NoiseParams(eps, d1 + extra), a, b)


@given(noise_params, nonneg, nonneg)
def test_window_ok_matches_approx_eq(p, a, b):
    assert bool(window_ok(a, b, p)) == approx_eq(p, a, b)


def test_bit_distances_match_loop_oracle():
    rng = np.random.default_rng(0)
    H, U = HammingCube(10), UltrametricStrings(10)
    X = rng.integers(0, 1 << 10, size=(500, 2))
    for x, y in X:
        assert H.dist(x, y) == bit_hamming(int(x), int(y), 10)
        assert U.dist(x, y) == bit_ultrametric(int(x), int(y), 10)


def test_bits_round_trip():
    H = HammingCube(6)
    for x in range(64):
        assert H.parse_bits(H.format_bits(x)) == x
    assert H.format_bits(1) == "100000"


def _spaces():
    P = np.random.default_rng(5).uniform(0, 1, size=(6, 3))
    return [
        EuclideanBox([0, 0, 0], [1, 2, 3]),
        EuclideanBall([0.5, -1.0], 2.0),
        HammingCube(8),
        UltrametricStrings(9),
        DiscreteUniform(7),
        FiniteExplicit(np.linalg.norm(P[:, None] - P[None], axis=-1)),
    ]


@pytest.mark.parametrize("space", _spaces(), ids=lambda s: s.kind)
def test_triangle_inequality_on_random_triples(space):
    rng = np.random.default_rng(1)
    X, Y, Z = (space.sample(10_000, rng) for _ in range(3))
    dxz = np.array([space.dist(x, z) for x, z in zip(X[:2000], Z[:2000])])
    dxy = np.array([space.dist(x, y) for x, y in zip(X[:2000], Y[:2000])])
    dyz = np.array([space.dist(y, z) for y, z in zip(Y[:2000], Z[:2000])])
    assert np.all(dxz <= dxy + dyz + 1e-9)


def test_ultrametric_inequality_exact():
    U = UltrametricStrings(12)
    rng = np.random.default_rng(2)
    for x, y, z in rng.integers(0, 1 << 12, size=(10_000, 3)):
        assert U.dist(x, z) <= max(U.dist(x, y), U.dist(y, z))


@pytest.mark.parametrize("space", _spaces(), ids=lambda s: s.kind)
def test_json_round_trip(space):
    again = space_from_json(json.loads(json.dumps(space.to_json())))
    rng = np.random.default_rng(3)
    X = space.sample(20, rng)
    for x, y in zip(X[:10], X[10:]):
        assert again.dist(x, y) == space.dist(x, y)
        assert again.point_from_json(space.point_to_json(x)) is not None


def test_finite_explicit_rejects_bad_matrices():
    with pytest.raises(DomainError):
        FiniteExplicit(np.array([[0, 1], [2, 0]], float))  # asymmetric
    with pytest.raises(DomainError):
        FiniteExplicit(np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0]], float))  # triangle
    with pytest.raises(DomainError):
        FiniteExplicit(np.array([[0, 0], [0, 0]], float))  # two points at distance 0


def test_finite_explicit_from_csv(tmp_path):
    (tmp_path / "m.csv").write_text("0,1,2\n1,0,1\n2,1,0\n")
    space = space_from_json({"kind": "finite_explicit", "csv": "m.csv"}, tmp_path)
    assert space.size() == 3 and space.dist(0, 2) == 2


def test_sample_uniform_reproducible():
    box = EuclideanBox([0, 0], [1, 1])
    a = sample_uniform(box, 3, seed=7)
    b = sample_uniform(box, 3, seed=7)
    assert np.array_equal(a, b) and a.shape == (3, 2)
    assert box.contains_many(a).all()
    H = sample_uniform(HammingCube(4), 2, seed=1)
    assert len(H) == 2 and all(0 <= x < 16 for x in H)


def test_sample_ball_inside():
    ball = EuclideanBall([1.0, 1.0, 1.0], 0.5)
    X = sample_uniform(ball, 5000, seed=0)
    assert ball.contains_many(X).all()


def test_cover_examples():
    cover = build_cover(EuclideanBox([0], [1]), 0.25)
    assert np.allclose(np.sort(cover.points[:, 0]), [0.25, 0.75])
    assert len(build_cover(DiscreteUniform(7), 0.5)) == 7
    assert len(build_cover(HammingCube(8), 0.5)) == 256


@pytest.mark.parametrize("space,alpha", [
    (EuclideanBox([0], [1]), 0.25),
    (EuclideanBox([0, 0], [1, 2]), 0.1),
    (EuclideanBox([0, 0, 0], [1, 1, 1]), 0.2),
    (EuclideanBall([0, 0], 1.0), 0.15),
    (UltrametricStrings(10), 0.1),
    (HammingCube(6), 2.0),
    (FiniteExplicit(np.linalg.norm(np.random.default_rng(9).uniform(size=(12, 2))[:, None]
                                   - np.random.default_rng(9).uniform(size=(12, 2))[None], axis=-1)), 0.3),
], ids=lambda v: getattr(v, "kind", str(v)))
def test_cover_property_on_fresh_samples(space, alpha):
    cover = build_cover(space, alpha)
    X = space.sample(10_000, np.random.default_rng(4))
    if space.is_euclidean:
        d = np.min(np.linalg.norm(X[:, None, :] - cover.points[None, :, :], axis=-1), axis=1)
    else:
        d = np.array([space.dists(x, cover.points).min() for x in X[:2000]])
    assert np.all(d <= alpha + 1e-12)


def test_cover_cap():
    from recongame import ResourceError

    with pytest.raises(ResourceError):
        build_cover(EuclideanBox([0, 0, 0], [1, 1, 1]), 1e-4, cap=1000)


def test_enumerate_small_spaces():
    assert list(DiscreteUniform(4).enumerate()) == [0, 1, 2, 3]
    U = UltrametricStrings(3)
    pairs = list(itertools.combinations(U.enumerate(), 2))
    assert len(pairs) == 28
    assert max(U.dist(x, y) for x, y in pairs) == 0.5
