import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from recongame import (
    ConfigurationError,
    DiscreteUniform,
    DomainError,
    EuclideanBall,
    EuclideanBox,
    NoiseParams,
    Transcript,
    UltrametricStrings,
    approx_eq,
    is_consistent,
)
from recongame.feasible import feasible_mask
from recongame.geometry import build_regular_simplex, far_near
from recongame.responders import (
    ExtremalSetResponder,
    IntervalShrinkResponder,
    SimplexRotationResponder,
    closed_form_alpha,
    constant_one_responder,
    extremal_finite_subset,
    extremal_set_responder,
    extremal_simplex,
    honest_responder,
    interval_shrink_responder,
    simplex_rotation_responder,
    simplex_translation_responder,
    ultrametric_lazy_responder,
)

SQUARE = EuclideanBox([0.0, 0.0], [1.0, 1.0])


def play(rsp, queries, space=None, noise=None):
    t = Transcript(space or rsp.space, noise or rsp.noise)
    for q in queries:
        t.append(q, rsp.respond(q))
        yield t


def witnesses_ok(rsp, t):
    W = rsp.witness()
    slack = 1e-9 if t.space.is_euclidean else 0.0
    return bool(feasible_mask(t, W, slack=slack).all())


# -- extremal set ---------------------------------------------------------

def test_extremal_triangle_stays_feasible():
    noise = NoiseParams(0.3, 0.05)
    S = extremal_simplex(SQUARE, noise)
    rsp = extremal_set_responder(S, SQUARE, noise)
    Q = np.random.default_rng(0).uniform(size=(100, 2))
    for t in play(rsp, Q):
        assert all(is_consistent(t, s, slack=1e-12) for s in S)
    assert np.array_equal(rsp.witness(), S)


def test_extremal_singleton_is_honest():
    rsp = extremal_set_responder([[0.2, 0.4]], SQUARE, NoiseParams(0.0, 0.0))
    assert rsp.respond([0.5, 0.8]) == pytest.approx(0.5)


def test_extremal_rejects_wide_set():
    with pytest.raises(DomainError):
        ExtremalSetResponder(SQUARE, NoiseParams(0.0, 0.1), [[0, 0], [0.3, 0]])


def test_extremal_forced_error_against_any_guess():
    noise = NoiseParams(0.0, 0.05)
    S = extremal_simplex(SQUARE, noise)
    radius = (2 * noise.delta) / math.sqrt(3)
    rng = np.random.default_rng(1)
    for g in rng.uniform(size=(200, 2)):
        assert np.linalg.norm(S - g, axis=1).max() >= radius - 1e-9


def test_extremal_finite_subset_is_profile_optimal():
    space = DiscreteUniform(6)
    idx = extremal_finite_subset(space, NoiseParams(0.0, 0.5))
    assert len(idx) >= 2


# -- translation -----------------------------------------------------------

def test_translation_factor_example():
    rsp = simplex_translation_responder(SQUARE, NoiseParams(1.0, 0.01))
    assert rsp.factor == Fraction(3, 8)
    a0 = rsp.alpha
    Q = np.random.default_rng(2).uniform(size=(4, 2))
    for _ in play(rsp, Q):
        pass
    assert rsp.alpha == Fraction(3, 8) ** 4 * a0
    assert rsp.alpha == closed_form_alpha("translation", rsp.alpha0, rsp.noise, 4)


def test_translation_far_query_needs_no_shift():
    noise = NoiseParams(1.0, 0.01)
    rsp = simplex_translation_responder(EuclideanBox([0, 0], [10, 10]), noise)
    before = rsp.simplex.vertices.copy()
    rsp.respond([0.0, 0.0])  # rho_min is large, alpha2 alone is enough
    assert np.array_equal(before, rsp.simplex.vertices)
    assert not rsp.log[-1]["translated"]


def test_translation_bad_query_moves_away():
    noise = NoiseParams(1.0, 0.01)
    rsp = simplex_translation_responder(SQUARE, noise)
    V = rsp.simplex.vertices.copy()
    a = float(rsp.alpha)
    # a point near vertex 0 on the line through vertex 1
    u = (V[0] - V[1]) / np.linalg.norm(V[0] - V[1])
    q = V[0] + 0.25 * a * u
    rsp.respond(q)
    entry = rsp.log[-1]
    assert entry["translated"]
    shift = entry["displacement"]
    assert math.isclose(shift, a - float(rsp.alpha), rel_tol=1e-12)
    _, near, d = far_near(rsp.simplex.vertices, q)
    assert near == 0 and d[near] >= shift - 1e-12


def test_translation_witnesses_every_round():
    noise = NoiseParams(1.0, 0.01)
    rsp = simplex_translation_responder(SQUARE, noise, seed=3)
    rng = np.random.default_rng(3)
    c = rsp.simplex.centroid
    Q = [c + rng.normal(scale=0.02, size=2) for _ in range(30)]
    for t in play(rsp, Q):
        assert witnesses_ok(rsp, t)


def test_translation_rejects_eps_zero_and_big_delta():
    with pytest.raises(ConfigurationError):
        simplex_translation_responder(SQUARE, NoiseParams(0.0, 0.01))
    with pytest.raises(ConfigurationError, match="delta must be below"):
        simplex_translation_responder(SQUARE, NoiseParams(1.0, 0.5))


# -- rotation ----------------------------------------------------------------

def test_rotation_recursion_example():
    nxt = mpmath.mpf("0.02") ** 2 / (162 * mpmath.mpf("0.1"))
    assert float(nxt) == pytest.approx(2.469135e-5, rel=1e-6)
    assert float(SimplexRotationResponder.closed_form(0.02, 0.1, 1)) == pytest.approx(2.469135e-5, rel=1e-6)


def test_rotation_schedule_is_exact():
    rsp = simplex_rotation_responder(SQUARE, 0.05)
    Q = np.random.default_rng(4).uniform(size=(4, 2))
    for _ in play(rsp, Q):
        pass
    a = mpmath.mpf(rsp.alpha0)
    for _ in range(4):
        a = a * a / (mpmath.mpf(162) * mpmath.mpf(0.05))
    assert rsp.alpha == a  # same recursion, bit for bit
    closed = closed_form_alpha("rotation", rsp.alpha0, NoiseParams(0, 0.05), 4)
    assert abs(rsp.alpha / closed - 1) < mpmath.mpf(10) ** -50
    assert rsp.alpha0 < 0.05 / 4


def test_rotation_preserves_near_far_and_displacement():
    delta = 0.05
    rsp = simplex_rotation_responder(SQUARE, delta)
    V = rsp.simplex.vertices
    # close to vertex 1, on the segment toward vertex 0: a bad query
    q = V[1] + 0.02 * (V[1] - V[0]) / np.linalg.norm(V[1] - V[0])
    before = V.copy()
    t = Transcript(SQUARE, NoiseParams(0, delta))
    t.append(q, rsp.respond(q))
    assert len(rsp.rotations) == 1
    rec = rsp.rotations[0]
    assert rec["near_far_kept"] and rec["theta"] < math.pi / 18
    assert rec["angle_after"] > rec["theta"]
    assert rec["max_vertex_move"] <= rec["budget"] + 1e-12
    b = 2 * delta * math.sqrt(2 * (1 - math.cos(2 * rec["theta"])))
    assert math.isclose(b, rec["b_move_formula"])
    f0, n0, _ = far_near(before, q)
    f1, n1, _ = far_near(rsp.simplex.vertices, q)
    assert (f0, n0) == (f1, n1)
    assert witnesses_ok(rsp, t)


def test_rotation_dim_one_refused():
    with pytest.raises(ConfigurationError, match="rotation unavailable"):
        simplex_rotation_responder(EuclideanBox([0.0], [1.0]), 0.05)


def test_rotation_witnesses_random_queries():
    rsp = simplex_rotation_responder(EuclideanBall([0.5, 0.5], 0.5), 0.05, seed=1)
    rng = np.random.default_rng(5)
    for t in play(rsp, rng.uniform(0.3, 0.7, size=(10, 2))):
        assert witnesses_ok(rsp, t)


# -- interval ------------------------------------------------------------------

def test_interval_three_rounds():
    noise = NoiseParams(1.0, 0.01)
    rsp = interval_shrink_responder(1.0, noise, EuclideanBox([-5.0], [5.0]))
    assert rsp.factor == 0.375
    assert rsp.length == 1.0  # t = 0
    rng = np.random.default_rng(6)
    for t in play(rsp, rng.uniform(-1, 2, size=(3, 1))):
        X = np.linspace(rsp.a, rsp.b, 2001)[:, None]
        assert feasible_mask(t, X, slack=1e-12).all()
    assert rsp.length >= 27 / 512 - 1e-12


def test_interval_anchor_b_for_query_past_a():
    rsp = interval_shrink_responder(1.0, NoiseParams(1.0, 0.0), EuclideanBox([-5.0], [5.0]))
    rsp.respond([-3.0])
    assert rsp.b == 1.0 and rsp.log[-1]["anchor"] == "b"
    rsp = interval_shrink_responder(1.0, NoiseParams(1.0, 0.0), EuclideanBox([-5.0], [5.0]))
    rsp.respond([4.0])  # beyond b: the far endpoint is a
    assert rsp.a == 0.0 and rsp.log[-1]["anchor"] == "a"


def test_interval_adversarial_queries_keep_factor():
    noise = NoiseParams(0.5, 0.0)
    rsp = interval_shrink_responder(1.0, noise, EuclideanBox([-5.0], [5.0]))
    for step in range(8):
        q = 0.5 * (rsp.a + rsp.b) + 1e-9  # midpoint is the worst case
        L = rsp.length
        rsp.respond([q])
        assert rsp.length >= rsp.factor * L - 1e-12


def test_interval_rejects_eps_zero():
    with pytest.raises(DomainError):
        IntervalShrinkResponder(EuclideanBox([0.0], [1.0]), NoiseParams(0.0, 0.1), 1.0)


# -- ultrametric -----------------------------------------------------------------

def test_ultrametric_three_rounds_force_one_sixteenth():
    rsp = ultrametric_lazy_responder(12, rounds=3)
    U = rsp.space
    rng = np.random.default_rng(7)
    t = None
    for t in play(rsp, rng.integers(0, 1 << 12, 3)):
        pass
    for g in rng.integers(0, 1 << 12, 50):
        x = rsp.adversarial_points(g)[0]
        assert is_consistent(t, x)
        assert U.dist(g, x) >= 0.0625
    assert rsp.witness_radius() >= 0.0625


def test_ultrametric_informative_queries_commit_every_round():
    rsp = ultrametric_lazy_responder(12, rounds=3)
    t = Transcript(rsp.space, rsp.noise)
    for _ in range(3):
        q = rsp.prefix  # agrees with everything committed so far
        t.append(q, rsp.respond(q))
    assert rsp.committed == 3 and rsp.witness_radius() == 0.0625
    assert all(is_consistent(t, x) for x in rsp.witness())


def test_ultrametric_zero_rounds_error_half():
    rsp = ultrametric_lazy_responder(12, rounds=0)
    x = rsp.adversarial_points(5)[0]
    assert rsp.space.dist(5, x) == 0.5


def test_ultrametric_honest_on_prefix_mismatch():
    rsp = ultrametric_lazy_responder(12)
    rsp.respond(0)  # commits bit 1 = 1
    q = UltrametricStrings(12).parse_bits("000000000000")
    assert rsp.respond(q) == 0.5
    assert rsp.committed == 1


def test_ultrametric_truncation_error():
    with pytest.raises(ConfigurationError):
        ultrametric_lazy_responder(4, rounds=4)


# -- constant one ------------------------------------------------------------------

def test_constant_one():
    space = DiscreteUniform(10)
    rsp = constant_one_responder(space, rounds=5)
    for t in play(rsp, [0, 3, 3, 7, 9]):
        assert all(is_consistent(t, x) for x in rsp.witness())
    assert len(rsp.witness()) >= 4
    with pytest.raises(DomainError):
        constant_one_responder(DiscreteUniform(5), rounds=4)


# -- honest ---------------------------------------------------------------------------

def test_honest_modes():
    secret = [0.3, 0.6]
    noise = NoiseParams(0.5, 0.05)
    exact = honest_responder(secret, noise, "none", SQUARE)
    assert exact.respond([0.3, 0.2]) == pytest.approx(0.4)
    worst = honest_responder(secret, noise, "adversarial-max", SQUARE)
    ext = extremal_set_responder([secret], SQUARE, noise)
    for q in np.random.default_rng(8).uniform(size=(20, 2)):
        assert worst.respond(q) == pytest.approx(ext.respond(q))


def test_honest_seeded_uniform_in_window():
    noise = NoiseParams(0.2, 0.1)
    rsp = honest_responder([0.5, 0.5], noise, "seeded-uniform", SQUARE, seed=9)
    Q = np.random.default_rng(9).uniform(size=(10_000, 2))
    for q in Q:
        assert approx_eq(noise, SQUARE.dist(q, [0.5, 0.5]), rsp.respond(q))


def test_honest_bad_mode():
    with pytest.raises(ConfigurationError):
        honest_responder([0.5, 0.5], NoiseParams(), "loud", SQUARE)


def test_simplex_edge_matches_extremal_diameter():
    noise = NoiseParams(0.2, 0.03)
    S = extremal_simplex(SQUARE, noise)
    ref = build_regular_simplex(2, (2 + noise.eps) * noise.delta).vertices
    D = np.linalg.norm(S[:, None] - S[None], axis=-1)
    Dr = np.linalg.norm(ref[:, None] - ref[None], axis=-1)
    assert np.allclose(D, Dr)
