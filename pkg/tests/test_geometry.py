import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from recongame import DiscreteUniform, DomainError, EuclideanBall, EuclideanBox, FiniteExplicit, HammingCube
from recongame.geometry import (
    apply_rotation,
    build_regular_simplex,
    chebyshev_center_constrained,
    euclidean_diameter,
    far_near,
    finite_center,
    hausdorff_distance,
    jung_constant,
    min_enclosing_ball,
    plan_rotation,
    profile_finite_bruteforce,
    profile_value,
    set_diameter,
)


def grid_radius_oracle(P, lo, hi, step):
    """Min over a grid of centers of the max distance to P (independent of the solvers)."""
    axes = [np.arange(a, b + step / 2, step) for a, b in zip(lo, hi)]
    C = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(lo))
    worst = np.linalg.norm(C[:, None, :] - P[None, :, :], axis=-1).max(axis=1)
    return float(worst.min())


def test_meb_of_a_pair():
    cert = min_enclosing_ball([[0.0, 0.0], [2.0, 0.0]])
    assert np.allclose(cert.center, [1, 0]) and math.isclose(cert.radius, 1.0)


def test_meb_of_simplex_is_jung():
    for n in range(1, 6):
        S = build_regular_simplex(n, 1.0)
        assert math.isclose(min_enclosing_ball(S.vertices).radius, jung_constant(n), rel_tol=1e-9)


def test_meb_matches_grid_oracle():
    rng = np.random.default_rng(0)
    for _ in range(5):
        P = rng.uniform(0, 1, size=(12, 2))
        r = min_enclosing_ball(P).radius
        assert abs(r - grid_radius_oracle(P, [0, 0], [1, 1], 0.002)) <= 2e-3


@settings(max_examples=60, deadline=None)
@given(arrays(float, st.tuples(st.integers(1, 20), st.integers(1, 4)),
              elements=st.floats(-10, 10, allow_nan=False)))
def test_meb_encloses_and_satisfies_jung(P):
    cert = min_enclosing_ball(P)
    d = np.linalg.norm(P - cert.center, axis=1)
    assert np.all(d <= cert.radius + 1e-7 * max(1.0, cert.radius))
    diam = euclidean_diameter(P)
    assert diam / 2 - 1e-9 <= cert.radius <= jung_constant(P.shape[1]) * diam + 1e-7


def test_constrained_center_examples():
    box = EuclideanBox([0, 0], [1, 1])
    cert = chebyshev_center_constrained([[0, 0], [1, 1]], box)
    assert math.isclose(cert.radius, math.sqrt(2) / 2, rel_tol=1e-6)
    # points near a corner of a small ball: the free center is outside the body
    ball = EuclideanBall([0.0, 0.0], 0.3)
    P = np.array([[0.25, 0.1], [0.1, 0.25], [0.2, 0.2]])
    cert = chebyshev_center_constrained(P, ball)
    assert ball.contains(cert.center)
    assert abs(cert.radius - grid_radius_oracle(P, [-0.3, -0.3], [0.3, 0.3], 0.001)) <= 1e-3


def test_constrained_center_against_box_oracle():
    box = EuclideanBox([0, 0], [1, 1])
    P = np.array([[0.0, 0.0], [0.1, 0.9], [0.05, 0.5]])
    cert = chebyshev_center_constrained(P, box)
    assert box.contains(cert.center)
    assert abs(cert.radius - grid_radius_oracle(P, [0, 0], [1, 1], 0.002)) <= 2e-3


def test_constrained_center_rejects_finite():
    with pytest.raises(DomainError):
        chebyshev_center_constrained([[0.0]], HammingCube(3))


def test_finite_center_examples():
    H = HammingCube(3)
    assert finite_center(H, list(range(8))).radius == 3  # every center has its complement
    assert finite_center(H, [0b000, 0b011, 0b101, 0b110]).radius == 2
    assert finite_center(DiscreteUniform(5), [0, 3]).radius == 1


def test_finite_center_is_minimal():
    H = HammingCube(5)
    S = [0b00011, 0b11100, 0b10101]
    cert = finite_center(H, S)
    brute = min(max(H.dist(c, s) for s in S) for c in range(32))
    assert cert.radius == brute


def six_point_fixture():
    # two clusters of three; inside a cluster distance 1, across 2 (except one pair at 1.5)
    D = np.full((6, 6), 2.0)
    for a in (0, 3):
        for i in range(a, a + 3):
            for j in range(a, a + 3):
                D[i, j] = 1.0
    D[2, 3] = D[3, 2] = 1.5
    np.fill_diagonal(D, 0.0)
    return FiniteExplicit(D)


def test_profile_bruteforce_examples():
    space = six_point_fixture()
    assert profile_finite_bruteforce(space, 0.5) == 0.0
    assert profile_finite_bruteforce(space, 1.0) == 1.0
    assert profile_finite_bruteforce(space, 1.5) == 1.5


def test_profile_bruteforce_monotone():
    space = six_point_fixture()
    values = [profile_finite_bruteforce(space, a) for a in np.linspace(0, 2.5, 26)]
    assert all(a <= b for a, b in zip(values, values[1:]))


def test_profile_value_methods():
    v, how = profile_value(EuclideanBox([0, 0], [1, 1]), 0.1)
    assert how == "closed-form" and math.isclose(v, 0.1 / math.sqrt(3))
    assert profile_value(DiscreteUniform(5), 1.0) == (1.0, "brute-force")
    assert profile_value(DiscreteUniform(50), 1.0) == (1.0, "closed-form")
    assert profile_value(DiscreteUniform(50), 0.5)[0] == 0.0


def test_simplex_geometry():
    S = build_regular_simplex(3, 0.2, center=[0.5, 0.5, 0.5])
    D = np.linalg.norm(S.vertices[:, None] - S.vertices[None], axis=-1)
    assert np.allclose(D[~np.eye(4, dtype=bool)], 0.2)
    assert math.isclose(S.circumradius, 0.12247, abs_tol=1e-5)
    assert np.allclose(np.linalg.norm(S.vertices - S.centroid, axis=1), S.circumradius)
    assert np.allclose(S.centroid, 0.5)


def test_far_near_ties_lowest_index():
    S = build_regular_simplex(2, 1.0)
    far, near, _ = far_near(S.vertices, S.centroid)
    assert far == 0 and near == 0


def axis_plan():
    S = build_regular_simplex(2, 1.0)
    far, near = 0, 1
    return S, plan_rotation(S, far, near, math.pi / 4)


def test_rotation_plan_directions():
    S, plan = axis_plan()
    assert math.isclose(np.linalg.norm(plan.d1), 1.0) and abs(plan.d1 @ plan.d2) < 1e-12
    w = 2 * (plan.Q - plan.A) - (plan.B - plan.A)
    assert abs(w @ plan.d1) < 1e-12  # 2AQ - AB is parallel to d2
    assert w @ plan.d2 > 0


def test_rotation_quarter_turn_maps_ab_onto_d2():
    S, plan = axis_plan()
    B2 = apply_rotation(plan, plan.B)
    edge = np.linalg.norm(plan.B - plan.A)
    assert np.allclose(B2 - plan.A, edge * plan.d2, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 5), st.floats(0.01, 1.5),
       arrays(float, 2 * 5, elements=st.floats(-3, 3, allow_nan=False)))
def test_rotation_is_isometry_with_inverse(n, theta, raw):
    S = build_regular_simplex(n, 1.0)
    plan = plan_rotation(S, 0, 1, theta)
    x, y = raw[:n], raw[5:5 + n]
    rx, ry = apply_rotation(plan, x), apply_rotation(plan, y)
    assert math.isclose(np.linalg.norm(rx - ry), np.linalg.norm(x - y), rel_tol=1e-9, abs_tol=1e-9)
    assert np.allclose(apply_rotation(plan, rx, inverse=True), x, atol=1e-10)
    assert np.allclose(apply_rotation(plan, plan.A), plan.A)


def test_rotation_rejects_bad_inputs():
    S = build_regular_simplex(2, 1.0)
    with pytest.raises(DomainError):
        plan_rotation(S, 0, 0, 0.1)
    with pytest.raises(DomainError):
        plan_rotation(S, 0, 1, 2.0)
    with pytest.raises(DomainError):
        plan_rotation(build_regular_simplex(1, 1.0), 0, 1, 0.1)


def test_hausdorff_examples():
    box = EuclideanBox([0, 0], [3, 3])
    a = np.array([[0.0, 0.0], [1.0, 0.0]])
    b = np.array([[0.0, 0.0], [3.0, 0.0]])
    assert hausdorff_distance(box, a, b) == 2.0
    assert hausdorff_distance(box, a, a) == 0.0


def test_set_diameter_matches_hull_diameter():
    rng = np.random.default_rng(2)
    P = rng.normal(size=(3000, 3))
    box = EuclideanBox([-10] * 3, [10] * 3)
    assert math.isclose(set_diameter(box, P), euclidean_diameter(P), rel_tol=1e-12)


def test_jung_sandwich_on_random_sets():
    rng = np.random.default_rng(3)
    for n in (1, 2, 3, 6):
        for _ in range(20):
            P = rng.uniform(size=(rng.integers(2, 30), n))
            r, d = min_enclosing_ball(P).radius, euclidean_diameter(P)
            assert d / 2 - 1e-9 <= r <= jung_constant(n) * d + 1e-7
