import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from recongame import EuclideanBox, HammingCube, NoiseParams, Transcript, approx_eq, is_consistent
from recongame.feasible import (
    certify_sup_distance,
    consistency_window,
    feasible_mask,
    feasible_point_search,
    good_query_test,
    goodness_angle,
    neighborhood_from_rho,
    region_estimate,
    surviving_neighborhood,
)
from recongame.geometry import build_regular_simplex, far_near
from recongame.responders import extremal_set_responder

LINE = EuclideanBox([-10.0], [10.0])
SQUARE = EuclideanBox([0.0, 0.0], [1.0, 1.0])


def pair_ok(noise, d, r):
    # written out so negative answers are allowed
    k = 1 + noise.eps
    return d <= k * r + noise.delta and r <= k * d + noise.delta


def subset_fits(S, q, r, noise, space):
    """Independent check that every point of S survives (q, r)."""
    return all(pair_ok(noise, space.dist(q, s), r) for s in S)


def test_empty_transcript_accepts_everything():
    t = Transcript(SQUARE, NoiseParams(0.0, 0.1))
    assert is_consistent(t, [0.3, 0.9]) and is_consistent(t, [0.0, 0.0])


def test_consistency_annulus_example():
    t = Transcript(LINE, NoiseParams(0.0, 0.1))
    t.append([0.0], 0.5)
    assert is_consistent(t, [0.55])
    assert not is_consistent(t, [0.65])
    assert is_consistent(t, [-0.45])


def test_membership_is_conjunction_of_records():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        noise = NoiseParams(float(rng.uniform(0, 1)), float(rng.uniform(0, 0.3)))
        t = Transcript(SQUARE, noise)
        Q = rng.uniform(size=(rng.integers(1, 5), 2))
        for q in Q:
            t.append(q, float(rng.uniform(-0.1, 1.5)))
        x = rng.uniform(size=2)
        expected = all(pair_ok(noise, float(np.linalg.norm(x - rec.q)), rec.r) for rec in t.records)
        assert is_consistent(t, x) == expected


def test_window_single_point_example():
    w = consistency_window(NoiseParams(0.0, 0.5), LINE, [0.0], [[1.0], [2.0]])
    assert (w.r_min, w.r_max) == (1.5, 1.5)
    S = [[1.0], [2.0]]
    grid = np.round(np.arange(0.0, 3.0, 1e-4), 10)
    hits = [r for r in grid if subset_fits(S, [0.0], r, NoiseParams(0.0, 0.5), LINE)]
    assert hits == [1.5]


def test_window_singleton():
    noise = NoiseParams(0.5, 0.2)
    w = consistency_window(noise, LINE, [0.0], [[3.0]])
    assert math.isclose(w.r_min, (3 - 0.2) / 1.5) and math.isclose(w.r_max, 1.5 * 3 + 0.2)
    assert not w.empty


def test_window_sound_and_complete_on_random_sets():
    rng = np.random.default_rng(1)
    for _ in range(40):
        noise = NoiseParams(float(rng.uniform(0, 1)), float(rng.uniform(0, 0.5)))
        S = rng.uniform(size=(rng.integers(1, 6), 2))
        q = rng.uniform(size=2)
        w = consistency_window(noise, SQUARE, q, S)
        grid = np.arange(w.r_min - 1, w.r_max + 1, 1e-4) + rng.uniform(0, 1e-4)
        for r in grid:
            assert subset_fits(S, q, r, noise, SQUARE) == (w.r_min <= r <= w.r_max)


@given(st.floats(0, 2), st.floats(0, 1), st.floats(0, 5), st.floats(0, 5))
def test_window_empty_iff(eps, delta, a, b):
    lo, hi = min(a, b), max(a, b)
    noise = NoiseParams(eps, delta)
    w = consistency_window(noise, LINE, [0.0], [[lo], [hi]])
    k = 1 + eps
    # compare away from the exact boundary, where rounding decides either way
    gap = hi - (k * k * lo + (2 + eps) * delta)
    if abs(gap) > 1e-9:
        assert w.empty == (gap > 0)


def test_neighborhood_examples():
    sn = neighborhood_from_rho(NoiseParams(0.0, 0.6), 1.0, 2.0)
    assert math.isclose(sn.r_star, 1.5) and math.isclose(sn.alpha_star, 0.1)
    assert math.isclose(sn.alpha1, 0.1) and sn.alpha2 == 0.0
    sn = surviving_neighborhood(NoiseParams(1.0, 1.0), LINE, [0.0], [[3.0]])
    assert math.isclose(sn.alpha_star, 2.4) and math.isclose(sn.r_star, 2.2)
    assert math.isclose(sn.alpha1, 0.6) and math.isclose(sn.alpha2, 1.8)
    w = consistency_window(NoiseParams(1.0, 1.0), LINE, [0.0], [[3.0]])
    assert (w.r_min, w.r_max) == (1.0, 7.0)


def test_neighborhood_boundary_case():
    eps, delta = 0.5, 0.2
    sn = neighborhood_from_rho(NoiseParams(eps, delta), 0.0, (2 + eps) * delta)
    assert abs(sn.alpha_star) < 1e-15


def test_neighborhood_balls_survive():
    noise = NoiseParams(1.0, 1.0)
    sn = surviving_neighborhood(noise, LINE, [0.0], [[3.0]])
    X = np.linspace(3 - sn.alpha_star, 3 + sn.alpha_star, 1001)
    assert all(approx_eq(noise, abs(x), sn.r_star) for x in X)
    # both ends are tight here: 3 + alpha* = 5.4 and 3 - alpha* = 0.6
    assert not approx_eq(noise, 3 + sn.alpha_star + 1e-6, sn.r_star)
    assert not approx_eq(noise, 3 - sn.alpha_star - 1e-6, sn.r_star)


def test_neighborhood_soundness_random():
    rng = np.random.default_rng(2)
    body = EuclideanBox([-5.0, -5.0], [5.0, 5.0])
    checked = 0
    while checked < 30:
        noise = NoiseParams(float(rng.uniform(0, 1)), float(rng.uniform(0.05, 0.5)))
        S = rng.uniform(-0.2, 0.2, size=(3, 2))
        q = rng.uniform(-2, 2, size=2)
        sn = surviving_neighborhood(noise, body, q, S)
        if sn.alpha_star <= 0:
            continue
        checked += 1
        u = rng.normal(size=(1000, 2))
        u *= (sn.alpha_star * np.sqrt(rng.uniform(size=1000)) / np.linalg.norm(u, axis=1))[:, None]
        P = S[rng.integers(0, 3, 1000)] + u
        d = np.linalg.norm(P - q, axis=1)
        k = 1 + noise.eps
        assert np.all(d <= k * sn.r_star + noise.delta + 1e-9)
        assert np.all(sn.r_star <= k * d + noise.delta + 1e-9)


@given(st.floats(0, 2), st.floats(0.01, 1), st.floats(0, 3), st.floats(0, 1))
def test_decomposition_identity(eps, delta, rho_min, frac):
    rho_max = rho_min + frac * (2 + eps) * delta
    sn = neighborhood_from_rho(NoiseParams(eps, delta), rho_min, rho_max)
    assert math.isclose(sn.alpha1 + sn.alpha2, sn.alpha_star, rel_tol=1e-9, abs_tol=1e-12)
    assert sn.alpha1 >= -1e-12 and sn.alpha2 >= 0


def test_r_neighborhood_observation():
    rng = np.random.default_rng(3)
    body = EuclideanBox([-5.0, -5.0], [5.0, 5.0])
    for _ in range(50):
        noise = NoiseParams(float(rng.uniform(0, 1)), float(rng.uniform(0, 0.5)))
        S = rng.uniform(-1, 1, size=(4, 2))
        q = rng.uniform(-1, 1, size=2)
        alpha = float(rng.uniform(0, 0.5))
        # S_alpha: dense boundary circles plus the exact extreme points along q-s
        ang = np.linspace(0, 2 * np.pi, 64, endpoint=False)
        circle = np.stack([np.cos(ang), np.sin(ang)], 1)
        pts = [S[:, None, :] + alpha * circle[None]]
        toward = (S - q) / np.linalg.norm(S - q, axis=1, keepdims=True)
        pts += [S + alpha * toward, S - np.minimum(alpha, np.linalg.norm(S - q, axis=1))[:, None] * toward]
        S_alpha = np.vstack([p.reshape(-1, 2) for p in pts])
        w, wa = consistency_window(noise, body, q, S), consistency_window(noise, body, q, S_alpha)
        k = 1 + noise.eps
        assert abs(wa.r_min - (w.r_min + alpha / k)) <= 1e-6
        assert abs(wa.r_max - max(noise.delta, w.r_max - alpha * k)) <= 1e-6


def test_goodness_angle_formula():
    for delta, alpha in [(1.0, 0.5), (0.1, 1e-3), (2.0, 1.9)]:
        assert math.isclose(math.cos(goodness_angle(delta, alpha)), 1 - alpha / delta, abs_tol=1e-12)
    # a right angle passes whenever alpha < delta
    assert goodness_angle(1.0, 0.5) < math.pi / 2


def test_good_query_collinear_fails():
    S = build_regular_simplex(2, 2.0)
    V = S.vertices
    A, B = V[0], V[1]
    q = B + 0.5 * (B - A)  # on ray AB beyond B
    far, near, _ = far_near(V, q)
    assert (far, near) == (0, 1)
    assert not good_query_test(1.0, 0.5, S, q)
    assert not good_query_test(1.0, 1e-9, S, q)


def test_good_query_monte_carlo_containment():
    rng = np.random.default_rng(4)
    delta = 0.5
    S = build_regular_simplex(2, 2 * delta)
    passed = 0
    for _ in range(3000):
        alpha = float(rng.uniform(1e-3, 0.25))
        q = rng.uniform(-2, 2, size=2)
        if not good_query_test(delta, alpha, S, q):
            continue
        passed += 1
        far, near, d = far_near(S.vertices, q)
        r = 0.5 * (d[far] + d[near])
        u = rng.normal(size=(60, 2))
        u *= (alpha * np.sqrt(rng.uniform(size=60)) / np.linalg.norm(u, axis=1))[:, None]
        P = S.vertices[rng.integers(0, 3, 60)] + u
        dist = np.linalg.norm(P - q, axis=1)
        slack = NoiseParams(0.0, delta + 1e-9)
        assert all(pair_ok(slack, float(x), r) for x in dist)
    assert passed > 150


def test_good_query_degenerate_fallback():
    # at the centroid every vertex ties, so the neighborhood formula decides: alpha* = delta
    S = build_regular_simplex(2, 1.0)
    assert good_query_test(0.5, 0.01, S, S.centroid)
    assert good_query_test(0.5, 0.5 - 1e-9, S, S.centroid)


def test_region_estimate_empty_box():
    est = region_estimate(Transcript(SQUARE, NoiseParams(0.0, 0.1)), 10_000, seed=0)
    assert math.sqrt(2) - 0.05 <= est.diameter_lb <= math.sqrt(2)
    assert len(est.feasible_points) == 10_000 and not est.empty


def test_region_estimate_pins_hamming_point():
    H = HammingCube(10)
    secret = H.parse_bits("1011001110")
    t = Transcript(H, NoiseParams(0.0, 0.0))
    for q in [0] + [1 << k for k in range(10)]:
        t.append(q, H.dist(secret, q))
    est = region_estimate(t, 1, seed=0)
    assert est.exact and list(est.feasible_points) == [secret] and est.diameter_lb == 0


def test_region_estimate_warns_when_empty():
    t = Transcript(SQUARE, NoiseParams(0.0, 0.0))
    t.append([0.0, 0.0], 0.5)
    with pytest.warns(RuntimeWarning):
        est = region_estimate(t, 100, seed=0)
    assert est.empty
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        region_estimate(t, 100, seed=0, quiet=True)


def test_extremal_witnesses_feasible_in_estimate():
    noise = NoiseParams(0.2, 0.05)
    S = build_regular_simplex(2, (2 + noise.eps) * noise.delta, center=[0.5, 0.5]).vertices
    rsp = extremal_set_responder(S, SQUARE, noise)
    t = Transcript(SQUARE, noise)
    rng = np.random.default_rng(5)
    for q in rng.uniform(size=(100, 2)):
        t.append(q, rsp.respond(q))
        assert all(is_consistent(t, s, slack=1e-9) for s in S)
    assert feasible_mask(t, S, slack=1e-9).all()
    est = region_estimate(t, 20_000, seed=0)
    assert not est.empty


def test_feasible_point_search_finds_thin_region():
    noise = NoiseParams(0.0, 0.0)
    secret = np.array([0.3, 0.7])
    t = Transcript(SQUARE, noise)
    for q in ([0.0, 0.0], [1.0, 0.0]):
        t.append(q, float(np.linalg.norm(secret - q)))
    pts = feasible_point_search(t, target=4)
    assert len(pts) >= 1
    assert all(is_consistent(t, p, slack=1e-9) for p in pts)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1.5)), min_size=1, max_size=5),
       st.integers(0, 2**16))
def test_appending_never_enlarges(recs, seed):
    noise = NoiseParams(0.3, 0.1)
    t = Transcript(SQUARE, noise)
    X = np.random.default_rng(seed).uniform(size=(2000, 2))
    before = feasible_mask(t, X)
    for qx, qy, r in recs:
        t.append([qx, qy], r)
        after = feasible_mask(t, X)
        assert not np.any(after & ~before)
        before = after


def grid_sup_oracle(t, guess, step=0.002):
    g = np.arange(0, 1 + step / 2, step)
    X = np.stack(np.meshgrid(g, g, indexing="ij"), -1).reshape(-1, 2)
    ok = np.array([is_consistent(t, x) for x in X]) if len(X) < 5000 else feasible_mask(t, X)
    if not ok.any():
        return 0.0
    return float(np.linalg.norm(X[ok] - guess, axis=1).max())


def test_certified_sup_brackets_grid_oracle():
    rng = np.random.default_rng(6)
    for _ in range(5):
        noise = NoiseParams(0.1, 0.05)
        secret = rng.uniform(0.2, 0.8, size=2)
        t = Transcript(SQUARE, noise)
        for q in rng.uniform(size=(4, 2)):
            t.append(q, float(np.linalg.norm(secret - q)))
        guess = secret + rng.normal(scale=0.02, size=2)
        cert = certify_sup_distance(t, guess, tol=1e-6)
        oracle = grid_sup_oracle(t, guess)
        assert oracle - 1e-9 <= cert.upper <= oracle + 0.002 * math.sqrt(2) + 1e-6
        assert cert.lower <= cert.upper


def test_certified_sup_finite_is_exact():
    H = HammingCube(6)
    t = Transcript(H, NoiseParams(0.0, 1.0))
    t.append(0, 3)
    cert = certify_sup_distance(t, 0)
    assert cert.exact and cert.upper == 4  # weights 2..4 survive, farthest from 0 has weight 4


def test_transcript_jsonl_round_trip():
    t = Transcript(SQUARE, NoiseParams(0.5, 0.01))
    rng = np.random.default_rng(7)
    for q in rng.uniform(size=(5, 2)):
        t.append(q, float(rng.uniform()))
    again = Transcript.from_jsonl(t.to_jsonl())
    assert again.to_jsonl() == t.to_jsonl()
    Q1, R1 = t.arrays()
    Q2, R2 = again.arrays()
    assert np.array_equal(Q1, Q2) and np.array_equal(R1, R2)
    assert len(t.prefix(2)) == 2 and len(t.prefix(0)) == 0
