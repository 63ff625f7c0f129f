"""Game orchestration: the round loop with the consistency obligation, error
certificates, curves over T, and exact minimax values for tiny finite games."""

from __future__ import annotations

import copy
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ConfigurationError, ProtocolViolation, ResourceError
from .feasible import Transcript, certify_sup_distance, feasible_mask, region_estimate
from .geometry import finite_center
from .reconstructors import Reconstructor, make_reconstructor
from .responders import (
    ConstantOneResponder,
    ExtremalSetResponder,
    HonestResponder,
    IntervalShrinkResponder,
    Responder,
    SimplexRotationResponder,
    SimplexTranslationResponder,
    UltrametricLazyResponder,
    extremal_finite_subset,
    extremal_simplex,
)
from .spaces import NoiseParams, Space, space_from_json

log = logging.getLogger("recongame")


@dataclass
class EvalConfig:
    samples: int = 10_000
    seed: int = 0
    trace_level: str = "off"
    certify: bool = True
    tol: float = 1e-6
    max_boxes: int = 200_000
    keep_samples: bool = False


@dataclass
class GameConfig:
    space: Space
    noise: NoiseParams
    rounds: int
    reconstructor: object  # dict config or Reconstructor instance
    responder: object  # dict config, Responder instance or factory(space, noise, rounds, seed)
    evaluation: EvalConfig = field(default_factory=EvalConfig)

    def __post_init__(self):
        if self.rounds < 0:
            raise ConfigurationError("rounds must be nonnegative")

    @classmethod
    def from_json(cls, doc: dict, base_dir=None) -> "GameConfig":
        ev = doc.get("evaluation", {})
        return cls(space_from_json(doc["space"], base_dir), NoiseParams.from_json(doc.get("noise", {})),
                   int(doc["rounds"]), dict(doc["reconstructor"]), dict(doc["responder"]),
                   EvalConfig(**{k: ev[k] for k in ev if k in EvalConfig.__dataclass_fields__}))

    def seeds(self) -> tuple[int, int, int]:
        state = np.random.SeedSequence(self.evaluation.seed).generate_state(3)
        return int(state[0]), int(state[1]), int(state[2])


@dataclass
class GameResult:
    transcript: Transcript
    guess: object
    error_lb: float | None
    error_ub: float | None
    secret: object
    witness_radii: list[float]
    forced_lb: float | None
    guarantee: float | None = None
    error_ub_certified: float | None = None
    protocol_violation: str | None = None
    empty_region: bool = False
    reconstructor_info: dict = field(default_factory=dict)
    responder_info: dict = field(default_factory=dict)
    responder_log: list = field(default_factory=list)
    feasible_samples: object = None
    final_witness: object = None

    @property
    def ok(self) -> bool:
        return self.protocol_violation is None

    def to_json(self) -> dict:
        sp = self.transcript.space
        enc = (lambda x: None if x is None else sp.point_to_json(x))
        return {
            "space": sp.to_json(),
            "noise": self.transcript.noise.to_json(),
            "rounds": len(self.transcript),
            "guess": enc(self.guess),
            "secret": enc(self.secret),
            "error_lb": _num(self.error_lb),
            "error_ub": _num(self.error_ub),
            "error_ub_certified": _num(self.error_ub_certified),
            "guarantee": _num(self.guarantee),
            "forced_lb": _num(self.forced_lb),
            "witness_radii": [_num(r) for r in self.witness_radii],
            "protocol_violation": self.protocol_violation,
            "empty_region": self.empty_region,
            "reconstructor": _jsonable(self.reconstructor_info),
            "responder": _jsonable(self.responder_info),
        }


def _num(x):
    if x is None:
        return None
    x = float(x)
    return None if math.isnan(x) else float(f"{x:.12g}")


def _jsonable(d):
    out = {}
    for k, v in d.items():
        if isinstance(v, (np.floating, float)):
            out[k] = _num(v)
        elif isinstance(v, (np.integer,)):
            out[k] = int(v)
        elif isinstance(v, (str, int, bool)) or v is None:
            out[k] = v
        else:
            out[k] = str(v)
    return out


# ---------------------------------------------------------------------------
# strategy construction from configs

def make_responder(cfg, space: Space, noise: NoiseParams, rounds: int, seed: int = 0) -> Responder:
    if isinstance(cfg, Responder):
        return cfg
    if callable(cfg):
        return cfg(space, noise, rounds, seed)
    kind = cfg.get("strategy")
    if kind == "extremal_set":
        pts = cfg.get("points")
        if pts is None:
            pts = extremal_simplex(space, noise) if space.is_euclidean else extremal_finite_subset(space, noise)
        elif not space.is_euclidean:
            pts = [space.point_from_json(p) for p in pts]
        return ExtremalSetResponder(space, noise, pts)
    if kind == "simplex_translation":
        return SimplexTranslationResponder(space, noise, cfg.get("seed", seed))
    if kind == "simplex_rotation":
        if noise.eps != 0:
            raise ConfigurationError("simplex_rotation needs eps = 0")
        return SimplexRotationResponder(space, noise.delta, cfg.get("seed", seed))
    if kind == "interval_shrink":
        L0 = cfg.get("L0")
        if L0 is None:
            L0 = float(space.bbox()[1][0])
        return IntervalShrinkResponder(space, noise, L0)
    if kind == "ultrametric_lazy":
        return UltrametricLazyResponder(space, noise, rounds)
    if kind == "constant_one":
        return ConstantOneResponder(space, noise, rounds)
    if kind == "honest":
        secret = cfg.get("secret")
        secret = space.point_from_json(secret) if secret is not None else space.sample(1, np.random.default_rng(seed))[0]
        return HonestResponder(space, noise, secret, cfg.get("noise_mode", "none"), cfg.get("seed", seed))
    raise ConfigurationError(f"unknown responder strategy {kind!r}")


def _make_rc(cfg) -> Reconstructor:
    return cfg if isinstance(cfg, Reconstructor) else make_reconstructor(cfg)


# ---------------------------------------------------------------------------
# one game

def run_game(cfg: GameConfig) -> GameResult:
    space, noise, T, ev = cfg.space, cfg.noise, cfg.rounds, cfg.evaluation
    rc_seed, rsp_seed, ev_seed = cfg.seeds()
    rc = _make_rc(cfg.reconstructor).reset(space, noise, T, rc_seed, ev.samples)
    rsp = make_responder(cfg.responder, space, noise, T, rsp_seed)
    t = Transcript(space, noise)
    slack = t.slack()
    radii: list[float] = []
    violation = None
    checked = None
    for step in range(T):
        q = space.validate(rc.next_query(t))
        try:
            r = float(rsp.respond(q))
        except ProtocolViolation as exc:
            violation = f"round {step + 1}: {exc}"
            break
        t.append(q, r)
        W = rsp.witness()
        if len(W) == 0:
            violation = f"round {step + 1}: empty witness"
            break
        if checked == rsp.witness_version:
            ok = feasible_mask(t, W, slack, records=np.array([len(t) - 1])).all()
        else:
            ok = feasible_mask(t, W, slack).all()
        if not ok:
            violation = f"round {step + 1}: witness point left the feasible region"
            break
        checked = rsp.witness_version
        radii.append(rsp.witness_radius())
        if ev.trace_level == "trace":
            log.debug("round %d q=%s r=%.12g witness_radius=%.12g", step + 1,
                      space.point_to_json(q), r, radii[-1])
    base = dict(transcript=t, witness_radii=radii, reconstructor_info=_safe_info(rc),
                responder_info=rsp.info(), responder_log=list(rsp.log))
    if violation is not None:
        log.warning("protocol violation: %s", violation)
        return GameResult(guess=None, error_lb=None, error_ub=None, secret=None, forced_lb=None,
                          protocol_violation=violation, **base)
    guess = space.validate(rc.final_guess(t))
    base["reconstructor_info"] = _safe_info(rc)
    W = rsp.witness()
    forced = rsp.witness_radius()
    cert = evaluate_transcript(t, guess, ev, [W, rsp.adversarial_points(guess)], ev_seed)
    lb, secret, certified, est = cert.error_lb, cert.secret, cert.certified_ub, cert.region
    guarantee = rc.guarantee(t)
    # a strategy's proven bound is the reported one; the box certificate backs it otherwise
    ub = guarantee if guarantee is not None else certified
    return GameResult(guess=guess, error_lb=lb, error_ub=ub, secret=secret, forced_lb=forced,
                      guarantee=guarantee, error_ub_certified=certified,
                      empty_region=lb is None,
                      feasible_samples=est.feasible_points if ev.keep_samples else None,
                      final_witness=W, **base)


@dataclass
class ErrorCertificate:
    error_lb: float | None
    secret: object
    certified_ub: float | None
    region: object = None


def evaluate_transcript(t: Transcript, guess, evaluation: EvalConfig | None = None,
                        witnesses=(), seed: int | None = None) -> ErrorCertificate:
    """Certified [lb, ub] on the worst-case error of ``guess`` over the feasible region.

    The lower bound is realized by the farthest feasible point among the given
    witness pools and fresh region samples; the upper bound comes from branch
    and bound (or enumeration on finite spaces). A pure function of its inputs,
    so a transcript reloaded from JSON lines gives the same certificate.
    """
    ev = evaluation or EvalConfig()
    seed = ev.seed if seed is None else seed
    space, slack = t.space, t.slack()
    est = region_estimate(t, ev.samples, seed, center=False, quiet=True)
    pools = [np.asarray(p) for p in (*witnesses, est.feasible_points) if len(p)]
    lb, secret = None, None
    if pools:
        cand = np.concatenate(pools, axis=0)
        cand = cand[feasible_mask(t, cand, slack)]
        if len(cand):
            d = space.dists(guess, cand)
            k = int(d.argmax())
            lb, secret = float(d[k]), cand[k]
    certified = None
    if ev.certify:
        cert = certify_sup_distance(t, guess, lower=lb or 0.0, point=secret, slack=slack,
                                    tol=ev.tol, max_boxes=ev.max_boxes)
        certified = cert.upper
        if cert.point is not None and (lb is None or cert.lower > lb):
            lb, secret = cert.lower, cert.point
    return ErrorCertificate(lb, secret, certified, est)


def _safe_info(rc):
    try:
        return rc.info()
    except AttributeError:
        return {"strategy": rc.name}


# ---------------------------------------------------------------------------
# curves over T

def _game_job(args):
    doc, rc_cfg, rsp_cfg, T = args
    g = dict(doc)
    g.update(rounds=T, reconstructor=rc_cfg, responder=rsp_cfg)
    cfg = GameConfig.from_json(g)
    try:
        res = run_game(cfg)
    except (ConfigurationError, ValueError) as exc:
        return (T, rc_cfg["strategy"], rsp_cfg["strategy"], None, None, str(exc))
    if not res.ok:
        return (T, rc_cfg["strategy"], rsp_cfg["strategy"], None, None, res.protocol_violation)
    return (T, rc_cfg["strategy"], rsp_cfg["strategy"], res.forced_lb, res.error_ub, None)


def opt_curve(template: dict, T_list, reconstructors=None, responders=None,
              workers: int = 1) -> list[dict]:
    """Empirical envelope per T: max over responders of the forced error (min over the
    reconstructor zoo) and min over reconstructors of the worst certified upper bound."""
    if not T_list:
        raise ConfigurationError("T_list must be nonempty")
    rcs = reconstructors or [template["reconstructor"]]
    rsps = responders or [template["responder"]]
    jobs = [(template, rc, rsp, int(T)) for T in T_list for rc in rcs for rsp in rsps]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(_game_job, jobs))
    else:
        out = [_game_job(j) for j in jobs]
    out.sort(key=lambda row: (row[0], row[1], row[2]))
    rows = []
    for T in sorted(set(int(x) for x in T_list)):
        games = [g for g in out if g[0] == T]
        lb_by_rsp, ub_by_rc = {}, {}
        for _, rc_name, rsp_name, flb, ub, _err in games:
            if flb is not None:
                lb_by_rsp[rsp_name] = min(lb_by_rsp.get(rsp_name, math.inf), flb)
            ub_by_rc[rc_name] = max(ub_by_rc.get(rc_name, -math.inf),
                                    ub if ub is not None else math.inf)
        best_rsp = max(lb_by_rsp, key=lb_by_rsp.get) if lb_by_rsp else None
        best_rc = min(ub_by_rc, key=ub_by_rc.get) if ub_by_rc else None
        ub_val = ub_by_rc.get(best_rc) if best_rc else None
        rows.append({"T": T,
                     "lb": lb_by_rsp.get(best_rsp) if best_rsp else None,
                     "ub": None if ub_val is None or math.isinf(ub_val) else ub_val,
                     "responder": best_rsp, "reconstructor": best_rc,
                     "failures": sum(1 for g in games if g[5])})
    return rows


# ---------------------------------------------------------------------------
# exact minimax for tiny finite games

def answer_grid(space: Space, noise: NoiseParams, q) -> list[float]:
    k = 1.0 + noise.eps
    vals = set()
    for d in space.dists(q, space.enumerate()):
        d = float(d)
        vals.update((k * d + noise.delta, d, (d - noise.delta) / k))
    return sorted(vals)


def _check_tiny(space: Space, T: int, max_points: int = 6, max_rounds: int = 3):
    if not space.is_finite or space.size() > max_points:
        raise ResourceError(f"brute force is capped at {max_points} points")
    if T > max_rounds:
        raise ResourceError(f"brute force is capped at T <= {max_rounds}")


def _filter(space, noise, alive: frozenset, q, r) -> frozenset:
    if not alive:
        return alive
    pts = np.array(sorted(alive), dtype=np.int64)
    d = space.dists(q, pts)
    k = 1.0 + noise.eps
    ok = (d <= k * r + noise.delta) & (r <= k * d + noise.delta)
    return frozenset(int(p) for p in pts[ok])


def _radius(space, alive: frozenset) -> float:
    return finite_center(space, np.array(sorted(alive), dtype=np.int64)).radius


def brute_force_opt(space: Space, noise: NoiseParams, T: int, grid=None) -> float:
    """Exact inf over reconstructors, sup over responders with answers from the grid."""
    _check_tiny(space, T)
    X = [int(x) for x in space.enumerate()]
    grids = {q: (grid(q) if callable(grid) else answer_grid(space, noise, q)) for q in X}

    @lru_cache(maxsize=None)
    def value(t: int, alive: frozenset) -> float:
        if t == 0:
            return _radius(space, alive)
        best = math.inf
        for q in X:
            worst = -math.inf
            for r in grids[q]:
                nxt = _filter(space, noise, alive, q, r)
                if nxt:
                    worst = max(worst, value(t - 1, nxt))
                    if worst >= best:
                        break
            best = min(best, worst)
        return best

    return value(T, frozenset(X))


def responder_value(space: Space, noise: NoiseParams, T: int, responder: Responder,
                    grid=None) -> float:
    """Best-response error of an optimal reconstructor against a fixed responder strategy.

    Every answer must lie on the discretized grid, which makes the value a lower
    bound for brute_force_opt.
    """
    _check_tiny(space, T)
    X = [int(x) for x in space.enumerate()]
    grids = {q: set(grid(q) if callable(grid) else answer_grid(space, noise, q)) for q in X}

    def rec(t, rsp, alive):
        if t == 0:
            return _radius(space, alive)
        best = math.inf
        for q in X:
            child = copy.deepcopy(rsp)
            r = float(child.respond(q))
            if r not in grids[q]:
                raise ProtocolViolation(f"answer {r} to query {q} is off the admissible grid")
            nxt = _filter(space, noise, alive, q, r)
            if not nxt:
                raise ProtocolViolation("responder emptied the feasible region")
            best = min(best, rec(t - 1, child, nxt))
        return best

    return rec(T, responder, frozenset(X))


def reconstructor_value(space: Space, noise: NoiseParams, T: int, rc: Reconstructor,
                        grid=None) -> float:
    """Worst-case error of a deterministic reconstructor over all grid answer sequences."""
    _check_tiny(space, T)
    X = [int(x) for x in space.enumerate()]
    rc.reset(space, noise, T)

    def rec(t, rc_state, tr, alive):
        if t == 0:
            g = int(copy.deepcopy(rc_state).final_guess(tr))
            pts = np.array(sorted(alive), dtype=np.int64)
            return float(space.dists(g, pts).max())
        q = int(rc_state.next_query(tr))
        worst = -math.inf
        for r in (grid(q) if callable(grid) else answer_grid(space, noise, q)):
            nxt = _filter(space, noise, alive, q, r)
            if not nxt:
                continue
            tr2 = tr.prefix(len(tr))
            tr2.append(q, r)
            worst = max(worst, rec(t - 1, copy.deepcopy(rc_state), tr2, nxt))
        return worst

    return rec(T, rc, Transcript(space, noise), frozenset(X))
