"""Command-line front end: ``recongame {simulate,profile,verify,dn,curve}``.

Exit codes: 0 success, 1 failed verification, 2 invalid input or config,
3 protocol violation, 4 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, DomainError, ProtocolViolation, ResourceError

log = logging.getLogger("recongame")

EXIT_FAIL, EXIT_CONFIG, EXIT_PROTOCOL, EXIT_RESOURCE = 1, 2, 3, 4
LOG_LEVELS = {"off": logging.CRITICAL + 1, "info": logging.INFO, "trace": logging.DEBUG}


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.12g}"
    return str(x)


def _write_csv(path: Path | None, header: list[str], rows, config_hash: str) -> None:
    buf = io.StringIO()
    buf.write(f"# config-hash: {config_hash}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    if path is None:
        sys.stdout.write(buf.getvalue())
    else:
        path.write_text(buf.getvalue())


def _dump_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_json_arg(text: str):
    """Inline JSON, or a path to a JSON file."""
    p = Path(text)
    if p.exists():
        return json.loads(p.read_text()), p.parent
    return json.loads(text), None


def _experiment(args) -> tuple[dict, Path | None]:
    from .scenarios import resolve_experiment

    if args.config:
        path = Path(args.config)
        doc = json.loads(path.read_text())
        base = path.parent
    elif args.scenario:
        doc, base = {"scenario": args.scenario}, None
    else:
        raise ConfigurationError("give --config PATH or --scenario NAME")
    if args.scenario and "scenario" not in doc:
        doc["scenario"] = args.scenario
    doc = resolve_experiment(doc)
    ev = doc["game"].setdefault("evaluation", {})
    if args.seed is not None:
        ev["seed"] = args.seed
    if args.samples is not None:
        ev["samples"] = args.samples
    level = os.environ.get("RECON_LOG", "off")
    if level != "off":
        ev["trace_level"] = level
    return doc, base


def _formats(args, doc, default: list[str]) -> list[str]:
    return args.format or doc.get("format") or default


# ---------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    from .engine import GameConfig, run_game
    from .scenarios import config_hash

    doc, base = _experiment(args)
    fmts = _formats(args, doc, ["json"])
    if "svg" in fmts:
        doc["game"].setdefault("evaluation", {})["keep_samples"] = True
    h = config_hash(doc)
    cfg = GameConfig.from_json(doc["game"], base)
    res = run_game(cfg)
    out = _out_dir(args) if args.out else Path(doc.get("out", "."))
    out.mkdir(parents=True, exist_ok=True)
    payload = res.to_json()
    payload["config_hash"] = h
    payload["config"] = doc
    (out / "transcript.jsonl").write_text(res.transcript.to_jsonl())
    if "json" in fmts:
        _dump_json(out / "result.json", payload)
    if "csv" in fmts:
        Q, R = res.transcript.arrays()
        sp = res.transcript.space
        rows = [(i + 1, json.dumps(sp.point_to_json(q)), r,
                 res.witness_radii[i] if i < len(res.witness_radii) else None)
                for i, (q, r) in enumerate(zip(Q, R))]
        _write_csv(out / "rounds.csv", ["round", "query", "answer", "witness_radius"], rows, h)
    if "svg" in fmts:
        sp = res.transcript.space
        if sp.is_euclidean and sp.dim == 2 and res.ok:
            from .plotting import plot_region

            plot_region(res, out / "region.svg", h)
        else:
            log.warning("region plot skipped: needs a 2D Euclidean game without violations")
    print(f"error_lb={_fmt(res.error_lb)} error_ub={_fmt(res.error_ub)} "
          f"forced_lb={_fmt(res.forced_lb)} config_hash={h} out={out}")
    if not res.ok:
        print(f"protocol violation: {res.protocol_violation}", file=sys.stderr)
        return EXIT_PROTOCOL
    return 0


def cmd_profile(args) -> int:
    from .geometry import profile_value
    from .scenarios import config_hash
    from .spaces import space_from_json

    doc, base = _load_json_arg(args.space)
    space = space_from_json(doc, base)
    alphas = [float(a) for a in args.alpha.split(",") if a.strip()]
    seed = args.seed or 0
    h = config_hash({"space": doc, "alpha": alphas, "seed": seed})
    rows = []
    for a in alphas:
        value, tag = profile_value(space, a, seed=seed)
        rows.append((a, value, tag))
    path = None
    if args.out:
        path = _out_dir(args) / "profile.csv"
    _write_csv(path, ["alpha", "value", "method"], rows, h)
    return 0


def cmd_verify(args) -> int:
    from .verify import SUITES, run_suite

    if args.suite not in SUITES:
        print(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)}", file=sys.stderr)
        return EXIT_CONFIG
    results = run_suite(args.suite, seed=args.seed, samples=args.samples, workers=args.workers)
    for r in results:
        print(r.line(), flush=True)
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} checks passed")
    if args.out:
        report = {"suite": args.suite, "passed": passed, "total": len(results),
                  "checks": [r.to_json() for r in results]}
        (_out_dir(args) / f"verify_{args.suite}.json").write_text(
            json.dumps(report, indent=2, sort_keys=True, default=_fmt) + "\n")
    return 0 if passed == len(results) else EXIT_FAIL


def _read_bit_rows(path: str) -> list[list[int]]:
    rows = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            cells = [c.strip() for c in row if c.strip()]
            if not cells or cells[0].startswith("#"):
                continue
            if len(cells) == 1 and len(cells[0]) > 1:
                cells = list(cells[0])  # a packed bit string such as 0110
            if set(cells) - {"0", "1"}:
                raise DomainError(f"{path}: expected 0/1 entries, got {cells}")
            rows.append([int(c) for c in cells])
    return rows


def cmd_dn(args) -> int:
    from .dn_bridge import CountingQuery, simulate_counting_game_on_hamming, simulate_hamming_game_on_counting
    from .scenarios import config_hash

    data_rows = _read_bit_rows(args.dataset)
    if len(data_rows) != 1:
        raise DomainError("the dataset CSV must hold exactly one row of bits")
    bits = data_rows[0]
    n = len(bits)
    data = sum(b << i for i, b in enumerate(bits))
    masks = []
    for row in _read_bit_rows(args.queries):
        if len(row) != n:
            raise DomainError(f"query of length {len(row)} for a dataset of length {n}")
        masks.append(sum(b << i for i, b in enumerate(row)))
    seed = args.seed or 0
    if args.direction == "counting-on-hamming":
        run = simulate_counting_game_on_hamming(data, n, [CountingQuery(m, n, args.delta) for m in masks],
                                                args.delta, seed, args.noise_mode)
    else:
        run = simulate_hamming_game_on_counting(data, n, masks, args.delta, seed, args.noise_mode)
    h = config_hash({"dataset": bits, "queries": masks, "delta": args.delta, "seed": seed,
                     "direction": args.direction, "noise_mode": args.noise_mode})
    run.metadata["config_hash"] = h
    counting, hamming = run.to_jsonl()
    if args.out:
        out = _out_dir(args)
        (out / "counting.jsonl").write_text(counting)
        (out / "hamming.jsonl").write_text(hamming)
        print(f"{run.metadata['direction']}: {run.metadata['queries']} queries, "
              f"{len(run.hamming)} hamming records, config_hash={h} out={out}")
    else:
        sys.stdout.write(counting)
        sys.stdout.write(hamming)
    return 0


def cmd_curve(args) -> int:
    from .engine import opt_curve
    from .scenarios import config_hash

    doc, _ = _experiment(args)
    curve_cfg = doc.get("curve")
    if curve_cfg is None:
        raise ConfigurationError("curve needs a 'curve' section with T_list")
    fmts = _formats(args, doc, ["csv"])
    h = config_hash(doc)
    workers = args.workers or os.cpu_count() or 1
    rows = opt_curve(doc["game"], curve_cfg["T_list"], curve_cfg.get("reconstructors"),
                     curve_cfg.get("responders"), workers=workers)
    out = _out_dir(args) if args.out else Path(doc.get("out", "."))
    out.mkdir(parents=True, exist_ok=True)
    keys = ["T", "lb", "ub", "responder", "reconstructor", "failures"]
    if "csv" in fmts:
        _write_csv(out / "curve.csv", keys, [[r[k] for k in keys] for r in rows], h)
    if "json" in fmts:
        _dump_json(out / "curve.json", {"config_hash": h, "config": doc,
                                        "rows": [{k: (float(_fmt(r[k])) if isinstance(r[k], float) else r[k])
                                                  for k in keys} for r in rows]})
    if "svg" in fmts:
        from .plotting import plot_curve

        plot_curve(rows, out / "curve.svg", h, curve_cfg.get("reference"),
                   curve_cfg.get("log_excess", False))
    for r in rows:
        print(" ".join(f"{k}={_fmt(r[k])}" for k in keys))
    return EXIT_PROTOCOL if any(r["failures"] for r in rows) else 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    common.add_argument("--samples", type=int, help="feasible-region samples per evaluation")
    common.add_argument("--workers", type=int, help="worker processes (default: all cores)")
    common.add_argument("--format", action="append", choices=["csv", "json", "svg"],
                        help="output format; repeat for several")

    p = argparse.ArgumentParser(prog="recongame", description="Noisy distance-query reconstruction games.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common], help="run one game")
    s.add_argument("--config", help="experiment config (JSON)")
    s.add_argument("--scenario", help="built-in scenario name")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("curve", parents=[common], help="error envelope over a list of T")
    s.add_argument("--config", help="curve config (JSON) with a game template and T_list")
    s.add_argument("--scenario", help="built-in curve scenario name")
    s.set_defaults(func=cmd_curve)

    s = sub.add_parser("profile", parents=[common], help="diameter-radius profile values")
    s.add_argument("--space", required=True, help="space descriptor: inline JSON or a path")
    s.add_argument("--alpha", required=True, help="comma-separated alpha values")
    s.set_defaults(func=cmd_profile)

    s = sub.add_parser("verify", parents=[common], help="run an acceptance suite")
    s.add_argument("suite", help="thm1, thm2, calculus, examples, dn or all")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("dn", parents=[common], help="counting-query / Hamming-query simulation")
    s.add_argument("--dataset", required=True, help="CSV with one row of 0/1 values")
    s.add_argument("--queries", required=True, help="CSV with one 0/1 subset indicator per row")
    s.add_argument("--delta", type=float, default=0.0, help="noise bound on native answers")
    s.add_argument("--direction", choices=["counting-on-hamming", "hamming-on-counting"],
                   default="counting-on-hamming")
    s.add_argument("--noise-mode", choices=["uniform", "extreme", "none"], default="uniform")
    s.set_defaults(func=cmd_dn)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = os.environ.get("RECON_LOG", "off")
    if level not in LOG_LEVELS:
        print(f"RECON_LOG must be one of {', '.join(LOG_LEVELS)}", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=LOG_LEVELS[level], format="%(levelname)s %(name)s: %(message)s")
    if args.seed is not None and not 0 <= args.seed < 2**64:
        print("--seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except json.JSONDecodeError as exc:
        print(f"invalid JSON: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigurationError, DomainError, FileNotFoundError, KeyError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ProtocolViolation as exc:
        print(f"protocol violation: {exc}", file=sys.stderr)
        return EXIT_PROTOCOL
    except ResourceError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
