"""Command line front end: ``crowdwise {analyze,simulate,sweep,opinions}``.

Exit codes: 0 success, 2 configuration error, 3 model validation error,
4 learning run(s) not converged. Agents are labelled from 1 in every file
written here.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, load_config, resolve_z0
from .dynamics import NoiseModel, estimation_variances, final_opinion_samples, simulate_opinions
from .equilibrium import classify_profile, pareto_segment
from .errors import ConfigError, ValidationError
from .learning import RunConfig, run
from .network import validate_network

log = logging.getLogger("crowdwise")

EXIT_OK, EXIT_CONFIG, EXIT_VALIDATION, EXIT_NOT_CONVERGED = 0, 2, 3, 4


def fmt(x) -> str:
    """Shortest round-trip decimal; empty for missing or non-finite values."""
    if x is None:
        return ""
    x = float(x)
    return repr(x) if math.isfinite(x) else ""


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    return obj


def write_json(path: Path, obj):
    path.write_text(json.dumps(_jsonable(obj), indent=2) + "\n")


def _csv_writer(fh):
    return csv.writer(fh, lineterminator="\n")


def _model(cfg: ExperimentConfig):
    net = validate_network(cfg.P)
    noise = NoiseModel(np.array(cfg.sigma2), cfg.theta)
    return net, noise


def _run_config(cfg, seed, z0):
    return RunConfig(seed=seed, z0=z0, max_steps=cfg.max_steps, tol_fp=cfg.tol_fp,
                     record_every=cfg.record_every)


def cmd_analyze(cfg: ExperimentConfig, out: Path) -> int:
    net, noise = _model(cfg)
    seg = pareto_segment(net, noise)
    report = {
        "n": net.n,
        "centrality": net.centrality,
        "mu_star": seg.mu_star,
        "v_min": seg.v_min,
        "alpha_star": seg.alpha_star,
        "direction": seg.direction,
    }
    z0 = resolve_z0(cfg, seg)
    if z0 is not None:
        nash = classify_profile(net, noise, z0).as_dict()
        if nash["deviation"] is not None:
            nash["deviation"]["agent"] += 1
        report["z0"] = z0
        report["nash"] = nash
    write_json(out / "analysis.json", report)
    return EXIT_OK


def _require_z0(cfg, seg):
    z0 = resolve_z0(cfg, seg)
    if z0 is None:
        raise ConfigError("z0", "required for this command")
    return z0


def cmd_simulate(cfg: ExperimentConfig, out: Path) -> int:
    net, noise = _model(cfg)
    z0 = _require_z0(cfg, pareto_segment(net, noise))
    summary, trajectory = run(net, noise, _run_config(cfg, cfg.seed, z0))
    with open(out / "trajectory.csv", "w", newline="") as fh:
        w = _csv_writer(fh)
        w.writerow(["t", "active_agent", *[f"z_{i + 1}" for i in range(net.n)], "V", "M"])
        for rec in trajectory:
            agent = "" if rec.active_agent is None else rec.active_agent + 1
            w.writerow([rec.t, agent, *map(fmt, rec.z), fmt(rec.V), fmt(rec.M)])
    write_json(out / "summary.json", summary.as_dict())
    log.info("seed %d: converged=%s after %d steps", cfg.seed, summary.converged, summary.steps)
    return EXIT_OK if summary.converged else EXIT_NOT_CONVERGED


def _sweep_one(args):
    P, sigma2, theta, rc = args
    net = validate_network(P)
    summary, _ = run(net, NoiseModel(np.array(sigma2), theta), rc)
    return summary.as_dict()


def _threads(jobs):
    env = os.environ.get("CROWDWISE_THREADS")
    cap = int(env) if env else (os.cpu_count() or 1)
    return max(1, min(cap, jobs))


def cmd_sweep(cfg: ExperimentConfig, out: Path) -> int:
    if not cfg.seeds:
        raise ConfigError("seeds", "sweep needs a nonempty list of seeds")
    net, noise = _model(cfg)
    z0 = _require_z0(cfg, pareto_segment(net, noise))
    jobs = [(cfg.P, cfg.sigma2, cfg.theta, _run_config(cfg, s, z0)) for s in cfg.seeds]
    workers = _threads(len(jobs))
    if workers == 1:
        results = [_sweep_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_one, jobs))
    with open(out / "sweep_runs.jsonl", "w") as fh:
        for r in results:
            fh.write(json.dumps(_jsonable(r)) + "\n")
    alphas = [r["alpha_hat"] for r in results if r["converged"]]
    aggregate = {
        "runs": len(results),
        "convergence_rate": sum(r["converged"] for r in results) / len(results),
        "all_in_zstar": all(r["in_zstar"] for r in results),
        "alpha_hat": None if not alphas else {
            "min": min(alphas), "mean": float(np.mean(alphas)), "max": max(alphas)},
        "max_fixed_point_residual": max(r["fixed_point_residual"] for r in results),
        "max_zstar_residual": max((r["zstar_residual"] for r in results if r["converged"]),
                                  default=None),
    }
    write_json(out / "sweep.json", aggregate)
    return EXIT_OK if aggregate["convergence_rate"] == 1.0 else EXIT_NOT_CONVERGED


def cmd_opinions(cfg: ExperimentConfig, out: Path) -> int:
    net, noise = _model(cfg)
    z = resolve_z0(cfg, pareto_segment(net, noise))
    if z is None:
        z = np.zeros(net.n)
    xs = simulate_opinions(net, z, noise, cfg.seed, cfg.t_max, distribution=cfg.noise)
    with open(out / "opinions.csv", "w", newline="") as fh:
        w = _csv_writer(fh)
        w.writerow(["t", *[f"x_{i + 1}" for i in range(net.n)]])
        for t, x in enumerate(xs):
            w.writerow([t, *map(fmt, x)])
    if cfg.replicates:
        X = final_opinion_samples(net, z, noise, cfg.seed, cfg.t_max, cfg.replicates,
                                  distribution=cfg.noise)
        err = X - noise.theta
        var = err.var(axis=0, ddof=1)
        # standard error of the sample variance from the fourth central moment
        m4 = np.mean((err - err.mean(axis=0)) ** 4, axis=0)
        se = np.sqrt(np.maximum(m4 - var**2, 0.0) / cfg.replicates)
        predicted = estimation_variances(net, z, noise)
        write_json(out / "opinions_replicates.json", {
            "replicates": cfg.replicates,
            "t_max": cfg.t_max,
            "mean_error": err.mean(axis=0),
            "empirical_variance": var,
            "standard_error": se,
            "predicted_variance": predicted,
            "z_scores": (var - predicted) / se,
        })
    return EXIT_OK


COMMANDS = {
    "analyze": cmd_analyze,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "opinions": cmd_opinions,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="crowdwise",
        description="Self-confidence adaptation game on French-DeGroot opinion pooling.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="experiment JSON file")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--output", help="output directory (default: config output_dir)")
        p.add_argument("--max-steps", type=int, help="override max_steps")
        if name == "opinions":
            p.add_argument("--replicates", type=int, help="Monte-Carlo replicates of x(t_max)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("--seed", "must be nonnegative")
            cfg.seed = args.seed
        if args.max_steps is not None:
            if args.max_steps < 1:
                raise ConfigError("--max-steps", "must be at least 1")
            cfg.max_steps = args.max_steps
        if getattr(args, "replicates", None) is not None:
            if args.replicates < 2:
                raise ConfigError("--replicates", "must be at least 2")
            cfg.replicates = args.replicates
        out = Path(args.output or cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValidationError as exc:
        print(f"validation error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
