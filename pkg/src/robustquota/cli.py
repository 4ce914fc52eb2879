"""Command-line front end: check | robust | worstcase | gap | adaptive | accept.

All commands are deterministic given the config and seed; CSV output uses
17-significant-digit decimal floats so reruns are byte-identical.
Exit codes: 0 success, 1 check/criterion failure, 2 usage or config error.
"""

import argparse
import csv
import json
import os
import sys

import numpy as np

from .acceptance import run_acceptance
from .adversary import dual_certificate, indifference_G, payoff_gap, \
    solve_badnews_lp
from .checks import check_assumptions, one_shot_levels, risk_ratio_condition
from .config import RunConfig, load_config
from .errors import ConditionViolatedError, ConfigError, RobustQuotaError
from .grid import LevelGrid, belief_grid
from .processes import binomial_tree, no_learning
from .robust import compute_joint_robust, compute_robust
from .adaptive import BinaryExperiment, evaluate_adaptive, refine_process, \
    solve_adaptive_quota


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _write_csv(path: str, header, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])


def _write_json(path: str, obj):
    with open(path, "w") as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write("\n")


def _outpath(args, name: str) -> str:
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    return os.path.join(out, name)


def cmd_check(cfg: RunConfig, args) -> int:
    report = check_assumptions(cfg.agent, cfg.principal, cfg.grid, cfg.n_mu)
    payload = {"assumptions": report.to_dict()}
    try:
        ratio = risk_ratio_condition(cfg.agent, cfg.principal, cfg.mechanism,
                                     cfg.grid)
        payload["marginal_ratio"] = ratio.to_dict()
        ratio_ok = ratio.nondecreasing
    except RobustQuotaError as e:
        payload["marginal_ratio"] = {"error": str(e)}
        ratio_ok = False
    _write_json(_outpath(args, "check.json"), payload)
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0 if (report.all_pass and ratio_ok) else 1


def cmd_robust(cfg: RunConfig, args) -> int:
    if cfg.ambiguity:
        result = compute_joint_robust(cfg.ambiguity, cfg.principal, cfg.mu0,
                                      cfg.grid)
    else:
        result = compute_robust(cfg.agent, cfg.principal, cfg.mu0, cfg.grid)
    mech = {"type": "fixed_tax_hard_quota", "lambda": result.lambda_star,
            "quota": result.L_star}
    _write_json(_outpath(args, "mechanism.json"), mech)
    _write_csv(_outpath(args, "surplus.csv"), ["level", "surplus"],
               zip(cfg.grid.points, result.surplus_curve))
    print(json.dumps({**mech, "guarantee": result.guarantee}, sort_keys=True))
    return 0


def _inverse_beliefs(p, grid, m, side, n_mu):
    """Smallest belief whose one-shot level reaches each grid point (1.0 where
    saturated)."""
    mus = belief_grid(n_mu)
    lh = one_shot_levels(p, mus, grid, m, side=side)
    best = np.maximum.accumulate(lh)     # monotone envelope for searchsorted
    idx = np.searchsorted(best, grid.points - 1e-12)
    return np.where(idx < len(mus), mus[np.minimum(idx, len(mus) - 1)], 1.0)


def cmd_worstcase(cfg: RunConfig, args) -> int:
    lp = solve_badnews_lp(cfg.agent, cfg.principal, cfg.mechanism, cfg.grid,
                          cfg.mu0)
    ind = indifference_G(cfg.agent, cfg.mechanism, cfg.grid, cfg.mu0,
                         cfg.principal)
    e = lp.bn.end
    binding = np.zeros(e + 1, dtype=bool)
    binding[lp.binding] = True
    mu_u = _inverse_beliefs(cfg.agent, cfg.grid, cfg.mechanism, "agent",
                            cfg.n_mu)
    mu_v = _inverse_beliefs(cfg.principal, cfg.grid, cfg.mechanism,
                            "principal", cfg.n_mu)
    rows = zip(cfg.grid.points[:e + 1], ind.bn.G, ind.bn.cont_belief(),
               binding, mu_u[:e + 1], mu_v[:e + 1])
    _write_csv(_outpath(args, "worstcase.csv"),
               ["level", "G", "cont_belief", "binding", "mu_hat_U", "mu_hat_V"],
               rows)
    payload = {"value": lp.value, "premise_ok": lp.premise_ok,
               "lbar": ind.lbar, "used_lp_fallback": ind.used_lp_fallback}
    try:
        cert = dual_certificate(cfg.agent, cfg.principal, cfg.mechanism,
                                cfg.grid, cfg.mu0)
        payload["dual"] = cert.to_dict()
    except (ConditionViolatedError, RobustQuotaError) as e:
        payload["dual"] = {"unavailable": str(e)}
    _write_json(_outpath(args, "worstcase_value.json"), payload)
    print(json.dumps({"value": lp.value, "premise_ok": lp.premise_ok},
                     sort_keys=True))
    return 0


def cmd_gap(cfg: RunConfig, args) -> int:
    mechanisms = cfg.mechanisms or (cfg.mechanism,)
    l_maxes = cfg.sweep_l_max or (cfg.grid.l_max,)
    rows = []
    for l_max in l_maxes:
        grid = LevelGrid(l_max, cfg.grid.n)
        for i, m in enumerate(mechanisms):
            gap = payoff_gap(m, cfg.agent, cfg.principal, grid, cfg.mu0)
            rows.append((m.to_dict()["type"], i, l_max, gap.delta,
                         gap.guarantee, gap.worst_value, gap.route))
    _write_csv(_outpath(args, "gap.csv"),
               ["mechanism", "index", "l_max", "delta", "guarantee",
                "worst_value", "route"], rows)
    print(f"wrote {len(rows)} gap rows")
    return 0


def cmd_adaptive(cfg: RunConfig, args) -> int:
    tree_spec = cfg.tree or {"type": "no_learning"}
    if tree_spec["type"] == "binomial":
        tree = binomial_tree(cfg.mu0, cfg.grid, tree_spec.get("p_good", 0.6),
                             tree_spec.get("p_bad", 0.4))
    else:
        tree = no_learning(cfg.mu0, cfg.grid)
    policy = solve_adaptive_quota(tree, cfg.agent, cfg.principal)

    rows = []
    node_id = 0
    for j in range(cfg.grid.n):
        for i, b in enumerate(tree.beliefs[j]):
            rows.append((node_id, cfg.grid.points[j], b,
                         bool(policy.stop_set[j][i])))
            node_id += 1
    _write_csv(_outpath(args, "policy.csv"),
               ["node_id", "level", "belief", "stop"], rows)

    seed = cfg.require_seed("adaptive")
    rng = np.random.default_rng(seed)
    n = cfg.grid.n
    worst = np.inf
    for _ in range(cfg.n_refinements):
        p = float(rng.uniform(0.05, 0.95))
        q = float(rng.uniform(0.05, 0.95))
        if abs(p - q) < 0.05:
            q = min(0.95, q + 0.1)
        levels = tuple(int(l) for l in
                       rng.choice(n, size=int(rng.integers(1, min(4, n))),
                                  replace=False))
        ref = refine_process(tree, BinaryExperiment(p, q, levels))
        worst = min(worst, evaluate_adaptive(policy, ref, cfg.agent,
                                             cfg.principal))
    payload = {"value": policy.value, "lambda": policy.lambda_adaptive,
               "n_refinements": cfg.n_refinements,
               "min_refinement_value": worst}
    _write_json(_outpath(args, "adaptive_value.json"), payload)
    print(json.dumps(payload, sort_keys=True))
    return 0


def cmd_accept(args) -> int:
    indices = set(args.criteria) if args.criteria else None
    results = run_acceptance(indices)
    if args.out:
        with open(_outpath(args, "acceptance.txt"), "w") as f:
            for r in results:
                f.write(r.line() + "\n")
    return 0 if all(r.ok for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="robustquota",
        description="Robust regulation of risky development: stopping, "
                    "worst-case learning, and quota mechanisms on a level grid.")
    ap.add_argument("--config", help="path to a JSON run configuration")
    ap.add_argument("--out", help="output directory for CSV/JSON artifacts")
    ap.add_argument("--grid-n", type=int, help="override grid.n from the config")
    ap.add_argument("--seed", type=int, help="override the config seed")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("check", "robust", "worstcase", "gap", "adaptive"):
        sub.add_parser(name)
    acc = sub.add_parser("accept")
    acc.add_argument("--criteria", type=int, nargs="*",
                     help="subset of criteria indices to run (default all)")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "accept":
            return cmd_accept(args)
        if not args.config:
            raise ConfigError(f"'{args.command}' requires --config")
        cfg = load_config(args.config)
        if args.grid_n is not None:
            cfg = RunConfig(cfg.agent, cfg.principal, cfg.mechanism,
                            LevelGrid(cfg.grid.l_max, args.grid_n), cfg.mu0,
                            cfg.n_mu, cfg.seed, cfg.ambiguity, cfg.tree,
                            cfg.mechanisms, cfg.sweep_l_max,
                            cfg.n_refinements, cfg.tolerances)
        if args.seed is not None:
            cfg = RunConfig(cfg.agent, cfg.principal, cfg.mechanism, cfg.grid,
                            cfg.mu0, cfg.n_mu, args.seed, cfg.ambiguity,
                            cfg.tree, cfg.mechanisms, cfg.sweep_l_max,
                            cfg.n_refinements, cfg.tolerances)
        handler = {"check": cmd_check, "robust": cmd_robust,
                   "worstcase": cmd_worstcase, "gap": cmd_gap,
                   "adaptive": cmd_adaptive}[args.command]
        return handler(cfg, args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except RobustQuotaError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
