"""Command-line harness.

Subcommands: run, sweep-data, sweep-mec, verify, compare.
Exit codes: 0 success, 2 configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .baselines import POLICY_KINDS
from .config import load_config
from .errors import ConfigError, MecoffError
from .runner import run_experiment
from .sweeps import compare_policies, sweep_data_size, sweep_mec_count
from .verify import verify_small_instance


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", required=True, help="config file path")
    p.add_argument("--seed", type=int, default=None,
                   help="master seed (overrides the config)")
    p.add_argument("--out", default=None, help="output directory for CSVs")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mecoff",
        description="MEC offloading simulator and policy comparison harness")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one (policy, seed) experiment")
    _add_common(p_run)
    p_run.add_argument("--policy", required=True, choices=POLICY_KINDS)
    p_run.add_argument("--episodes", type=int, default=None)

    p_sd = sub.add_parser("sweep-data", help="sum cost vs task data size")
    _add_common(p_sd)
    p_sd.add_argument("--policies", default="flc,foc,rodrs,rosrs,ql,dql,ddql")
    p_sd.add_argument("--sizes", default="10,25,40,60,80")
    p_sd.add_argument("--seeds", type=int, default=1)
    p_sd.add_argument("--episodes", type=int, default=60)

    p_sm = sub.add_parser("sweep-mec", help="sum cost vs MEC count")
    _add_common(p_sm)
    p_sm.add_argument("--policies", default="flc,foc,rodrs,rosrs,ql,dql,ddql")
    p_sm.add_argument("--counts", default="1,2,4,6")
    p_sm.add_argument("--seeds", type=int, default=1)
    p_sm.add_argument("--episodes", type=int, default=60)

    p_v = sub.add_parser("verify", help="small-instance brute-force check")
    _add_common(p_v)

    p_c = sub.add_parser("compare", help="policy comparison table")
    _add_common(p_c)
    p_c.add_argument("--policies", default="flc,foc,rodrs,rosrs,ql,dql,ddql")
    p_c.add_argument("--seeds", type=int, default=1)
    p_c.add_argument("--episodes", type=int, default=None)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.master_seed = args.seed
        if args.command == "run":
            result = run_experiment(cfg, args.policy, cfg.master_seed,
                                    out_dir=args.out, episodes=args.episodes)
            print(f"policy={result.policy} seed={result.seed} "
                  f"episodes={result.episodes} "
                  f"mean_cost_final={result.mean_cost_final:.6g} "
                  f"wall_clock_s={result.wall_clock_s:.1f}")
        elif args.command == "sweep-data":
            rows, monotone = sweep_data_size(
                cfg, args.policies.split(","),
                [float(s) for s in args.sizes.split(",")],
                seeds=args.seeds, episodes=args.episodes, out_dir=args.out)
            for r in rows:
                print(f"{r['policy']:>6} size={r['data_size']:<6g} "
                      f"mean_cost={r['mean_cost']:.6g}")
            print("monotone:", monotone)
        elif args.command == "sweep-mec":
            rows, crossover = sweep_mec_count(
                cfg, args.policies.split(","),
                [int(s) for s in args.counts.split(",")],
                seeds=args.seeds, episodes=args.episodes, out_dir=args.out)
            for r in rows:
                print(f"{r['policy']:>6} n_mec={r['n_mec']:<3d} "
                      f"mean_cost={r['mean_cost']:.6g}")
            print("foc>flc crossover at n_mec:", crossover)
        elif args.command == "verify":
            report = verify_small_instance(cfg, cfg.master_seed)
            print(json.dumps(report, indent=2, sort_keys=True))
        elif args.command == "compare":
            rows = compare_policies(cfg, args.policies.split(","),
                                    seeds=args.seeds, episodes=args.episodes,
                                    out_dir=args.out)
            for r in rows:
                red = r["reduction_vs_ddql"]
                red_s = f"{red:.2%}" if isinstance(red, float) else "-"
                print(f"{r['policy']:>6} mean_cost={r['mean_cost']:.6g} "
                      f"reduction_vs_ddql={red_s}")
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except MecoffError as e:
        print(f"runtime error: {e}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
