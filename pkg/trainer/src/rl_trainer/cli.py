"""Command-line entry points for training and evaluation."""

from __future__ import annotations

import argparse
import json
import sys

from .config import default_config


def _apply_overrides(cfg, args):
    fields = (
        "total_timesteps", "n_envs", "episodes", "seed", "hidden_units",
        "learning_rate", "mcts_budget",
    )
    overrides = {
        f: getattr(args, f)
        for f in fields
        if getattr(args, f, None) is not None
    }
    return cfg.replace(**overrides) if overrides else cfg


def cmd_train_ppo(args) -> int:
    from .ppo import train_ppo

    cfg = _apply_overrides(default_config(args.code), args)
    result = train_ppo(args.code, cfg, out_dir=args.out_dir)
    print(json.dumps(
        {
            "code": result.code,
            "timesteps": result.timesteps,
            "best_tqg": None if result.best is None else result.best.tq_gate_count,
            "checkpoint": str(result.checkpoint_path),
            "curve": str(result.curve_path),
        },
        indent=1,
    ))
    return 0


def cmd_train_qusynth(args) -> int:
    from .qusynth import train_qusynth

    cfg = _apply_overrides(default_config(args.code), args)
    if args.tether_fraction is not None:
        cfg = cfg.replace(tether_fraction=args.tether_fraction)
    result = train_qusynth(args.code, cfg, out_dir=args.out_dir,
                           init_checkpoint=args.init_checkpoint)
    print(json.dumps(
        {
            "code": result.code,
            "episodes": result.timesteps,
            "best_tqg": None if result.best is None else result.best.tq_gate_count,
            "checkpoint": str(result.checkpoint_path),
            "curve": str(result.curve_path),
        },
        indent=1,
    ))
    return 0


def cmd_pgbs(args) -> int:
    from .pgbs import pgbs_eval

    result = pgbs_eval(
        args.checkpoint, args.code, beam_width=args.beam_width,
        samples_per_state=args.samples, seed=args.seed or 0,
    )
    print(json.dumps(
        {
            "code": args.code,
            "tq_gate_count": result.tq_gate_count,
            "tq_depth": result.tq_depth,
        },
        indent=1,
    ))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graphsynth-trainer")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--code", required=True)
        p.add_argument("--out-dir", default=".")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--hidden-units", dest="hidden_units", type=int, default=None)
        p.add_argument("--learning-rate", dest="learning_rate", type=float, default=None)

    p = sub.add_parser("train-ppo", help="policy-gradient training")
    common(p)
    p.add_argument("--timesteps", dest="total_timesteps", type=int, default=None)
    p.add_argument("--envs", dest="n_envs", type=int, default=None)
    p.set_defaults(func=cmd_train_ppo)

    p = sub.add_parser("train-qusynth", help="MCTS-guided training")
    common(p)
    p.add_argument("--episodes", type=int, default=None)
    p.add_argument("--mcts-budget", dest="mcts_budget", type=int, default=None)
    p.add_argument("--tether-fraction", dest="tether_fraction",
                   type=float, default=None)
    p.add_argument("--init-checkpoint", dest="init_checkpoint", default=None,
                   help="warm-start from a bits-only policy checkpoint")
    p.set_defaults(func=cmd_train_qusynth)

    p = sub.add_parser("pgbs", help="policy-guided beam search evaluation")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--code", required=True)
    p.add_argument("--beam-width", type=int, default=100)
    p.add_argument("--samples", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_pgbs)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
