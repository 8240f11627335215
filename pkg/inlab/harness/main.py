"""Command-line entry point: python -m inlab.harness.main <command> [options]."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import pandas as pd

from ..gaitgen.gaits import BIPED_GAITS, QUADRUPED_GAITS
from ..ppo.checkpoint import load_checkpoint
from ..shared.config import LOG_LEVELS, get_log_level, get_out_dir, set_log_level
from ..shared.errors import ConfigurationError, InlabError, SimulationBlowupError
from .config import MODES, TrainConfig, apply_overrides, load_config
from .experiments import adapt_sweep, compare_modes, final_plateau, gait_library, steps_to_threshold, sweep_kb
from .online import online_protocol
from .plotdata import read_table, write_table
from .train import evaluate_checkpoint, train

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_BLOWUP = 3


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="JSON training config")
    parser.add_argument("--seed", type=int, help="random seed")
    parser.add_argument("--out-dir", type=Path, help="output directory")
    parser.add_argument("--steps", type=int, help="total environment steps")
    parser.add_argument("--envs", type=int, help="parallel environment copies")
    parser.add_argument("--workers", type=int, help="threads stepping environment copies")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="inlab", description="Instruction-learning locomotion laboratory")
    parser.add_argument("--log-level", type=str.upper, choices=LOG_LEVELS, default=get_log_level(), help="overrides LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train one policy")
    _common(p)

    p = sub.add_parser("eval", help="evaluate a checkpoint with the mean action")
    _common(p)
    p.add_argument("--checkpoint", type=Path, required=True)
    p.add_argument("--duration", type=float, default=30.0, help="seconds")
    p.add_argument("--state-dump", type=Path, help="write the per-step simulator state to this CSV")

    p = sub.add_parser("compare", help="compare learning modes, or train a gait library")
    _common(p)
    p.add_argument("--modes", nargs="+", default=list(MODES), choices=MODES)
    p.add_argument("--gaits", nargs="+", help="train these gaits with their own reward presets instead")
    p.add_argument("--seeds", type=int, default=5, help="number of seeds")
    p.add_argument("--jobs", type=int, default=1, help="training processes")

    p = sub.add_parser("sweep-kb", help="INL runs over feedback ratios")
    _common(p)
    p.add_argument("--values", type=float, nargs="+", default=[0.1, 0.5, 1.0, 1.5])
    p.add_argument("--seeds", type=int, default=5, help="number of seeds")
    p.add_argument("--jobs", type=int, default=1, help="training processes")

    p = sub.add_parser("adapt", help="scale the feedforward of a trained policy")
    _common(p)
    p.add_argument("--checkpoint", type=Path, required=True)
    p.add_argument("--parameter", choices=("period", "amplitude"), default="period")
    p.add_argument("--factors", type=float, nargs="+", default=[0.5, 0.75, 1.0, 1.25, 1.5, 2.0])
    p.add_argument("--duration", type=float, default=30.0, help="seconds per factor")

    p = sub.add_parser("online", help="episodic learn-while-walking protocol")
    _common(p)
    p.add_argument("--minutes", type=float, help="simulated duration")

    p = sub.add_parser("plotdata", help="summarize stored training logs")
    p.add_argument("--run-dir", type=Path, required=True, help="directory searched for training_log.csv files")
    p.add_argument("--out-dir", type=Path, help="output directory (defaults to --run-dir)")
    return parser


def _config(args: argparse.Namespace) -> TrainConfig:
    config = load_config(args.config)
    return apply_overrides(config, seed=args.seed, steps=args.steps, envs=args.envs, workers=args.workers)


def _out_dir(args: argparse.Namespace, config: TrainConfig, label: str) -> Path:
    if args.out_dir is not None:
        return args.out_dir
    return get_out_dir() / f"{label}_{config.robot}_{config.gait}_seed{config.seed}"


def _seeds(config: TrainConfig, count: int) -> List[int]:
    return [config.seed + i for i in range(count)]


def cmd_train(args) -> None:
    config = _config(args)
    out_dir = _out_dir(args, config, config.mode)
    result = train(config, out_dir)
    logger.info(f"Training finished: {len(result.log)} iterations, checkpoint {result.checkpoint}")


def cmd_eval(args) -> None:
    config = _config(args)
    metrics = evaluate_checkpoint(args.checkpoint, config, args.duration, state_dump=args.state_dump)
    logger.info(
        f"Evaluation over {args.duration:.1f}s: mean reward {metrics.mean_reward:.3f}, falls {metrics.falls}, "
        f"forward velocity {metrics.mean_forward_velocity:.3f} m/s, episodes {metrics.episode_lengths}"
    )


def cmd_compare(args) -> None:
    config = _config(args)
    seeds = _seeds(config, args.seeds)
    if args.gaits:
        known = QUADRUPED_GAITS if config.robot == "quadruped" else BIPED_GAITS
        unknown = [g for g in args.gaits if g not in known]
        if unknown:
            raise ConfigurationError(f"unknown {config.robot} gaits {unknown}")
        result = gait_library(config, args.gaits, seeds, args.jobs)
        label = "gaits"
    else:
        result = compare_modes(config, args.modes, seeds, args.jobs)
        label = "compare"
    result.write(_out_dir(args, config, label))


def cmd_sweep_kb(args) -> None:
    config = _config(args)
    result = sweep_kb(config, args.values, _seeds(config, args.seeds), args.jobs)
    result.write(_out_dir(args, config, "sweep_kb"))


def cmd_adapt(args) -> None:
    config = _config(args)
    params, _ = load_checkpoint(args.checkpoint)
    result = adapt_sweep(params, config, args.parameter, args.factors, args.duration)
    write_table(result.table, _out_dir(args, config, "adapt") / f"adapt_{args.parameter}.csv", "adapt")
    logger.info(f"Feasible {args.parameter} scale range: [{result.low}, {result.high}]")


def cmd_online(args) -> None:
    config = _config(args)
    if args.minutes is not None:
        online = config.online.model_copy(update={"total_minutes": args.minutes})
        config = config.model_copy(update={"online": online})
    online_protocol(config, _out_dir(args, config, "online"))


def cmd_plotdata(args) -> None:
    rows, curves = [], []
    for path in sorted(args.run_dir.rglob("training_log.csv")):
        frame = read_table(path, "training_log")
        run = str(path.parent.relative_to(args.run_dir))
        steps = steps_to_threshold(frame)
        rows.append(
            {
                "run": run,
                "iterations": len(frame),
                "env_steps": int(frame["env_steps"].iloc[-1]) if len(frame) else 0,
                "final_reward": final_plateau(frame) if len(frame) else float("nan"),
                "steps_to_threshold": float("nan") if steps is None else steps,
            }
        )
        curves.append(frame.assign(run=run))
    if not rows:
        raise ConfigurationError(f"no training_log.csv found under {args.run_dir}")
    out_dir = args.out_dir or args.run_dir
    write_table(pd.concat(curves, ignore_index=True), out_dir / "runs_curves.csv", "curves")
    write_table(pd.DataFrame(rows), out_dir / "runs_summary.csv", "summary")


COMMANDS = {
    "train": cmd_train,
    "eval": cmd_eval,
    "compare": cmd_compare,
    "sweep-kb": cmd_sweep_kb,
    "adapt": cmd_adapt,
    "online": cmd_online,
    "plotdata": cmd_plotdata,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    set_log_level(args.log_level)
    logger.info("=" * 60)
    logger.info(f"inlab {args.command}")
    logger.info("=" * 60)
    try:
        COMMANDS[args.command](args)
    except ConfigurationError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    except SimulationBlowupError as e:
        logger.error(f"Simulation blowup: {e}")
        return EXIT_BLOWUP
    except InlabError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_ERROR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
