"""Multi-run experiments: learning-mode comparison, k_b sweep, gait library
batches and feedforward adaptation sweeps.

Independent (variant, seed) runs may execute in a process pool; results are
always collected in submission order.
"""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from ..gaitgen.gaits import build_gait, scale_gait
from ..ppo.policy import PolicyParams
from ..shared.config import progress_enabled
from ..shared.errors import ConfigurationError, RangeError
from .config import TrainConfig, parse_config
from .plotdata import write_groups
from .train import evaluate, train

logger = logging.getLogger(__name__)

SMOOTHING_WINDOW = 10
THRESHOLD_FRACTION = 0.8
PLATEAU_FRACTION = 0.1


def smoothed_reward(frame: pd.DataFrame, column: str = "mean_episode_reward", window: int = SMOOTHING_WINDOW) -> pd.Series:
    return frame[column].rolling(window, min_periods=1).mean()


def final_plateau(frame: pd.DataFrame, column: str = "mean_episode_reward", fraction: float = PLATEAU_FRACTION) -> float:
    """Mean of `column` over the final fraction of iterations (at least one)."""
    tail = max(1, int(round(len(frame) * fraction)))
    return float(frame[column].tail(tail).mean())


def initial_level(frame: pd.DataFrame, column: str = "mean_episode_reward", fraction: float = PLATEAU_FRACTION) -> float:
    head = max(1, int(round(len(frame) * fraction)))
    return float(frame[column].head(head).mean())


def steps_to_threshold(
    frame: pd.DataFrame,
    column: str = "mean_episode_reward",
    window: int = SMOOTHING_WINDOW,
    fraction: float = THRESHOLD_FRACTION,
) -> Optional[int]:
    """First env step at which the smoothed reward reaches `fraction` of the run's
    own final plateau; None for an empty log or a non-positive plateau."""
    if frame.empty:
        return None
    smooth = smoothed_reward(frame, column, window)
    plateau = final_plateau(frame.assign(**{column: smooth}), column)
    if not np.isfinite(plateau) or plateau <= 0.0:
        return None
    hits = np.flatnonzero(smooth.to_numpy() >= fraction * plateau)
    return int(frame["env_steps"].iloc[hits[0]]) if hits.size else None


def _run_job(config_data: dict) -> pd.DataFrame:
    """Process-pool entry point: train from a plain config dict, return the log frame."""
    config = parse_config(config_data)
    return train(config).log.frame()


def run_jobs(configs: Sequence[TrainConfig], jobs: int = 1, desc: str = "runs") -> List[pd.DataFrame]:
    payloads = [c.model_dump() for c in configs]
    disable = not progress_enabled()
    if jobs <= 1:
        return [_run_job(p) for p in tqdm(payloads, desc=desc, disable=disable)]
    with ProcessPoolExecutor(max_workers=jobs) as executor:
        return list(tqdm(executor.map(_run_job, payloads), total=len(payloads), desc=desc, disable=disable))


@dataclass
class ExperimentResult:
    """Per-group learning curves and one summary row per (group, seed)."""

    curves: Dict[str, List[pd.DataFrame]] = field(default_factory=dict)
    summary: pd.DataFrame = field(default_factory=pd.DataFrame)

    def medians(self, by: str) -> pd.DataFrame:
        return self.summary.groupby(by, sort=False).median(numeric_only=True)

    def write(self, out_dir: Path | str) -> List[Path]:
        return write_groups(self.curves, self.summary, out_dir)


def _summary_row(frame: pd.DataFrame) -> Dict[str, float]:
    steps = steps_to_threshold(frame)
    row = {
        "steps_to_threshold": np.nan if steps is None else float(steps),
        "initial_reward": initial_level(frame),
        "final_reward": final_plateau(frame),
        "final_episode_length": final_plateau(frame, "mean_episode_length"),
    }
    if "reward_mimic" in frame.columns:
        row["final_mimic"] = final_plateau(frame, "reward_mimic")
    return row


def _batch(
    base: TrainConfig,
    variants: Sequence[Tuple[str, str, dict]],
    seeds: Sequence[int],
    jobs: int,
    desc: str,
) -> ExperimentResult:
    """Train every (variant, seed); variants are (column, label, config update)."""
    configs, keys = [], []
    for column, label, update in variants:
        for seed in seeds:
            data = base.model_dump()
            data.update(update)
            data.update(seed=seed, progress=False)
            configs.append(parse_config(data))
            keys.append((column, label, seed))

    frames = run_jobs(configs, jobs, desc)
    result = ExperimentResult()
    rows = []
    for (column, label, seed), frame in zip(keys, frames):
        result.curves.setdefault(label, []).append(frame.assign(seed=seed))
        rows.append({column: label, "seed": seed, **_summary_row(frame)})
    result.summary = pd.DataFrame(rows)
    return result


def compare_modes(base: TrainConfig, modes: Sequence[str], seeds: Sequence[int], jobs: int = 1) -> ExperimentResult:
    """Train each learning mode with the same reward; summary keyed by mode."""
    reward_preset = base.reward_preset or base.reward.name
    variants = [("mode", mode, {"mode": mode, "reward_preset": reward_preset, "observation": None}) for mode in modes]
    result = _batch(base, variants, seeds, jobs, "compare")
    for mode, row in result.medians("mode").iterrows():
        logger.info(f"{mode}: median steps-to-threshold {row['steps_to_threshold']}, final reward {row['final_reward']:.3f}")
    return result


def sweep_kb(base: TrainConfig, values: Sequence[float], seeds: Sequence[int], jobs: int = 1) -> ExperimentResult:
    """INL runs over a grid of scalar feedback ratios; summary keyed by k_b."""
    if base.mode not in ("INL", "INL_RO"):
        raise ConfigurationError(f"k_b sweeps need an INL mode, config has {base.mode}")
    variants = [("k_b", f"{kb:g}", {"k_b": float(kb)}) for kb in values]
    result = _batch(base, variants, seeds, jobs, "sweep-kb")
    for kb, row in result.medians("k_b").iterrows():
        logger.info(f"k_b={kb}: median steps-to-threshold {row['steps_to_threshold']}, final reward {row['final_reward']:.3f}")
    return result


def gait_library(base: TrainConfig, gaits: Sequence[str], seeds: Sequence[int], jobs: int = 1) -> ExperimentResult:
    """Train each library gait with its own reward preset; summary keyed by gait."""
    variants = [("gait", gait, {"gait": gait, "reward_preset": None}) for gait in gaits]
    return _batch(base, variants, seeds, jobs, "gaits")


@dataclass
class AdaptResult:
    parameter: str
    low: Optional[float]
    high: Optional[float]
    table: pd.DataFrame


def is_locomotion(config: TrainConfig) -> bool:
    return "velocity_walk" in config.reward.components or "velocity_jump" in config.reward.components


def adapt_sweep(
    params: PolicyParams,
    config: TrainConfig,
    parameter: str,
    factors: Sequence[float],
    duration: float = 30.0,
    min_velocity: float = 0.05,
) -> AdaptResult:
    """Scale the feedforward period or amplitude without retraining.

    A factor is feasible when the robot does not fall during `duration` seconds and,
    for locomotion gaits, moves forward faster than min_velocity. A factor whose
    references leave the joint ranges is infeasible. The result is the widest
    contiguous run of feasible factors containing 1.0.
    """
    if parameter not in ("period", "amplitude"):
        raise ConfigurationError(f"adaptation parameter must be 'period' or 'amplitude', got '{parameter}'")
    grid = sorted(set(float(f) for f in factors))
    if 1.0 not in grid:
        raise ConfigurationError("adaptation factor grid must contain 1.0")

    base_gait = build_gait(config.robot, config.gait, config.gait_params)
    needs_progress = is_locomotion(config)
    rows = []
    for factor in tqdm(grid, desc=f"adapt {parameter}", disable=not progress_enabled()):
        scales = {"period_scale": factor} if parameter == "period" else {"amplitude_scale": factor}
        try:
            metrics = evaluate(params, config, duration, gait=scale_gait(base_gait, **scales))
        except RangeError as e:
            logger.warning(f"{parameter} factor {factor}: feedforward leaves the joint ranges ({e})")
            rows.append(
                {
                    "factor": factor,
                    "feasible": False,
                    "in_range": False,
                    "falls": np.nan,
                    "mean_forward_velocity": np.nan,
                    "mean_reward": np.nan,
                }
            )
            continue
        feasible = metrics.falls == 0 and (not needs_progress or metrics.mean_forward_velocity > min_velocity)
        rows.append(
            {
                "factor": factor,
                "feasible": feasible,
                "in_range": True,
                "falls": metrics.falls,
                "mean_forward_velocity": metrics.mean_forward_velocity,
                "mean_reward": metrics.mean_reward,
            }
        )
    table = pd.DataFrame(rows)

    centre = grid.index(1.0)
    feasible = table["feasible"].to_numpy()
    if not feasible[centre]:
        logger.warning(f"Trained condition is infeasible in the {parameter} sweep")
        return AdaptResult(parameter, None, None, table)
    lo = centre
    while lo > 0 and feasible[lo - 1]:
        lo -= 1
    hi = centre
    while hi < len(grid) - 1 and feasible[hi + 1]:
        hi += 1
    logger.info(f"Feasible {parameter} scale range [{grid[lo]}, {grid[hi]}]")
    return AdaptResult(parameter, grid[lo], grid[hi], table)
