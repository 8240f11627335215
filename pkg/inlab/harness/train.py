"""Training loop and deterministic policy evaluation."""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
import pandas as pd
from tqdm import tqdm

from ..actionpipe.pipeline import bounding_violation
from ..gaitgen.gaits import GaitDefinition
from ..planarsim.simulator import StateRecorder
from ..ppo.buffer import RolloutBuffer
from ..ppo.checkpoint import check_compatible, load_checkpoint, save_checkpoint
from ..ppo.networks import Adam
from ..ppo.policy import PolicyParams, init_policy, policy_forward, sample_action, value
from ..ppo.trainer import PpoStats, ppo_update
from ..shared.config import progress_enabled
from ..shared.errors import ConfigurationError
from .config import TrainConfig
from .env import EnvPool, LocomotionEnv, make_envs
from .plotdata import emit_plotdata

logger = logging.getLogger(__name__)

LOG_COLUMNS = [
    "iteration",
    "env_steps",
    "mean_episode_reward",
    "mean_episode_length",
    "mean_step_reward",
    "episodes",
    "falls",
    "max_bound_excess",
    "policy_loss",
    "value_loss",
    "entropy",
    "clip_fraction",
    "approx_kl",
    "update_aborted",
]


class TrainingLog:
    """Per-iteration rows; component means appear as reward_<component> columns."""

    def __init__(self, components: Optional[List[str]] = None, base_columns: Optional[List[str]] = None):
        self.components = list(components or [])
        self.base_columns = list(base_columns or LOG_COLUMNS)
        self.rows: List[Dict[str, float]] = []

    @property
    def columns(self) -> List[str]:
        return self.base_columns + [f"reward_{c}" for c in self.components]

    def append(self, row: Dict[str, float]) -> None:
        if self.rows and row["env_steps"] <= self.rows[-1]["env_steps"]:
            raise ValueError("env_steps must increase from one log row to the next")
        self.rows.append(row)

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=self.columns)

    def __len__(self) -> int:
        return len(self.rows)


@dataclass
class TrainResult:
    log: TrainingLog
    params: PolicyParams
    checkpoint: Optional[Path] = None


@dataclass
class EvalMetrics:
    mean_reward: float = 0.0
    falls: int = 0
    mean_forward_velocity: float = 0.0
    episode_lengths: List[int] = field(default_factory=list)
    steps: int = 0


def _show_progress(config: TrainConfig) -> bool:
    return config.progress and progress_enabled()


def iteration_count(config: TrainConfig) -> int:
    return max(1, math.ceil(config.total_steps / config.ppo.buffer_size))


def collect_rollout(
    pool: EnvPool,
    obs: np.ndarray,
    params: PolicyParams,
    buffer: RolloutBuffer,
    rng: np.random.Generator,
    mode_iml: bool,
) -> Dict[str, object]:
    """Fill the buffer from the pool; obs is updated in place to the next observations."""
    buffer.clear()
    episode_returns: List[float] = []
    episode_lengths: List[int] = []
    component_sums: Dict[str, float] = {}
    falls = 0
    reward_sum = 0.0
    bound_excess = -math.inf

    while buffer.active.any():
        envs = np.flatnonzero(buffer.active)
        batch_obs = obs[envs]
        actions, log_probs = sample_action(params, batch_obs, rng)
        values = value(params, batch_obs)
        results = pool.step(envs, actions)

        rewards = np.array([r.reward for r in results])
        dones = np.array([r.done for r in results])
        bootstrap = np.zeros(len(results))
        truncated = [k for k, r in enumerate(results) if r.truncated]
        if truncated:
            bootstrap[truncated] = value(params, np.stack([results[k].final_obs for k in truncated]))
        buffer.add(batch_obs, actions, log_probs, rewards, values, dones, bootstrap=bootstrap, envs=envs)

        for env_index, result in zip(envs, results):
            obs[env_index] = result.obs
            reward_sum += result.reward
            for key, comp in result.components.items():
                component_sums[key] = component_sums.get(key, 0.0) + comp
            if mode_iml:
                excess = float(np.max(np.abs(result.a_t - result.a_fb)))
            else:
                excess = bounding_violation(result.a_t, result.a_ff, pool.envs[env_index].k_b)
            bound_excess = max(bound_excess, excess)
            if result.done:
                episode_returns.append(result.episode_return)
                episode_lengths.append(result.episode_length)
                falls += int(result.fell)

    buffer.finish(value(params, obs))
    steps = buffer.size
    return {
        "episode_returns": episode_returns,
        "episode_lengths": episode_lengths,
        "falls": falls,
        "mean_step_reward": reward_sum / steps,
        "component_means": {k: v / steps for k, v in component_sums.items()},
        "max_bound_excess": bound_excess,
    }


def _log_row(iteration: int, env_steps: int, rollout: Dict[str, object], stats: PpoStats, components: List[str]) -> Dict[str, float]:
    returns = rollout["episode_returns"]
    lengths = rollout["episode_lengths"]
    row = {
        "iteration": iteration,
        "env_steps": env_steps,
        "mean_episode_reward": float(np.mean(returns)) if returns else float("nan"),
        "mean_episode_length": float(np.mean(lengths)) if lengths else float("nan"),
        "mean_step_reward": rollout["mean_step_reward"],
        "episodes": len(returns),
        "falls": rollout["falls"],
        "max_bound_excess": rollout["max_bound_excess"],
        "policy_loss": stats.policy_loss,
        "value_loss": stats.value_loss,
        "entropy": stats.entropy,
        "clip_fraction": stats.clip_fraction,
        "approx_kl": stats.approx_kl,
        "update_aborted": int(stats.aborted),
    }
    for component in components:
        row[f"reward_{component}"] = rollout["component_means"].get(component, 0.0)
    return row


def train(config: TrainConfig, out_dir: Path | str | None = None) -> TrainResult:
    """Train a policy with PPO on config.num_envs environment copies.

    Writes training_log.csv and policy.ckpt under out_dir when given; the
    checkpoint is also refreshed every checkpoint_interval iterations.
    """
    seeds = np.random.SeedSequence(config.seed)
    env_seeds, policy_seed = seeds.spawn(2)
    envs = make_envs(config, env_seeds)
    rng = np.random.default_rng(policy_seed)
    first = envs[0]
    params = init_policy(first.obs_dim, first.act_dim, rng)
    optimizer = Adam(config.ppo.learning_rate)
    buffer = RolloutBuffer(config.ppo.buffer_size, config.num_envs, first.obs_dim, first.act_dim)
    components = list(first.reward_config.components)
    log = TrainingLog(components)
    out_path = Path(out_dir) if out_dir is not None else None
    checkpoint = out_path / "policy.ckpt" if out_path is not None else None
    iterations = iteration_count(config)

    logger.info(
        f"Training {config.robot}/{config.gait} mode={config.mode} k_b={config.k_b} "
        f"reward={first.reward_config.name} for {iterations} iterations of {config.ppo.buffer_size} steps"
    )
    started = time.perf_counter()
    env_steps = 0
    with EnvPool(envs, config.workers) as pool:
        obs = pool.reset()
        for iteration in tqdm(range(iterations), desc="train", disable=not _show_progress(config)):
            rollout = collect_rollout(pool, obs, params, buffer, rng, config.feedback.mode == "IML")
            env_steps += buffer.size
            params, stats = ppo_update(params, buffer, config.ppo, optimizer, rng)
            row = _log_row(iteration, env_steps, rollout, stats, components)
            log.append(row)
            logger.info(
                f"iter {iteration} steps {env_steps} episode reward {row['mean_episode_reward']:.3f} "
                f"length {row['mean_episode_length']:.1f} falls {row['falls']} "
                f"({time.perf_counter() - started:.0f}s)"
            )
            if checkpoint is not None and config.checkpoint_interval and (iteration + 1) % config.checkpoint_interval == 0:
                save_checkpoint(params, checkpoint, first.layout.variant)

    if out_path is not None:
        save_checkpoint(params, checkpoint, first.layout.variant)
        emit_plotdata(log, out_path / "training_log.csv")
    return TrainResult(log=log, params=params, checkpoint=checkpoint)


def evaluate(
    params: PolicyParams,
    config: TrainConfig,
    duration: float,
    gait: Optional[GaitDefinition] = None,
    state_dump: Optional[Path | str] = None,
) -> EvalMetrics:
    """Deterministic (mean action) rollout of `duration` seconds on one copy.

    A fall ends the episode and the robot is reset; the step limit is ignored.
    mean_forward_velocity averages only the steps that did not end in a fall.
    With state_dump set, the simulator state after every step is written there as CSV.
    """
    env = LocomotionEnv(
        config,
        rng=np.random.default_rng(config.seed),
        gait=gait,
        respect_timeout=False,
    )
    check_compatible(params, env.obs_dim, env.act_dim)
    steps = int(round(duration / config.sim.control_dt))
    metrics = EvalMetrics()
    if steps <= 0:
        return metrics

    obs = env.reset()
    recorder = StateRecorder(env.simulator) if state_dump is not None else None
    if recorder is not None:
        recorder.record(env.state)
    rewards, velocities = [], []
    for _ in range(steps):
        action, _ = policy_forward(params, obs)
        result = env.step(action)
        obs = result.obs
        rewards.append(result.reward)
        if not result.fell:
            velocities.append(result.forward_velocity)
        if recorder is not None:
            recorder.record(env.state)
        if result.done:
            metrics.falls += int(result.fell)
            metrics.episode_lengths.append(result.episode_length)
    if env.tally.length:
        metrics.episode_lengths.append(env.tally.length)
    metrics.steps = steps
    metrics.mean_reward = float(np.mean(rewards))
    metrics.mean_forward_velocity = float(np.mean(velocities)) if velocities else 0.0
    if recorder is not None:
        recorder.to_csv(state_dump)
    return metrics


def evaluate_checkpoint(
    path: Path | str,
    config: TrainConfig,
    duration: float,
    state_dump: Optional[Path | str] = None,
) -> EvalMetrics:
    params, variant = load_checkpoint(path)
    if variant != config.observation_variant:
        raise ConfigurationError(
            f"checkpoint {path} uses observation '{variant}', config uses '{config.observation_variant}'"
        )
    return evaluate(params, config, duration, state_dump=state_dump)
