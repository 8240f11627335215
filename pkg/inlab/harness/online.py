"""Learn-while-walking protocol.

Each episode the quadruped walks with the trot feedforward for walk_duration
seconds while the policy explores, then holds its last command while PPO
updates on that episode alone, then ramps back to the gait's initial posture.
The robot is never teleported unless the posture recovery fails.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Tuple

import numpy as np
from tqdm import tqdm

from ..gaitgen.gaits import reference_angles
from ..ppo.buffer import RolloutBuffer
from ..ppo.checkpoint import save_checkpoint
from ..ppo.networks import Adam
from ..ppo.policy import PolicyParams, init_policy, sample_action, value
from ..ppo.trainer import ppo_update
from ..planarsim.simulator import SimState
from ..shared.config import progress_enabled
from ..shared.errors import SimulationBlowupError
from .config import TrainConfig
from .env import LocomotionEnv
from .plotdata import emit_plotdata
from .train import TrainingLog

logger = logging.getLogger(__name__)

ONLINE_COLUMNS = [
    "episode",
    "env_steps",
    "sim_time",
    "episode_reward",
    "mean_step_reward",
    "episode_length",
    "fell",
    "repositioned",
    "flagged_steps",
    "policy_loss",
    "value_loss",
    "entropy",
    "clip_fraction",
    "approx_kl",
    "update_aborted",
]


@dataclass
class OnlineResult:
    log: TrainingLog
    params: PolicyParams


def _steps(duration: float, dt: float) -> int:
    return int(round(duration / dt))


def hold_and_recover(env: LocomotionEnv, hold_steps: int, recovery_steps: int) -> Tuple[SimState, bool]:
    """Hold the last command, then ramp linearly to the gait's t = 0 posture.

    Returns:
        (final state, whether the robot ended upright at a plausible height)
    """
    sim = env.simulator
    state = env.state
    start = env.last_command if env.last_command is not None else reference_angles(env.gait, env.time)
    target = reference_angles(env.gait, 0.0)
    nominal_height = sim.base_pose(sim.reset_robot(env.gait))[1]
    try:
        for _ in range(hold_steps):
            state = sim.step(state, start)
        for k in range(recovery_steps):
            alpha = (k + 1) / recovery_steps
            state = sim.step(state, (1.0 - alpha) * start + alpha * target)
    except SimulationBlowupError:
        return env.state, False
    upright = abs(math.degrees(state.pitch)) <= sim.config.fall_pitch_deg
    standing = sim.base_pose(state)[1] >= 0.5 * nominal_height
    return state, upright and standing


def reposition(env: LocomotionEnv, state: SimState) -> SimState:
    """Initial posture placed at the robot's current horizontal position."""
    fresh = env.simulator.reset_robot(env.gait)
    fresh.q[0] = state.q[0]
    return fresh


def online_protocol(config: TrainConfig, out_dir: Path | str | None = None) -> OnlineResult:
    """Run config.online.total_minutes of simulated episodic online learning."""
    online = config.online
    run = config.online_run_config()
    env_seed, policy_seed = np.random.SeedSequence(config.seed).spawn(2)
    env = LocomotionEnv(run, rng=np.random.default_rng(env_seed), auto_reset=False, respect_timeout=False)
    rng = np.random.default_rng(policy_seed)
    params = init_policy(env.obs_dim, env.act_dim, rng)
    optimizer = Adam(online.ppo.learning_rate)

    dt = run.sim.control_dt
    walk_steps = _steps(online.walk_duration, dt)
    hold_steps = _steps(online.update_duration, dt)
    recovery_steps = max(1, _steps(online.recovery_duration, dt))
    buffer = RolloutBuffer(walk_steps, 1, env.obs_dim, env.act_dim)
    log = TrainingLog(base_columns=ONLINE_COLUMNS)
    episodes = online.episode_count
    logger.info(
        f"Online protocol: {episodes} episodes of {online.episode_duration:.1f}s "
        f"({walk_steps} walking steps), k_b={online.k_b}"
    )

    obs = env.reset()
    env_steps = 0
    falls = 0
    for episode in tqdm(range(episodes), desc="online", disable=not (config.progress and progress_enabled())):
        buffer.clear()
        episode_reward = 0.0
        flagged = 0
        fell = False
        for _ in range(walk_steps):
            action, log_prob = sample_action(params, obs, rng)
            v = value(params, obs)
            result = env.step(action)
            flagged += int(not result.support_split)
            buffer.add(obs[None], action[None], [log_prob], [result.reward], [v], [result.fell], envs=[0])
            obs = result.obs
            episode_reward += result.reward
            if result.fell:
                fell = True
                break
        length = buffer.size
        env_steps += length
        if fell:
            falls += 1
            logger.warning(f"Episode {episode}: fell after {length} steps")
        if flagged:
            logger.info(f"Episode {episode}: {flagged} steps without a 2/2 support split")
        buffer.finish([0.0 if fell else value(params, obs)])
        params, stats = ppo_update(params, buffer, online.ppo, optimizer, rng, allow_partial=True)

        state, recovered = hold_and_recover(env, hold_steps, recovery_steps)
        if not recovered:
            logger.warning(f"Episode {episode}: posture recovery failed, repositioning")
            state = reposition(env, state)
        obs = env.reset(state)

        log.append(
            {
                "episode": episode,
                "env_steps": env_steps,
                "sim_time": (episode + 1) * online.episode_duration,
                "episode_reward": episode_reward,
                "mean_step_reward": episode_reward / length,
                "episode_length": length,
                "fell": int(fell),
                "repositioned": int(not recovered),
                "flagged_steps": flagged,
                "policy_loss": stats.policy_loss,
                "value_loss": stats.value_loss,
                "entropy": stats.entropy,
                "clip_fraction": stats.clip_fraction,
                "approx_kl": stats.approx_kl,
                "update_aborted": int(stats.aborted),
            }
        )

    logger.info(f"Online protocol finished: {episodes} episodes, {falls} falls")
    if out_dir is not None:
        out_path = Path(out_dir)
        save_checkpoint(params, out_path / "policy.ckpt", env.layout.variant)
        emit_plotdata(log, out_path / "online_log.csv", "online_log")
    return OnlineResult(log=log, params=params)
