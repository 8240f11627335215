"""Locomotion environment: feedforward, action pipeline, simulator, observation
and reward wired into one control step, plus a pool of environment copies."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..actionpipe.pipeline import ActionPipeline
from ..gaitgen.gaits import (
    GaitDefinition,
    build_gait,
    feedforward_vector,
    reference_angles,
    support_flags,
    validate_against,
)
from ..obsrew.observations import ObservationLayout, observe
from ..obsrew.rewards import RewardInputs, leg_angles, reward_components, support_partition_ok
from ..planarsim.model import build_robot
from ..planarsim.simulator import PlanarSimulator, SimState, Termination
from ..shared.errors import SimulationBlowupError
from .config import TrainConfig

logger = logging.getLogger(__name__)


@dataclass
class StepResult:
    obs: np.ndarray
    reward: float
    components: Dict[str, float]
    done: bool
    fell: bool
    truncated: bool
    a_t: np.ndarray
    a_ff: np.ndarray
    a_fb: np.ndarray
    forward_velocity: float
    support_split: bool = True
    final_obs: Optional[np.ndarray] = None
    episode_return: Optional[float] = None
    episode_length: Optional[int] = None


@dataclass
class EpisodeTally:
    reward: float = 0.0
    length: int = 0
    # steps scored by leg_angular without a 2/2 stance/swing split
    unsplit_steps: int = 0
    components: Dict[str, float] = field(default_factory=dict)


class LocomotionEnv:
    """One robot copy driven at the control rate.

    Episode time restarts at zero on every reset, so the feedforward always starts
    from the gait's t = 0 posture.
    """

    def __init__(
        self,
        config: TrainConfig,
        rng: Optional[np.random.Generator] = None,
        gait: Optional[GaitDefinition] = None,
        auto_reset: bool = True,
        respect_timeout: bool = True,
    ):
        self.config = config
        self.rng = rng or np.random.default_rng(config.seed)
        self.model = build_robot(config.robot, config.model)
        self.simulator = PlanarSimulator(self.model, config.sim, config.contact, config.disturbance)
        self.gait = gait or build_gait(config.robot, config.gait, config.gait_params)
        validate_against(self.gait, self.model.joint_names)
        self.ranges = self.model.joint_ranges
        self.pipeline = ActionPipeline(self.ranges, config.feedback)
        self.layout = ObservationLayout(variant=config.observation_variant, joint_count=self.model.joint_count)
        self.reward_config = config.reward
        self.reward_config.check_robot(config.robot)
        self.joints_per_leg = self.model.joint_count // self.model.leg_count
        self.auto_reset = auto_reset
        self.respect_timeout = respect_timeout
        self.state: SimState = self.simulator.reset_robot(self.gait)
        self.tally = EpisodeTally()
        self.last_command: Optional[np.ndarray] = None

    @property
    def obs_dim(self) -> int:
        return self.layout.size

    @property
    def act_dim(self) -> int:
        return self.model.joint_count

    @property
    def time(self) -> float:
        return self.state.time

    @property
    def k_b(self) -> np.ndarray:
        return self.pipeline.k_b

    def feedforward(self, t: Optional[float] = None) -> np.ndarray:
        return feedforward_vector(self.gait, self.ranges, self.time if t is None else t)

    def observation(self) -> np.ndarray:
        ref = reference_angles(self.gait, self.time) if self.layout.uses_reference else None
        return observe(self.simulator, self.state, self.layout, ref)

    def reset(self, state: Optional[SimState] = None) -> np.ndarray:
        """Start an episode from the gait's initial posture, or continue from a given state."""
        if state is None:
            self.state = self.simulator.reset_robot(self.gait)
        else:
            self.state = state.copy()
            self.state.time = 0.0
            self.state.step = 0
            self.state.push_force = 0.0
            self.state.next_push_at = None
        self.pipeline.reset()
        self.tally = EpisodeTally()
        return self.observation()

    def _reward(self, prev_theta_deg: np.ndarray, support: np.ndarray) -> Dict[str, float]:
        state = self.state
        theta = np.degrees(state.joint_angles)
        forward, vertical = self.simulator.body_velocity(state)
        inputs = RewardInputs(
            theta_deg=theta,
            theta_ref_deg=reference_angles(self.gait, state.time),
            pitch_deg=math.degrees(state.pitch),
            velocity=np.array([forward, 0.0, vertical]),
            leg_prev_deg=leg_angles(prev_theta_deg, self.joints_per_leg),
            leg_next_deg=leg_angles(theta, self.joints_per_leg),
            support=support,
        )
        return reward_components(self.reward_config, inputs)

    def step(self, a_nn: np.ndarray) -> StepResult:
        a_ff = self.feedforward()
        support = support_flags(self.gait, self.time)
        split = "leg_angular" not in self.reward_config.components or support_partition_ok(support)
        if not split:
            self.tally.unsplit_steps += 1
            if self.tally.unsplit_steps == 1:
                logger.warning(
                    f"Support flags {support.astype(int).tolist()} at t={self.time:.2f}s are not a 2/2 "
                    f"stance/swing split; leg_angular uses them as is"
                )
        prev_theta = np.degrees(self.state.joint_angles)
        theta_cmd, a_t, a_fb = self.pipeline(a_nn, a_ff)
        self.last_command = theta_cmd

        fell = False
        state = self.simulator.apply_push(self.state, self.rng)
        try:
            self.state = self.simulator.step(state, theta_cmd)
        except SimulationBlowupError:
            logger.warning(f"Simulation blowup counted as a fall at t={state.time:.2f}s")
            self.state = state
            fell = True

        termination = Termination.FELL if fell else self.simulator.check_termination(self.state)
        if termination == Termination.TIMEOUT and not self.respect_timeout:
            termination = Termination.CONTINUE
        fell = termination == Termination.FELL
        truncated = termination == Termination.TIMEOUT

        if fell:
            components: Dict[str, float] = {}
            forward = 0.0
        else:
            components = self._reward(prev_theta, support)
            forward = float(self.simulator.body_velocity(self.state)[0])
        reward = float(sum(components.values()))
        self.tally.reward += reward
        self.tally.length += 1
        for key, value in components.items():
            self.tally.components[key] = self.tally.components.get(key, 0.0) + value

        done = fell or truncated
        result = StepResult(
            obs=self.observation(),
            reward=reward,
            components=components,
            done=done,
            fell=fell,
            truncated=truncated,
            a_t=a_t,
            a_ff=a_ff,
            a_fb=a_fb,
            forward_velocity=forward,
            support_split=split,
        )
        if done:
            result.final_obs = result.obs
            result.episode_return = self.tally.reward
            result.episode_length = self.tally.length
            if self.auto_reset:
                result.obs = self.reset()
        return result


def make_envs(config: TrainConfig, seed_sequence: np.random.SeedSequence) -> List[LocomotionEnv]:
    """config.num_envs copies, each with its own random stream."""
    return [
        LocomotionEnv(config, rng=np.random.default_rng(child))
        for child in seed_sequence.spawn(config.num_envs)
    ]


class EnvPool:
    """Steps environment copies, optionally on a thread pool.

    Copies never share mutable state, so results are identical for any worker
    count; they are always returned in the order of the requested indices.
    """

    def __init__(self, envs: Sequence[LocomotionEnv], workers: int = 1):
        self.envs = list(envs)
        self.workers = max(1, min(workers, len(self.envs)))
        self._executor = ThreadPoolExecutor(max_workers=self.workers) if self.workers > 1 else None

    def __len__(self) -> int:
        return len(self.envs)

    def __enter__(self) -> "EnvPool":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def close(self) -> None:
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None

    def reset(self) -> np.ndarray:
        return np.stack([env.reset() for env in self.envs])

    def step(self, indices: Sequence[int], actions: np.ndarray) -> List[StepResult]:
        jobs = list(zip(indices, actions))
        if self._executor is None:
            return [self.envs[i].step(a) for i, a in jobs]
        return list(self._executor.map(lambda job: self.envs[job[0]].step(job[1]), jobs))
