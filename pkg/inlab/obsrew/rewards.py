"""Reward components and the per-gait reward presets.

All angles are in degrees and velocities in m/s (body frame). The planar robot
has no yaw, roll or lateral velocity; callers pass zeros and the corresponding
terms vanish.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Literal, Optional, Sequence

import numpy as np
from pydantic import BaseModel, field_validator

from ..shared.errors import ConfigurationError

logger = logging.getLogger(__name__)

RewardComponent = Literal[
    "mimic", "alive", "balance", "velocity_step", "velocity_walk", "velocity_jump", "sync", "leg_angular"
]
VelocityVariant = Literal["step", "walk", "jump"]

_DRIVE_COMPONENTS = ("velocity_step", "velocity_walk", "velocity_jump", "leg_angular")

MIMIC_BASE = 1.2
MIMIC_SLOPE = 0.02
BALANCE_SLOPE = 0.1
SYNC_SLOPE = 0.05


def reward_mimic(theta_deg: Sequence[float], theta_ref_deg: Sequence[float]) -> float:
    """1.2 - 0.02 * sum |theta - theta_ref|, summed over every actuated joint."""
    theta, ref = np.asarray(theta_deg, dtype=float), np.asarray(theta_ref_deg, dtype=float)
    if theta.shape != ref.shape:
        raise ConfigurationError(f"mimic reward got {theta.shape} angles against {ref.shape} references")
    return MIMIC_BASE - MIMIC_SLOPE * float(np.sum(np.abs(theta - ref)))


def reward_alive() -> float:
    return 1.0


def reward_balance(pitch_deg: float, yaw_deg: float = 0.0, roll_deg: float = 0.0) -> float:
    return -BALANCE_SLOPE * (abs(pitch_deg) + abs(yaw_deg) + abs(roll_deg))


def reward_velocity(v_forward: float, v_lateral: float, v_vertical: float, variant: str) -> float:
    """Velocity term: "step" keeps the body still, "walk" pays forward speed,
    "jump" pays forward and vertical speed."""
    if variant == "step":
        return -abs(v_forward) - abs(v_lateral) - abs(v_vertical)
    if variant == "walk":
        return v_forward - abs(v_lateral) - abs(v_vertical)
    if variant == "jump":
        return v_forward - abs(v_lateral) + abs(v_vertical)
    raise ConfigurationError(f"unknown velocity reward variant '{variant}'")


def reward_sync(left_deg: Sequence[float], right_deg: Sequence[float]) -> float:
    """-0.05 * sum |left - right| over hip, knee and ankle pitch of a biped."""
    left, right = np.asarray(left_deg, dtype=float), np.asarray(right_deg, dtype=float)
    if left.shape != (3,) or right.shape != (3,):
        raise ConfigurationError("sync reward needs hip/knee/ankle pitch of two biped legs")
    return -SYNC_SLOPE * float(np.sum(np.abs(left - right)))


def leg_angle(theta_hfe: float, theta_kfe: float) -> float:
    """Virtual leg pitch: hip angle plus half the knee angle."""
    return theta_hfe + 0.5 * theta_kfe


def leg_angles(theta_deg: Sequence[float], joints_per_leg: int = 2) -> np.ndarray:
    """Virtual leg pitch of every leg; hip and knee are the first two joints of each leg."""
    theta = np.asarray(theta_deg, dtype=float).reshape(-1, joints_per_leg)
    return leg_angle(theta[:, 0], theta[:, 1])


def support_partition_ok(support: Sequence[bool], stance: int = 2) -> bool:
    flags = np.asarray(support, dtype=bool)
    return int(flags.sum()) == stance and flags.size - int(flags.sum()) == stance


def reward_leg_angular(
    leg_prev_deg: Sequence[float], leg_next_deg: Sequence[float], support: Sequence[bool]
) -> float:
    """Stance legs' leg-angle increments minus swing legs' increments over one step.

    A positive leg-angle increment is a backward sweep of the foot. The partition
    is expected to be two stance and two swing legs; any other split is used as is
    (see support_partition_ok).
    """
    omega = np.asarray(leg_next_deg, dtype=float) - np.asarray(leg_prev_deg, dtype=float)
    flags = np.asarray(support, dtype=bool)
    if omega.shape != flags.shape:
        raise ConfigurationError(f"{omega.size} leg angles against {flags.size} support flags")
    return float(np.sum(omega[flags]) - np.sum(omega[~flags]))


class RewardConfig(BaseModel):
    """Enabled reward components; exactly one of them drives locomotion."""

    name: str = "custom"
    components: List[RewardComponent]

    @field_validator("components")
    @classmethod
    def _one_drive_term(cls, components: List[str]) -> List[str]:
        if len(set(components)) != len(components):
            raise ValueError(f"duplicate reward components in {components}")
        drives = [c for c in components if c in _DRIVE_COMPONENTS]
        if len(drives) != 1:
            raise ValueError(f"exactly one velocity or leg_angular term expected, got {drives}")
        return components

    def check_robot(self, robot: str) -> None:
        if robot != "biped" and "sync" in self.components:
            raise ConfigurationError(f"reward preset '{self.name}' uses sync, which needs a biped")


REWARD_PRESETS: Dict[str, RewardConfig] = {
    "stepping": RewardConfig(name="stepping", components=["mimic", "alive", "balance", "velocity_step"]),
    "walk": RewardConfig(name="walk", components=["alive", "balance", "velocity_walk"]),
    "jump": RewardConfig(name="jump", components=["alive", "balance", "velocity_jump"]),
    "biped_jump": RewardConfig(name="biped_jump", components=["alive", "balance", "velocity_jump", "sync"]),
    "online_walk": RewardConfig(name="online_walk", components=["leg_angular"]),
}

_GAIT_PRESETS = {
    ("biped", "stepping"): "stepping",
    ("biped", "walk"): "walk",
    ("biped", "level_walk"): "walk",
    ("biped", "march_walk"): "walk",
    ("biped", "hop"): "jump",
    ("biped", "jump"): "biped_jump",
    ("quadruped", "stepping"): "stepping",
    ("quadruped", "trot"): "walk",
    ("quadruped", "pace"): "walk",
    ("quadruped", "bound"): "walk",
    ("quadruped", "pronk"): "jump",
}


def get_preset(name: str) -> RewardConfig:
    try:
        return REWARD_PRESETS[name]
    except KeyError:
        raise ConfigurationError(f"unknown reward preset '{name}'") from None


def preset_for_gait(robot: str, gait: str) -> RewardConfig:
    """Reward preset used when training the given library gait."""
    try:
        return REWARD_PRESETS[_GAIT_PRESETS[(robot, gait)]]
    except KeyError:
        raise ConfigurationError(f"no reward preset for {robot} gait '{gait}'") from None


@dataclass
class RewardInputs:
    """Everything the reward components of one control step may read."""

    theta_deg: np.ndarray
    theta_ref_deg: Optional[np.ndarray] = None
    pitch_deg: float = 0.0
    yaw_deg: float = 0.0
    roll_deg: float = 0.0
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    leg_prev_deg: Optional[np.ndarray] = None
    leg_next_deg: Optional[np.ndarray] = None
    support: Optional[np.ndarray] = None


def reward_components(config: RewardConfig, inputs: RewardInputs) -> Dict[str, float]:
    """Value of every enabled component, keyed by component name."""
    out: Dict[str, float] = {}
    vf, vl, vv = (float(x) for x in inputs.velocity)
    for name in config.components:
        if name == "mimic":
            if inputs.theta_ref_deg is None:
                raise ConfigurationError("mimic reward needs reference angles")
            out[name] = reward_mimic(inputs.theta_deg, inputs.theta_ref_deg)
        elif name == "alive":
            out[name] = reward_alive()
        elif name == "balance":
            out[name] = reward_balance(inputs.pitch_deg, inputs.yaw_deg, inputs.roll_deg)
        elif name.startswith("velocity_"):
            out[name] = reward_velocity(vf, vl, vv, name.split("_", 1)[1])
        elif name == "sync":
            theta = np.asarray(inputs.theta_deg, dtype=float)
            if theta.size != 6:
                raise ConfigurationError("sync reward needs the six biped joints")
            out[name] = reward_sync(theta[:3], theta[3:])
        elif name == "leg_angular":
            if inputs.leg_prev_deg is None or inputs.leg_next_deg is None or inputs.support is None:
                raise ConfigurationError("leg_angular reward needs leg angles and support flags")
            out[name] = reward_leg_angular(inputs.leg_prev_deg, inputs.leg_next_deg, inputs.support)
    return out


def total_reward(config: RewardConfig, inputs: RewardInputs) -> float:
    return float(sum(reward_components(config, inputs).values()))
