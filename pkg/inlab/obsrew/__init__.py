"""Observation vectors and reward components."""
from .observations import (
    ObservationLayout,
    observe,
    pitch_quaternion,
    scale_joint_angles,
    scale_joint_velocities,
)
from .rewards import (
    REWARD_PRESETS,
    RewardConfig,
    RewardInputs,
    get_preset,
    leg_angle,
    leg_angles,
    preset_for_gait,
    reward_alive,
    reward_balance,
    reward_components,
    reward_leg_angular,
    reward_mimic,
    reward_sync,
    reward_velocity,
    support_partition_ok,
    total_reward,
)

__all__ = [
    "ObservationLayout",
    "observe",
    "pitch_quaternion",
    "scale_joint_angles",
    "scale_joint_velocities",
    "REWARD_PRESETS",
    "RewardConfig",
    "RewardInputs",
    "get_preset",
    "leg_angle",
    "leg_angles",
    "preset_for_gait",
    "reward_alive",
    "reward_balance",
    "reward_components",
    "reward_leg_angular",
    "reward_mimic",
    "reward_sync",
    "reward_velocity",
    "support_partition_ok",
    "total_reward",
]
