"""Feedforward generation: joint reference trajectories and the gait library."""
from .trajectories import (
    CompositeTerm,
    JointRange,
    TrajectorySpec,
    action_to_angle,
    eval_ramp,
    eval_ramp_flagged,
    eval_sinusoid,
    eval_trajectory,
    normalize_to_action,
)
from .gaits import (
    BIPED_GAITS,
    BIPED_JOINTS,
    QUADRUPED_GAITS,
    QUADRUPED_JOINTS,
    GaitDefinition,
    GaitParams,
    JointTrajectory,
    build_gait,
    constant_gait,
    feedforward_vector,
    gait_phase,
    load_gait,
    reference_angles,
    save_gait,
    scale_gait,
    support_flags,
    validate_against,
)

__all__ = [
    "CompositeTerm",
    "JointRange",
    "TrajectorySpec",
    "action_to_angle",
    "eval_ramp",
    "eval_ramp_flagged",
    "eval_sinusoid",
    "eval_trajectory",
    "normalize_to_action",
    "BIPED_GAITS",
    "BIPED_JOINTS",
    "QUADRUPED_GAITS",
    "QUADRUPED_JOINTS",
    "GaitDefinition",
    "GaitParams",
    "JointTrajectory",
    "build_gait",
    "constant_gait",
    "feedforward_vector",
    "gait_phase",
    "load_gait",
    "reference_angles",
    "save_gait",
    "scale_gait",
    "support_flags",
    "validate_against",
]
