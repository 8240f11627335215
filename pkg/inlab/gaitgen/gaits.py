"""Gait definitions: per-joint reference trajectories, leg phase offsets and
the per-leg support schedule.

Every gait is built from a foot-swing motion: a knee flexion sinusoid with an
opposite-sign hip sinusoid that keeps the foot under the hip while it lifts.
Gaits differ in how the legs are phased against each other:

    trot  : diagonal pairs offset by half a cycle
    pace  : ipsilateral pairs offset by half a cycle
    bound : front and hind pairs offset by half a cycle
    pronk : all legs in phase
    walk  : biped legs offset by half a cycle
    hop / jump : biped legs in phase

Inside a leg cycle the foot is lifted during [0.5, 1) and supports during [0, 0.5).
"""
from __future__ import annotations

import json
import logging
import math
from pathlib import Path
from typing import Dict, List, Literal, Sequence

import numpy as np
from pydantic import BaseModel, Field, ValidationError, model_validator

from ..shared.errors import ConfigurationError
from .trajectories import (
    CompositeTerm,
    JointRange,
    TrajectorySpec,
    eval_trajectory,
    normalize_to_action,
    scale_spec,
)

logger = logging.getLogger(__name__)

RobotKind = Literal["biped", "quadruped"]
SupportScheduleKind = Literal["half_cycle", "always_stance"]

QUADRUPED_LEGS = ("FL", "FR", "HL", "HR")
BIPED_LEGS = ("L", "R")
QUADRUPED_JOINTS = tuple(f"{leg}_{j}" for leg in QUADRUPED_LEGS for j in ("hip", "knee"))
BIPED_JOINTS = tuple(f"{leg}_{j}" for leg in BIPED_LEGS for j in ("hip", "knee", "ankle"))

# phase inside the sinusoid that centres the lift on leg phase 0.75
_SWING_PHASE = 0.75

QUADRUPED_GAITS = ("stepping", "trot", "pace", "bound", "pronk")
BIPED_GAITS = ("stepping", "walk", "level_walk", "march_walk", "hop", "jump")

_QUADRUPED_OFFSETS: Dict[str, List[float]] = {
    #             FL   FR   HL   HR
    "stepping": [0.0, 0.5, 0.5, 0.0],
    "trot":     [0.0, 0.5, 0.5, 0.0],
    "pace":     [0.0, 0.5, 0.0, 0.5],
    "bound":    [0.0, 0.0, 0.5, 0.5],
    "pronk":    [0.0, 0.0, 0.0, 0.0],
}


class JointTrajectory(TrajectorySpec):
    """Trajectory bound to an actuated joint and the leg that carries it."""

    joint_id: str
    leg: int = Field(ge=0)


class GaitDefinition(BaseModel):
    """Named set of per-joint references with period, leg phasing and support schedule."""

    name: str
    robot: RobotKind
    gait_period: float = Field(gt=0.0)
    joints: List[JointTrajectory]
    leg_phase_offsets: List[float]
    support_schedule_kind: SupportScheduleKind = "half_cycle"

    @model_validator(mode="after")
    def _check_joints(self) -> "GaitDefinition":
        ids = [j.joint_id for j in self.joints]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate joint ids in gait {self.name}: {ids}")
        for j in self.joints:
            if j.leg >= len(self.leg_phase_offsets):
                raise ValueError(f"joint {j.joint_id} refers to leg {j.leg} without a phase offset")
        for offset in self.leg_phase_offsets:
            if not 0.0 <= offset < 1.0:
                raise ValueError(f"leg phase offsets must lie in [0, 1), got {offset}")
        return self

    @property
    def joint_count(self) -> int:
        return len(self.joints)

    @property
    def leg_count(self) -> int:
        return len(self.leg_phase_offsets)


class GaitParams(BaseModel):
    """Tunable amplitudes, period and nominal posture (degrees, seconds).

    The defaults keep every reference inside the joint ranges of both robots.
    """

    period: float = Field(default=0.5, gt=0.0)
    hip_amplitude: float = 20.0
    knee_amplitude: float = 40.0
    quadruped_hip0: float = 25.0
    quadruped_knee0: float = -50.0
    biped_hip0: float = 20.0
    biped_knee0: float = -40.0
    biped_ankle0: float = 20.0
    march_hip_amplitude: float = 35.0
    march_knee_amplitude: float = 60.0
    march_hip_sweep: float = 10.0
    jump_scale: float = 1.25


def _swing(theta0: float, delta: float, period: float) -> TrajectorySpec:
    return TrajectorySpec(kind="sinusoid", theta0=theta0, delta_theta=delta, period=period, phase=_SWING_PHASE)


def _joint(joint_id: str, leg: int, spec: TrajectorySpec) -> JointTrajectory:
    return JointTrajectory(joint_id=joint_id, leg=leg, **spec.model_dump())


def _march_hip(params: GaitParams) -> TrajectorySpec:
    """Ramp back during support, high sinusoidal lift plus ramp forward during swing."""
    half = 0.5 * params.period
    hip0, sweep = params.biped_hip0, params.march_hip_sweep
    return TrajectorySpec(
        kind="composite",
        period=params.period,
        terms=[
            CompositeTerm(
                spec=TrajectorySpec(kind="ramp", theta0=hip0, delta_theta=-sweep, period=half),
                window=(0.0, 0.5),
            ),
            CompositeTerm(
                spec=TrajectorySpec(kind="ramp", theta0=hip0 - sweep, delta_theta=sweep, period=half),
                window=(0.5, 1.0),
            ),
            CompositeTerm(
                spec=TrajectorySpec(kind="sinusoid", delta_theta=params.march_hip_amplitude, period=half),
                window=(0.5, 1.0),
            ),
        ],
    )


def _march_knee(params: GaitParams) -> TrajectorySpec:
    half = 0.5 * params.period
    knee0 = params.biped_knee0
    return TrajectorySpec(
        kind="composite",
        period=params.period,
        terms=[
            CompositeTerm(spec=TrajectorySpec(kind="constant", theta0=knee0), window=(0.0, 0.5)),
            CompositeTerm(spec=TrajectorySpec(kind="constant", theta0=knee0), window=(0.5, 1.0)),
            CompositeTerm(
                spec=TrajectorySpec(kind="sinusoid", delta_theta=-params.march_knee_amplitude, period=half),
                window=(0.5, 1.0),
            ),
        ],
    )


def _build_quadruped(name: str, params: GaitParams) -> GaitDefinition:
    joints = []
    for leg_index, leg in enumerate(QUADRUPED_LEGS):
        joints.append(_joint(f"{leg}_hip", leg_index, _swing(params.quadruped_hip0, params.hip_amplitude, params.period)))
        joints.append(_joint(f"{leg}_knee", leg_index, _swing(params.quadruped_knee0, -params.knee_amplitude, params.period)))
    return GaitDefinition(
        name=name,
        robot="quadruped",
        gait_period=params.period,
        joints=joints,
        leg_phase_offsets=list(_QUADRUPED_OFFSETS[name]),
    )


def _build_biped(name: str, params: GaitParams) -> GaitDefinition:
    in_phase = name in ("hop", "jump")
    offsets = [0.0, 0.0] if in_phase else [0.0, 0.5]
    joints = []
    for leg_index, leg in enumerate(BIPED_LEGS):
        if name in ("march_walk", "hop"):
            hip, knee = _march_hip(params), _march_knee(params)
            ankle = TrajectorySpec(kind="constant", theta0=params.biped_ankle0)
        elif name == "jump":
            scale = params.jump_scale
            hip = _swing(params.biped_hip0, scale * params.hip_amplitude, params.period)
            knee = _swing(params.biped_knee0, -scale * params.knee_amplitude, params.period)
            # ankle follows so that the foot stays horizontal during the crouch
            ankle = _swing(params.biped_ankle0, scale * (params.knee_amplitude - params.hip_amplitude), params.period)
        else:
            hip = _swing(params.biped_hip0, params.hip_amplitude, params.period)
            knee = _swing(params.biped_knee0, -params.knee_amplitude, params.period)
            if name == "level_walk":
                ankle = _swing(params.biped_ankle0, params.knee_amplitude - params.hip_amplitude, params.period)
            else:
                ankle = TrajectorySpec(kind="constant", theta0=params.biped_ankle0)
        joints.append(_joint(f"{leg}_hip", leg_index, hip))
        joints.append(_joint(f"{leg}_knee", leg_index, knee))
        joints.append(_joint(f"{leg}_ankle", leg_index, ankle))
    return GaitDefinition(
        name=name,
        robot="biped",
        gait_period=params.period,
        joints=joints,
        leg_phase_offsets=offsets,
    )


def build_gait(robot: str, name: str, params: GaitParams | None = None) -> GaitDefinition:
    """Build a library gait for the given robot.

    Args:
        robot: "biped" or "quadruped"
        name: gait name, see BIPED_GAITS / QUADRUPED_GAITS
        params: amplitudes and period, defaults when omitted

    Returns:
        GaitDefinition whose joints follow the robot's joint order
    """
    params = params or GaitParams()
    if robot == "quadruped" and name in QUADRUPED_GAITS:
        return _build_quadruped(name, params)
    if robot == "biped" and name in BIPED_GAITS:
        return _build_biped(name, params)
    raise ConfigurationError(f"unknown gait '{name}' for robot '{robot}'")


def constant_gait(robot: str, angles: Sequence[float], name: str = "posture") -> GaitDefinition:
    """Gait holding every joint at a constant angle (all legs always in stance)."""
    joint_ids = QUADRUPED_JOINTS if robot == "quadruped" else BIPED_JOINTS
    per_leg = 2 if robot == "quadruped" else 3
    if len(angles) != len(joint_ids):
        raise ConfigurationError(f"expected {len(joint_ids)} angles for {robot}, got {len(angles)}")
    joints = [
        _joint(joint_id, i // per_leg, TrajectorySpec(kind="constant", theta0=float(angle)))
        for i, (joint_id, angle) in enumerate(zip(joint_ids, angles))
    ]
    return GaitDefinition(
        name=name,
        robot=robot,
        gait_period=1.0,
        joints=joints,
        leg_phase_offsets=[0.0] * (len(joint_ids) // per_leg),
        support_schedule_kind="always_stance",
    )


def validate_against(gait: GaitDefinition, joint_names: Sequence[str]) -> None:
    """Check that the gait covers exactly the given joints, in order."""
    ids = [j.joint_id for j in gait.joints]
    if ids != list(joint_names):
        raise ConfigurationError(f"gait '{gait.name}' joints {ids} do not match robot joints {list(joint_names)}")


def _leg_time(gait: GaitDefinition, joint: JointTrajectory, t: float) -> float:
    return t + gait.leg_phase_offsets[joint.leg] * gait.gait_period


def reference_angles(gait: GaitDefinition, t: float) -> np.ndarray:
    """Per-joint reference angles (degrees) at time t, leg phase offsets applied."""
    return np.array([eval_trajectory(j, _leg_time(gait, j, t)) for j in gait.joints])


def feedforward_vector(gait: GaitDefinition, joint_ranges: Sequence[JointRange], t: float) -> np.ndarray:
    """Normalized feedforward actions a_ff in [-1, 1] for every joint at time t."""
    if len(joint_ranges) != gait.joint_count:
        raise ConfigurationError(
            f"gait '{gait.name}' has {gait.joint_count} joints but robot has {len(joint_ranges)}"
        )
    refs = reference_angles(gait, t)
    return np.array([normalize_to_action(theta, rng) for theta, rng in zip(refs, joint_ranges)])


def gait_phase(gait: GaitDefinition, t: float) -> float:
    """Phase fract(t / gait_period) in [0, 1)."""
    phase = math.fmod(t / gait.gait_period, 1.0)
    return phase + 1.0 if phase < 0.0 else phase


def support_flags(gait: GaitDefinition, t: float) -> np.ndarray:
    """Per-leg stance flags (True = stance) at time t.

    A leg supports while its own phase lies in [0, 0.5) and swings in [0.5, 1).
    """
    if gait.support_schedule_kind == "always_stance":
        return np.ones(gait.leg_count, dtype=bool)
    phase = gait_phase(gait, t)
    leg_phases = np.mod(phase + np.asarray(gait.leg_phase_offsets), 1.0)
    return leg_phases < 0.5


def scale_gait(gait: GaitDefinition, period_scale: float = 1.0, amplitude_scale: float = 1.0) -> GaitDefinition:
    """Copy of the gait with periods and amplitudes (sinusoids and ramps) scaled independently."""
    joints = [
        JointTrajectory(
            joint_id=j.joint_id,
            leg=j.leg,
            **scale_spec(TrajectorySpec(**j.model_dump(exclude={"joint_id", "leg"})), period_scale, amplitude_scale).model_dump(),
        )
        for j in gait.joints
    ]
    return gait.model_copy(update={"joints": joints, "gait_period": gait.gait_period * period_scale})


def save_gait(gait: GaitDefinition, path: Path | str) -> None:
    """Write a gait as a human-readable JSON document."""
    Path(path).write_text(gait.model_dump_json(indent=2, exclude_none=True))
    logger.info(f"Gait '{gait.name}' saved to {path}")


def load_gait(path: Path | str) -> GaitDefinition:
    """Read a gait JSON document."""
    try:
        return GaitDefinition.model_validate_json(Path(path).read_text())
    except (ValidationError, json.JSONDecodeError) as e:
        raise ConfigurationError(f"invalid gait document {path}: {e}") from e
