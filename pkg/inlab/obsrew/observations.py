"""Observation vectors handed to the policy.

Layouts (n = joint count):

    full     : quaternion(4), body angular velocity(3), body linear velocity(3), theta(n), theta_dot(n)
    full_RO  : full + theta_ref(n)
    hardware : pitch, roll, body angular velocity(3), theta(n), theta_dot(n)

The planar simulator has no roll, yaw or lateral motion, so those entries hold
their identity/zero values. Joint angles (and references) are centred on the
joint range midpoint and divided by the half-range; joint velocities are divided
by the half-range (in radians) and scaled by VELOCITY_SCALE seconds.
"""
from __future__ import annotations

import math
from typing import Literal, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field

from ..gaitgen.trajectories import JointRange
from ..planarsim.simulator import PlanarSimulator, SimState
from ..shared.errors import ConfigurationError

ObservationVariant = Literal["full", "full_RO", "hardware"]

VELOCITY_SCALE = 0.1


class ObservationLayout(BaseModel):
    variant: ObservationVariant = "full"
    joint_count: int = Field(gt=0)

    @property
    def size(self) -> int:
        n = self.joint_count
        if self.variant == "full":
            return 10 + 2 * n
        if self.variant == "full_RO":
            return 10 + 3 * n
        return 5 + 2 * n

    @property
    def uses_reference(self) -> bool:
        return self.variant == "full_RO"


def _range_scaling(ranges: Sequence[JointRange]):
    mid = np.array([r.midpoint for r in ranges])
    half = np.array([0.5 * r.span for r in ranges])
    return mid, half


def scale_joint_angles(theta_deg: np.ndarray, ranges: Sequence[JointRange]) -> np.ndarray:
    """Map degrees to roughly [-1, 1] over each joint range."""
    mid, half = _range_scaling(ranges)
    return (np.asarray(theta_deg, dtype=float) - mid) / half


def scale_joint_velocities(theta_dot: np.ndarray, ranges: Sequence[JointRange]) -> np.ndarray:
    _, half = _range_scaling(ranges)
    return VELOCITY_SCALE * np.asarray(theta_dot, dtype=float) / np.radians(half)


def pitch_quaternion(pitch: float) -> np.ndarray:
    """(w, x, y, z) quaternion of a rotation by pitch about +y."""
    return np.array([math.cos(0.5 * pitch), 0.0, math.sin(0.5 * pitch), 0.0])


def observe(
    simulator: PlanarSimulator,
    state: SimState,
    layout: ObservationLayout,
    theta_ref_deg: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Build the observation vector of one robot state.

    Args:
        simulator: simulator holding the robot model (joint ranges, kinematics)
        state: current state
        layout: observation layout
        theta_ref_deg: reference joint angles, required iff the layout is full_RO

    Returns:
        float vector of length layout.size

    Raises:
        ConfigurationError: reference supplied/missing against the layout, or
            joint counts disagree
    """
    ranges = simulator.model.joint_ranges
    if layout.joint_count != len(ranges):
        raise ConfigurationError(
            f"layout expects {layout.joint_count} joints, robot '{simulator.model.name}' has {len(ranges)}"
        )
    if layout.uses_reference != (theta_ref_deg is not None):
        raise ConfigurationError(
            f"observation variant '{layout.variant}' "
            f"{'requires' if layout.uses_reference else 'does not take'} a reference"
        )

    theta = scale_joint_angles(np.degrees(state.joint_angles), ranges)
    theta_dot = scale_joint_velocities(state.joint_velocities, ranges)
    angular = np.array([0.0, state.pitch_rate, 0.0])

    if layout.variant == "hardware":
        parts = [np.array([state.pitch, 0.0]), angular, theta, theta_dot]
    else:
        forward, vertical = simulator.body_velocity(state)
        parts = [pitch_quaternion(state.pitch), angular, np.array([forward, 0.0, vertical]), theta, theta_dot]
        if layout.uses_reference:
            ref = np.asarray(theta_ref_deg, dtype=float)
            if ref.shape != (layout.joint_count,):
                raise ConfigurationError(f"reference has shape {ref.shape}, expected ({layout.joint_count},)")
            parts.append(scale_joint_angles(ref, ranges))
    return np.concatenate(parts)
