"""Planar robot models: a 6-joint biped and an 8-joint quadruped (pitch joints only).

Conventions: x forward, y left, z up; every angle is a rotation about +y, so a
positive joint angle swings the distal segment backward and a positive pitch
lowers the nose. Each link frame has its origin at the joint that connects it
to its parent; a leg segment hanging straight down extends along its local -z
axis. Link 0 is the trunk (floating base) with its frame origin at the trunk
centre of mass.

Joint ranges, PD gains and torque limits follow the robot hardware; the
geometry and masses are plausible defaults that the training config may override.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, Field

from ..gaitgen.gaits import BIPED_JOINTS, QUADRUPED_JOINTS
from ..gaitgen.trajectories import JointRange
from ..shared.errors import ConfigurationError

logger = logging.getLogger(__name__)


@dataclass
class Link:
    name: str
    mass: float
    length: float
    com: np.ndarray
    inertia: float
    parent: int = -1
    anchor: np.ndarray = field(default_factory=lambda: np.zeros(2))


@dataclass
class Joint:
    name: str
    parent_link: int
    child_link: int
    range: JointRange
    kp: float
    kd: float
    tau_max: float
    leg: int


@dataclass
class ContactPoint:
    name: str
    link: int
    local: np.ndarray
    leg: int


@dataclass
class RobotModel:
    """Planar articulated chain rooted at a floating (or pinned) trunk."""

    name: str
    links: List[Link]
    joints: List[Joint]
    feet: List[ContactPoint]
    leg_count: int
    limit_stiffness: float
    limit_damping: float
    fixed_base: bool = False

    def __post_init__(self):
        for index, joint in enumerate(self.joints):
            if joint.child_link != index + 1:
                raise ValueError(f"joint {joint.name} must drive link {index + 1}")
            if not 0 <= joint.parent_link < joint.child_link:
                raise ValueError(f"joint {joint.name} parent link must precede its child")
        self.kp = np.array([j.kp for j in self.joints])
        self.kd = np.array([j.kd for j in self.joints])
        self.tau_max = np.array([j.tau_max for j in self.joints])
        self.theta_min = np.radians([j.range.theta_min for j in self.joints])
        self.theta_max = np.radians([j.range.theta_max for j in self.joints])
        self.masses = np.array([link.mass for link in self.links])

    @property
    def joint_count(self) -> int:
        return len(self.joints)

    @property
    def dof(self) -> int:
        """Generalized coordinates: base x, base z, base pitch, then joint angles."""
        return 3 + self.joint_count

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())

    @property
    def joint_names(self) -> List[str]:
        return [j.name for j in self.joints]

    @property
    def joint_ranges(self) -> List[JointRange]:
        return [j.range for j in self.joints]


class ModelOverrides(BaseModel):
    """Geometry, mass and servo overrides read from the training config."""

    trunk_mass: Optional[float] = Field(default=None, gt=0.0)
    trunk_length: Optional[float] = Field(default=None, gt=0.0)
    thigh_mass: Optional[float] = Field(default=None, gt=0.0)
    thigh_length: Optional[float] = Field(default=None, gt=0.0)
    shank_mass: Optional[float] = Field(default=None, gt=0.0)
    shank_length: Optional[float] = Field(default=None, gt=0.0)
    foot_mass: Optional[float] = Field(default=None, gt=0.0)
    foot_length: Optional[float] = Field(default=None, gt=0.0)
    kp: Optional[float] = Field(default=None, ge=0.0)
    kd: Optional[float] = Field(default=None, ge=0.0)
    tau_max: Optional[float] = Field(default=None, gt=0.0)
    fixed_base: bool = False


def _rod(name: str, mass: float, length: float, parent: int, anchor) -> Link:
    """Uniform rod hanging along local -y from its joint."""
    return Link(
        name=name,
        mass=mass,
        length=length,
        com=np.array([0.0, -0.5 * length]),
        inertia=mass * length ** 2 / 12.0,
        parent=parent,
        anchor=np.asarray(anchor, dtype=float),
    )


def _pick(value: Optional[float], default: float) -> float:
    return default if value is None else value


def build_quadruped(overrides: ModelOverrides | None = None) -> RobotModel:
    """Quadruped with hip/knee pitch on four legs (FL, FR, HL, HR)."""
    o = overrides or ModelOverrides()
    trunk_mass, trunk_length = _pick(o.trunk_mass, 6.0), _pick(o.trunk_length, 0.36)
    thigh_mass, thigh_length = _pick(o.thigh_mass, 1.0), _pick(o.thigh_length, 0.2)
    shank_mass, shank_length = _pick(o.shank_mass, 0.2), _pick(o.shank_length, 0.2)
    kp, kd, tau_max = _pick(o.kp, 180.0), _pick(o.kd, 8.0), _pick(o.tau_max, 33.5)

    hip_range = JointRange(theta_min=-90.0, theta_max=210.0)
    knee_range = JointRange(theta_min=-94.5, theta_max=7.5)

    links = [Link("trunk", trunk_mass, trunk_length, np.zeros(2), trunk_mass * trunk_length ** 2 / 12.0)]
    joints, feet = [], []
    for leg_index, leg in enumerate(("FL", "FR", "HL", "HR")):
        hip_x = 0.5 * trunk_length if leg.startswith("F") else -0.5 * trunk_length
        thigh = len(links)
        links.append(_rod(f"{leg}_thigh", thigh_mass, thigh_length, 0, [hip_x, 0.0]))
        joints.append(Joint(QUADRUPED_JOINTS[2 * leg_index], 0, thigh, hip_range, kp, kd, tau_max, leg_index))
        shank = len(links)
        links.append(_rod(f"{leg}_shank", shank_mass, shank_length, thigh, [0.0, -thigh_length]))
        joints.append(Joint(QUADRUPED_JOINTS[2 * leg_index + 1], thigh, shank, knee_range, kp, kd, tau_max, leg_index))
        feet.append(ContactPoint(f"{leg}_foot", shank, np.array([0.0, -shank_length]), leg_index))

    return RobotModel(
        name="quadruped",
        links=links,
        joints=joints,
        feet=feet,
        leg_count=4,
        limit_stiffness=3000.0,
        limit_damping=20.0,
        fixed_base=o.fixed_base,
    )


def build_biped(overrides: ModelOverrides | None = None) -> RobotModel:
    """Biped with hip/knee/ankle pitch on two legs; feet touch at heel and toe."""
    o = overrides or ModelOverrides()
    trunk_mass, trunk_length = _pick(o.trunk_mass, 8.0), _pick(o.trunk_length, 0.4)
    thigh_mass, thigh_length = _pick(o.thigh_mass, 1.5), _pick(o.thigh_length, 0.3)
    shank_mass, shank_length = _pick(o.shank_mass, 1.0), _pick(o.shank_length, 0.3)
    foot_mass, foot_length = _pick(o.foot_mass, 0.3), _pick(o.foot_length, 0.15)
    kp, kd, tau_max = _pick(o.kp, 2000.0), _pick(o.kd, 100.0), _pick(o.tau_max, 200.0)

    hip_range = JointRange(theta_min=-60.0, theta_max=120.0)
    knee_range = JointRange(theta_min=-170.0, theta_max=10.0)
    ankle_range = JointRange(theta_min=-60.0, theta_max=60.0)

    # heel one third behind the ankle, toe two thirds ahead, sole 5 cm below the ankle
    heel_x, toe_x, sole = -foot_length / 3.0, 2.0 * foot_length / 3.0, -0.05

    links = [Link("trunk", trunk_mass, trunk_length, np.zeros(2), trunk_mass * trunk_length ** 2 / 12.0)]
    joints, feet = [], []
    for leg_index, leg in enumerate(("L", "R")):
        thigh = len(links)
        links.append(_rod(f"{leg}_thigh", thigh_mass, thigh_length, 0, [0.0, -0.5 * trunk_length]))
        joints.append(Joint(BIPED_JOINTS[3 * leg_index], 0, thigh, hip_range, kp, kd, tau_max, leg_index))
        shank = len(links)
        links.append(_rod(f"{leg}_shank", shank_mass, shank_length, thigh, [0.0, -thigh_length]))
        joints.append(Joint(BIPED_JOINTS[3 * leg_index + 1], thigh, shank, knee_range, kp, kd, tau_max, leg_index))
        foot = len(links)
        links.append(
            Link(
                name=f"{leg}_foot",
                mass=foot_mass,
                length=foot_length,
                com=np.array([0.5 * (heel_x + toe_x), 0.5 * sole]),
                inertia=foot_mass * (foot_length ** 2 + sole ** 2) / 12.0,
                parent=shank,
                anchor=np.array([0.0, -shank_length]),
            )
        )
        joints.append(Joint(BIPED_JOINTS[3 * leg_index + 2], shank, foot, ankle_range, kp, kd, tau_max, leg_index))
        feet.append(ContactPoint(f"{leg}_heel", foot, np.array([heel_x, sole]), leg_index))
        feet.append(ContactPoint(f"{leg}_toe", foot, np.array([toe_x, sole]), leg_index))

    return RobotModel(
        name="biped",
        links=links,
        joints=joints,
        feet=feet,
        leg_count=2,
        limit_stiffness=20000.0,
        limit_damping=200.0,
        fixed_base=o.fixed_base,
    )


def build_robot(robot: str, overrides: ModelOverrides | None = None) -> RobotModel:
    if robot == "biped":
        return build_biped(overrides)
    if robot == "quadruped":
        return build_quadruped(overrides)
    raise ConfigurationError(f"unknown robot '{robot}'")


def build_pendulum(mass: float = 1.0, length: float = 0.3, fixed: bool = True) -> RobotModel:
    """Pinned trunk carrying a single passive rod: the single-pendulum configuration."""
    free = JointRange(theta_min=-180.0, theta_max=180.0)
    links = [
        Link("trunk", 1.0, 0.1, np.zeros(2), 1e-3),
        _rod("rod", mass, length, 0, [0.0, 0.0]),
    ]
    joints = [Joint("pivot", 0, 1, free, 0.0, 0.0, 1e9, 0)]
    return RobotModel(
        name="pendulum",
        links=links,
        joints=joints,
        feet=[],
        leg_count=1,
        limit_stiffness=0.0,
        limit_damping=0.0,
        fixed_base=fixed,
    )
