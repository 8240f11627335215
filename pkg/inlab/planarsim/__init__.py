"""Planar (sagittal) rigid-body simulator for the biped and quadruped."""
from .contact import ContactParams, contact_force, contact_force_jacobians
from .dynamics import ChainKinematics
from .model import (
    ContactPoint,
    Joint,
    Link,
    ModelOverrides,
    RobotModel,
    build_biped,
    build_pendulum,
    build_quadruped,
    build_robot,
)
from .simulator import (
    DisturbanceConfig,
    PlanarSimulator,
    SimConfig,
    SimState,
    StateRecorder,
    Termination,
    pd_torque,
)

__all__ = [
    "ContactParams",
    "contact_force",
    "contact_force_jacobians",
    "ChainKinematics",
    "ContactPoint",
    "Joint",
    "Link",
    "ModelOverrides",
    "RobotModel",
    "build_biped",
    "build_pendulum",
    "build_quadruped",
    "build_robot",
    "DisturbanceConfig",
    "PlanarSimulator",
    "SimConfig",
    "SimState",
    "StateRecorder",
    "Termination",
    "pd_torque",
]
