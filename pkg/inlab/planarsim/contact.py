"""Penalty ground contact on a flat ground at z = 0."""
from __future__ import annotations

from typing import Tuple

import numpy as np
from pydantic import BaseModel, Field


class ContactParams(BaseModel):
    """Spring-damper normal force and regularized Coulomb friction."""

    stiffness: float = Field(default=5e4, gt=0.0)
    damping: float = Field(default=300.0, gt=0.0)
    friction: float = Field(default=0.8, gt=0.0, le=2.0)
    regularization_velocity: float = Field(default=0.01, gt=0.0)


def contact_force_jacobians(
    position: np.ndarray, velocity: np.ndarray, params: ContactParams
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Contact force on a point and its derivatives.

    Args:
        position: (x, z) of the point, metres
        velocity: (x_dot, z_dot) of the point, m/s
        params: contact parameters

    Returns:
        (force (Ft, Fn), dF/dvelocity 2x2, dF/dposition 2x2)
    """
    force = np.zeros(2)
    d_vel = np.zeros((2, 2))
    d_pos = np.zeros((2, 2))
    penetration = -position[1]
    if penetration <= 0.0:
        return force, d_vel, d_pos

    normal = params.stiffness * penetration - params.damping * velocity[1]
    if normal <= 0.0:
        return force, d_vel, d_pos

    # normal force derivatives: dFn/dz = -k, dFn/dvz = -d
    d_pos[1, 1] = -params.stiffness
    d_vel[1, 1] = -params.damping

    ratio = velocity[0] / params.regularization_velocity
    if abs(ratio) < 1.0:
        slip = ratio
        d_vel[0, 0] = -params.friction * normal / params.regularization_velocity
    else:
        slip = float(np.sign(ratio))
    tangential = -params.friction * normal * slip
    d_vel[0, 1] = -params.friction * slip * d_vel[1, 1]
    d_pos[0, 1] = -params.friction * slip * d_pos[1, 1]

    force[0], force[1] = tangential, normal
    return force, d_vel, d_pos


def contact_force(position: np.ndarray, velocity: np.ndarray, params: ContactParams) -> np.ndarray:
    """Planar contact force (Ft, Fn) in newtons; zero above the ground."""
    return contact_force_jacobians(np.asarray(position, float), np.asarray(velocity, float), params)[0]
