"""Fixed-substep planar simulator with PD servos, joint-limit penalties,
penalty contacts and random horizontal pushes.

Each substep is a semi-implicit Euler step. Stiff force elements (unsaturated PD
servos, joint-limit springs, contact springs, dampers and regularized friction)
are linearized around the current state and integrated implicitly:

    (M + dt B + dt^2 K) dv = dt (F - dt K v),   v += dv,   q += dt v

Joint angles that still end a substep more than limit_margin_deg past their
range are clamped back and lose their outward velocity.
"""
from __future__ import annotations

import dataclasses
import enum
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, model_validator

from ..gaitgen.gaits import GaitDefinition, reference_angles
from ..shared.errors import SimulationBlowupError
from .contact import ContactParams, contact_force_jacobians
from .dynamics import ChainKinematics
from .model import RobotModel

logger = logging.getLogger(__name__)


class SimConfig(BaseModel):
    """Integration and episode settings."""

    control_dt: float = Field(default=0.01, gt=0.0)
    substeps: int = Field(default=10, ge=1)
    gravity: float = 9.81
    contacts_enabled: bool = True
    max_steps: int = Field(default=1000, ge=1)
    fall_pitch_deg: float = Field(default=10.0, gt=0.0)
    fall_roll_deg: float = Field(default=10.0, gt=0.0)
    hang_height: float = 1.0
    # joints are projected back to within this distance of their range after every substep
    limit_margin_deg: float = Field(default=1.0, ge=0.0)

    @property
    def substep_dt(self) -> float:
        return self.control_dt / self.substeps


class DisturbanceConfig(BaseModel):
    """Random horizontal pushes applied to the trunk."""

    enabled: bool = False
    magnitude: Tuple[float, float] = (0.0, 30.0)
    interval: Tuple[float, float] = (1.0, 3.0)
    duration: float = Field(default=0.1, ge=0.0)

    @model_validator(mode="after")
    def _check_ranges(self) -> "DisturbanceConfig":
        for name in ("magnitude", "interval"):
            low, high = getattr(self, name)
            if low < 0.0 or high < low:
                raise ValueError(f"{name} range must satisfy 0 <= low <= high, got {(low, high)}")
        return self


class Termination(str, enum.Enum):
    CONTINUE = "continue"
    FELL = "fell"
    TIMEOUT = "timeout"


@dataclass
class SimState:
    """Generalized state plus bookkeeping.

    q, v are [x, z, pitch, joints...] in metres / radians; for a floating base
    (x, z) is the centre of mass, see SimState helpers on PlanarSimulator for the
    trunk pose.
    """

    q: np.ndarray
    v: np.ndarray
    contacts: np.ndarray
    time: float = 0.0
    step: int = 0
    push_force: float = 0.0
    push_until: float = 0.0
    next_push_at: Optional[float] = None

    @property
    def pitch(self) -> float:
        return float(self.q[2])

    @property
    def pitch_rate(self) -> float:
        return float(self.v[2])

    @property
    def joint_angles(self) -> np.ndarray:
        return self.q[3:]

    @property
    def joint_velocities(self) -> np.ndarray:
        return self.v[3:]

    def copy(self) -> "SimState":
        return dataclasses.replace(self, q=self.q.copy(), v=self.v.copy(), contacts=self.contacts.copy())


def pd_torque(theta_cmd, theta, theta_dot, kp, kd, tau_max):
    """Joint servo torque clamp(kp * (theta_cmd - theta) - kd * theta_dot, +-tau_max); radians."""
    return np.clip(kp * (np.asarray(theta_cmd) - theta) - kd * np.asarray(theta_dot), -np.asarray(tau_max), tau_max)


class PlanarSimulator:
    """Steps one robot instance; holds no mutable state besides configuration."""

    def __init__(
        self,
        model: RobotModel,
        config: SimConfig | None = None,
        contact: ContactParams | None = None,
        disturbance: DisturbanceConfig | None = None,
    ):
        self.model = model
        self.config = config or SimConfig()
        self.contact = contact or ContactParams()
        self.disturbance = disturbance or DisturbanceConfig()
        self._free = slice(3, model.dof) if model.fixed_base else slice(0, model.dof)

    # ------------------------------------------------------------------
    # state construction
    # ------------------------------------------------------------------

    def state_from_pose(self, base_xz, pitch: float, joint_angles, velocities=None) -> SimState:
        """Build a state from a trunk position and joint angles (radians)."""
        model = self.model
        q = np.zeros(model.dof)
        q[2] = pitch
        q[3:] = joint_angles
        if not model.fixed_base:
            kin = ChainKinematics(model, q, np.zeros(model.dof))
            # trunk sits at -shift from the centre of mass
            q[:2] = np.asarray(base_xz, dtype=float) + kin.shift
        else:
            q[:2] = base_xz
        v = np.zeros(model.dof) if velocities is None else np.asarray(velocities, dtype=float).copy()
        return SimState(q=q, v=v, contacts=np.zeros(len(model.feet), dtype=bool))

    def reset_robot(self, gait: GaitDefinition) -> SimState:
        """Upright trunk, joints at the gait's t=0 references, zero velocity.

        A floating robot is placed with its lowest contact point on the ground; a pinned
        robot hangs at config.hang_height.
        """
        joints = np.radians(reference_angles(gait, 0.0))
        if self.model.fixed_base:
            return self.state_from_pose((0.0, self.config.hang_height), 0.0, joints)
        state = self.state_from_pose((0.0, 0.0), 0.0, joints)
        lowest = min(self.foot_positions(state)[:, 1]) if self.model.feet else 0.0
        state.q[1] -= lowest
        state.contacts[:] = True
        return state

    # ------------------------------------------------------------------
    # diagnostics
    # ------------------------------------------------------------------

    def kinematics(self, state: SimState) -> ChainKinematics:
        return ChainKinematics(self.model, state.q, state.v)

    def base_pose(self, state: SimState) -> np.ndarray:
        """Trunk (x, z, pitch)."""
        kin = self.kinematics(state)
        return np.array([kin.link_pos[0, 0], kin.link_pos[0, 1], state.q[2]])

    def base_velocity(self, state: SimState) -> np.ndarray:
        """Trunk world velocity (x_dot, z_dot, pitch_rate)."""
        kin = self.kinematics(state)
        vel = kin.link_jac[0] @ state.v
        return np.array([vel[0], vel[1], state.v[2]])

    def body_velocity(self, state: SimState) -> np.ndarray:
        """Trunk linear velocity in the body frame (forward, vertical)."""
        vx, vz, _ = self.base_velocity(state)
        c, s = math.cos(state.pitch), math.sin(state.pitch)
        return np.array([c * vx - s * vz, s * vx + c * vz])

    def foot_positions(self, state: SimState) -> np.ndarray:
        kin = self.kinematics(state)
        return np.array([kin.point(f.link, f.local)[0] for f in self.model.feet]).reshape(-1, 2)

    def mechanical_energy(self, state: SimState) -> float:
        kin = self.kinematics(state)
        return kin.kinetic_energy() + kin.potential_energy(self.config.gravity)

    def linear_momentum(self, state: SimState) -> np.ndarray:
        return self.kinematics(state).linear_momentum()

    # ------------------------------------------------------------------
    # disturbances and termination
    # ------------------------------------------------------------------

    def apply_push(self, state: SimState, rng: np.random.Generator, cfg: DisturbanceConfig | None = None) -> SimState:
        """Advance the push schedule: start a push when due, end it after its duration."""
        cfg = cfg or self.disturbance
        if not cfg.enabled:
            return state
        state = dataclasses.replace(state)
        if state.next_push_at is None:
            state.next_push_at = state.time + rng.uniform(*cfg.interval)
        if state.push_force != 0.0 and state.time >= state.push_until:
            state.push_force = 0.0
        if state.time >= state.next_push_at:
            magnitude = rng.uniform(*cfg.magnitude)
            direction = 1.0 if rng.random() < 0.5 else -1.0
            state.push_force = direction * magnitude
            state.push_until = state.time + cfg.duration
            state.next_push_at = state.time + rng.uniform(*cfg.interval)
            logger.debug(f"Push of {state.push_force:.1f} N at t={state.time:.2f}s")
        return state

    def check_termination(self, state: SimState) -> Termination:
        """Fell when |pitch| exceeds the threshold (roll is identically zero in the plane);
        timeout when the step counter reaches max_steps."""
        if abs(math.degrees(state.pitch)) > self.config.fall_pitch_deg:
            return Termination.FELL
        if state.step >= self.config.max_steps:
            return Termination.TIMEOUT
        return Termination.CONTINUE

    # ------------------------------------------------------------------
    # dynamics
    # ------------------------------------------------------------------

    def _substep(
        self,
        q: np.ndarray,
        v: np.ndarray,
        theta_cmd: Optional[np.ndarray],
        push_force: float,
        extra_torque: Optional[np.ndarray],
        dt: float,
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        model, ndof = self.model, self.model.dof
        kin = ChainKinematics(model, q, v)
        M = kin.mass_matrix()
        F = kin.gravity_force(self.config.gravity) - kin.velocity_product_force()
        B = np.zeros((ndof, ndof))
        K = np.zeros((ndof, ndof))
        joints = np.arange(3, ndof)
        theta, theta_dot = q[3:], v[3:]

        if theta_cmd is not None:
            raw = model.kp * (theta_cmd - theta) - model.kd * theta_dot
            linear = np.abs(raw) <= model.tau_max
            F[3:] += np.where(linear, raw, np.sign(raw) * model.tau_max)
            K[joints, joints] += np.where(linear, model.kp, 0.0)
            B[joints, joints] += np.where(linear, model.kd, 0.0)

        if extra_torque is not None:
            F[3:] += extra_torque

        over = theta - model.theta_max
        under = theta - model.theta_min
        outside = (over > 0.0) | (under < 0.0)
        if np.any(outside):
            excess = np.where(over > 0.0, over, np.where(under < 0.0, under, 0.0))
            F[3:] -= np.where(outside, model.limit_stiffness * excess + model.limit_damping * theta_dot, 0.0)
            K[joints, joints] += np.where(outside, model.limit_stiffness, 0.0)
            B[joints, joints] += np.where(outside, model.limit_damping, 0.0)

        contacts = np.zeros(len(model.feet), dtype=bool)
        if self.config.contacts_enabled:
            for index, foot in enumerate(model.feet):
                pos, jac, _ = kin.point(foot.link, foot.local)
                if pos[1] >= 0.0:
                    continue
                contacts[index] = True
                force, d_vel, d_pos = contact_force_jacobians(pos, jac @ v, self.contact)
                F += jac.T @ force
                B -= jac.T @ d_vel @ jac
                K -= jac.T @ d_pos @ jac

        if push_force != 0.0:
            F += kin.link_jac[0].T @ np.array([push_force, 0.0])

        A = M + dt * B + dt * dt * K
        rhs = dt * (F - dt * (K @ v))
        free = self._free
        v = v.copy()
        v[free] += np.linalg.solve(A[free, free], rhs[free])
        q = q.copy()
        q[free] += dt * v[free]
        self._enforce_limits(q, v)
        return q, v, contacts

    def _enforce_limits(self, q: np.ndarray, v: np.ndarray) -> None:
        """Hard joint stop: clamp angles to range +- margin, drop the outward velocity."""
        model = self.model
        margin = math.radians(self.config.limit_margin_deg)
        theta = q[3:]
        below = theta < model.theta_min - margin
        above = theta > model.theta_max + margin
        if not (np.any(below) or np.any(above)):
            return
        q[3:] = np.clip(theta, model.theta_min - margin, model.theta_max + margin)
        v[3:] = np.where(below, np.maximum(v[3:], 0.0), np.where(above, np.minimum(v[3:], 0.0), v[3:]))

    def step(
        self,
        state: SimState,
        theta_cmd_deg: Optional[np.ndarray],
        dt_control: Optional[float] = None,
        extra_torque: Optional[np.ndarray] = None,
    ) -> SimState:
        """Advance one control step.

        Args:
            state: current state
            theta_cmd_deg: joint position commands in degrees, or None for limp joints
            dt_control: control period, defaults to config.control_dt
            extra_torque: additional joint torques (N*m) held over the step

        Returns:
            next state (the input state is not modified)

        Raises:
            SimulationBlowupError: state became non-finite
        """
        dt_control = self.config.control_dt if dt_control is None else dt_control
        dt = dt_control / self.config.substeps
        theta_cmd = None if theta_cmd_deg is None else np.radians(np.asarray(theta_cmd_deg, dtype=float))
        q, v = state.q, state.v
        contacts = state.contacts
        for _ in range(self.config.substeps):
            q, v, contacts = self._substep(q, v, theta_cmd, state.push_force, extra_torque, dt)
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(v))):
            logger.warning(f"Simulation blowup at t={state.time:.3f}s (step {state.step})")
            raise SimulationBlowupError(f"non-finite state at t={state.time + dt_control:.3f}s")
        return dataclasses.replace(
            state,
            q=q,
            v=v,
            contacts=contacts,
            time=state.time + dt_control,
            step=state.step + 1,
        )


class StateRecorder:
    """Collects per-step state rows and writes them as CSV for offline plotting."""

    def __init__(self, simulator: PlanarSimulator):
        self.simulator = simulator
        self.rows: List[dict] = []

    def record(self, state: SimState) -> None:
        x, z, pitch = self.simulator.base_pose(state)
        row = {"time": state.time, "base_x": x, "base_z": z, "pitch_deg": math.degrees(pitch)}
        for name, angle in zip(self.simulator.model.joint_names, np.degrees(state.joint_angles)):
            row[f"{name}_deg"] = angle
        self.rows.append(row)

    def to_csv(self, path: Path | str) -> None:
        pd.DataFrame(self.rows).to_csv(path, index=False)
        logger.info(f"State trace with {len(self.rows)} rows written to {path}")
