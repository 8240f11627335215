"""Joint reference trajectories and their mapping to normalized feedforward actions.

Three primitive kinds are supported:
- sinusoid: cyclic joint motion theta0 + dtheta * (1 - cos(2*pi*(t/T + phase))) / 2
- ramp: point-to-point motion theta0 + dtheta * t / T
- constant: theta0

A composite sums weighted primitive terms, each active inside a window of the
composite's own period. Angles are degrees here; the simulator converts to radians.
"""
from __future__ import annotations

import logging
import math
from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, model_validator

from ..shared.errors import ParameterError, RangeError

logger = logging.getLogger(__name__)

TrajectoryKind = Literal["sinusoid", "ramp", "composite", "constant"]

# tolerance used when checking references against joint limits
_RANGE_TOL = 1e-9


class JointRange(BaseModel):
    """Joint range of motion in degrees."""

    theta_min: float
    theta_max: float

    @model_validator(mode="after")
    def _check_order(self) -> "JointRange":
        if not self.theta_min < self.theta_max:
            raise ValueError(f"theta_min ({self.theta_min}) must be < theta_max ({self.theta_max})")
        return self

    @property
    def span(self) -> float:
        return self.theta_max - self.theta_min

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.theta_min + self.theta_max)


class CompositeTerm(BaseModel):
    """One weighted primitive term of a composite trajectory.

    The window is a [start, end) fraction of the composite period; inside it the term
    sees local time measured from the window start.
    """

    spec: "TrajectorySpec"
    weight: float = 1.0
    window: Tuple[float, float] = (0.0, 1.0)

    @model_validator(mode="after")
    def _check_window(self) -> "CompositeTerm":
        start, end = self.window
        if not (0.0 <= start < end <= 1.0):
            raise ValueError(f"window must satisfy 0 <= start < end <= 1, got {self.window}")
        if self.spec.kind == "composite":
            raise ValueError("nested composite terms are not supported")
        return self


class TrajectorySpec(BaseModel):
    """Parameters of one joint reference trajectory (degrees, seconds)."""

    kind: TrajectoryKind = "constant"
    theta0: float = 0.0
    delta_theta: float = 0.0
    period: float = 1.0
    phase: float = Field(default=0.0, ge=0.0, lt=1.0)
    terms: Optional[List[CompositeTerm]] = None

    @model_validator(mode="after")
    def _check_windows(self) -> "TrajectorySpec":
        if self.kind != "composite" or not self.terms:
            return self
        # distinct windows must tile [0, 1) without gaps or overlaps
        windows = sorted(set(term.window for term in self.terms))
        cursor = 0.0
        for start, end in windows:
            if abs(start - cursor) > 1e-12:
                raise ValueError(f"composite windows do not partition [0, 1): {windows}")
            cursor = end
        if abs(cursor - 1.0) > 1e-12:
            raise ValueError(f"composite windows do not partition [0, 1): {windows}")
        return self


CompositeTerm.model_rebuild()


def _require_period(spec: TrajectorySpec) -> None:
    if not spec.period > 0.0:
        raise ParameterError(f"trajectory period must be positive, got {spec.period}")


def eval_sinusoid(spec: TrajectorySpec, t: float) -> float:
    """Evaluate theta0 + dtheta * (1 - cos(2*pi*(t/T + phase))) / 2.

    The cycle fraction is wrapped to [0, 1) before the cosine so that the result is
    periodic in T to rounding error even for large t.
    """
    _require_period(spec)
    cycle = math.fmod(t / spec.period + spec.phase, 1.0)
    return spec.theta0 + spec.delta_theta * (1.0 - math.cos(2.0 * math.pi * cycle)) / 2.0


def eval_ramp_flagged(spec: TrajectorySpec, t: float) -> Tuple[float, bool]:
    """Evaluate the ramp and report whether t had to be clamped into [0, T]."""
    _require_period(spec)
    clamped = t < 0.0 or t > spec.period
    if clamped:
        logger.warning(f"Ramp time {t:.4f}s clamped to [0, {spec.period}]")
        t = min(max(t, 0.0), spec.period)
    return spec.theta0 + spec.delta_theta * t / spec.period, clamped


def eval_ramp(spec: TrajectorySpec, t: float) -> float:
    """Evaluate theta0 + dtheta * t / T, clamping t into [0, T]."""
    return eval_ramp_flagged(spec, t)[0]


def _eval_primitive(spec: TrajectorySpec, t: float) -> float:
    if spec.kind == "sinusoid":
        return eval_sinusoid(spec, t)
    if spec.kind == "ramp":
        return eval_ramp(spec, t)
    if spec.kind == "constant":
        return spec.theta0
    raise ParameterError(f"unsupported primitive kind: {spec.kind}")


def eval_trajectory(spec: TrajectorySpec, t: float) -> float:
    """Evaluate any trajectory kind at time t (seconds), returning degrees."""
    if spec.kind != "composite":
        return _eval_primitive(spec, t)

    if not spec.terms:
        raise ParameterError("composite trajectory has no terms")
    _require_period(spec)

    cycle = math.fmod(t / spec.period + spec.phase, 1.0)
    if cycle < 0.0:
        cycle += 1.0
    angle = 0.0
    for term in spec.terms:
        start, end = term.window
        if start <= cycle < end:
            local_t = (cycle - start) * spec.period
            angle += term.weight * _eval_primitive(term.spec, local_t)
    return angle


def normalize_to_action(theta_ref: float, joint_range: JointRange) -> float:
    """Map a reference angle to a unit action: 2 * (theta - min) / (max - min) - 1."""
    if theta_ref < joint_range.theta_min - _RANGE_TOL or theta_ref > joint_range.theta_max + _RANGE_TOL:
        raise RangeError(
            f"reference angle {theta_ref:.3f} deg outside range "
            f"[{joint_range.theta_min}, {joint_range.theta_max}]"
        )
    return 2.0 * (theta_ref - joint_range.theta_min) / joint_range.span - 1.0


def action_to_angle(action: float, joint_range: JointRange) -> float:
    """Inverse of normalize_to_action (no saturation)."""
    return joint_range.theta_min + (action + 1.0) / 2.0 * joint_range.span


def scale_spec(
    spec: TrajectorySpec,
    period_scale: float = 1.0,
    amplitude_scale: float = 1.0,
    anchor: Optional[float] = None,
) -> TrajectorySpec:
    """Return a copy with every period multiplied by period_scale and every
    sinusoid and ramp amplitude multiplied by amplitude_scale.

    Ramp segments of a composite also have their start angles scaled about the
    first ramp's start, so chained ramps stay continuous.
    """
    update = {"period": spec.period * period_scale}
    if spec.kind in ("sinusoid", "ramp"):
        update["delta_theta"] = spec.delta_theta * amplitude_scale
    if spec.kind == "ramp" and anchor is not None:
        update["theta0"] = anchor + (spec.theta0 - anchor) * amplitude_scale
    if spec.kind == "composite" and spec.terms:
        ramps = [term.spec.theta0 for term in spec.terms if term.spec.kind == "ramp"]
        start = ramps[0] if ramps else None
        update["terms"] = [
            term.model_copy(update={"spec": scale_spec(term.spec, period_scale, amplitude_scale, start)})
            for term in spec.terms
        ]
    return spec.model_copy(update=update)
