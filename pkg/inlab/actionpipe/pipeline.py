"""Raw policy output -> joint position commands.

    a_fb  = 0.9 * a_fb_last + 0.1 * clip(a_nn, -1, 1)
    a_t   = a_ff + k_b * a_fb        (INL)
    a_t   = a_fb                     (IML)
    theta = theta_min + (sat(a_t) + 1) / 2 * (theta_max - theta_min)
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Literal, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, field_validator

from ..gaitgen.trajectories import JointRange
from ..shared.errors import ConfigurationError

logger = logging.getLogger(__name__)

FILTER_MEMORY = 0.9
FILTER_INPUT = 0.1
KB_MAX = 2.0


class FeedbackConfig(BaseModel):
    """Feedback composition: mode and per-joint (or scalar) feedback ratio k_b."""

    mode: Literal["IML", "INL"] = "INL"
    k_b: Union[float, List[float]] = 0.5

    @field_validator("k_b")
    @classmethod
    def _check_kb(cls, value):
        values = value if isinstance(value, list) else [value]
        for kb in values:
            if not 0.0 <= kb <= KB_MAX:
                raise ValueError(f"k_b must lie in [0, {KB_MAX}], got {kb}")
        return value

    def kb_vector(self, joint_count: int) -> np.ndarray:
        """Broadcast k_b to one ratio per joint."""
        if isinstance(self.k_b, list):
            if len(self.k_b) != joint_count:
                raise ConfigurationError(f"k_b has {len(self.k_b)} entries for {joint_count} joints")
            return np.asarray(self.k_b, dtype=float)
        return np.full(joint_count, float(self.k_b))


@dataclass
class PipelineState:
    """Low-pass filter memory, one unit value per joint."""

    a_fb_last: np.ndarray

    @classmethod
    def zeros(cls, joint_count: int) -> "PipelineState":
        return cls(a_fb_last=np.zeros(joint_count))


def filter_step(state: PipelineState, a_nn: np.ndarray) -> Tuple[np.ndarray, PipelineState]:
    """Clip the raw output, then low-pass filter it against the last feedback action."""
    clipped = np.clip(np.asarray(a_nn, dtype=float), -1.0, 1.0)
    a_fb = FILTER_MEMORY * state.a_fb_last + FILTER_INPUT * clipped
    return a_fb, PipelineState(a_fb_last=a_fb)


def compose(a_ff: np.ndarray, a_fb: np.ndarray, cfg: FeedbackConfig, k_b: np.ndarray | None = None) -> np.ndarray:
    """Combine feedforward and feedback. INL adds the bounded feedback, IML uses it alone."""
    a_fb = np.asarray(a_fb, dtype=float)
    if cfg.mode == "IML":
        return a_fb.copy()
    if k_b is None:
        k_b = cfg.kb_vector(a_fb.shape[-1])
    return np.asarray(a_ff, dtype=float) + k_b * a_fb


def range_arrays(ranges: Sequence[JointRange]) -> Tuple[np.ndarray, np.ndarray]:
    """Lower and upper joint limits as arrays (degrees)."""
    return (
        np.array([r.theta_min for r in ranges], dtype=float),
        np.array([r.theta_max for r in ranges], dtype=float),
    )


def to_command_angle(a_t, theta_min, theta_max):
    """Saturate a_t to [-1, 1] and map it onto the joint range (degrees).

    Works elementwise on scalars or arrays of joint limits.
    """
    sat = np.clip(a_t, -1.0, 1.0)
    return theta_min + (sat + 1.0) / 2.0 * (np.asarray(theta_max) - np.asarray(theta_min))


def reset(state: PipelineState) -> PipelineState:
    """Zero the filter memory at an episode boundary."""
    return PipelineState.zeros(state.a_fb_last.shape[0])


def bounding_violation(a_t: np.ndarray, a_ff: np.ndarray, k_b: np.ndarray) -> float:
    """Largest amount by which |a_t - a_ff| exceeds max(k_b); <= 0 when bounded."""
    return float(np.max(np.abs(np.asarray(a_t) - np.asarray(a_ff))) - np.max(k_b))


class ActionPipeline:
    """Stateful pipeline for one environment copy."""

    def __init__(self, ranges: Sequence[JointRange], cfg: FeedbackConfig):
        self.cfg = cfg
        self.joint_count = len(ranges)
        self.theta_min, self.theta_max = range_arrays(ranges)
        self.k_b = cfg.kb_vector(self.joint_count)
        self.state = PipelineState.zeros(self.joint_count)

    def reset(self) -> None:
        self.state = reset(self.state)

    def __call__(self, a_nn: np.ndarray, a_ff: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Advance one control step.

        Returns:
            (theta_cmd degrees, composed action a_t, feedback action a_fb)
        """
        a_fb, self.state = filter_step(self.state, a_nn)
        a_t = compose(a_ff, a_fb, self.cfg, self.k_b)
        return to_command_angle(a_t, self.theta_min, self.theta_max), a_t, a_fb
