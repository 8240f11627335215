"""Action pipeline: clip, low-pass filter, feedback bounding and command mapping."""
from .pipeline import (
    ActionPipeline,
    FeedbackConfig,
    PipelineState,
    bounding_violation,
    compose,
    filter_step,
    range_arrays,
    reset,
    to_command_angle,
)

__all__ = [
    "ActionPipeline",
    "FeedbackConfig",
    "PipelineState",
    "bounding_violation",
    "compose",
    "filter_step",
    "range_arrays",
    "reset",
    "to_command_angle",
]
