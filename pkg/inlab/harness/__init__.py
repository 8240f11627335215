"""Experiment harness: configuration, environments, training, experiments and CLI."""
from .config import MODES, OnlineProtocolConfig, TrainConfig, apply_overrides, load_config, parse_config
from .env import EnvPool, LocomotionEnv, StepResult, make_envs
from .experiments import (
    AdaptResult,
    ExperimentResult,
    adapt_sweep,
    compare_modes,
    gait_library,
    steps_to_threshold,
    sweep_kb,
)
from .online import OnlineResult, online_protocol
from .plotdata import emit_plotdata, read_table, write_table
from .train import EvalMetrics, TrainingLog, TrainResult, evaluate, evaluate_checkpoint, train

__all__ = [
    "MODES",
    "OnlineProtocolConfig",
    "TrainConfig",
    "apply_overrides",
    "load_config",
    "parse_config",
    "EnvPool",
    "LocomotionEnv",
    "StepResult",
    "make_envs",
    "AdaptResult",
    "ExperimentResult",
    "adapt_sweep",
    "compare_modes",
    "gait_library",
    "steps_to_threshold",
    "sweep_kb",
    "OnlineResult",
    "online_protocol",
    "emit_plotdata",
    "read_table",
    "write_table",
    "EvalMetrics",
    "TrainingLog",
    "TrainResult",
    "evaluate",
    "evaluate_checkpoint",
    "train",
]
