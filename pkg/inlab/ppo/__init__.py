"""Proximal policy optimization implemented on numpy."""
from .buffer import RolloutBatch, RolloutBuffer, compute_gae, flatten, gae, normalize_advantages
from .checkpoint import check_compatible, load_checkpoint, save_checkpoint
from .networks import Adam, Mlp, clip_by_global_norm, global_norm
from .policy import (
    PolicyParams,
    entropy,
    init_policy,
    log_prob,
    policy_forward,
    raw_mean,
    sample_action,
    value,
)
from .trainer import PpoConfig, PpoStats, ppo_loss_and_grads, ppo_update

__all__ = [
    "RolloutBatch",
    "RolloutBuffer",
    "compute_gae",
    "flatten",
    "gae",
    "normalize_advantages",
    "check_compatible",
    "load_checkpoint",
    "save_checkpoint",
    "Adam",
    "Mlp",
    "clip_by_global_norm",
    "global_norm",
    "PolicyParams",
    "entropy",
    "init_policy",
    "log_prob",
    "policy_forward",
    "raw_mean",
    "sample_action",
    "value",
    "PpoConfig",
    "PpoStats",
    "ppo_loss_and_grads",
    "ppo_update",
]
