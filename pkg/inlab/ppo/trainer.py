"""Clipped-surrogate PPO objective, its gradients, and the update loop."""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from typing import Dict, List, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator

from ..shared.errors import RolloutError
from .buffer import RolloutBatch, RolloutBuffer, compute_gae, flatten
from .networks import Adam, clip_by_global_norm
from .policy import PolicyParams, entropy, log_prob

logger = logging.getLogger(__name__)


class PpoConfig(BaseModel):
    batch_size: int = Field(default=2048, gt=0)
    buffer_size: int = Field(default=20480, gt=0)
    learning_rate: float = Field(default=3e-4, gt=0.0)
    entropy_coeff: float = Field(default=0.005, ge=0.0)
    clip_epsilon: float = Field(default=0.2, gt=0.0)
    gae_lambda: float = Field(default=0.95, gt=0.0, le=1.0)
    gamma: float = Field(default=0.99, gt=0.0, le=1.0)
    num_epoch: int = Field(default=3, ge=1)
    value_coeff: float = Field(default=0.5, ge=0.0)
    max_grad_norm: float = Field(default=0.5, ge=0.0)

    @model_validator(mode="after")
    def _buffer_multiple_of_batch(self) -> "PpoConfig":
        if self.buffer_size % self.batch_size != 0:
            raise ValueError(f"buffer_size {self.buffer_size} is not a multiple of batch_size {self.batch_size}")
        return self


@dataclass
class PpoStats:
    policy_loss: float = 0.0
    value_loss: float = 0.0
    entropy: float = 0.0
    clip_fraction: float = 0.0
    approx_kl: float = 0.0
    grad_norm: float = 0.0
    minibatches: int = 0
    aborted: bool = False

    def as_dict(self) -> Dict[str, float]:
        return asdict(self)


def ppo_loss_and_grads(
    params: PolicyParams,
    obs: np.ndarray,
    actions: np.ndarray,
    old_log_probs: np.ndarray,
    advantages: np.ndarray,
    returns: np.ndarray,
    config: PpoConfig,
) -> Tuple[float, Dict[str, float], List[np.ndarray]]:
    """Total loss  -E[min(rA, clip(r)A)] + c_v E[(V - R)^2] - c_e H  and its gradient.

    Returns:
        (loss, stats, grads) with grads ordered like params.parameters()
    """
    batch = len(old_log_probs)
    eps = config.clip_epsilon
    mean, actor_cache = params.actor.forward(obs)
    values, critic_cache = params.critic.forward(obs)
    values = values[:, 0]
    std = np.exp(params.log_std)

    new_log_probs = log_prob(mean, params.log_std, actions)
    ratio = np.exp(new_log_probs - old_log_probs)
    unclipped = ratio * advantages
    clipped = np.clip(ratio, 1.0 - eps, 1.0 + eps) * advantages
    surrogate = np.minimum(unclipped, clipped)
    policy_loss = -float(surrogate.mean())
    value_loss = float(np.mean((values - returns) ** 2))
    ent = entropy(params.log_std)
    loss = policy_loss + config.value_coeff * value_loss - config.entropy_coeff * ent

    # the unclipped branch carries the gradient wherever min() selects it
    d_surrogate_d_ratio = np.where(unclipped <= clipped, advantages, 0.0)
    d_loss_d_logp = -(d_surrogate_d_ratio * ratio) / batch
    z = (actions - mean) / std
    d_loss_d_mean = d_loss_d_logp[:, None] * z / std
    d_loss_d_log_std = (d_loss_d_logp[:, None] * (z * z - 1.0)).sum(axis=0) - config.entropy_coeff
    d_loss_d_value = config.value_coeff * 2.0 * (values - returns) / batch

    grads = (
        params.actor.backward(actor_cache, d_loss_d_mean)
        + params.critic.backward(critic_cache, d_loss_d_value[:, None])
        + [d_loss_d_log_std]
    )
    stats = {
        "policy_loss": policy_loss,
        "value_loss": value_loss,
        "entropy": ent,
        "clip_fraction": float(np.mean(np.abs(ratio - 1.0) > eps)),
        "approx_kl": float(np.mean(old_log_probs - new_log_probs)),
    }
    return loss, stats, grads


def ppo_update(
    params: PolicyParams,
    buffer: RolloutBuffer,
    config: PpoConfig,
    optimizer: Adam,
    rng: np.random.Generator,
    allow_partial: bool = False,
) -> Tuple[PolicyParams, PpoStats]:
    """num_epoch passes of shuffled minibatch Adam steps over the buffer.

    The returned parameters are a new object; on a non-finite loss the update is
    abandoned, the input parameters are returned unchanged and stats.aborted is set.
    """
    if buffer.size == 0:
        raise RolloutError("rollout buffer is empty")
    if not buffer.full and not allow_partial:
        raise RolloutError(f"rollout buffer holds {buffer.size} of {buffer.capacity} steps")

    advantages, returns = compute_gae(buffer, config.gamma, config.gae_lambda)
    data: RolloutBatch = flatten(buffer, advantages, returns)
    updated = params.copy()
    trainable = updated.parameters()
    stats = PpoStats()
    totals = {"policy_loss": 0.0, "value_loss": 0.0, "entropy": 0.0, "clip_fraction": 0.0, "approx_kl": 0.0}
    norms = 0.0

    for _ in range(config.num_epoch):
        order = rng.permutation(len(data))
        for start in range(0, len(data), config.batch_size):
            idx = order[start:start + config.batch_size]
            loss, batch_stats, grads = ppo_loss_and_grads(
                updated,
                data.obs[idx],
                data.actions[idx],
                data.log_probs[idx],
                data.advantages[idx],
                data.returns[idx],
                config,
            )
            if not np.isfinite(loss) or not all(np.all(np.isfinite(g)) for g in grads):
                logger.warning(f"Non-finite PPO loss after {stats.minibatches} minibatches, update aborted")
                return params, PpoStats(aborted=True, minibatches=stats.minibatches)
            grads, norm = clip_by_global_norm(grads, config.max_grad_norm)
            optimizer.step(trainable, grads)
            for key in totals:
                totals[key] += batch_stats[key]
            norms += norm
            stats.minibatches += 1

    for key, total in totals.items():
        setattr(stats, key, total / stats.minibatches)
    stats.grad_norm = norms / stats.minibatches
    return updated, stats
