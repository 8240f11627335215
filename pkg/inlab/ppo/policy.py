"""Actor-critic parameters and the diagonal Gaussian policy.

The actor outputs the raw Gaussian mean; the action handed to the robot is the
mean clipped to [-1, 1] (deterministic) or a sample around the raw mean
(stochastic). Log-probabilities are always taken on the pre-clip sample.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from ..shared.errors import ConfigurationError
from .networks import Mlp

ACTOR_HIDDEN = (512, 512, 512)
CRITIC_HIDDEN = (128, 128)
INITIAL_STD = 0.3
ACTOR_OUTPUT_GAIN = 0.01

_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass
class PolicyParams:
    actor: Mlp
    critic: Mlp
    log_std: np.ndarray

    @property
    def obs_dim(self) -> int:
        return self.actor.input_dim

    @property
    def act_dim(self) -> int:
        return self.actor.output_dim

    def parameters(self) -> List[np.ndarray]:
        """Every trainable array: actor (W, b)..., critic (W, b)..., log_std."""
        return self.actor.parameters() + self.critic.parameters() + [self.log_std]

    def copy(self) -> "PolicyParams":
        return PolicyParams(self.actor.copy(), self.critic.copy(), self.log_std.copy())


def init_policy(
    obs_dim: int,
    act_dim: int,
    rng: np.random.Generator,
    actor_hidden: Sequence[int] = ACTOR_HIDDEN,
    critic_hidden: Sequence[int] = CRITIC_HIDDEN,
    initial_std: float = INITIAL_STD,
) -> PolicyParams:
    actor = Mlp.initialized([obs_dim, *actor_hidden, act_dim], rng, output_gain=ACTOR_OUTPUT_GAIN)
    critic = Mlp.initialized([obs_dim, *critic_hidden, 1], rng)
    return PolicyParams(actor=actor, critic=critic, log_std=np.full(act_dim, math.log(initial_std)))


def check_obs(params: PolicyParams, obs: np.ndarray) -> np.ndarray:
    obs = np.asarray(obs, dtype=float)
    if obs.shape[-1] != params.obs_dim:
        raise ConfigurationError(f"observation has {obs.shape[-1]} entries, policy expects {params.obs_dim}")
    return obs


def raw_mean(params: PolicyParams, obs: np.ndarray) -> np.ndarray:
    obs = check_obs(params, obs)
    out = params.actor(obs)
    return out[0] if obs.ndim == 1 else out


def policy_forward(params: PolicyParams, obs: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Deterministic action mean clipped to [-1, 1], and the log standard deviation."""
    return np.clip(raw_mean(params, obs), -1.0, 1.0), params.log_std


def value(params: PolicyParams, obs: np.ndarray) -> np.ndarray:
    obs = check_obs(params, obs)
    out = params.critic(obs)[:, 0]
    return out[0] if obs.ndim == 1 else out


def log_prob(mean: np.ndarray, log_std: np.ndarray, actions: np.ndarray) -> np.ndarray:
    """Diagonal Gaussian log-density, summed over action dimensions."""
    z = (np.asarray(actions) - mean) / np.exp(log_std)
    return np.sum(-0.5 * z * z - log_std - _HALF_LOG_2PI, axis=-1)


def entropy(log_std: np.ndarray) -> float:
    return float(np.sum(log_std + 0.5 + _HALF_LOG_2PI))


def sample_action(params: PolicyParams, obs: np.ndarray, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """Gaussian sample around the raw mean and its log-probability.

    Accepts one observation or a batch; the log-probability has the batch shape.
    """
    mean = raw_mean(params, obs)
    action = mean + np.exp(params.log_std) * rng.standard_normal(mean.shape)
    return action, log_prob(mean, params.log_std, action)
