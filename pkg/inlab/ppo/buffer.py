"""Rollout storage and generalized advantage estimation."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..shared.errors import RolloutError


class RolloutBuffer:
    """Storage for `capacity` control steps shared by `num_envs` environment copies.

    Copy e owns column e of every [rows, num_envs] array and a quota of
    capacity // num_envs steps, the first capacity % num_envs copies one more.
    `dones[t, e]` marks that the episode of copy e ended after its step t. When an
    episode is cut by the step limit rather than a fall, `bootstrap[t, e]` holds the
    critic's value of the final observation; it is zero for true terminations.
    """

    def __init__(self, capacity: int, num_envs: int, obs_dim: int, act_dim: int):
        if capacity < 1 or num_envs < 1:
            raise RolloutError(f"invalid rollout buffer of {capacity} steps over {num_envs} copies")
        self.capacity = capacity
        self.num_envs = num_envs
        base, extra = divmod(capacity, num_envs)
        self.quotas = np.full(num_envs, base, dtype=int)
        self.quotas[:extra] += 1
        rows = int(self.quotas.max())
        self.obs = np.zeros((rows, num_envs, obs_dim))
        self.actions = np.zeros((rows, num_envs, act_dim))
        self.log_probs = np.zeros((rows, num_envs))
        self.rewards = np.zeros((rows, num_envs))
        self.values = np.zeros((rows, num_envs))
        self.dones = np.zeros((rows, num_envs), dtype=bool)
        self.bootstrap = np.zeros((rows, num_envs))
        self.last_values = np.zeros(num_envs)
        self.counts = np.zeros(num_envs, dtype=int)

    @property
    def size(self) -> int:
        return int(self.counts.sum())

    @property
    def full(self) -> bool:
        return bool(np.all(self.counts == self.quotas))

    @property
    def active(self) -> np.ndarray:
        """Copies that still have room."""
        return self.counts < self.quotas

    def add(self, obs, actions, log_probs, rewards, values, dones, bootstrap=None, envs=None) -> None:
        """Store one step for the given copies (default: every copy with room).

        Every argument holds one entry per listed copy, in the order of `envs`.
        """
        envs = np.flatnonzero(self.active) if envs is None else np.asarray(envs, dtype=int)
        if envs.size == 0:
            raise RolloutError("rollout buffer is full")
        if np.any(self.counts[envs] >= self.quotas[envs]):
            raise RolloutError(f"environment copies {envs.tolist()} exceed their step quota")
        rows = self.counts[envs]
        self.obs[rows, envs] = obs
        self.actions[rows, envs] = actions
        self.log_probs[rows, envs] = log_probs
        self.rewards[rows, envs] = rewards
        self.values[rows, envs] = values
        self.dones[rows, envs] = dones
        self.bootstrap[rows, envs] = 0.0 if bootstrap is None else bootstrap
        self.counts[envs] += 1

    def finish(self, last_values: np.ndarray) -> None:
        """Critic values of the observations following the last stored step of each copy."""
        self.last_values = np.asarray(last_values, dtype=float).reshape(self.num_envs)

    def clear(self) -> None:
        self.counts[:] = 0
        self.dones[:] = False
        self.bootstrap[:] = 0.0
        self.last_values[:] = 0.0


def gae(
    rewards: np.ndarray,
    values: np.ndarray,
    dones: np.ndarray,
    last_values,
    gamma: float,
    lam: float,
    bootstrap: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Generalized advantage estimation along the first (time) axis.

    Works on a single trajectory [T] or time-major copies [T, E].

    Returns:
        (advantages, returns) with returns = advantages + values
    """
    rewards = np.asarray(rewards, dtype=float)
    if rewards.size == 0:
        raise RolloutError("cannot estimate advantages of an empty rollout")
    values = np.asarray(values, dtype=float)
    dones = np.asarray(dones, dtype=bool)
    bootstrap = np.zeros_like(rewards) if bootstrap is None else np.asarray(bootstrap, dtype=float)

    advantages = np.zeros_like(rewards)
    next_value = np.asarray(last_values, dtype=float)
    next_adv = np.zeros_like(next_value)
    for t in reversed(range(rewards.shape[0])):
        alive = 1.0 - dones[t]
        delta = rewards[t] + gamma * (alive * next_value + dones[t] * bootstrap[t]) - values[t]
        next_adv = delta + gamma * lam * alive * next_adv
        advantages[t] = next_adv
        next_value = values[t]
    return advantages, advantages + values


def normalize_advantages(advantages: np.ndarray) -> np.ndarray:
    centred = advantages - advantages.mean()
    std = advantages.std()
    if std < 1e-12:
        return centred
    return centred / std


@dataclass
class RolloutBatch:
    """Flattened rollout in (env index, step) order, ready for minibatching."""

    obs: np.ndarray
    actions: np.ndarray
    log_probs: np.ndarray
    advantages: np.ndarray
    returns: np.ndarray

    def __len__(self) -> int:
        return len(self.log_probs)


def _merge(buffer: RolloutBuffer, array: np.ndarray) -> np.ndarray:
    return np.concatenate([array[: buffer.counts[e], e] for e in range(buffer.num_envs)])


def compute_gae(buffer: RolloutBuffer, gamma: float, lam: float, normalize: bool = True) -> Tuple[np.ndarray, np.ndarray]:
    """Advantages and returns of every stored step, flattened in (env index, step) order.

    Returns are computed from the raw advantages; only the advantages are normalized.
    """
    if buffer.size == 0:
        raise RolloutError("rollout buffer is empty")
    advantages, returns = [], []
    for e in range(buffer.num_envs):
        n = buffer.counts[e]
        if n == 0:
            continue
        adv, ret = gae(
            buffer.rewards[:n, e],
            buffer.values[:n, e],
            buffer.dones[:n, e],
            buffer.last_values[e],
            gamma,
            lam,
            buffer.bootstrap[:n, e],
        )
        advantages.append(adv)
        returns.append(ret)
    advantages, returns = np.concatenate(advantages), np.concatenate(returns)
    if normalize:
        advantages = normalize_advantages(advantages)
    return advantages, returns


def flatten(buffer: RolloutBuffer, advantages: np.ndarray, returns: np.ndarray) -> RolloutBatch:
    return RolloutBatch(
        obs=_merge(buffer, buffer.obs),
        actions=_merge(buffer, buffer.actions),
        log_probs=_merge(buffer, buffer.log_probs),
        advantages=advantages,
        returns=returns,
    )
