"""Binary policy checkpoints.

Layout (little endian):

    magic        8 bytes  b"INLABPPO"
    version      u4
    variant id   u4       observation layout variant (0 full, 1 full_RO, 2 hardware)
    actor depth  u4, followed by that many u4 layer sizes
    critic depth u4, followed by that many u4 layer sizes
    arrays       f8, row-major: actor (W, b) per layer, critic (W, b) per layer, log_std
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import List, Tuple

import numpy as np

from ..shared.errors import CheckpointFormatError, ConfigurationError
from .networks import Mlp
from .policy import PolicyParams

logger = logging.getLogger(__name__)

MAGIC = b"INLABPPO"
VERSION = 1
VARIANT_IDS = {"full": 0, "full_RO": 1, "hardware": 2}
VARIANT_NAMES = {v: k for k, v in VARIANT_IDS.items()}

_U4 = np.dtype("<u4")
_F8 = np.dtype("<f8")


def _u4(values) -> bytes:
    return np.asarray(values, dtype=_U4).tobytes()


def save_checkpoint(params: PolicyParams, path: Path | str, variant: str = "full") -> None:
    if variant not in VARIANT_IDS:
        raise ConfigurationError(f"unknown observation variant '{variant}'")
    chunks = [
        MAGIC,
        _u4([VERSION, VARIANT_IDS[variant], len(params.actor.sizes)]),
        _u4(params.actor.sizes),
        _u4([len(params.critic.sizes)]),
        _u4(params.critic.sizes),
    ]
    for array in params.parameters():
        chunks.append(np.ascontiguousarray(array, dtype=_F8).tobytes())
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(b"".join(chunks))
    logger.info(f"Checkpoint written to {path}")


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.offset = 0

    def take(self, dtype: np.dtype, count: int) -> np.ndarray:
        end = self.offset + dtype.itemsize * count
        if end > len(self.data):
            raise CheckpointFormatError("checkpoint is truncated")
        out = np.frombuffer(self.data, dtype=dtype, count=count, offset=self.offset)
        self.offset = end
        return out

    def sizes(self) -> List[int]:
        depth = int(self.take(_U4, 1)[0])
        if depth < 2:
            raise CheckpointFormatError(f"invalid layer table of depth {depth}")
        return [int(s) for s in self.take(_U4, depth)]


def _read_mlp(reader: _Reader, sizes: List[int]) -> Mlp:
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        weights.append(reader.take(_F8, fan_in * fan_out).reshape(fan_in, fan_out).astype(float))
        biases.append(reader.take(_F8, fan_out).astype(float))
    return Mlp(sizes, weights, biases)


def load_checkpoint(path: Path | str) -> Tuple[PolicyParams, str]:
    """Read a checkpoint.

    Returns:
        (params, observation variant name)

    Raises:
        CheckpointFormatError: bad magic, unsupported version or truncated file
    """
    data = Path(path).read_bytes()
    if data[: len(MAGIC)] != MAGIC:
        raise CheckpointFormatError(f"{path} is not a policy checkpoint")
    reader = _Reader(data)
    reader.offset = len(MAGIC)
    version, variant_id = (int(x) for x in reader.take(_U4, 2))
    if version != VERSION:
        raise CheckpointFormatError(f"unsupported checkpoint version {version}")
    if variant_id not in VARIANT_NAMES:
        raise CheckpointFormatError(f"unknown observation variant id {variant_id}")
    actor_sizes = reader.sizes()
    critic_sizes = reader.sizes()
    actor = _read_mlp(reader, actor_sizes)
    critic = _read_mlp(reader, critic_sizes)
    log_std = reader.take(_F8, actor_sizes[-1]).astype(float)
    if reader.offset != len(data):
        raise CheckpointFormatError(f"{len(data) - reader.offset} trailing bytes in checkpoint")
    return PolicyParams(actor=actor, critic=critic, log_std=log_std), VARIANT_NAMES[variant_id]


def check_compatible(params: PolicyParams, obs_dim: int, act_dim: int) -> None:
    """Raise ConfigurationError when a loaded policy does not fit the configured robot."""
    if params.obs_dim != obs_dim or params.act_dim != act_dim:
        raise ConfigurationError(
            f"checkpoint policy maps {params.obs_dim} observations to {params.act_dim} actions, "
            f"config needs {obs_dim} -> {act_dim}"
        )
