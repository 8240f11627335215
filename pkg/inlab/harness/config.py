"""Experiment configuration: one JSON document validated by pydantic models."""
from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import List, Literal, Optional, Union

from pydantic import BaseModel, Field, ValidationError, model_validator

from ..actionpipe.pipeline import KB_MAX, FeedbackConfig
from ..gaitgen.gaits import BIPED_GAITS, BIPED_JOINTS, QUADRUPED_GAITS, QUADRUPED_JOINTS, GaitParams
from ..obsrew.observations import ObservationVariant
from ..obsrew.rewards import REWARD_PRESETS, RewardConfig, get_preset, preset_for_gait
from ..planarsim.contact import ContactParams
from ..planarsim.model import ModelOverrides
from ..planarsim.simulator import DisturbanceConfig, SimConfig
from ..ppo.trainer import PpoConfig
from ..shared.config import get_workers
from ..shared.errors import ConfigurationError

logger = logging.getLogger(__name__)

Mode = Literal["IML", "IML_RO", "INL", "INL_RO"]
MODES = ("IML", "IML_RO", "INL", "INL_RO")


def _online_ppo() -> PpoConfig:
    # one 3.3 s walking episode per update
    return PpoConfig(batch_size=110, buffer_size=330)


class OnlineProtocolConfig(BaseModel):
    """Episodic learn-while-walking schedule (durations in seconds)."""

    gait: str = "trot"
    walk_duration: float = Field(default=3.3, gt=0.0)
    update_duration: float = Field(default=1.2, ge=0.0)
    recovery_duration: float = Field(default=1.0, gt=0.0)
    total_minutes: float = Field(default=20.0, gt=0.0)
    k_b: Union[float, List[float]] = 0.07
    ppo: PpoConfig = Field(default_factory=_online_ppo)

    @property
    def episode_duration(self) -> float:
        return self.walk_duration + self.update_duration + self.recovery_duration

    @property
    def episode_count(self) -> int:
        return int(self.total_minutes * 60.0 // self.episode_duration)


class TrainConfig(BaseModel):
    robot: Literal["biped", "quadruped"] = "quadruped"
    gait: str = "stepping"
    mode: Mode = "INL"
    k_b: Union[float, List[float]] = 0.5
    reward_preset: Optional[str] = None
    observation: Optional[ObservationVariant] = None
    total_steps: int = Field(default=2_000_000, gt=0)
    num_envs: int = Field(default=12, ge=1)
    workers: int = Field(default_factory=get_workers, ge=1)
    seed: int = 0
    checkpoint_interval: int = Field(default=10, ge=0)
    progress: bool = True
    gait_params: GaitParams = Field(default_factory=GaitParams)
    sim: SimConfig = Field(default_factory=SimConfig)
    contact: ContactParams = Field(default_factory=ContactParams)
    disturbance: DisturbanceConfig = Field(default_factory=DisturbanceConfig)
    model: ModelOverrides = Field(default_factory=ModelOverrides)
    ppo: PpoConfig = Field(default_factory=PpoConfig)
    online: OnlineProtocolConfig = Field(default_factory=OnlineProtocolConfig)

    @model_validator(mode="after")
    def _check_consistency(self) -> "TrainConfig":
        gaits = QUADRUPED_GAITS if self.robot == "quadruped" else BIPED_GAITS
        if self.gait not in gaits:
            raise ValueError(f"unknown {self.robot} gait '{self.gait}', expected one of {gaits}")
        if isinstance(self.k_b, list) and len(self.k_b) != self.joint_count:
            raise ValueError(f"k_b has {len(self.k_b)} entries, {self.robot} has {self.joint_count} joints")
        for kb in self.k_b if isinstance(self.k_b, list) else [self.k_b]:
            if not 0.0 <= kb <= KB_MAX:
                raise ValueError(f"k_b must lie in [0, {KB_MAX}], got {kb}")
        if self.reward_preset is not None:
            if self.reward_preset not in REWARD_PRESETS:
                raise ValueError(f"unknown reward preset '{self.reward_preset}'")
            if self.robot != "biped" and "sync" in REWARD_PRESETS[self.reward_preset].components:
                raise ValueError(f"reward preset '{self.reward_preset}' needs a biped")
        ro = self.mode.endswith("_RO")
        if self.observation is not None and (self.observation == "full_RO") != ro:
            raise ValueError(f"mode {self.mode} cannot use observation variant '{self.observation}'")
        return self

    @property
    def joint_count(self) -> int:
        return len(QUADRUPED_JOINTS if self.robot == "quadruped" else BIPED_JOINTS)

    @property
    def feedback(self) -> FeedbackConfig:
        """IML and IML_RO act on the filtered feedback alone; INL modes add the feedforward."""
        return FeedbackConfig(mode="IML" if self.mode.startswith("IML") else "INL", k_b=self.k_b)

    @property
    def observation_variant(self) -> str:
        if self.mode.endswith("_RO"):
            return "full_RO"
        return self.observation or "full"

    @property
    def reward(self) -> RewardConfig:
        if self.reward_preset is not None:
            return get_preset(self.reward_preset)
        return preset_for_gait(self.robot, self.gait)

    def online_run_config(self) -> "TrainConfig":
        """Single-copy INL configuration used by the online protocol."""
        online = self.online
        sim = self.sim.model_copy(update={"max_steps": 10 ** 9})
        return self.model_copy(
            update={
                "robot": "quadruped",
                "gait": online.gait,
                "mode": "INL",
                "k_b": online.k_b,
                "reward_preset": "online_walk",
                "observation": "hardware",
                "num_envs": 1,
                "workers": 1,
                "sim": sim,
                "ppo": online.ppo,
            }
        )


def parse_config(data: dict) -> TrainConfig:
    try:
        return TrainConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigurationError(f"invalid training config: {e}") from e


def load_config(path: Path | str | None) -> TrainConfig:
    """Load a JSON training config; None yields the defaults."""
    if path is None:
        return TrainConfig()
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigurationError(f"cannot read config {path}: {e}") from e
    config = parse_config(data)
    logger.info(f"Loaded config {path}: {config.robot}/{config.gait} mode={config.mode}")
    return config


def apply_overrides(
    config: TrainConfig,
    seed: Optional[int] = None,
    steps: Optional[int] = None,
    envs: Optional[int] = None,
    workers: Optional[int] = None,
) -> TrainConfig:
    """Command-line overrides, re-validated."""
    data = config.model_dump()
    for key, value in (("seed", seed), ("total_steps", steps), ("num_envs", envs), ("workers", workers)):
        if value is not None:
            data[key] = value
    return parse_config(data)
