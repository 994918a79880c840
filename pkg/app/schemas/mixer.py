from typing import List, Optional

import numpy as np
from pydantic import BaseModel, Field, PositiveInt, field_serializer, field_validator, model_validator

from .audio import AudioBuffer
from .room import Rir


class SceneSource(BaseModel):
    """음원 하나: 건조 신호와 마이크별 RIR"""
    signal: AudioBuffer
    rirs: List[Rir]
    snr_db: Optional[float] = None


class Scene(BaseModel):
    """타깃 음원 + 잡음 음원들"""
    target: SceneSource
    noises: List[SceneSource] = Field(default_factory=list)
    mic_count: PositiveInt
    max_noise_sources: int = Field(default=3, ge=0)

    @model_validator(mode="after")
    def _check_sources(self) -> "Scene":
        if len(self.noises) > self.max_noise_sources:
            raise ValueError(
                f"{len(self.noises)} noise sources exceed the limit of {self.max_noise_sources}"
            )
        rate = self.target.signal.sample_rate
        for index, source in enumerate(self.sources):
            if not source.signal.is_mono:
                raise ValueError(f"source {index} signal must be mono")
            if len(source.rirs) != self.mic_count:
                raise ValueError(
                    f"source {index} has {len(source.rirs)} RIRs, expected {self.mic_count}"
                )
            rates = {source.signal.sample_rate, *(rir.sample_rate for rir in source.rirs)}
            if rates != {rate}:
                raise ValueError(f"source {index} sample rates {sorted(rates)} differ from {rate}")
        for index, noise in enumerate(self.noises, start=1):
            if noise.snr_db is None:
                raise ValueError(f"noise source {index} has no snr_db")
        return self

    @property
    def sources(self) -> List[SceneSource]:
        return [self.target, *self.noises]

    @property
    def sample_rate(self) -> int:
        return self.target.signal.sample_rate


class MixOutput(BaseModel):
    """마이크별 수신 신호와 적용된 이득 (I x J)"""
    channels: AudioBuffer
    gains: np.ndarray

    class Config:
        arbitrary_types_allowed = True

    @field_validator("gains", mode="before")
    @classmethod
    def _as_matrix(cls, value):
        return np.atleast_2d(np.asarray(value, dtype=np.float64))

    @field_serializer("gains")
    def _serialize_gains(self, gains: np.ndarray) -> List[List[float]]:
        return gains.tolist()

    @property
    def mic_count(self) -> int:
        return self.channels.channel_count
