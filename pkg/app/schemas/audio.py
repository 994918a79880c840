from enum import Enum
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, Field, field_serializer, field_validator, model_validator


class WavFormat(str, Enum):
    """WAV 출력 포맷"""
    PCM16 = "pcm16"
    FLOAT32 = "float32"


class AudioBuffer(BaseModel):
    """오디오 버퍼 (채널 x 샘플, float64)"""
    samples: np.ndarray
    sample_rate: int = Field(gt=0)

    class Config:
        arbitrary_types_allowed = True

    @field_validator("samples", mode="before")
    @classmethod
    def _as_channels(cls, value):
        samples = np.asarray(value, dtype=np.float64)
        if samples.ndim == 1:
            samples = samples[np.newaxis, :]
        if samples.ndim != 2:
            raise ValueError(f"samples must be 1-D or 2-D, got {samples.ndim}-D")
        return samples

    @field_serializer("samples")
    def _serialize_samples(self, samples: np.ndarray) -> List[List[float]]:
        return samples.tolist()

    @classmethod
    def mono(cls, samples, sample_rate: int) -> "AudioBuffer":
        return cls(samples=np.asarray(samples, dtype=np.float64).reshape(1, -1), sample_rate=sample_rate)

    @property
    def channel_count(self) -> int:
        return self.samples.shape[0]

    @property
    def length(self) -> int:
        return self.samples.shape[1]

    @property
    def duration(self) -> float:
        return self.length / self.sample_rate

    @property
    def is_mono(self) -> bool:
        return self.channel_count == 1

    def channel(self, index: int) -> np.ndarray:
        return self.samples[index]


class ManifestRecord(BaseModel):
    """매니페스트 한 줄"""
    utterance_id: str = Field(min_length=1)
    input_path: str = Field(min_length=1)
    output_path: str = Field(min_length=1)


class Manifest(BaseModel):
    """배치 처리 매니페스트"""
    records: List[ManifestRecord] = Field(default_factory=list)
    config_path: Optional[str] = None
    epoch: Optional[int] = None

    @model_validator(mode="after")
    def _unique_ids(self) -> "Manifest":
        seen = set()
        for record in self.records:
            if record.utterance_id in seen:
                raise ValueError(f"duplicate utterance_id: {record.utterance_id}")
            seen.add(record.utterance_id)
        return self
