from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, PositiveFloat, field_serializer, field_validator

Vector3 = Tuple[float, float, float]


class RoomConfig(BaseModel):
    """직육면체 방 설정"""
    dimensions: Tuple[PositiveFloat, PositiveFloat, PositiveFloat]
    reflection_coefficient: float = Field(gt=0.0, lt=1.0)
    sample_rate: int = Field(default=16000, gt=0)
    speed_of_sound: float = Field(default=343.0, gt=0.0)
    image_order: int = Field(default=8, ge=0)
    t60_estimate: Optional[float] = None

    class Config:
        frozen = True

    @property
    def virtual_source_count(self) -> int:
        return (2 * self.image_order + 1) ** 3


class Placement(BaseModel):
    """방 안의 음원 또는 마이크 위치 (m)"""
    position: Vector3

    class Config:
        frozen = True

    def is_inside(self, room: RoomConfig) -> bool:
        return all(0.0 < p < length for p, length in zip(self.position, room.dimensions))

    def distance_to(self, other: "Placement") -> float:
        return float(np.linalg.norm(np.subtract(self.position, other.position)))


class Rir(BaseModel):
    """샘플링된 룸 임펄스 응답"""
    samples: np.ndarray
    sample_rate: int = Field(gt=0)
    truncation_db: Optional[float] = None

    class Config:
        arbitrary_types_allowed = True

    @field_validator("samples", mode="before")
    @classmethod
    def _as_taps(cls, value):
        samples = np.asarray(value, dtype=np.float64)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("RIR samples must be a non-empty 1-D sequence")
        return samples

    @field_serializer("samples")
    def _serialize_samples(self, samples: np.ndarray) -> List[float]:
        return samples.tolist()

    @property
    def length(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.length / self.sample_rate
