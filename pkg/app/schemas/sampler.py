from typing import List, Optional, Tuple

from pydantic import BaseModel, Field, PositiveInt, field_validator, model_validator

from .room import Placement, RoomConfig

Range = Tuple[float, float]


def _check_range(value: Range, name: str) -> Range:
    low, high = value
    if low > high:
        raise ValueError(f"{name}: min {low} > max {high}")
    return value


class SamplerSpec(BaseModel):
    """발화/에폭별 방 설정 샘플링 분포"""
    dimension_ranges: Tuple[Range, Range, Range] = ((3.0, 10.0), (3.0, 8.0), (2.5, 4.5))
    reflection_range: Range = (0.2, 0.8)
    noise_source_count_weights: Tuple[float, float, float, float] = (0.15, 0.35, 0.30, 0.20)
    snr_range_db: Range = (0.0, 30.0)
    mic_count: PositiveInt = 2
    mic_spacing: Optional[float] = Field(default=None, gt=0.0)
    min_wall_clearance: float = Field(default=0.2, ge=0.0)
    min_source_mic_distance: float = Field(default=0.3, ge=0.0)
    seed: int = Field(default=0, ge=0, lt=2 ** 64)
    sample_rate: int = Field(default=16000, gt=0)
    speed_of_sound: float = Field(default=343.0, gt=0.0)
    image_order: int = Field(default=8, ge=0)
    resample_per_epoch: bool = True

    @field_validator("dimension_ranges")
    @classmethod
    def _check_dimensions(cls, value):
        for axis, axis_range in zip("xyz", value):
            _check_range(axis_range, f"dimension_ranges.{axis}")
            if axis_range[0] <= 0:
                raise ValueError(f"dimension_ranges.{axis} must be positive")
        return value

    @field_validator("reflection_range")
    @classmethod
    def _check_reflection(cls, value):
        _check_range(value, "reflection_range")
        if not (0.0 < value[0] and value[1] < 1.0):
            raise ValueError("reflection_range must lie inside (0, 1)")
        return value

    @field_validator("snr_range_db")
    @classmethod
    def _check_snr(cls, value):
        return _check_range(value, "snr_range_db")

    @field_validator("noise_source_count_weights")
    @classmethod
    def _check_weights(cls, value):
        if any(w < 0 for w in value) or sum(value) <= 0:
            raise ValueError("noise_source_count_weights must be non-negative and not all zero")
        return value

    @property
    def noise_count_probabilities(self) -> List[float]:
        total = sum(self.noise_source_count_weights)
        return [w / total for w in self.noise_source_count_weights]

    @property
    def expected_noise_count(self) -> float:
        return sum(count * p for count, p in enumerate(self.noise_count_probabilities))


class SceneDraw(BaseModel):
    """sample_scene 결과"""
    room: RoomConfig
    target: Placement
    noises: List[Placement] = Field(default_factory=list)
    mics: List[Placement]
    snrs_db: List[float] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_lengths(self) -> "SceneDraw":
        if len(self.noises) != len(self.snrs_db):
            raise ValueError("one SNR per noise source is required")
        return self

    @property
    def sources(self) -> List[Placement]:
        return [self.target, *self.noises]


class SimulationConfig(BaseModel):
    """JSON 설정 파일 전체"""
    room: Optional[RoomConfig] = None
    source: Optional[Placement] = None
    mics: List[Placement] = Field(default_factory=list)
    sampler: SamplerSpec = Field(default_factory=SamplerSpec)
