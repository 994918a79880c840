from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, Field, PositiveFloat, PositiveInt, model_validator


class Strategy(str, Enum):
    """필터링 방식"""
    DIRECT = "direct"
    FULL_FFT = "full_fft"
    OVERLAP_ADD = "overlap_add"


def is_power_of_two(value: int) -> bool:
    return value >= 1 and (value & (value - 1)) == 0


class CostInputs(BaseModel):
    """비용 모델 입력 (I, J, N_x, N_h)"""
    num_sources: PositiveFloat
    num_mics: PositiveInt
    signal_len: PositiveInt
    rir_len: PositiveInt

    @property
    def full_len(self) -> int:
        return self.signal_len + self.rir_len - 1


class ConvolutionPlan(BaseModel):
    """선택된 필터링 방식과 FFT 크기"""
    strategy: Strategy
    fft_size: Optional[int] = None
    predicted_cost: Optional[float] = None

    @model_validator(mode="after")
    def _check_fft_size(self) -> "ConvolutionPlan":
        if self.fft_size is not None and not is_power_of_two(self.fft_size):
            raise ValueError(f"fft_size must be a power of two, got {self.fft_size}")
        if self.strategy == Strategy.DIRECT and self.fft_size is not None:
            raise ValueError("direct strategy takes no fft_size")
        return self


class CostRow(BaseModel):
    """비용 표의 한 행"""
    strategy: Strategy
    fft_size: Optional[int] = None
    block_count: Optional[int] = None
    cost: float
    is_best: bool = False


class CostTable(BaseModel):
    inputs: CostInputs
    rows: List[CostRow] = Field(default_factory=list)
    best: ConvolutionPlan
