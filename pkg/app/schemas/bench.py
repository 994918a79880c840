from typing import List, Optional

from pydantic import BaseModel, Field, model_validator

from .convolution import Strategy


class BenchEntry(BaseModel):
    """전략별 측정 결과"""
    strategy: Strategy
    eta_db: Optional[float] = None
    fft_size: Optional[int] = None
    rir_len: int
    mean_ms: float
    std_ms: float = 0.0
    trials: int
    # 측정 시간이 0 이면 None (JSON 에 Infinity 를 쓰지 않음)
    speedup: Optional[float] = 1.0

    @property
    def eta_label(self) -> str:
        return "none" if self.eta_db is None else f"{self.eta_db:g}"


class BenchReport(BaseModel):
    """Avg. time per utterance 비교 리포트"""
    signal_len: int
    rir_len: int
    num_sources: int
    num_mics: int
    min_trials: int = 5
    backend: str
    entries: List[BenchEntry] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_trials(self) -> "BenchReport":
        for entry in self.entries:
            if entry.trials < self.min_trials:
                raise ValueError(
                    f"{entry.strategy.value} ran {entry.trials} trials, minimum is {self.min_trials}"
                )
        return self

    def with_speedups(self) -> "BenchReport":
        """가장 느린 항목 대비 속도 향상 계산"""
        if not self.entries:
            return self
        slowest = max(entry.mean_ms for entry in self.entries)
        entries = [
            entry.model_copy(update={"speedup": slowest / entry.mean_ms if entry.mean_ms > 0 else None})
            for entry in self.entries
        ]
        return self.model_copy(update={"entries": entries})

    def find(self, strategy: Strategy, eta_db: Optional[float] = None) -> Optional[BenchEntry]:
        for entry in self.entries:
            if entry.strategy == strategy and entry.eta_db == eta_db:
                return entry
        return None
