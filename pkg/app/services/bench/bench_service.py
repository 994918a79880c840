import logging
import statistics
import time
from typing import Callable, List, Optional, Sequence

import numpy as np

from app.core.config import settings
from app.core.exceptions import SimulationConfigError
from app.schemas.audio import AudioBuffer
from app.schemas.bench import BenchEntry, BenchReport
from app.schemas.convolution import ConvolutionPlan, CostInputs, Strategy
from app.schemas.room import Placement, RoomConfig, Rir
from app.services.convolution.cost_model import plan_for
from app.services.convolution.fft_backend import get_backend
from app.services.convolution.filters import convolve
from app.services.room.image_source import synthesize_rir
from app.services.room.truncation import truncate_rir

logger = logging.getLogger(__name__)

# 학습셋 평균 발화/RIR 길이 (16 kHz)
AVERAGE_SIGNAL_LEN = 116991
AVERAGE_RIR_LEN = 3893
DEFAULT_ETA_LIST = (None, 20.0, 10.0)
# 직접 컨볼루션은 N_x * N_h 가 이 값 이하일 때만 측정
DIRECT_MAX_WORK = 5e8


def synthetic_rir(rir_len: int, sample_rate: int, rng: np.random.Generator) -> Rir:
    """지수 감쇠 잡음 RIR (마지막 탭에서 진폭 -60 dB)"""
    n = np.arange(rir_len)
    envelope = np.exp(-np.log(1000.0) * n / max(rir_len - 1, 1))
    taps = envelope * rng.uniform(0.2, 1.0, rir_len)
    taps[0] = 1.0
    return Rir(samples=taps, sample_rate=sample_rate)


def average_room_rir(sample_rate: int) -> Rir:
    """평균 크기 방의 이미지 방법 RIR"""
    room = RoomConfig(dimensions=(6.5, 5.5, 3.5), reflection_coefficient=0.7, sample_rate=sample_rate)
    return synthesize_rir(room, Placement(position=(2.0, 3.0, 1.5)), Placement(position=(4.5, 2.5, 1.2)))


class BenchService:
    def __init__(self, backend_name: Optional[str] = None, min_trials: Optional[int] = None):
        self.backend_name = backend_name or settings.FFT_BACKEND
        self.backend = get_backend(self.backend_name)
        self.min_trials = min_trials if min_trials is not None else settings.BENCH_MIN_TRIALS

    def _time(self, work: Callable[[], None], trials: int) -> List[float]:
        work()  # 워밍업 (측정 제외)
        timings = []
        for _ in range(trials):
            started = time.perf_counter()
            work()
            timings.append((time.perf_counter() - started) * 1000.0)
        return timings

    def _entry(
        self,
        signal: AudioBuffer,
        rir: Rir,
        strategy: Strategy,
        eta_db: Optional[float],
        num_sources: int,
        num_mics: int,
        trials: int,
    ) -> BenchEntry:
        inputs = CostInputs(num_sources=1, num_mics=1, signal_len=signal.length, rir_len=rir.length)
        pair_plan: ConvolutionPlan = plan_for(inputs, strategy)

        def work() -> None:
            for _ in range(num_sources * num_mics):
                convolve(signal, rir, pair_plan, self.backend)

        timings = self._time(work, trials)
        entry = BenchEntry(
            strategy=strategy,
            eta_db=eta_db,
            fft_size=pair_plan.fft_size,
            rir_len=rir.length,
            mean_ms=statistics.fmean(timings),
            std_ms=statistics.stdev(timings) if len(timings) > 1 else 0.0,
            trials=trials,
        )
        logger.info(
            f"{strategy.value:<12} eta={entry.eta_label:<5} N={pair_plan.fft_size} "
            f"N_h={rir.length} mean={entry.mean_ms:.2f}ms"
        )
        return entry

    def run(
        self,
        trials: int = 20,
        signal_len: int = AVERAGE_SIGNAL_LEN,
        rir_len: int = AVERAGE_RIR_LEN,
        eta_list: Sequence[Optional[float]] = DEFAULT_ETA_LIST,
        profile: str = "synthetic",
        include_direct: bool = False,
        num_sources: int = 1,
        num_mics: int = 1,
        sample_rate: int = 16000,
        seed: int = 0,
    ) -> BenchReport:
        """전략/꼬리 제거 임계값별 발화당 평균 처리 시간 측정"""
        if trials < self.min_trials:
            raise SimulationConfigError(f"trials must be >= {self.min_trials}, got {trials}")

        rng = np.random.default_rng(seed)
        signal = AudioBuffer.mono(rng.standard_normal(signal_len), sample_rate)
        if profile == "synthetic":
            base_rir = synthetic_rir(rir_len, sample_rate, rng)
        elif profile == "image":
            base_rir = average_room_rir(sample_rate)
        else:
            raise SimulationConfigError(f"unknown bench profile '{profile}'")

        logger.info(
            f"=== 벤치마크 시작 === N_x={signal_len}, N_h={base_rir.length}, trials={trials}, "
            f"backend={self.backend_name}"
        )
        entries = []
        if include_direct and signal_len * base_rir.length <= DIRECT_MAX_WORK:
            entries.append(self._entry(signal, base_rir, Strategy.DIRECT, None, num_sources, num_mics, trials))

        for eta_db in eta_list:
            rir = base_rir if eta_db is None else truncate_rir(base_rir, eta_db)
            for strategy in (Strategy.FULL_FFT, Strategy.OVERLAP_ADD):
                entries.append(self._entry(signal, rir, strategy, eta_db, num_sources, num_mics, trials))

        report = BenchReport(
            signal_len=signal_len,
            rir_len=base_rir.length,
            num_sources=num_sources,
            num_mics=num_mics,
            min_trials=self.min_trials,
            backend=self.backend_name,
            entries=entries,
        )
        return report.with_speedups()


def _speedup_label(speedup: Optional[float]) -> str:
    return "n/a" if speedup is None else f"{speedup:.2f}x"


def format_report(report: BenchReport) -> str:
    """텍스트 표"""
    lines = [
        f"N_x={report.signal_len} N_h={report.rir_len} I={report.num_sources} J={report.num_mics} "
        f"backend={report.backend}",
        f"{'strategy':<12} {'eta_db':>6} {'N':>8} {'N_h':>6} {'mean_ms':>9} {'std_ms':>8} {'trials':>6} {'speedup':>8}",
    ]
    for e in report.entries:
        lines.append(
            f"{e.strategy.value:<12} {e.eta_label:>6} {str(e.fft_size or '-'):>8} {e.rir_len:>6} "
            f"{e.mean_ms:>9.2f} {e.std_ms:>8.2f} {e.trials:>6} {_speedup_label(e.speedup):>8}"
        )
    return "\n".join(lines)
