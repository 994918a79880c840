import logging
from typing import List

from app.core.exceptions import PlanError
from app.schemas.convolution import (
    ConvolutionPlan,
    CostInputs,
    CostRow,
    CostTable,
    Strategy,
    is_power_of_two,
)

logger = logging.getLogger(__name__)

# 같은 비용, 같은 N 일 때 우선순위
_STRATEGY_RANK = {Strategy.FULL_FFT: 0, Strategy.OVERLAP_ADD: 1, Strategy.DIRECT: 2}


def next_pow2(n: int) -> int:
    return 1 << max(n - 1, 0).bit_length()


def _log2(n: int) -> int:
    return n.bit_length() - 1


def block_count(signal_len: int, rir_len: int, fft_size: int) -> int:
    """OLA 블록 수 ceil(N_x / (N - N_h + 1))"""
    block_len = fft_size - rir_len + 1
    if block_len < 1:
        raise PlanError(f"fft_size {fft_size} too small for RIR length {rir_len}")
    return -(-signal_len // block_len)


def cost_direct(c: CostInputs) -> float:
    """시간 영역 직접 컨볼루션 곱셈 수"""
    return c.num_sources * c.num_mics * c.signal_len * c.rir_len


def cost_full_fft(c: CostInputs, fft_size: int) -> float:
    """단일 FFT 필터링 곱셈 수"""
    if not is_power_of_two(fft_size):
        raise PlanError(f"fft_size must be a power of two, got {fft_size}")
    if fft_size < c.full_len:
        raise PlanError(f"fft_size {fft_size} < N_x + N_h - 1 = {c.full_len}")
    n, m = fft_size, _log2(fft_size)
    return c.num_sources * c.num_mics * (6 * n * m + 2 * n)


def cost_ola(c: CostInputs, fft_size: int) -> float:
    """OLA 필터링 곱셈 수 (블록 수는 올림)"""
    if not is_power_of_two(fft_size):
        raise PlanError(f"fft_size must be a power of two, got {fft_size}")
    blocks = block_count(c.signal_len, c.rir_len, fft_size)
    n, m = fft_size, _log2(fft_size)
    return c.num_sources * c.num_mics * (blocks * (4 * n * m + 2 * n) + 2 * n * m)


def ola_candidates(c: CostInputs) -> List[int]:
    """N_h <= N <= next_pow2(N_x + N_h - 1) 인 2의 거듭제곱"""
    sizes = []
    n = next_pow2(c.rir_len)
    upper = next_pow2(c.full_len)
    while n <= upper:
        sizes.append(n)
        n *= 2
    return sizes


def _pick(rows: List[CostRow]) -> CostRow:
    return min(rows, key=lambda row: (row.cost, row.fft_size or 0, _STRATEGY_RANK[row.strategy]))


def sweep(c: CostInputs) -> CostTable:
    """모든 후보의 비용 표 (직접 컨볼루션은 참고용, 후보 아님)"""
    full_size = next_pow2(c.full_len)
    candidates = [CostRow(strategy=Strategy.FULL_FFT, fft_size=full_size, block_count=1, cost=cost_full_fft(c, full_size))]
    candidates.extend(
        CostRow(
            strategy=Strategy.OVERLAP_ADD,
            fft_size=n,
            block_count=block_count(c.signal_len, c.rir_len, n),
            cost=cost_ola(c, n),
        )
        for n in ola_candidates(c)
    )
    best = _pick(candidates)
    best.is_best = True

    rows = [CostRow(strategy=Strategy.DIRECT, cost=cost_direct(c)), *candidates]
    return CostTable(
        inputs=c,
        rows=rows,
        best=ConvolutionPlan(strategy=best.strategy, fft_size=best.fft_size, predicted_cost=best.cost),
    )


def plan(c: CostInputs) -> ConvolutionPlan:
    """예측 비용이 최소인 방식과 FFT 크기"""
    return sweep(c).best


def plan_for(c: CostInputs, strategy: Strategy) -> ConvolutionPlan:
    """한 방식 안에서의 최적 계획"""
    strategy = Strategy(strategy)
    if strategy == Strategy.DIRECT:
        return ConvolutionPlan(strategy=strategy, predicted_cost=cost_direct(c))
    if strategy == Strategy.FULL_FFT:
        n = next_pow2(c.full_len)
        return ConvolutionPlan(strategy=strategy, fft_size=n, predicted_cost=cost_full_fft(c, n))
    best = _pick([CostRow(strategy=strategy, fft_size=n, cost=cost_ola(c, n)) for n in ola_candidates(c)])
    return ConvolutionPlan(strategy=strategy, fft_size=best.fft_size, predicted_cost=best.cost)
