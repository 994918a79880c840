import logging
from typing import Optional

import numpy as np

from app.core.exceptions import DegenerateInputError
from app.schemas.room import Rir

logger = logging.getLogger(__name__)


def power_threshold(rir: Rir, eta_db: float) -> float:
    """최대 탭 전력보다 eta dB 낮은 전력 임계값"""
    if eta_db <= 0:
        raise DegenerateInputError(f"eta_db must be positive, got {eta_db}")
    max_power = float(np.max(rir.samples ** 2))
    if max_power == 0.0:
        raise DegenerateInputError("RIR is all zeros")
    return max_power * 10.0 ** (-eta_db / 10.0)


def cutoff_index(rir: Rir, p_th: float) -> int:
    """이후 모든 탭의 전력이 p_th 미만이 되는 가장 작은 인덱스"""
    if p_th <= 0:
        raise DegenerateInputError(f"p_th must be positive, got {p_th}")
    above = np.flatnonzero(rir.samples ** 2 >= p_th)
    if above.size == 0:
        return 0
    return int(above[-1])


def truncate_rir(rir: Rir, eta_db: float) -> Rir:
    """0..n_c+1 구간만 남기고 꼬리 제거"""
    p_th = power_threshold(rir, eta_db)
    n_c = cutoff_index(rir, p_th)
    keep = min(n_c + 2, rir.length)
    logger.debug(f"RIR 꼬리 제거 - eta={eta_db}dB, n_c={n_c}, {rir.length} -> {keep} samples")
    return Rir(samples=rir.samples[:keep].copy(), sample_rate=rir.sample_rate, truncation_db=eta_db)


def estimate_t60(rir: Rir, decay_db: float = 60.0) -> Optional[float]:
    """Schroeder 역적분 곡선으로 T60 추정

    -5 dB 부터 -(5 + decay_db) dB 까지의 감쇠 기울기를 직선 근사한다.
    꼬리가 짧으면 측정 가능한 구간만 쓰고 60 dB 로 외삽한다.
    """
    energy = rir.samples ** 2
    total = energy.sum()
    if total == 0.0:
        raise DegenerateInputError("RIR is all zeros")

    schroeder = np.cumsum(energy[::-1])[::-1] / total
    with np.errstate(divide="ignore"):
        curve_db = 10.0 * np.log10(schroeder)

    start_db = -5.0
    floor_db = float(curve_db[np.isfinite(curve_db)].min())
    end_db = max(start_db - decay_db, floor_db)
    span_db = start_db - end_db
    if span_db < 5.0:
        return None

    start = int(np.argmax(curve_db <= start_db))
    end = int(np.argmax(curve_db <= end_db))
    if end <= start + 1:
        return None

    n = np.arange(start, end + 1)
    slope, _ = np.polyfit(n / rir.sample_rate, curve_db[start:end + 1], 1)
    if slope >= 0:
        return None
    return float(-60.0 / slope)
