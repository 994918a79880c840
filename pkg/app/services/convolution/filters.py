import logging
from typing import Optional

import numpy as np

from app.core.config import settings
from app.core.exceptions import DegenerateInputError, PlanError, SampleRateMismatchError
from app.schemas.audio import AudioBuffer
from app.schemas.convolution import ConvolutionPlan, Strategy, is_power_of_two
from app.schemas.room import Rir
from app.services.convolution.cost_model import next_pow2
from app.services.convolution.fft_backend import FftBackend, get_backend

logger = logging.getLogger(__name__)


def _signal(x: AudioBuffer, h: Rir) -> np.ndarray:
    if not x.is_mono:
        raise DegenerateInputError(f"convolution input must be mono, got {x.channel_count} channels")
    if x.length == 0:
        raise DegenerateInputError("convolution input is empty")
    if x.sample_rate != h.sample_rate:
        raise SampleRateMismatchError(f"signal rate {x.sample_rate} Hz != RIR rate {h.sample_rate} Hz")
    return x.channel(0)


def _backend(backend: Optional[FftBackend]) -> FftBackend:
    return backend if backend is not None else get_backend(settings.FFT_BACKEND)


def convolve_direct(x: AudioBuffer, h: Rir) -> AudioBuffer:
    """시간 영역 선형 컨볼루션 (기준 구현)"""
    samples = _signal(x, h)
    return AudioBuffer.mono(np.convolve(samples, h.samples), x.sample_rate)


def convolve_full_fft(
    x: AudioBuffer,
    h: Rir,
    backend: Optional[FftBackend] = None,
    fft_size: Optional[int] = None,
) -> AudioBuffer:
    """N >= N_x + N_h - 1 단일 실수 FFT 필터링"""
    samples = _signal(x, h)
    engine = _backend(backend)
    out_len = samples.size + h.length - 1
    n = next_pow2(out_len) if fft_size is None else fft_size
    if n < out_len:
        raise PlanError(f"fft_size {n} < N_x + N_h - 1 = {out_len}")

    spectrum = engine.rfft(samples, n) * engine.rfft(h.samples, n)
    return AudioBuffer.mono(engine.irfft(spectrum, n)[:out_len], x.sample_rate)


def convolve_ola(
    x: AudioBuffer,
    h: Rir,
    fft_size: int,
    backend: Optional[FftBackend] = None,
) -> AudioBuffer:
    """Overlap-add 블록 FFT 필터링. RIR 스펙트럼은 한 번만 계산"""
    samples = _signal(x, h)
    if not is_power_of_two(fft_size):
        raise PlanError(f"fft_size must be a power of two, got {fft_size}")
    if fft_size < h.length:
        raise PlanError(f"fft_size {fft_size} < RIR length {h.length}")

    engine = _backend(backend)
    block_len = fft_size - h.length + 1
    out_len = samples.size + h.length - 1
    out = np.zeros(out_len)

    rir_spectrum = engine.rfft(h.samples, fft_size)
    for start in range(0, samples.size, block_len):
        block = samples[start:start + block_len]
        filtered = engine.irfft(engine.rfft(block, fft_size) * rir_spectrum, fft_size)
        stop = min(start + fft_size, out_len)
        out[start:stop] += filtered[:stop - start]

    return AudioBuffer.mono(out, x.sample_rate)


def convolve(
    x: AudioBuffer,
    h: Rir,
    plan: ConvolutionPlan,
    backend: Optional[FftBackend] = None,
) -> AudioBuffer:
    """계획된 방식으로 필터링"""
    if plan.strategy == Strategy.DIRECT:
        return convolve_direct(x, h)
    if plan.strategy == Strategy.FULL_FFT:
        return convolve_full_fft(x, h, backend, plan.fft_size)
    if plan.fft_size is None:
        raise PlanError("overlap_add plan requires fft_size")
    return convolve_ola(x, h, plan.fft_size, backend)
