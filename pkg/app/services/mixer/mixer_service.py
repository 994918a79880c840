import logging
from typing import List, Optional

import numpy as np

from app.core.exceptions import DegenerateInputError
from app.schemas.audio import AudioBuffer
from app.schemas.convolution import ConvolutionPlan, CostInputs, Strategy
from app.schemas.mixer import MixOutput, Scene, SceneSource
from app.schemas.room import Rir
from app.services.convolution.cost_model import plan, plan_for
from app.services.convolution.fft_backend import FftBackend
from app.services.convolution.filters import convolve

logger = logging.getLogger(__name__)


def _samples(buffer) -> np.ndarray:
    return buffer.channel(0) if isinstance(buffer, AudioBuffer) else np.asarray(buffer, dtype=np.float64)


def mean_power(buffer) -> float:
    samples = _samples(buffer)
    return float(np.mean(samples ** 2)) if samples.size else 0.0


def measure_snr(target, noise) -> float:
    """10 log10(P_target / P_noise)"""
    p_target, p_noise = mean_power(target), mean_power(noise)
    if p_target == 0.0 or p_noise == 0.0:
        raise DegenerateInputError("SNR is undefined for zero-energy signals")
    return 10.0 * np.log10(p_target / p_noise)


def compute_gain(target_reverberant, noise_reverberant, snr_db: float) -> float:
    """잡음에 곱했을 때 목표 SNR 이 되는 이득"""
    p_target = mean_power(target_reverberant)
    p_noise = mean_power(noise_reverberant)
    if p_target == 0.0:
        raise DegenerateInputError("target has zero energy")
    if p_noise == 0.0:
        raise DegenerateInputError("noise has zero energy")
    return float(np.sqrt(p_target / (p_noise * 10.0 ** (snr_db / 10.0))))


def choose_plan(signal_len: int, rir_len: int, plan_hint: Optional[ConvolutionPlan] = None) -> ConvolutionPlan:
    """(음원, 마이크) 한 쌍의 필터링 계획"""
    inputs = CostInputs(num_sources=1, num_mics=1, signal_len=signal_len, rir_len=rir_len)
    if plan_hint is None:
        return plan(inputs)

    if plan_hint.strategy == Strategy.OVERLAP_ADD and plan_hint.fft_size is not None:
        if plan_hint.fft_size >= rir_len:
            return plan_hint
        logger.warning(f"fft_size {plan_hint.fft_size} < N_h {rir_len}, OLA 최적 크기로 대체")
    if plan_hint.strategy == Strategy.FULL_FFT and plan_hint.fft_size is not None:
        if plan_hint.fft_size >= inputs.full_len:
            return plan_hint
        logger.warning(f"fft_size {plan_hint.fft_size} < N_x + N_h - 1 ({inputs.full_len}), 최소 크기로 대체")
    return plan_for(inputs, plan_hint.strategy)


def _pad(samples: np.ndarray, length: int) -> np.ndarray:
    out = np.zeros(length)
    out[:samples.size] = samples
    return out


def render(
    scene: Scene,
    plan_hint: Optional[ConvolutionPlan] = None,
    gains: Optional[np.ndarray] = None,
    backend: Optional[FftBackend] = None,
) -> MixOutput:
    """마이크 j 마다 y_j = sum_i a_ij (h_ij * x_i)"""
    sources = scene.sources
    num_sources, num_mics = len(sources), scene.mic_count

    # 1. 음원/마이크 쌍별 잔향 신호
    reverberant: List[List[np.ndarray]] = []
    for source in sources:
        row = []
        for rir in source.rirs:
            pair_plan = choose_plan(source.signal.length, rir.length, plan_hint)
            row.append(convolve(source.signal, rir, pair_plan, backend).channel(0))
        reverberant.append(row)

    out_len = max(term.size for row in reverberant for term in row)
    padded = [[_pad(term, out_len) for term in row] for row in reverberant]

    # 2. 이득 행렬 (타깃은 1, 잡음은 마이크별 SNR 로 결정)
    if gains is None:
        alpha = np.ones((num_sources, num_mics))
        for i, noise in enumerate(scene.noises, start=1):
            for j in range(num_mics):
                alpha[i, j] = compute_gain(padded[0][j], padded[i][j], noise.snr_db)
    else:
        alpha = np.asarray(gains, dtype=np.float64)
        if alpha.shape != (num_sources, num_mics):
            raise DegenerateInputError(f"gains shape {alpha.shape} != ({num_sources}, {num_mics})")

    # 3. 음원 순서대로 합산
    channels = np.zeros((num_mics, out_len))
    for j in range(num_mics):
        for i in range(num_sources):
            channels[j] += alpha[i, j] * padded[i][j]

    return MixOutput(channels=AudioBuffer(samples=channels, sample_rate=scene.sample_rate), gains=alpha)


def make_scene(
    target: AudioBuffer,
    target_rirs: List[Rir],
    noises: Optional[List[AudioBuffer]] = None,
    noise_rirs: Optional[List[List[Rir]]] = None,
    snrs_db: Optional[List[float]] = None,
    max_noise_sources: int = 3,
) -> Scene:
    """신호/RIR 목록으로 Scene 구성"""
    noises = noises or []
    noise_rirs = noise_rirs or []
    snrs_db = snrs_db or []
    return Scene(
        target=SceneSource(signal=target, rirs=target_rirs),
        noises=[
            SceneSource(signal=signal, rirs=rirs, snr_db=snr)
            for signal, rirs, snr in zip(noises, noise_rirs, snrs_db)
        ],
        mic_count=len(target_rirs),
        max_noise_sources=max_noise_sources,
    )
