import logging
import warnings
from pathlib import Path
from typing import BinaryIO, Union

import numpy as np
from scipy.io import wavfile

from app.core.exceptions import WavFormatError
from app.schemas.audio import AudioBuffer, WavFormat

logger = logging.getLogger(__name__)

PCM16_SCALE = 32768.0
PCM16_MIN = -32768
PCM16_MAX = 32767
# pcm16 정규화 시 최대 진폭 ([-1, 1) 범위 유지)
PEAK_TARGET = PCM16_MAX / PCM16_SCALE

WavTarget = Union[str, Path, BinaryIO]


def read_wav(source: WavTarget) -> AudioBuffer:
    """PCM16 / float32 WAV 읽기"""
    try:
        # 데이터가 헤더보다 짧으면 scipy 는 경고만 낸다
        with warnings.catch_warnings():
            warnings.simplefilter("error", wavfile.WavFileWarning)
            sample_rate, data = wavfile.read(source)
    except wavfile.WavFileWarning as e:
        raise WavFormatError(f"truncated WAV {source}: {e}") from e
    except (ValueError, EOFError, TypeError) as e:
        raise WavFormatError(f"malformed WAV {source}: {e}") from e

    if data.dtype == np.int16:
        samples = data.astype(np.float64) / PCM16_SCALE
    elif data.dtype == np.float32:
        samples = data.astype(np.float64)
    else:
        raise WavFormatError(f"unsupported WAV sample type {data.dtype} in {source}")

    if samples.size == 0:
        raise WavFormatError(f"WAV {source} has no samples")

    # scipy 는 (샘플, 채널) 순서
    samples = samples[np.newaxis, :] if samples.ndim == 1 else samples.T
    return AudioBuffer(samples=samples, sample_rate=int(sample_rate))


def peak_normalize(samples: np.ndarray, target: float = PEAK_TARGET) -> np.ndarray:
    peak = float(np.max(np.abs(samples))) if samples.size else 0.0
    if peak == 0.0:
        return samples
    return samples * (target / peak)


def quantize_pcm16(samples: np.ndarray):
    """반올림 (0.5 는 0에서 먼 쪽), 범위 밖은 포화. (정수 배열, 포화 개수) 반환"""
    scaled = samples * PCM16_SCALE
    rounded = np.sign(scaled) * np.floor(np.abs(scaled) + 0.5)
    saturated = int(np.count_nonzero((rounded > PCM16_MAX) | (rounded < PCM16_MIN)))
    return np.clip(rounded, PCM16_MIN, PCM16_MAX).astype(np.int16), saturated


def write_wav(
    buffer: AudioBuffer,
    target: WavTarget,
    fmt: WavFormat = WavFormat.FLOAT32,
    normalize: bool = False,
) -> int:
    """WAV 쓰기. pcm16 포화 샘플 개수 반환"""
    samples = buffer.samples
    if not np.all(np.isfinite(samples)):
        raise WavFormatError("cannot write non-finite samples")
    if normalize:
        samples = peak_normalize(samples)

    saturated = 0
    if WavFormat(fmt) == WavFormat.PCM16:
        data, saturated = quantize_pcm16(samples)
        if saturated:
            logger.warning(f"PCM16 포화 발생: {saturated} samples clipped ({target})")
    else:
        data = samples.astype(np.float32)

    if isinstance(target, (str, Path)):
        Path(target).parent.mkdir(parents=True, exist_ok=True)

    wavfile.write(target, buffer.sample_rate, data[0] if data.shape[0] == 1 else data.T)
    return saturated
