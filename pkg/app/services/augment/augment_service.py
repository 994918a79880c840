import logging
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, Field

from app.core.exceptions import DegenerateInputError, SampleRateMismatchError
from app.schemas.audio import AudioBuffer, WavFormat
from app.schemas.convolution import ConvolutionPlan
from app.schemas.mixer import MixOutput
from app.schemas.room import Rir
from app.schemas.sampler import SamplerSpec, SceneDraw
from app.services.convolution.fft_backend import FftBackend, get_backend
from app.services.mixer.mixer_service import make_scene, render
from app.services.room.image_source import synthesize_rir
from app.services.room.truncation import estimate_t60, truncate_rir
from app.services.sampler.scene_sampler import derive_seed, sample_scene
from app.utils.wav_io import peak_normalize, read_wav, write_wav

logger = logging.getLogger(__name__)


class AugmentOptions(BaseModel):
    """발화 하나를 잡음화할 때의 옵션"""
    spec: SamplerSpec = Field(default_factory=SamplerSpec)
    epoch: int = 0
    eta_db: Optional[float] = Field(default=None, gt=0.0)
    plan_hint: Optional[ConvolutionPlan] = None
    fft_backend: Optional[str] = None
    wav_format: WavFormat = WavFormat.PCM16
    normalize: bool = False
    per_channel: bool = False
    noise_paths: List[str] = Field(default_factory=list)


class AugmentResult(BaseModel):
    """잡음화 결과"""
    utterance_id: str
    epoch: int
    draw: SceneDraw
    mix: MixOutput
    rir_lengths: List[List[int]]

    class Config:
        arbitrary_types_allowed = True

    def summary(self) -> dict:
        return {
            "utterance_id": self.utterance_id,
            "epoch": self.epoch,
            "room": self.draw.room.model_dump(),
            "target": self.draw.target.position,
            "noises": [p.position for p in self.draw.noises],
            "mics": [p.position for p in self.draw.mics],
            "snrs_db": self.draw.snrs_db,
            "gains": self.mix.gains.tolist(),
            "rir_lengths": self.rir_lengths,
            "output_samples": self.mix.channels.length,
        }


def load_noise_pool(paths: Sequence[Union[str, Path]]) -> List[AudioBuffer]:
    pool = []
    for path in paths:
        buffer = read_wav(path)
        if not buffer.is_mono:
            buffer = AudioBuffer.mono(buffer.samples.mean(axis=0), buffer.sample_rate)
        pool.append(buffer)
    return pool


def output_paths(output_path: Union[str, Path], channel_count: int, per_channel: bool) -> List[Path]:
    """출력 파일 경로 (기본: J 채널 파일 하나)"""
    path = Path(output_path)
    if path.suffix == "":
        path = path.with_suffix(".wav")
    if not per_channel:
        return [path]
    return [path.with_name(f"{path.stem}_ch{j}{path.suffix}") for j in range(channel_count)]


class AugmentService:
    def __init__(
        self,
        options: AugmentOptions,
        noise_pool: Optional[List[AudioBuffer]] = None,
        backend: Optional[FftBackend] = None,
    ):
        self.options = options
        self.spec = options.spec
        self.noise_pool = noise_pool if noise_pool is not None else load_noise_pool(options.noise_paths)
        if backend is None and options.fft_backend:
            backend = get_backend(options.fft_backend)
        self.backend = backend
        for clip in self.noise_pool:
            if clip.sample_rate != self.spec.sample_rate:
                raise SampleRateMismatchError(
                    f"noise clip rate {clip.sample_rate} Hz != {self.spec.sample_rate} Hz"
                )

    def _noise_signal(self, rng: np.random.Generator, length: int) -> AudioBuffer:
        """잡음 풀에서 구간 선택 (없으면 백색 가우시안 잡음)"""
        if not self.noise_pool:
            return AudioBuffer.mono(rng.standard_normal(length), self.spec.sample_rate)
        clip = self.noise_pool[int(rng.integers(len(self.noise_pool)))].channel(0)
        if not np.any(clip):
            raise DegenerateInputError("noise clip has zero energy")
        offset = int(rng.integers(clip.size))
        return AudioBuffer.mono(clip[(offset + np.arange(length)) % clip.size], self.spec.sample_rate)

    def _rirs(self, draw: SceneDraw) -> List[List[Rir]]:
        rirs = []
        for source in draw.sources:
            row = []
            for mic in draw.mics:
                rir = synthesize_rir(draw.room, source, mic)
                if self.options.eta_db is not None:
                    rir = truncate_rir(rir, self.options.eta_db)
                row.append(rir)
            rirs.append(row)
        return rirs

    def augment(self, signal: AudioBuffer, utterance_id: str, epoch: Optional[int] = None) -> AugmentResult:
        """발화 하나를 무작위 방에서 다채널로 시뮬레이션"""
        epoch = self.options.epoch if epoch is None else epoch
        if not signal.is_mono:
            raise DegenerateInputError(f"input must be mono, got {signal.channel_count} channels")
        if signal.sample_rate != self.spec.sample_rate:
            raise SampleRateMismatchError(
                f"input rate {signal.sample_rate} Hz != {self.spec.sample_rate} Hz (no resampling)"
            )

        # 1. 방 설정 샘플링
        draw = sample_scene(self.spec, utterance_id, epoch)

        # 2. RIR 합성 (+ 꼬리 제거)
        rirs = self._rirs(draw)
        full_rir = rirs[0][0] if self.options.eta_db is None else synthesize_rir(draw.room, draw.target, draw.mics[0])
        t60 = estimate_t60(full_rir)
        draw = draw.model_copy(update={"room": draw.room.model_copy(update={"t60_estimate": t60})})

        # 3. 잡음 신호 선택
        noise_rng = np.random.default_rng(
            derive_seed(self.spec.seed, f"{utterance_id}/noise", epoch, self.spec.resample_per_epoch)
        )
        noises = [self._noise_signal(noise_rng, signal.length) for _ in draw.noises]

        # 4. 렌더링
        scene = make_scene(signal, rirs[0], noises, rirs[1:], draw.snrs_db)
        mix = render(scene, self.options.plan_hint, backend=self.backend)

        logger.info(
            f"잡음화 완료 - utt={utterance_id}, epoch={epoch}, I={len(draw.sources)}, "
            f"J={len(draw.mics)}, T60={t60 if t60 is None else round(t60, 3)}"
        )
        return AugmentResult(
            utterance_id=utterance_id,
            epoch=epoch,
            draw=draw,
            mix=mix,
            rir_lengths=[[rir.length for rir in row] for row in rirs],
        )

    def write(self, result: AugmentResult, output_path: Union[str, Path]) -> List[Path]:
        """결과를 WAV 로 저장"""
        channels = result.mix.channels
        if self.options.normalize:
            # 채널별이 아닌 전체 버퍼 기준 정규화
            channels = AudioBuffer(samples=peak_normalize(channels.samples), sample_rate=channels.sample_rate)
        paths = output_paths(output_path, channels.channel_count, self.options.per_channel)
        if self.options.per_channel:
            for j, path in enumerate(paths):
                write_wav(AudioBuffer.mono(channels.channel(j), channels.sample_rate), path, self.options.wav_format)
        else:
            write_wav(channels, paths[0], self.options.wav_format)
        return paths

    def process_file(self, input_path: Union[str, Path], output_path: Union[str, Path], utterance_id: str) -> AugmentResult:
        signal = read_wav(input_path)
        result = self.augment(signal, utterance_id)
        self.write(result, output_path)
        return result
