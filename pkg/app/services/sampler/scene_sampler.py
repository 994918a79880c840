import hashlib
import logging
from typing import List, Sequence

import numpy as np

from app.core.exceptions import SimulationConfigError
from app.schemas.room import Placement, RoomConfig
from app.schemas.sampler import SamplerSpec, SceneDraw

logger = logging.getLogger(__name__)

MAX_PLACEMENT_ATTEMPTS = 100


def derive_seed(seed: int, utterance_id: str, epoch: int, resample_per_epoch: bool = True) -> int:
    """(seed, utterance_id, epoch) 해시로 128비트 시드 생성"""
    epoch_key = str(epoch) if resample_per_epoch else "*"
    key = f"{seed}\x1f{utterance_id}\x1f{epoch_key}".encode("utf-8")
    return int.from_bytes(hashlib.blake2b(key, digest_size=16).digest(), "little")


def scene_stream(spec: SamplerSpec, utterance_id: str, epoch: int) -> np.random.Generator:
    return np.random.default_rng(derive_seed(spec.seed, utterance_id, epoch, spec.resample_per_epoch))


def _draw_noise_count(rng: np.random.Generator, spec: SamplerSpec) -> int:
    return int(rng.choice(len(spec.noise_source_count_weights), p=spec.noise_count_probabilities))


def noise_count_for(spec: SamplerSpec, utterance_id: str, epoch: int) -> int:
    """sample_scene 과 같은 스트림에서 잡음 음원 수만 추출"""
    return _draw_noise_count(scene_stream(spec, utterance_id, epoch), spec)


def check_spec(spec: SamplerSpec) -> None:
    """벽 여유 거리와 방 크기 범위가 양립하는지 확인"""
    clearance = spec.min_wall_clearance
    for axis, (low, _) in zip("xyz", spec.dimension_ranges):
        if low <= 2 * clearance:
            raise SimulationConfigError(
                f"dimension_ranges.{axis} minimum {low} m leaves no room inside "
                f"a {clearance} m wall clearance"
            )
    if spec.mic_spacing is not None:
        aperture = (spec.mic_count - 1) * spec.mic_spacing
        if spec.dimension_ranges[0][0] - 2 * clearance <= aperture:
            raise SimulationConfigError(
                f"mic array aperture {aperture} m does not fit the smallest room width"
            )


def _uniform_point(rng: np.random.Generator, dims: Sequence[float], clearance: float) -> np.ndarray:
    return np.array([rng.uniform(clearance, length - clearance) for length in dims])


def _sample_mics(rng: np.random.Generator, spec: SamplerSpec, dims: Sequence[float]) -> List[np.ndarray]:
    clearance = spec.min_wall_clearance
    if spec.mic_spacing is None:
        return [_uniform_point(rng, dims, clearance) for _ in range(spec.mic_count)]

    # x 축 방향 선형 배열
    half_aperture = 0.5 * (spec.mic_count - 1) * spec.mic_spacing
    center = np.array([
        rng.uniform(clearance + half_aperture, dims[0] - clearance - half_aperture),
        rng.uniform(clearance, dims[1] - clearance),
        rng.uniform(clearance, dims[2] - clearance),
    ])
    offsets = (np.arange(spec.mic_count) - 0.5 * (spec.mic_count - 1)) * spec.mic_spacing
    return [center + np.array([offset, 0.0, 0.0]) for offset in offsets]


def _sample_source(
    rng: np.random.Generator,
    spec: SamplerSpec,
    dims: Sequence[float],
    mics: List[np.ndarray],
) -> np.ndarray:
    for _ in range(MAX_PLACEMENT_ATTEMPTS):
        point = _uniform_point(rng, dims, spec.min_wall_clearance)
        if all(np.linalg.norm(point - mic) >= spec.min_source_mic_distance for mic in mics):
            return point
    raise SimulationConfigError(
        f"could not place a source {spec.min_source_mic_distance} m away from every mic "
        f"after {MAX_PLACEMENT_ATTEMPTS} attempts"
    )


def _placement(point: np.ndarray) -> Placement:
    return Placement(position=tuple(float(v) for v in point))


def sample_scene(spec: SamplerSpec, utterance_id: str, epoch: int) -> SceneDraw:
    """발화/에폭별 방 설정과 음원/마이크 배치 샘플링"""
    check_spec(spec)
    rng = scene_stream(spec, utterance_id, epoch)

    # 잡음 개수를 먼저 뽑는다 (noise_count_for 와 순서 일치)
    noise_count = _draw_noise_count(rng, spec)
    dims = tuple(float(rng.uniform(low, high)) for low, high in spec.dimension_ranges)
    reflection = float(rng.uniform(*spec.reflection_range))
    room = RoomConfig(
        dimensions=dims,
        reflection_coefficient=reflection,
        sample_rate=spec.sample_rate,
        speed_of_sound=spec.speed_of_sound,
        image_order=spec.image_order,
    )

    mics = _sample_mics(rng, spec, dims)
    target = _sample_source(rng, spec, dims, mics)
    noises = [_sample_source(rng, spec, dims, mics) for _ in range(noise_count)]
    snrs = [float(rng.uniform(*spec.snr_range_db)) for _ in range(noise_count)]

    logger.debug(
        f"장면 샘플링 - utt={utterance_id}, epoch={epoch}, room={dims}, r={reflection:.3f}, "
        f"noises={noise_count}"
    )
    return SceneDraw(
        room=room,
        target=_placement(target),
        noises=[_placement(p) for p in noises],
        mics=[_placement(p) for p in mics],
        snrs_db=snrs,
    )
