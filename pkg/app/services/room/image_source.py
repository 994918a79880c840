import logging
from typing import NamedTuple

import numpy as np

from app.core.exceptions import DegenerateGeometryError, InvalidPlacementError
from app.schemas.room import Placement, RoomConfig, Rir

logger = logging.getLogger(__name__)


class ImageSources(NamedTuple):
    """가상 음원 격자 (V개)"""
    indices: np.ndarray            # (V, 3) 축별 격자 인덱스 n
    positions: np.ndarray          # (V, 3) 위치 (m)
    reflection_counts: np.ndarray  # (V,) g_v = |n_x| + |n_y| + |n_z|

    def __len__(self) -> int:
        return self.positions.shape[0]


def _check_inside(config: RoomConfig, placement: Placement, role: str) -> None:
    if not placement.is_inside(config):
        raise InvalidPlacementError(
            f"{role} {placement.position} is not strictly inside room {config.dimensions}"
        )


def enumerate_images(config: RoomConfig, source: Placement) -> ImageSources:
    """(2K+1)^3 개의 가상 음원 위치와 반사 횟수 계산"""
    _check_inside(config, source, "source")

    order = config.image_order
    axis = np.arange(-order, order + 1)
    # itertools.product 와 같은 순서: x 가 가장 느리게 변함
    grid = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1).reshape(-1, 3)

    lengths = np.asarray(config.dimensions, dtype=np.float64)
    src = np.asarray(source.position, dtype=np.float64)
    odd = (grid % 2) != 0
    # 짝수 n: 평행 이동, 홀수 n: 거울 반사
    positions = grid * lengths + np.where(odd, lengths - src, src)
    reflections = np.abs(grid).sum(axis=1)

    return ImageSources(indices=grid, positions=positions, reflection_counts=reflections)


def synthesize_rir(config: RoomConfig, source: Placement, mic: Placement) -> Rir:
    """이미지 방법으로 RIR 합성"""
    _check_inside(config, mic, "mic")
    images = enumerate_images(config, source)

    mic_position = np.asarray(mic.position, dtype=np.float64)
    distances = np.linalg.norm(images.positions - mic_position, axis=1)
    if np.any(distances == 0.0):
        raise DegenerateGeometryError(
            f"mic {mic.position} coincides with a virtual source (d_v = 0)"
        )

    delays = np.ceil(distances * config.sample_rate / config.speed_of_sound).astype(np.int64)
    amplitudes = config.reflection_coefficient ** images.reflection_counts / distances
    # 같은 지연 인덱스의 탭은 더해짐
    samples = np.bincount(delays, weights=amplitudes, minlength=int(delays.max()) + 1)

    logger.debug(
        f"RIR 합성 완료 - V={len(images)}, 길이={samples.size} samples "
        f"({samples.size / config.sample_rate:.3f}s)"
    )
    return Rir(samples=samples, sample_rate=config.sample_rate)
