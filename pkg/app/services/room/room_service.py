import logging
from pathlib import Path
from typing import Optional, Union

from pydantic import BaseModel

from app.schemas.audio import AudioBuffer, WavFormat
from app.schemas.room import Placement, RoomConfig, Rir
from app.services.room.image_source import synthesize_rir
from app.services.room.truncation import cutoff_index, estimate_t60, power_threshold, truncate_rir
from app.utils.file_utils import save_rir_json
from app.utils.wav_io import write_wav

logger = logging.getLogger(__name__)


class RirResult(BaseModel):
    """RIR 생성 결과"""
    rir: Rir
    original_length: int
    cutoff_index: Optional[int] = None
    power_threshold: Optional[float] = None
    t60_estimate: Optional[float] = None

    class Config:
        arbitrary_types_allowed = True


class RoomService:
    def generate(
        self,
        config: RoomConfig,
        source: Placement,
        mic: Placement,
        eta_db: Optional[float] = None,
    ) -> RirResult:
        """RIR 합성 후 선택적으로 꼬리 제거"""
        try:
            rir = synthesize_rir(config, source, mic)
            result = RirResult(rir=rir, original_length=rir.length, t60_estimate=estimate_t60(rir))
            if eta_db is not None:
                p_th = power_threshold(rir, eta_db)
                result.cutoff_index = cutoff_index(rir, p_th)
                result.power_threshold = p_th
                result.rir = truncate_rir(rir, eta_db)
            logger.info(
                f"RIR 생성 - {result.original_length} -> {result.rir.length} samples "
                f"({result.rir.duration:.4f}s), n_c={result.cutoff_index}"
            )
            return result
        except Exception as e:
            logger.error(f"Error in generate: {str(e)}")
            raise

    def export(self, rir: Rir, path: Union[str, Path]) -> Path:
        """확장자에 따라 JSON 또는 float32 WAV 로 저장"""
        path = Path(path)
        if path.suffix.lower() == ".json":
            return save_rir_json(rir, path)
        write_wav(AudioBuffer.mono(rir.samples, rir.sample_rate), path, WavFormat.FLOAT32)
        logger.info(f"RIR WAV 저장: {path}")
        return path
