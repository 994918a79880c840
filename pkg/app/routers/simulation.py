import io
import logging
from typing import Optional

from fastapi import APIRouter, Depends, File, Form, HTTPException, UploadFile
from fastapi.responses import Response
from pydantic import ValidationError

from app.core.exceptions import RoomSimError
from app.schemas.audio import WavFormat
from app.schemas.base import ResponseBase
from app.schemas.convolution import ConvolutionPlan, CostInputs, CostTable
from app.schemas.sampler import SamplerSpec, SimulationConfig
from app.schemas.simulation import RirRequest, RirResponse
from app.services.augment.augment_service import AugmentOptions, AugmentService
from app.services.convolution.cost_model import plan, sweep
from app.services.convolution.fft_backend import FftBackend
from app.services.room.room_service import RoomService
from app.dependencies import get_fft_backend, get_room_service, get_simulation_config
from app.utils.wav_io import read_wav, write_wav

router = APIRouter(prefix="/simulation", tags=["simulation"])
logger = logging.getLogger(__name__)


@router.post("/rir", response_model=ResponseBase[RirResponse])
async def create_rir(
    request: RirRequest,
    room_service: RoomService = Depends(get_room_service),
):
    """이미지 방법 RIR 생성"""
    try:
        result = room_service.generate(request.room, request.source, request.mic, request.eta_db)
        return ResponseBase[RirResponse](
            success=True,
            data=RirResponse(
                samples=result.rir.samples.tolist(),
                sample_rate=result.rir.sample_rate,
                length=result.rir.length,
                original_length=result.original_length,
                cutoff_index=result.cutoff_index,
                t60_estimate=result.t60_estimate,
            ),
        )
    except RoomSimError as e:
        raise HTTPException(status_code=422, detail=str(e))
    except Exception as e:
        error_msg = f"RIR 생성 중 오류 발생: {str(e)}"
        logger.error(error_msg, exc_info=True)
        raise HTTPException(status_code=500, detail=error_msg)


@router.post("/cost", response_model=CostTable)
async def cost_table(inputs: CostInputs):
    """곱셈 수 비용 표"""
    return sweep(inputs)


@router.post("/plan", response_model=ConvolutionPlan)
async def convolution_plan(inputs: CostInputs):
    """비용 최소 필터링 방식"""
    return plan(inputs)


@router.post("/augment")
async def augment_utterance(
    file: UploadFile = File(...),
    utterance_id: str = Form(...),
    epoch: int = Form(0),
    seed: Optional[int] = Form(None),
    eta_db: Optional[float] = Form(None),
    wav_format: WavFormat = Form(WavFormat.PCM16),
    normalize: bool = Form(False),
    config: SimulationConfig = Depends(get_simulation_config),
    backend: FftBackend = Depends(get_fft_backend),
):
    """업로드한 단채널 발화를 다채널 잡음 음성으로 변환 (WAV 반환)"""
    try:
        spec = config.sampler
        if seed is not None:
            spec = SamplerSpec.model_validate({**spec.model_dump(), "seed": seed})
        options = AugmentOptions(spec=spec, epoch=epoch, eta_db=eta_db, wav_format=wav_format)
        signal = read_wav(io.BytesIO(await file.read()))
        result = AugmentService(options, backend=backend).augment(signal, utterance_id)

        output = io.BytesIO()
        write_wav(result.mix.channels, output, wav_format, normalize=normalize)
        logger.info(f"잡음화 응답 - utt={utterance_id}, {len(output.getvalue())} bytes")
        return Response(
            content=output.getvalue(),
            media_type="audio/wav",
            headers={
                "X-Mic-Count": str(result.mix.mic_count),
                "X-Noise-Count": str(len(result.draw.noises)),
            },
        )
    except (RoomSimError, ValidationError) as e:
        raise HTTPException(status_code=422, detail=str(e))
    except Exception as e:
        error_msg = f"잡음화 중 오류 발생: {str(e)}"
        logger.error(error_msg, exc_info=True)
        raise HTTPException(status_code=500, detail=error_msg)
