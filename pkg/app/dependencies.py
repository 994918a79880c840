import logging
from typing import Optional
from fastapi import FastAPI, Depends
from app.core.config import settings
from app.schemas.sampler import SimulationConfig
from app.services.convolution.fft_backend import FftBackend, get_backend
from app.services.room.room_service import RoomService
from app.utils.file_utils import load_simulation_config

logger = logging.getLogger(__name__)

class Services:
    def __init__(self):
        self.room_service: Optional[RoomService] = None
        self.fft_backend: Optional[FftBackend] = None
        self.simulation_config: Optional[SimulationConfig] = None
services = Services()

async def init_services():
    """서비스 초기화"""
    try:
        logger.info(f"Initializing FFT backend ({settings.FFT_BACKEND})...")
        services.fft_backend = get_backend(settings.FFT_BACKEND)

        logger.info("Loading simulation config...")
        services.simulation_config = load_simulation_config(settings.DEFAULT_CONFIG_PATH)

        services.room_service = RoomService()
        logger.info("RoomService initialized successfully")

    except Exception as e:
        logger.error(f"Error initializing services: {e}")
        raise

async def get_services() -> Services:
    """서비스 인스턴스 반환"""
    return services

def get_room_service(services: Services = Depends(get_services)) -> RoomService:
    if services.room_service is None:
        raise RuntimeError("Services not initialized")
    return services.room_service

def get_fft_backend(services: Services = Depends(get_services)) -> FftBackend:
    if services.fft_backend is None:
        raise RuntimeError("Services not initialized")
    return services.fft_backend

def get_simulation_config(services: Services = Depends(get_services)) -> SimulationConfig:
    if services.simulation_config is None:
        raise RuntimeError("Services not initialized")
    return services.simulation_config

async def init_app(app: FastAPI):
    """앱 초기화"""
    try:
        await init_services()
        logger.info("Services initialized successfully")
    except Exception as e:
        logger.error(f"Service initialization failed: {str(e)}")
        raise
