from pydantic_settings import BaseSettings
from typing import Optional
from functools import lru_cache
from pathlib import Path

class Settings(BaseSettings):
    # 설정 파일 (CLI --config 가 없을 때 사용)
    DEFAULT_CONFIG_PATH: Optional[Path] = None

    # 시드 설정 (CLI --seed 가 없을 때 사용)
    ROOMSIM_SEED: Optional[int] = None

    # FFT 백엔드: "numpy" | "radix2"
    FFT_BACKEND: str = "numpy"

    # 배치 설정
    DEFAULT_PARALLELISM: int = 4
    BATCH_EXECUTOR: str = "process"

    # 벤치마크 설정
    BENCH_MIN_TRIALS: int = 5

    # 디버그 설정
    DEBUG: bool = False
    LOG_LEVEL: str = "INFO"

    class Config:
        env_file = ".env"
        case_sensitive = True
        extra = "ignore"

@lru_cache()
def get_settings():
    return Settings()

settings = get_settings()
