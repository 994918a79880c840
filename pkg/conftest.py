import json
from pathlib import Path

import numpy as np
import pytest
from scipy.io import wavfile


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    """테스트가 로컬 .env 값에 영향받지 않도록"""
    for name in ("ROOMSIM_SEED", "DEFAULT_CONFIG_PATH", "FFT_BACKEND", "BATCH_EXECUTOR", "BENCH_MIN_TRIALS"):
        monkeypatch.delenv(name, raising=False)


@pytest.fixture
def small_config(tmp_path) -> Path:
    """K=2 샘플러 설정 (빠른 end-to-end 테스트용)"""
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"sampler": {"seed": 1234, "image_order": 2}}), encoding="utf-8")
    return path


def write_mono_wav(path: Path, samples: np.ndarray, sample_rate: int = 16000) -> Path:
    wavfile.write(path, sample_rate, np.asarray(samples, dtype=np.float32))
    return path


@pytest.fixture
def utterance(tmp_path) -> Path:
    rng = np.random.default_rng(7)
    return write_mono_wav(tmp_path / "utt.wav", 0.1 * rng.standard_normal(4000))
