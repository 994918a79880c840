import json
import logging
from pathlib import Path
from typing import Any, Optional, Union

import aiofiles
from pydantic import ValidationError

from app.core.exceptions import SimulationConfigError
from app.schemas.audio import Manifest, ManifestRecord
from app.schemas.room import Rir
from app.schemas.sampler import SimulationConfig

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def load_simulation_config(path: Optional[PathLike]) -> SimulationConfig:
    """JSON 설정 파일 로드 (없으면 기본값)"""
    if path is None:
        return SimulationConfig()
    try:
        text = Path(path).read_text(encoding="utf-8")
        return SimulationConfig.model_validate_json(text)
    except ValidationError as e:
        raise SimulationConfigError(f"invalid config {path}: {e}") from e


def save_json(data: Any, path: PathLike) -> Path:
    """JSON 저장"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, ensure_ascii=False, indent=2)
    logger.info(f"저장된 JSON 파일 경로: {path}")
    return path


def save_rir_json(rir: Rir, path: PathLike) -> Path:
    """RIR 을 double 배열 JSON 으로 저장"""
    return save_json(rir.samples.tolist(), path)


def load_rir_json(path: PathLike, sample_rate: int) -> Rir:
    with open(path, "r", encoding="utf-8") as f:
        return Rir(samples=json.load(f), sample_rate=sample_rate)


def _parse_manifest_lines(lines, source: str) -> Manifest:
    header = {}
    records = []
    for line_number, line in enumerate(lines, 1):
        line = line.strip()
        if not line:
            continue
        try:
            entry = json.loads(line)
        except json.JSONDecodeError as e:
            raise SimulationConfigError(f"{source}:{line_number}: invalid JSON ({e.msg})") from e
        if "utterance_id" not in entry:
            # 헤더 줄: {"config": ..., "epoch": ...}
            header.update(entry)
            continue
        records.append(ManifestRecord(**entry))
    try:
        return Manifest(records=records, config_path=header.get("config"), epoch=header.get("epoch"))
    except ValidationError as e:
        raise SimulationConfigError(f"invalid manifest {source}: {e}") from e


async def load_manifest(path: PathLike) -> Manifest:
    """JSON lines 매니페스트 비동기 로드"""
    async with aiofiles.open(path, "r", encoding="utf-8") as f:
        content = await f.read()
    manifest = _parse_manifest_lines(content.splitlines(), str(path))
    logger.info(f"매니페스트 로드 완료: {path} ({len(manifest.records)} records)")
    return manifest


async def save_manifest(manifest: Manifest, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = []
    if manifest.config_path is not None or manifest.epoch is not None:
        lines.append(json.dumps({"config": manifest.config_path, "epoch": manifest.epoch}))
    lines.extend(record.model_dump_json() for record in manifest.records)
    async with aiofiles.open(path, "w", encoding="utf-8") as f:
        await f.write("\n".join(lines) + "\n")
    return path
