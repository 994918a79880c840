import asyncio
import logging
import time
from concurrent.futures import Executor, ProcessPoolExecutor, ThreadPoolExecutor
from typing import List, Optional, Tuple

from pydantic import BaseModel, Field

from app.core.config import settings
from app.schemas.audio import Manifest, ManifestRecord
from app.services.augment.augment_service import AugmentOptions, AugmentService

logger = logging.getLogger(__name__)

# 워커 프로세스별 서비스 캐시 (옵션 JSON -> 서비스)
_worker_services: dict = {}


class RecordFailure(BaseModel):
    utterance_id: str
    error: str


class BatchSummary(BaseModel):
    """배치 처리 요약"""
    total: int
    succeeded: int
    failures: List[RecordFailure] = Field(default_factory=list)
    wall_time_s: float
    mean_ms_per_utterance: Optional[float] = None

    @property
    def failed(self) -> int:
        return len(self.failures)

    def summary_line(self) -> str:
        mean = "n/a" if self.mean_ms_per_utterance is None else f"{self.mean_ms_per_utterance:.1f}"
        return (
            f"processed={self.total} succeeded={self.succeeded} failed={self.failed} "
            f"wall_time={self.wall_time_s:.2f}s mean_ms_per_utterance={mean}"
        )


def _service_for(options: AugmentOptions) -> AugmentService:
    key = options.model_dump_json()
    if key not in _worker_services:
        _worker_services[key] = AugmentService(options)
    return _worker_services[key]


def process_record(record: ManifestRecord, options: AugmentOptions) -> float:
    """레코드 하나 처리 후 소요 시간(ms) 반환"""
    started = time.perf_counter()
    _service_for(options).process_file(record.input_path, record.output_path, record.utterance_id)
    return (time.perf_counter() - started) * 1000.0


class BatchProcessor:
    def __init__(self, parallelism: int = 1, executor_kind: Optional[str] = None):
        self.parallelism = max(1, parallelism)
        self.executor_kind = executor_kind or settings.BATCH_EXECUTOR

    def _executor(self) -> Executor:
        if self.executor_kind == "thread":
            return ThreadPoolExecutor(max_workers=self.parallelism)
        return ProcessPoolExecutor(max_workers=self.parallelism)

    async def run(self, manifest: Manifest, options: AugmentOptions) -> BatchSummary:
        """매니페스트 전체 처리. 레코드별 실패는 기록하고 계속 진행"""
        started = time.perf_counter()
        logger.info(
            f"=== 배치 처리 시작 === records={len(manifest.records)}, epoch={options.epoch}, "
            f"parallelism={self.parallelism}, executor={self.executor_kind}"
        )
        if not manifest.records:
            return BatchSummary(total=0, succeeded=0, wall_time_s=time.perf_counter() - started)

        semaphore = asyncio.Semaphore(self.parallelism)
        loop = asyncio.get_running_loop()

        with self._executor() as executor:
            async def _one(record: ManifestRecord) -> Tuple[ManifestRecord, Optional[float], Optional[str]]:
                async with semaphore:
                    try:
                        elapsed = await loop.run_in_executor(executor, process_record, record, options)
                        return record, elapsed, None
                    except Exception as e:
                        logger.error(f"레코드 처리 실패 - {record.utterance_id}: {str(e)}")
                        return record, None, str(e)

            results = await asyncio.gather(*(_one(record) for record in manifest.records))

        timings = [elapsed for _, elapsed, _ in results if elapsed is not None]
        failures = [
            RecordFailure(utterance_id=record.utterance_id, error=error)
            for record, _, error in results
            if error is not None
        ]
        summary = BatchSummary(
            total=len(results),
            succeeded=len(timings),
            failures=failures,
            wall_time_s=time.perf_counter() - started,
            mean_ms_per_utterance=sum(timings) / len(timings) if timings else None,
        )
        logger.info(f"=== 배치 처리 완료 === {summary.summary_line()}")
        return summary
