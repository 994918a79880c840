import asyncio
import json
import logging
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from app.core.config import Settings
from app.core.exceptions import RoomSimError
from app.schemas.audio import WavFormat
from app.schemas.convolution import ConvolutionPlan, CostInputs, CostTable, Strategy
from app.schemas.room import Placement
from app.schemas.sampler import SamplerSpec, SimulationConfig
from app.services.augment.augment_service import AugmentOptions, AugmentService
from app.services.augment.batch_processor import BatchProcessor
from app.services.bench.bench_service import BenchService, format_report
from app.services.convolution.cost_model import sweep
from app.services.room.room_service import RoomService
from app.services.sampler.scene_sampler import sample_scene
from app.utils.file_utils import load_manifest, load_simulation_config, save_json
from app.utils.wav_io import read_wav

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DOMAIN_ERROR = 1
EXIT_USAGE_ERROR = 2

STRATEGY_FLAGS = {
    "auto": None,
    "direct": Strategy.DIRECT,
    "fft": Strategy.FULL_FFT,
    "ola": Strategy.OVERLAP_ADD,
}


def resolve_seed(flag_seed: Optional[int], settings: Settings, spec: SamplerSpec) -> int:
    """--seed > ROOMSIM_SEED > 설정 파일"""
    if flag_seed is not None:
        return flag_seed
    if settings.ROOMSIM_SEED is not None:
        return settings.ROOMSIM_SEED
    return spec.seed


def load_config(args, settings: Settings) -> SimulationConfig:
    path = args.config if args.config is not None else settings.DEFAULT_CONFIG_PATH
    config = load_simulation_config(path)
    seed = resolve_seed(args.seed, settings, config.sampler)
    sampler = SamplerSpec.model_validate({**config.sampler.model_dump(), "seed": seed})
    return config.model_copy(update={"sampler": sampler})


def plan_hint(strategy: str, fft_size: Optional[int]) -> Optional[ConvolutionPlan]:
    chosen = STRATEGY_FLAGS[strategy]
    if chosen is None:
        return None
    if chosen == Strategy.DIRECT:
        return ConvolutionPlan(strategy=chosen)
    return ConvolutionPlan(strategy=chosen, fft_size=fft_size)


def augment_options(args, config: SimulationConfig, settings: Settings, epoch: int) -> AugmentOptions:
    return AugmentOptions(
        spec=config.sampler,
        epoch=epoch,
        eta_db=args.eta_db,
        plan_hint=plan_hint(args.strategy, args.fft_size),
        fft_backend=settings.FFT_BACKEND,
        wav_format=WavFormat(args.format),
        normalize=args.normalize,
        per_channel=args.per_channel,
        noise_paths=[str(p) for p in args.noise],
    )


def _emit(args, payload: dict, text: str) -> None:
    print(json.dumps(payload, ensure_ascii=False) if args.json else text)


def cmd_rir(args, settings: Settings) -> int:
    """RIR 생성"""
    config = load_config(args, settings)

    room, source = config.room, config.source
    mic = config.mics[0] if config.mics else None
    if room is None or source is None or mic is None:
        # 설정에 배치가 없으면 샘플러로 방 하나를 뽑는다
        draw = sample_scene(config.sampler, args.utterance_id, args.epoch)
        room = room or draw.room
        source = source or draw.target
        mic = mic or draw.mics[0]
    if args.source is not None:
        source = Placement(position=tuple(args.source))
    if args.mic is not None:
        mic = Placement(position=tuple(args.mic))

    service = RoomService()
    result = service.generate(room, source, mic, args.eta_db)
    service.export(result.rir, args.output)

    payload = {
        "output": str(args.output),
        "length_samples": result.rir.length,
        "length_seconds": result.rir.duration,
        "original_length_samples": result.original_length,
        "cutoff_index": result.cutoff_index,
        "t60_estimate": result.t60_estimate,
    }
    text = f"RIR length: {result.rir.length} samples ({result.rir.duration:.4f} s)"
    if result.cutoff_index is not None:
        text += f"\ncutoff index n_c: {result.cutoff_index} (eta={args.eta_db} dB, original {result.original_length} samples)"
    _emit(args, payload, text)
    return EXIT_OK


def cmd_augment(args, settings: Settings) -> int:
    """발화 하나 잡음화"""
    config = load_config(args, settings)
    options = augment_options(args, config, settings, args.epoch)
    service = AugmentService(options)

    signal = read_wav(args.input)
    utterance_id = args.utterance_id or Path(args.input).stem
    result = service.augment(signal, utterance_id)
    output = args.output or Path(args.input).with_name(f"{Path(args.input).stem}_e{args.epoch}")
    paths = service.write(result, output)

    payload = {**result.summary(), "outputs": [str(p) for p in paths]}
    _emit(args, payload, "\n".join(f"wrote {p}" for p in paths))
    return EXIT_OK


def cmd_batch(args, settings: Settings) -> int:
    """매니페스트 배치 잡음화"""
    manifest = asyncio.run(load_manifest(args.manifest))
    if args.config is None and manifest.config_path is not None:
        args.config = Path(manifest.config_path)
    config = load_config(args, settings)
    epoch = args.epoch if args.epoch is not None else (manifest.epoch or 0)
    options = augment_options(args, config, settings, epoch)

    parallelism = args.parallelism or settings.DEFAULT_PARALLELISM
    processor = BatchProcessor(parallelism, settings.BATCH_EXECUTOR)
    summary = asyncio.run(processor.run(manifest, options))

    for failure in summary.failures:
        print(f"FAILED {failure.utterance_id}: {failure.error}")
    _emit(args, summary.model_dump(), summary.summary_line())
    return EXIT_OK if summary.failed == 0 else EXIT_DOMAIN_ERROR


def format_cost_table(table: CostTable) -> str:
    c = table.inputs
    lines = [
        f"I={c.num_sources:g} J={c.num_mics} N_x={c.signal_len} N_h={c.rir_len}",
        f"{'':2}{'strategy':<12} {'N':>8} {'blocks':>7} {'multiplications':>18}",
    ]
    for row in table.rows:
        mark = "*" if row.is_best else " "
        lines.append(
            f"{mark:2}{row.strategy.value:<12} {str(row.fft_size or '-'):>8} "
            f"{str(row.block_count or '-'):>7} {row.cost:>18,.1f}"
        )
    best = table.best
    lines.append(f"best: {best.strategy.value} N={best.fft_size} ({best.predicted_cost:,.1f})")
    return "\n".join(lines)


def cmd_cost(args, settings: Settings) -> int:
    """비용 모델 표"""
    table = sweep(CostInputs(
        num_sources=args.num_sources,
        num_mics=args.num_mics,
        signal_len=args.signal_len,
        rir_len=args.rir_len,
    ))
    _emit(args, table.model_dump(mode="json"), format_cost_table(table))
    return EXIT_OK


def parse_eta_list(raw: str) -> List[Optional[float]]:
    values = []
    for item in raw.split(","):
        item = item.strip().lower()
        if not item:
            continue
        values.append(None if item == "none" else float(item))
    return values


def cmd_bench(args, settings: Settings) -> int:
    """전략별 처리 시간 측정"""
    service = BenchService(settings.FFT_BACKEND, settings.BENCH_MIN_TRIALS)
    report = service.run(
        trials=args.trials,
        signal_len=args.signal_len,
        rir_len=args.rir_len,
        eta_list=parse_eta_list(args.eta_list),
        profile=args.profile,
        include_direct=args.include_direct,
        num_sources=args.num_sources,
        num_mics=args.num_mics,
    )
    if args.output_json is not None:
        save_json(report.model_dump(mode="json"), args.output_json)
    _emit(args, report.model_dump(mode="json"), format_report(report))
    return EXIT_OK


def run_command(args, settings: Settings) -> int:
    """명령 실행 후 종료 코드 반환"""
    try:
        return args.handler(args, settings)
    except (RoomSimError, ValidationError, OSError, json.JSONDecodeError) as e:
        logger.error(f"{args.command} 실패: {str(e)}")
        print(f"error: {e}")
        return EXIT_DOMAIN_ERROR
