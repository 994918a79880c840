import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from dotenv import load_dotenv

from app.cli.commands import (
    STRATEGY_FLAGS,
    cmd_augment,
    cmd_batch,
    cmd_bench,
    cmd_cost,
    cmd_rir,
    run_command,
)
from app.core.config import Settings
from app.schemas.audio import WavFormat
from app.services.bench.bench_service import AVERAGE_RIR_LEN, AVERAGE_SIGNAL_LEN


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, default=None, help="JSON 설정 파일")
    parser.add_argument("--seed", type=int, default=None, help="샘플러 시드 (없으면 ROOMSIM_SEED)")
    parser.add_argument("--json", action="store_true", help="기계 판독용 JSON 출력")
    parser.add_argument("-v", "--verbose", action="store_true")


def _rendering(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--eta-db", type=float, default=None, help="RIR 꼬리 제거 임계값 (dB)")
    parser.add_argument("--strategy", choices=sorted(STRATEGY_FLAGS), default="auto")
    parser.add_argument("--fft-size", type=int, default=None)
    parser.add_argument("--format", choices=[f.value for f in WavFormat], default=WavFormat.PCM16.value)
    parser.add_argument("--normalize", action="store_true", help="WAV 저장 시 피크 정규화")
    parser.add_argument("--per-channel", action="store_true", help="채널별 WAV 파일로 저장")
    parser.add_argument("--noise", type=Path, action="append", default=[], help="잡음 WAV (반복 가능)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="roomsim", description="Room simulator for training-data augmentation")
    sub = parser.add_subparsers(dest="command", required=True)

    rir = sub.add_parser("rir", help="이미지 방법 RIR 생성")
    _common(rir)
    rir.add_argument("--source", type=float, nargs=3, metavar=("X", "Y", "Z"))
    rir.add_argument("--mic", type=float, nargs=3, metavar=("X", "Y", "Z"))
    rir.add_argument("--utterance-id", default="rir")
    rir.add_argument("--epoch", type=int, default=0)
    rir.add_argument("--eta-db", type=float, default=None)
    rir.add_argument("--output", type=Path, required=True, help=".wav (float32) 또는 .json")
    rir.set_defaults(handler=cmd_rir)

    augment = sub.add_parser("augment", help="발화 하나 잡음화")
    _common(augment)
    _rendering(augment)
    augment.add_argument("input", type=Path)
    augment.add_argument("--epoch", type=int, default=0)
    augment.add_argument("--utterance-id", default=None)
    augment.add_argument("--output", type=Path, default=None, help="출력 경로 prefix")
    augment.set_defaults(handler=cmd_augment)

    batch = sub.add_parser("batch", help="매니페스트 배치 잡음화")
    _common(batch)
    _rendering(batch)
    batch.add_argument("manifest", type=Path)
    batch.add_argument("--epoch", type=int, default=None)
    batch.add_argument("--parallelism", type=int, default=None)
    batch.set_defaults(handler=cmd_batch)

    cost = sub.add_parser("cost", help="곱셈 수 비용 모델 표")
    _common(cost)
    cost.add_argument("num_sources", type=float, help="I")
    cost.add_argument("num_mics", type=int, help="J")
    cost.add_argument("signal_len", type=int, help="N_x")
    cost.add_argument("rir_len", type=int, help="N_h")
    cost.set_defaults(handler=cmd_cost)

    bench = sub.add_parser("bench", help="필터링 방식별 처리 시간 측정")
    _common(bench)
    bench.add_argument("--trials", type=int, default=20)
    bench.add_argument("--signal-len", type=int, default=AVERAGE_SIGNAL_LEN)
    bench.add_argument("--rir-len", type=int, default=AVERAGE_RIR_LEN)
    bench.add_argument("--profile", choices=["synthetic", "image"], default="synthetic")
    bench.add_argument("--eta-list", default="none,20,10")
    bench.add_argument("--include-direct", action="store_true")
    bench.add_argument("--num-sources", type=int, default=1)
    bench.add_argument("--num-mics", type=int, default=1)
    bench.add_argument("--output-json", type=Path, default=None)
    bench.set_defaults(handler=cmd_bench)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "fft_size", None) is not None and args.strategy not in ("fft", "ola"):
            parser.error("--fft-size requires --strategy fft or ola")
    except SystemExit as e:
        return int(e.code or 0)

    settings = Settings()
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else getattr(logging, settings.LOG_LEVEL, logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )
    return run_command(args, settings)
