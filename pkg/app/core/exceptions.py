class RoomSimError(ValueError):
    """시뮬레이터 도메인 오류 기본 클래스"""


class InvalidPlacementError(RoomSimError):
    """방 내부에 있지 않은 음원/마이크 위치"""


class DegenerateGeometryError(RoomSimError):
    """가상 음원과 마이크 사이 거리가 0"""


class DegenerateInputError(RoomSimError):
    """에너지가 0인 신호나 RIR"""


class PlanError(RoomSimError):
    """사용할 수 없는 FFT 크기 또는 필터링 계획"""


class SampleRateMismatchError(RoomSimError):
    """샘플링 레이트 불일치"""


class SimulationConfigError(RoomSimError):
    """설정 값끼리 양립할 수 없음"""


class WavFormatError(RoomSimError):
    """지원하지 않거나 손상된 WAV 파일"""
