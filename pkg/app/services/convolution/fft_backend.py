import logging
import threading
from abc import ABC, abstractmethod
from functools import lru_cache
from typing import Dict, Type

import numpy as np

from app.core.exceptions import PlanError
from app.schemas.convolution import is_power_of_two

logger = logging.getLogger(__name__)


class FftBackend(ABC):
    """실수 FFT 엔진 인터페이스. 변환 횟수를 센다."""
    name = "abstract"

    def __init__(self):
        self._lock = threading.Lock()
        self.forward_count = 0
        self.inverse_count = 0

    def reset_counters(self) -> None:
        with self._lock:
            self.forward_count = 0
            self.inverse_count = 0

    def rfft(self, x: np.ndarray, n: int) -> np.ndarray:
        """x 를 n 으로 zero-pad 한 뒤 0..n/2 스펙트럼 반환"""
        self._check_size(n)
        with self._lock:
            self.forward_count += 1
        return self._rfft(np.asarray(x, dtype=np.float64), n)

    def irfft(self, spectrum: np.ndarray, n: int) -> np.ndarray:
        self._check_size(n)
        with self._lock:
            self.inverse_count += 1
        return self._irfft(np.asarray(spectrum, dtype=np.complex128), n)

    @staticmethod
    def _check_size(n: int) -> None:
        if not is_power_of_two(n):
            raise PlanError(f"FFT size must be a power of two, got {n}")

    @abstractmethod
    def _rfft(self, x: np.ndarray, n: int) -> np.ndarray:
        ...

    @abstractmethod
    def _irfft(self, spectrum: np.ndarray, n: int) -> np.ndarray:
        ...


class NumpyFftBackend(FftBackend):
    name = "numpy"

    def _rfft(self, x: np.ndarray, n: int) -> np.ndarray:
        return np.fft.rfft(x, n)

    def _irfft(self, spectrum: np.ndarray, n: int) -> np.ndarray:
        return np.fft.irfft(spectrum, n)


@lru_cache(maxsize=64)
def _bit_reverse(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    index = np.arange(n)
    reversed_index = np.zeros(n, dtype=np.intp)
    for b in range(bits):
        reversed_index |= ((index >> b) & 1) << (bits - 1 - b)
    reversed_index.setflags(write=False)
    return reversed_index


@lru_cache(maxsize=64)
def _twiddles(size: int) -> np.ndarray:
    w = np.exp(-2j * np.pi * np.arange(size // 2) / size)
    w.setflags(write=False)
    return w


@lru_cache(maxsize=64)
def _split_twiddles(n: int) -> np.ndarray:
    # exp(-2*pi*i*k/n), k = 0..n/2
    w = np.exp(-2j * np.pi * np.arange(n // 2 + 1) / n)
    w.setflags(write=False)
    return w


def _fft_radix2(z: np.ndarray, inverse: bool = False) -> np.ndarray:
    """반복형 decimation-in-time radix-2 FFT (역변환은 정규화하지 않음)"""
    n = z.size
    out = z[_bit_reverse(n)]
    size = 2
    while size <= n:
        half = size // 2
        w = _twiddles(size)
        if inverse:
            w = w.conj()
        blocks = out.reshape(n // size, size)
        even = blocks[:, :half]
        odd = blocks[:, half:] * w
        out = np.concatenate((even + odd, even - odd), axis=1).ravel()
        size *= 2
    return out


class Radix2FftBackend(FftBackend):
    """순수 소프트웨어 radix-2 실수 FFT

    길이 n 실수 신호를 n/2 복소 신호로 묶어 변환한 뒤
    Hermitian 대칭으로 0..n/2 스펙트럼을 분리한다.
    """
    name = "radix2"

    def _rfft(self, x: np.ndarray, n: int) -> np.ndarray:
        padded = np.zeros(n)
        count = min(x.size, n)
        padded[:count] = x[:count]
        if n == 1:
            return padded.astype(np.complex128)

        m = n // 2
        spectrum = _fft_radix2(padded[0::2] + 1j * padded[1::2])
        k = np.arange(m + 1)
        z = spectrum[k % m]
        z_mirror = np.conj(spectrum[(m - k) % m])
        even = 0.5 * (z + z_mirror)
        odd = -0.5j * (z - z_mirror)
        return even + _split_twiddles(n) * odd

    def _irfft(self, spectrum: np.ndarray, n: int) -> np.ndarray:
        if n == 1:
            return spectrum[:1].real.copy()

        m = n // 2
        k = np.arange(m)
        x_k = spectrum[k]
        x_mirror = np.conj(spectrum[m - k])
        even = 0.5 * (x_k + x_mirror)
        odd = 0.5 * (x_k - x_mirror) * np.conj(_split_twiddles(n)[:m])
        z = _fft_radix2(even + 1j * odd, inverse=True) / m

        out = np.empty(n)
        out[0::2] = z.real
        out[1::2] = z.imag
        return out


BACKENDS: Dict[str, Type[FftBackend]] = {
    NumpyFftBackend.name: NumpyFftBackend,
    Radix2FftBackend.name: Radix2FftBackend,
}


def create_backend(name: str) -> FftBackend:
    """이름으로 새 백엔드 인스턴스 생성"""
    try:
        return BACKENDS[name]()
    except KeyError:
        raise PlanError(f"unknown FFT backend '{name}' (available: {sorted(BACKENDS)})")


_default_backends: Dict[str, FftBackend] = {}
_default_lock = threading.Lock()


def get_backend(name: str) -> FftBackend:
    """프로세스 공용 백엔드 (이름별 하나)"""
    with _default_lock:
        if name not in _default_backends:
            _default_backends[name] = create_backend(name)
            logger.info(f"FFT backend initialized: {name}")
        return _default_backends[name]
