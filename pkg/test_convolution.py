import numpy as np
import pytest
from pydantic import ValidationError

from app.core.exceptions import PlanError, SampleRateMismatchError
from app.schemas.audio import AudioBuffer
from app.schemas.convolution import ConvolutionPlan, CostInputs, Strategy
from app.schemas.room import Rir
from app.services.convolution.cost_model import (
    block_count,
    cost_direct,
    cost_full_fft,
    cost_ola,
    next_pow2,
    plan,
    plan_for,
    sweep,
)
from app.services.convolution.fft_backend import (
    NumpyFftBackend,
    Radix2FftBackend,
    create_backend,
    get_backend,
)
from app.services.convolution.filters import convolve, convolve_direct, convolve_full_fft, convolve_ola

AVERAGE_INPUTS = CostInputs(num_sources=2.55, num_mics=2, signal_len=116991, rir_len=3893)


def _x(samples, rate=16000) -> AudioBuffer:
    return AudioBuffer.mono(samples, rate)


def _h(samples, rate=16000) -> Rir:
    return Rir(samples=samples, sample_rate=rate)


def _close(actual: AudioBuffer, expected: AudioBuffer, tol: float = 1e-9) -> None:
    assert actual.length == expected.length
    bound = tol * (1.0 + np.max(np.abs(expected.samples)))
    assert np.max(np.abs(actual.samples - expected.samples)) <= bound


@pytest.fixture(params=["numpy", "radix2"])
def backend(request):
    return create_backend(request.param)


class TestConvolveDirect:
    def test_identity_kernel(self):
        np.testing.assert_array_equal(convolve_direct(_x([1, 2, 3]), _h([1])).channel(0), [1, 2, 3])

    def test_hand_examples(self):
        np.testing.assert_allclose(convolve_direct(_x([1, 1]), _h([1, 1])).channel(0), [1, 2, 1])
        np.testing.assert_allclose(
            convolve_direct(_x([2, 0, -1]), _h([0.5, 0.25])).channel(0), [1, 0.5, -0.5, -0.25]
        )

    def test_sample_rate_mismatch(self):
        with pytest.raises(SampleRateMismatchError):
            convolve_direct(_x([1, 2], 16000), _h([1], 8000))


class TestFftFiltering:
    def test_full_fft_matches_direct(self, backend):
        rng = np.random.default_rng(0)
        for _ in range(200):
            x = _x(rng.standard_normal(rng.integers(1, 1001)))
            h = _h(rng.standard_normal(rng.integers(1, 101)))
            _close(convolve_full_fft(x, h, backend), convolve_direct(x, h))

    def test_full_fft_zero_input(self, backend):
        out = convolve_full_fft(_x(np.zeros(50)), _h([0.3, -0.2, 0.1]), backend)
        assert out.length == 52
        assert np.max(np.abs(out.samples)) < 1e-12

    def test_full_fft_rejects_short_size(self, backend):
        with pytest.raises(PlanError):
            convolve_full_fft(_x(np.ones(10)), _h(np.ones(10)), backend, fft_size=16)

    def test_ola_small_block(self, backend):
        rng = np.random.default_rng(1)
        x, h = _x(rng.standard_normal(50)), _h(rng.standard_normal(8))
        _close(convolve_ola(x, h, 16, backend), convolve_direct(x, h), tol=1e-12)

    def test_ola_identity(self, backend):
        x = _x(np.arange(10.0))
        _close(convolve_ola(x, _h([1.0]), 4, backend), x)

    @pytest.mark.parametrize("signal_len", [9 * 9, 9 * 9 + 1, 9 * 9 - 1])
    def test_ola_block_boundaries(self, backend, signal_len):
        rng = np.random.default_rng(signal_len)
        h = _h(rng.standard_normal(8))  # N=16 -> L=9
        x = _x(rng.standard_normal(signal_len))
        _close(convolve_ola(x, h, 16, backend), convolve_direct(x, h))

    def test_ola_block_length_one(self, backend):
        rng = np.random.default_rng(5)
        x, h = _x(rng.standard_normal(20)), _h(rng.standard_normal(16))
        _close(convolve_ola(x, h, 16, backend), convolve_direct(x, h))

    def test_oracle_equivalence_any_legal_size(self):
        rng = np.random.default_rng(2)
        engine = NumpyFftBackend()
        for _ in range(200):
            x = _x(rng.standard_normal(rng.integers(1, 2001)))
            h = _h(rng.standard_normal(rng.integers(1, 257)))
            expected = convolve_direct(x, h)
            sizes = [n for n in (2 ** k for k in range(13)) if n >= h.length]
            _close(convolve_ola(x, h, int(rng.choice(sizes)), engine), expected)
            _close(convolve_full_fft(x, h, engine), expected)

    def test_ola_rejects_bad_sizes(self, backend):
        x, h = _x(np.ones(10)), _h(np.ones(8))
        with pytest.raises(PlanError):
            convolve_ola(x, h, 4, backend)
        with pytest.raises(PlanError):
            convolve_ola(x, h, 12, backend)

    def test_ola_reuses_rir_spectrum(self):
        engine = create_backend("numpy")
        convolve_ola(_x(np.ones(1000)), _h(np.ones(100)), 256, engine)
        blocks = block_count(1000, 100, 256)
        assert blocks == 7
        assert engine.forward_count == blocks + 1
        assert engine.inverse_count == blocks

    def test_full_fft_transform_count(self):
        engine = create_backend("radix2")
        convolve_full_fft(_x(np.ones(100)), _h(np.ones(10)), engine)
        assert (engine.forward_count, engine.inverse_count) == (2, 1)
        engine.reset_counters()
        assert (engine.forward_count, engine.inverse_count) == (0, 0)


class TestDispatch:
    def test_convolve_follows_plan(self):
        rng = np.random.default_rng(9)
        x, h = _x(rng.standard_normal(300)), _h(rng.standard_normal(40))
        expected = convolve_direct(x, h)
        for p in (
            ConvolutionPlan(strategy=Strategy.DIRECT),
            ConvolutionPlan(strategy=Strategy.FULL_FFT, fft_size=512),
            ConvolutionPlan(strategy=Strategy.OVERLAP_ADD, fft_size=64),
        ):
            _close(convolve(x, h, p), expected)

    def test_ola_plan_needs_size(self):
        with pytest.raises(PlanError):
            convolve(_x([1, 2]), _h([1]), ConvolutionPlan(strategy=Strategy.OVERLAP_ADD))

    def test_plan_validation(self):
        with pytest.raises(ValidationError):
            ConvolutionPlan(strategy=Strategy.OVERLAP_ADD, fft_size=12)
        with pytest.raises(ValidationError):
            ConvolutionPlan(strategy=Strategy.DIRECT, fft_size=16)


class TestRadix2Backend:
    @pytest.mark.parametrize("n", [1, 2, 4, 8, 64, 1024])
    def test_rfft_matches_numpy(self, n):
        rng = np.random.default_rng(n)
        x = rng.standard_normal(max(1, n - 3))
        np.testing.assert_allclose(Radix2FftBackend().rfft(x, n), np.fft.rfft(x, n), atol=1e-9)

    @pytest.mark.parametrize("n", [1, 2, 16, 512])
    def test_irfft_inverts_rfft(self, n):
        rng = np.random.default_rng(n + 1)
        x = rng.standard_normal(n)
        engine = Radix2FftBackend()
        np.testing.assert_allclose(engine.irfft(engine.rfft(x, n), n), x, atol=1e-9)

    def test_non_power_of_two(self):
        with pytest.raises(PlanError):
            Radix2FftBackend().rfft(np.ones(6), 6)

    def test_unknown_backend(self):
        with pytest.raises(PlanError):
            create_backend("fftw")

    def test_shared_backend_instance(self):
        assert get_backend("numpy") is get_backend("numpy")


class TestCostModel:
    def test_cost_direct(self):
        assert cost_direct(AVERAGE_INPUTS) == pytest.approx(2.55 * 2 * 116991 * 3893, rel=1e-12)
        assert cost_direct(AVERAGE_INPUTS) == pytest.approx(2.3228e9, rel=1e-4)
        assert cost_direct(CostInputs(num_sources=1, num_mics=1, signal_len=1, rir_len=1)) == 1
        assert cost_direct(CostInputs(num_sources=2, num_mics=2, signal_len=10, rir_len=5)) == 200

    def test_cost_full_fft(self):
        assert cost_full_fft(AVERAGE_INPUTS, 2 ** 17) == pytest.approx(69_520_588.8, rel=1e-12)
        tiny = CostInputs(num_sources=1, num_mics=1, signal_len=1, rir_len=1)
        assert cost_full_fft(tiny, 2) == 16
        assert cost_full_fft(tiny.model_copy(update={"num_mics": 2}), 4) == 112

    def test_cost_full_fft_rejects_short_size(self):
        with pytest.raises(PlanError):
            cost_full_fft(AVERAGE_INPUTS, 2 ** 16)

    def test_cost_ola(self):
        assert block_count(116991, 3893, 2 ** 14) == 10
        assert cost_ola(AVERAGE_INPUTS, 2 ** 14) == pytest.approx(50_803_507.2, rel=1e-12)
        assert cost_ola(CostInputs(num_sources=1, num_mics=1, signal_len=1, rir_len=1), 2) == 16
        assert cost_ola(CostInputs(num_sources=1, num_mics=1, signal_len=100, rir_len=1), 4) == 1016

    def test_cost_ola_rejects_short_size(self):
        with pytest.raises(PlanError):
            cost_ola(CostInputs(num_sources=1, num_mics=1, signal_len=100, rir_len=9), 8)

    def test_next_pow2(self):
        assert [next_pow2(n) for n in (1, 2, 3, 4, 5, 120883)] == [1, 2, 4, 4, 8, 131072]

    def test_plan_average_inputs(self):
        best = plan(AVERAGE_INPUTS)
        assert best.strategy == Strategy.OVERLAP_ADD
        assert best.fft_size == 2 ** 14
        assert best.predicted_cost == pytest.approx(50_803_507.2, rel=1e-12)

    def test_plan_brute_force(self):
        c = CostInputs(num_sources=1, num_mics=1, signal_len=16, rir_len=2)
        candidates = [(cost_full_fft(c, 32), 32, 0)]
        candidates += [(cost_ola(c, n), n, 1) for n in (2, 4, 8, 16, 32)]
        cost, size, kind = min(candidates)
        best = plan(c)
        assert best.predicted_cost == cost
        assert best.fft_size == size
        assert best.strategy == (Strategy.FULL_FFT if kind == 0 else Strategy.OVERLAP_ADD)

    def test_tie_prefers_full_fft(self):
        best = plan(CostInputs(num_sources=1, num_mics=1, signal_len=1, rir_len=1))
        assert best.strategy == Strategy.FULL_FFT
        assert best.fft_size == 1

    def test_rir_as_long_as_signal(self):
        c = CostInputs(num_sources=1, num_mics=1, signal_len=3000, rir_len=3000)
        best = plan(c)
        assert best.predicted_cost <= cost_full_fft(c, next_pow2(c.full_len))

    def test_sweep_marks_minimum(self):
        table = sweep(AVERAGE_INPUTS)
        assert table.rows[0].strategy == Strategy.DIRECT
        candidates = [row for row in table.rows if row.strategy != Strategy.DIRECT]
        assert [row.fft_size for row in candidates] == [131072, 4096, 8192, 16384, 32768, 65536, 131072]
        marked = [row for row in table.rows if row.is_best]
        assert len(marked) == 1
        assert marked[0].cost == min(row.cost for row in candidates)

    def test_plan_for_restricts_strategy(self):
        full = plan_for(AVERAGE_INPUTS, Strategy.FULL_FFT)
        assert full.fft_size == 2 ** 17
        ola = plan_for(AVERAGE_INPUTS, Strategy.OVERLAP_ADD)
        assert ola.fft_size == 2 ** 14
        direct = plan_for(AVERAGE_INPUTS, Strategy.DIRECT)
        assert direct.fft_size is None
        assert direct.predicted_cost == cost_direct(AVERAGE_INPUTS)
