from .cost_model import cost_direct, cost_full_fft, cost_ola, plan, plan_for, sweep
from .fft_backend import get_backend
from .filters import convolve

__all__ = ['cost_direct', 'cost_full_fft', 'cost_ola', 'plan', 'plan_for', 'sweep', 'get_backend', 'convolve']
