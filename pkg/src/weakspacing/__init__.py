"""Real-part bulk spacing laws of the elliptic Ginibre ensemble at weak non-Hermiticity."""
from .errors import ConvergenceError, IllConditionedError
from .fredholm import (
    density_at_zero,
    gaudin_mehta_cdf,
    log_det_with_t_derivs,
    nystrom_log_det,
    poisson_cdf,
    small_s_coefficient,
    spacing_curve,
    weak_spacing_cdf,
    weak_spacing_density,
)
from .kernels import KernelSpec, WeightMeasure
from .painleve import PainleveGrid, evolve, reconstruct_log_d, residual_r38

__version__ = "0.1.0"
