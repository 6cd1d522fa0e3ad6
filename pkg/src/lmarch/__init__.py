"""Linear long-memory multivariate ARCH: covariance estimation, residual inference
and whitening diagnostics."""

from ._accel import BACKEND
from .covariance import (CovarianceEstimate, ReturnPanel, correlation_from_covariance,
                         cross_product_covariance, effective_covariance, mean_variance,
                         regularize, shrink_correlation)
from .diagnostics import (MCBand, WhiteningReport, lagged_correlation_matrices,
                          mc_confidence_band, mean_residual_variance, unit_variance_quality,
                          whitening_quality_full, whitening_quality_offdiag, whitening_report)
from .kernels import (KernelShape, LongMemoryConfig, WeightKernel, equal_weights,
                      exponential_weights, long_memory_weights, make_kernel)
from .residuals import ResidualPanel, Scheme, compute_residuals, mean_spectrum
from .simulate import SimulationConfig, draw_innovations, simulate_dgp
from .spectral import (SpectralDecomposition, eig_sym, inverse_sqrt_full, inverse_sqrt_fullrank,
                       inverse_sqrt_projected, sqrt_psd, trace_preserving_rescale)

__version__ = "0.1.0"
