"""Spacing and t-spacing tests for the first LARS knots, and their power."""

__version__ = "0.1.0"

from .distfn import (chisq_quantile, chisq_sf, norm_isf, norm_isf_log, norm_logsf, norm_pdf,
                     norm_sf, student_logsf, student_sf)
from .knots import KnotResult, argmax_abs, knots, second_knot
from .model import (CorrelationModel, DesignSpec, KnownCovariance, UnknownScale, correlate, gram,
                    normalize_design, validate_assumptions)
from .power import (chisq_power, cone_weight, g_alpha, h_alpha, power_2d, spacing_power,
                    spacing_power_direct)
from .qmc import GaussianFactor, IntegratorConfig, PowerEstimate, gaussian_expectation
from .spacing import SpacingResult, reject, spacing_pvalue
from .tspacing import TSpacingResult, pinv_sqrt, reduced_gram, sigma_hat, t_spacing_pvalue
