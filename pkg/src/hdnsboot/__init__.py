"""Multiplier-bootstrap inference for high-dimensional non-stationary time series."""
from .bootstrap import (block_sums, bootstrap_sample, conditional_covariance, delta_diagnostics,
                        multiplier_draw, select_block_size)
from .dependence import cumulative_theta, estimate_theta
from .gaussian import (coupled_gaussian_pair, coupling_bound, empirical_kolmogorov,
                       empirical_w2_1d, gaussian_w2, min_eigenvalue, spd_sqrt, tv_bound,
                       vha_check)
from .inference import (combined_statistic, estimate_sigma_hat, ols_fit, run_combined_test,
                        run_threshold_test, soft_threshold)
from .models import (ModelSpec, generate_regression, simulate_error_process, simulate_model)

__version__ = "0.1.0"
