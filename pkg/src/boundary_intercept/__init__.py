"""Kernel-type estimators of the sample-selection-model intercept.

The intercept of a semiparametrically estimated sample selection model is
identified "at infinity": only observations whose selection probability
approaches one carry information about it.  The estimators implemented here
recast that limit as a boundary problem by mapping the fitted selection
index through a CDF-like transform onto (0, 1] and running one-sided
kernel regressions at the boundary point 1.

Subpackages
-----------
kernels     one-sided kernels and their closed-form moment constants
transform   leave-one-out empirical CDF and analytic index transforms
firststage  probit MLE, two-step control-function fit, density-weighted
            average-derivative index coefficients
estimators  tail-mean, smoothed tail-mean and local polynomial intercept
            estimators on the transformed index
bandwidth   fully data-driven plug-in bandwidth selectors
inference   asymptotic standard errors and two-sided t-tests
dgp         simulation designs, counter-based RNG streams, calibration
montecarlo  replication harness, summaries, CSV/manifest emission
cli         command line entry point (``boundary-intercept``)
"""

__version__ = "0.1.0"

from .bandwidth import (
    BandwidthReport,
    pilot_bandwidths,
    plugin_bandwidths,
    select_h_local_constant,
    select_h_local_linear,
)
from .data import Dataset
from .dgp import SimulationDesign, calibrate_c0, generate
from .errors import (
    EmptyWindowError,
    EstimationError,
    InsufficientSupportError,
    RankDeficiencyError,
)
from .estimators import (
    InterceptEstimate,
    disturbance_variance,
    local_constant,
    local_linear,
    local_quadratic,
    smoothed_tail_mean,
    tail_mean,
)
from .firststage import (
    TwoStepFit,
    average_derivative_beta,
    heckman_two_step,
    probit_mle,
)
from .inference import (
    CRITICAL_5PCT,
    TestResult,
    se_local_constant,
    se_local_linear,
    se_tail_mean,
    t_test,
)
from .kernels import KERNEL_NAMES, KernelConstants, as_smoother, constants
from .montecarlo import (
    RosterEntry,
    SummaryRow,
    default_roster,
    run_replication,
    run_study,
    summarize,
    write_summary_csv,
)
from .transform import loo_ecdf

__all__ = [
    "BandwidthReport",
    "CRITICAL_5PCT",
    "Dataset",
    "EmptyWindowError",
    "EstimationError",
    "InsufficientSupportError",
    "InterceptEstimate",
    "KERNEL_NAMES",
    "KernelConstants",
    "RankDeficiencyError",
    "RosterEntry",
    "SimulationDesign",
    "SummaryRow",
    "TestResult",
    "TwoStepFit",
    "as_smoother",
    "average_derivative_beta",
    "calibrate_c0",
    "constants",
    "default_roster",
    "disturbance_variance",
    "generate",
    "heckman_two_step",
    "local_constant",
    "local_linear",
    "local_quadratic",
    "loo_ecdf",
    "pilot_bandwidths",
    "plugin_bandwidths",
    "probit_mle",
    "run_replication",
    "run_study",
    "se_local_constant",
    "se_local_linear",
    "se_tail_mean",
    "select_h_local_constant",
    "select_h_local_linear",
    "smoothed_tail_mean",
    "summarize",
    "t_test",
    "tail_mean",
    "write_summary_csv",
    "__version__",
]
