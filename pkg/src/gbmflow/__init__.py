"""GBM with independent entry and exit rates: analytics and Monte Carlo."""

from ._backend import available_backends, backend_name
from .core import (
    DensityCurve,
    ModelParams,
    TimeSeries,
    beta,
    f0,
    gbm_moment_free,
    validate_params,
)
from .ensemble import (
    LdfParams,
    StationaryDensityParams,
    StationaryMoment,
    core_boundary,
    density_finite_time,
    ldf,
    log_moment,
    log_msd,
    moment,
    msd,
    phi,
    stationary_density,
    stationary_density_value,
    stationary_grid,
    stationary_moment,
)
from .errors import (
    GbmflowError,
    ParameterError,
    QuadratureError,
    SimulationBudgetError,
)
from .firstpassage import (
    FirstPassageSetup,
    MfptScanResult,
    fpt_density_free,
    fpt_density_open,
    fpt_laplace_free,
    g_kernel,
    mfpt_open,
    mfpt_open_survival_form,
    mfpt_reset,
    optimal_exit,
    optimal_reset,
    speedup_ratio,
    survival_free,
    survival_mortal,
    survival_open,
)
from .mc import (
    EnsembleState,
    EstimatedDensity,
    FptSample,
    MfptEstimate,
    ensemble_statistics,
    estimate_density,
    gillespie_population,
    mfpt_statistics,
    population_mean_curve,
    sample_fpt_open,
    sample_fpt_reset,
    simulate_ensemble,
    simulate_fpt_open,
    simulate_fpt_reset,
    stationary_sample_pool,
)
from .numerics import (
    GoldenResult,
    QuadratureResult,
    QuadratureSpec,
    cumulative_integral,
    find_root_bracketed,
    integrate_adaptive,
    minimize_golden,
)
from .rngstreams import RngSpec, stream_seed

__version__ = "0.1.0"
