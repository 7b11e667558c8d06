"""Inference for Gumbel Type-II lifetimes under a simple step-stress life test.

Classical (Newton-Raphson MLE with observed-information intervals) and
Bayesian (random-walk Metropolis-Hastings with SEL/LINEX estimates and
credible/HPD intervals) inference for Type-II censored samples from the
tampered-random-variable step-stress model, plus a Monte Carlo study harness
and goodness-of-fit tooling with an embedded bladder-cancer case study.
"""

from .gumbel import (
    ModelParams,
    TamperingTime,
    baseline_cdf,
    baseline_hazard,
    baseline_pdf,
    baseline_quantile,
    baseline_sf,
    trv_cdf,
    trv_pdf,
    trv_quantile,
)
from .sampling import (
    Case,
    CensoredSample,
    ExperimentDesign,
    classify_case,
    draw_trv_lifetimes,
    generate_censored_sample,
    make_rng,
    replicate_rng,
)
from .mle import (
    ConvergenceError,
    IdentifiabilityError,
    IntervalEstimate,
    MleFit,
    SolverOptions,
    asymptotic_ci,
    fit_mle,
    log_likelihood,
    observed_information,
    score,
)

__version__ = "0.1.0"

from .bayes import (  # noqa: E402  (bayes imports mle internals)
    Loss,
    LossSpec,
    PosteriorChain,
    PriorSpec,
    credible_interval,
    default_mh_inputs,
    hpd_interval,
    log_conditional,
    log_posterior_unnorm,
    log_prior,
    point_estimate,
    run_mh,
    study_prior,
)
from .bladder import (  # noqa: E402
    Dataset,
    bladder_remission_times,
    bladder_sslt_sample,
    embedded_bladder_dataset,
)
from .gof import (  # noqa: E402
    KsResult,
    ecdf,
    fit_baseline_mle,
    ks_test,
    ks_test_bootstrap,
    qq_points,
    summary_plots_data,
)
from .study import StudyConfig, StudyResult, StudyRow, emit_table, parse_table_csv, run_study  # noqa: E402
