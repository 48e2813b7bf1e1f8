from ._block import Block, BlockError, BlockState, BlockValidateError
from ._config import Config
from ._dag import Dag, DagTrace
from ._errors import (
    ConfigurationError,
    CtrlqError,
    DivergenceError,
    EvaluationError,
    InsufficientDataError,
    InvalidArgumentError,
    OutOfDomainError,
    SimulationBlowUpError,
)
from ._experiment import ExperimentConfig
from ._improve import ContractionFit, MCConfig, PiTrace, fit_contraction, improvement_step, optimal_reference, run_pi
from ._library import Info, Library
from ._model import (
    ActionSpace,
    AssumptionBounds,
    AssumptionReport,
    ProblemSpec,
    check_assumptions,
    linear_example,
    lq_fixture,
)
from ._policy import GibbsPolicy, PolicyStats, ks_statistic, tv_distance
from ._qlearn import (
    LearnTrace,
    ParamFamily,
    Schedule,
    estimate_delta,
    example_q_family,
    example_value_oracle,
    martingale_residual,
    martingale_residuals,
    mean_field_h_closed,
    mean_field_h_mc,
    predicted_mc_ratio,
    robbins_monro,
    run_q_learning,
    run_semi_q,
    sgd_step_full,
    sgd_step_semi,
)
from ._regret import (
    RegretReport,
    accumulate,
    envelope,
    envelope_regime,
    fit_exponent,
    normalize_envelope,
    quantile_curve,
    regret_report,
)
from ._runner import run, sweep
from ._sim import PathBatch, Trajectory, rollout, rollout_batch, simulate_paths
from ._util import derive_rng
from ._value import (
    Estimate,
    ValueSurface,
    discounted_returns,
    fit_surface,
    gibbs_policy_from_surface,
    gradient,
    hjb_solve,
    mc_evaluate,
    mc_evaluate_original,
    optimal_policy,
)
from ._version import __version__

__all__ = [
    'ActionSpace',
    'AssumptionBounds',
    'AssumptionReport',
    'Block',
    'BlockError',
    'BlockState',
    'BlockValidateError',
    'Config',
    'ConfigurationError',
    'ContractionFit',
    'CtrlqError',
    'Dag',
    'DagTrace',
    'DivergenceError',
    'Estimate',
    'EvaluationError',
    'ExperimentConfig',
    'GibbsPolicy',
    'Info',
    'InsufficientDataError',
    'InvalidArgumentError',
    'LearnTrace',
    'Library',
    'MCConfig',
    'OutOfDomainError',
    'ParamFamily',
    'PathBatch',
    'PiTrace',
    'PolicyStats',
    'ProblemSpec',
    'RegretReport',
    'Schedule',
    'SimulationBlowUpError',
    'Trajectory',
    'ValueSurface',
    '__version__',
    'accumulate',
    'check_assumptions',
    'derive_rng',
    'discounted_returns',
    'envelope',
    'envelope_regime',
    'estimate_delta',
    'example_q_family',
    'example_value_oracle',
    'fit_contraction',
    'fit_exponent',
    'fit_surface',
    'gibbs_policy_from_surface',
    'gradient',
    'hjb_solve',
    'improvement_step',
    'ks_statistic',
    'linear_example',
    'lq_fixture',
    'martingale_residual',
    'martingale_residuals',
    'mc_evaluate',
    'mc_evaluate_original',
    'mean_field_h_closed',
    'mean_field_h_mc',
    'normalize_envelope',
    'optimal_policy',
    'optimal_reference',
    'predicted_mc_ratio',
    'quantile_curve',
    'regret_report',
    'robbins_monro',
    'rollout',
    'rollout_batch',
    'run',
    'run_pi',
    'run_q_learning',
    'run_semi_q',
    'sgd_step_full',
    'sgd_step_semi',
    'simulate_paths',
    'sweep',
    'tv_distance',
]

# Public objects report the package as their module, as in the documentation.
#
for _name in __all__:
    _obj = globals()[_name]
    if isinstance(_obj, type) or callable(_obj):
        _obj.__module__ = 'ctrlq'

Config.__module__ = 'ctrlq'

del _name, _obj
