"""Adaptive positive-weight quadrature for Bayesian prediction.

Implicit quadrature rules are extracted from samples of a nearest-neighbor
posterior surrogate, nested across refinements so expensive model
evaluations are reused, and applied to posterior moments and predictions.
"""

from .adaptive import (
    AdaptiveConfig,
    AdaptiveError,
    AdaptiveState,
    BuiltinModel,
    GrowthSchedule,
    IterationRecord,
    init,
    run,
    step,
)
from .basis import MultiIndexBasis, enumerate_basis, total_degree_count, vandermonde
from .bayes import (
    GaussianIIDLikelihood,
    GPDiscrepancyLikelihood,
    PriorBox,
    StatisticalModel,
    log_gaussian_iid,
    log_gp_discrepancy,
    log_posterior_unnormalized,
    marginalize_hyperparameters,
)
from .baselines import (
    clenshaw_curtis,
    monte_carlo_posterior_mean,
    prior_rule_posterior_estimate,
    smolyak,
    tensor_grid,
)
from .genz import GenzFunction, evaluate_genz, generate_data, random_genz
from .implicit import (
    HAVE_COMPILED_KERNEL,
    ImplicitRuleError,
    construct_implicit_rule,
    extend_rule,
    sample_moments,
)
from .proposal import DegenerateSurrogateError, ProposalSurrogate
from .rules import (
    QuadratureRule,
    RuleError,
    apply,
    apply_normalized,
    deserialize,
    is_nested,
    serialize,
)
from .subproc import ProtocolError, SubprocessModel

__version__ = "0.1.0"

__all__ = [
    "AdaptiveConfig",
    "AdaptiveError",
    "AdaptiveState",
    "BuiltinModel",
    "DegenerateSurrogateError",
    "GPDiscrepancyLikelihood",
    "GaussianIIDLikelihood",
    "GenzFunction",
    "GrowthSchedule",
    "HAVE_COMPILED_KERNEL",
    "ImplicitRuleError",
    "IterationRecord",
    "MultiIndexBasis",
    "PriorBox",
    "ProposalSurrogate",
    "ProtocolError",
    "QuadratureRule",
    "RuleError",
    "StatisticalModel",
    "SubprocessModel",
    "apply",
    "apply_normalized",
    "clenshaw_curtis",
    "construct_implicit_rule",
    "deserialize",
    "enumerate_basis",
    "evaluate_genz",
    "extend_rule",
    "generate_data",
    "init",
    "is_nested",
    "log_gaussian_iid",
    "log_gp_discrepancy",
    "log_posterior_unnormalized",
    "marginalize_hyperparameters",
    "monte_carlo_posterior_mean",
    "prior_rule_posterior_estimate",
    "random_genz",
    "run",
    "sample_moments",
    "serialize",
    "smolyak",
    "step",
    "tensor_grid",
    "total_degree_count",
    "vandermonde",
]
