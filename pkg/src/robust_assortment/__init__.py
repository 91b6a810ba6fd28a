"""Distributionally robust assortment planning and offline learning for MNL models."""

from .base import (
    DataValidationError,
    InvalidAssortmentError,
    NotFittedError,
    NumericRangeError,
    RadiusInfeasibleError,
    RobustAssortmentError,
)
from .estimation import (
    OfflineDataset,
    RankBreakingCounts,
    RankBreakingEstimate,
    RankBreakingEstimator,
    lcb_validity_rate,
    load_dataset,
    point_and_lcb,
    rank_breaking,
)
from .experiments import (
    ExperimentConfig,
    ResultTable,
    default_config,
    run_exp_cardinality,
    run_exp_robustness,
    run_exp_sample_efficiency,
    run_experiment,
)
from .learning import (
    LearnConfig,
    RobustAssortmentLearner,
    learn_robust_assortment,
    pessimistic_value,
    suboptimality,
)
from .model import (
    ChoiceDistribution,
    MnlModel,
    as_assortment,
    choice_probabilities,
    expected_revenue,
    load_model,
    nominal_expected_revenue,
    sample_choice,
    save_model,
)
from .planning import (
    PlanResult,
    evaluate_level_slack,
    intersection_points,
    plan,
    plan_bruteforce,
    plan_general,
    plan_unconstrained,
    plan_uniform_revenue,
)
from .radius import ConstantRadius, RadiusSpec, VaryingRadius, radius
from .robust import (
    DualEvaluation,
    dual_objective,
    kl_divergence,
    primal_robust_revenue_oracle,
    robust_revenue,
    robust_revenue_varying_primal_check,
)
from .simulate import (
    generate_dataset,
    instance_cardinality,
    instance_sample_efficiency,
    perturb_prior,
    random_schedule,
    shift_metrics,
)

__version__ = "0.1.0"

__all__ = [
    "ChoiceDistribution",
    "ConstantRadius",
    "DataValidationError",
    "DualEvaluation",
    "ExperimentConfig",
    "InvalidAssortmentError",
    "LearnConfig",
    "MnlModel",
    "NotFittedError",
    "NumericRangeError",
    "OfflineDataset",
    "PlanResult",
    "RadiusInfeasibleError",
    "RadiusSpec",
    "RankBreakingCounts",
    "RankBreakingEstimate",
    "RankBreakingEstimator",
    "ResultTable",
    "RobustAssortmentError",
    "RobustAssortmentLearner",
    "VaryingRadius",
    "as_assortment",
    "choice_probabilities",
    "default_config",
    "dual_objective",
    "evaluate_level_slack",
    "expected_revenue",
    "generate_dataset",
    "instance_cardinality",
    "instance_sample_efficiency",
    "intersection_points",
    "kl_divergence",
    "lcb_validity_rate",
    "learn_robust_assortment",
    "load_dataset",
    "load_model",
    "nominal_expected_revenue",
    "perturb_prior",
    "pessimistic_value",
    "plan",
    "plan_bruteforce",
    "plan_general",
    "plan_unconstrained",
    "plan_uniform_revenue",
    "point_and_lcb",
    "primal_robust_revenue_oracle",
    "radius",
    "random_schedule",
    "rank_breaking",
    "robust_revenue",
    "robust_revenue_varying_primal_check",
    "run_exp_cardinality",
    "run_exp_robustness",
    "run_exp_sample_efficiency",
    "run_experiment",
    "sample_choice",
    "save_model",
    "shift_metrics",
    "suboptimality",
]
