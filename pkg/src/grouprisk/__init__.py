"""Exact group-wise risks and verified bounds for two-group Gaussian mixture classifiers."""

__version__ = "0.1.0"

from .bounds import (
    BoundReport,
    ConsistencyResult,
    adjusted_quantities,
    bound_exponent,
    consistency_check,
    evaluate_bounds,
    tightness_ratio,
)
from .estimators import (
    DualSolution,
    GramStats,
    accumulate_gram,
    fit_cmni,
    fit_gd,
    fit_ridge,
    interpolation_residual,
    x_mu_from_parts,
)
from .harness import (
    SweepAxis,
    SweepRow,
    SweepSpec,
    derive_config,
    emit,
    preset,
    resolve_tau,
    run_sweep,
)
from .model import (
    AssumptionReport,
    Dataset,
    ModelConfig,
    SignalStrengths,
    check_assumptions,
    embed_means,
    group_mean,
    load_dataset,
    noise_blocks,
    sample_dataset,
    sample_labels,
    save_dataset,
    signal_strengths,
)
from .primitives import (
    Decomposition,
    PrimitiveSet,
    build_decomposition,
    check_aux_inequalities,
    compute_primitives,
    risk_identity_check,
    verify_primitive_bounds,
    wishart_coverage,
    wishart_interval,
    woodbury_invert,
)
from .risk import (
    GroupRiskEntry,
    RiskReport,
    build_report,
    group_risk,
    monte_carlo_risk,
    q_bounds,
    q_function,
    q_lower_mills,
    q_upper_two_term,
    worst_and_average,
)

__all__ = [
    "__version__",
    "AssumptionReport",
    "BoundReport",
    "ConsistencyResult",
    "Dataset",
    "Decomposition",
    "DualSolution",
    "GramStats",
    "GroupRiskEntry",
    "ModelConfig",
    "PrimitiveSet",
    "RiskReport",
    "SignalStrengths",
    "SweepAxis",
    "SweepRow",
    "SweepSpec",
    "accumulate_gram",
    "adjusted_quantities",
    "bound_exponent",
    "build_decomposition",
    "build_report",
    "check_assumptions",
    "check_aux_inequalities",
    "compute_primitives",
    "consistency_check",
    "derive_config",
    "emit",
    "embed_means",
    "evaluate_bounds",
    "fit_cmni",
    "fit_gd",
    "fit_ridge",
    "group_mean",
    "group_risk",
    "interpolation_residual",
    "load_dataset",
    "monte_carlo_risk",
    "noise_blocks",
    "preset",
    "q_bounds",
    "q_function",
    "q_lower_mills",
    "q_upper_two_term",
    "resolve_tau",
    "risk_identity_check",
    "run_sweep",
    "sample_dataset",
    "sample_labels",
    "save_dataset",
    "signal_strengths",
    "tightness_ratio",
    "verify_primitive_bounds",
    "wishart_coverage",
    "wishart_interval",
    "woodbury_invert",
    "worst_and_average",
    "x_mu_from_parts",
]
