"""Off-policy evaluation under unobserved confounding.

Thin Python surface over the C++ core: environments, simulation, estimators,
exact oracle quantities, propensity diagnostics and the parameter sweep.
"""

from ._core import (
    CensoredLog,
    EmptyInputError,
    EnvironmentSpec,
    EstimateReport,
    FullLog,
    IoError,
    Policy,
    SupportError,
    UndefinedEstimateError,
    ValidationError,
    action_prob,
    deterministic_policy,
    diagnostics,
    dm_action_rewards,
    dm_value,
    empirical_frequencies,
    estimate_propensities,
    harness,
    ips_estimated_value,
    ips_ideal_value,
    oracle,
    paper_env,
    sample_full_log,
    snips_value,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "CensoredLog",
    "EmptyInputError",
    "EnvironmentSpec",
    "EstimateReport",
    "FullLog",
    "IoError",
    "Policy",
    "SupportError",
    "UndefinedEstimateError",
    "ValidationError",
    "action_prob",
    "deterministic_policy",
    "diagnostics",
    "dm_action_rewards",
    "dm_value",
    "empirical_frequencies",
    "estimate_propensities",
    "harness",
    "ips_estimated_value",
    "ips_ideal_value",
    "oracle",
    "paper_env",
    "sample_full_log",
    "snips_value",
    "validate",
]
