"""Effective degrees of freedom of sums of independent variance components."""

__version__ = "0.1.0"

from .core import (
    AllZeroComponents,
    ComponentSet,
    DfEstimate,
    EdfError,
    EmptyInput,
    EstimatorKind,
    InvalidComponent,
    InvalidK,
    InvalidNu,
    VarianceComponent,
    adjustment_factor_v1,
    batch_estimates,
    estimate,
    estimate_all,
    improved_df,
    improved_multiplier,
    jr_lambda,
    naep_df,
    normalized_components,
    proposed_df_v1,
    satterthwaite_df,
)

__all__ = [
    "AllZeroComponents",
    "ComponentSet",
    "DfEstimate",
    "EdfError",
    "EmptyInput",
    "EstimatorKind",
    "InvalidComponent",
    "InvalidK",
    "InvalidNu",
    "VarianceComponent",
    "adjustment_factor_v1",
    "batch_estimates",
    "estimate",
    "estimate_all",
    "improved_df",
    "improved_multiplier",
    "jr_lambda",
    "naep_df",
    "normalized_components",
    "proposed_df_v1",
    "satterthwaite_df",
]
