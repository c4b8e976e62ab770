"""Exact grouped SHAP for covariate-informed load forecasters."""

from ._core import (
    PROTOCOL_VERSION,
    AdditiveOracle,
    CallbackForecaster,
    Capabilities,
    Dataset,
    DayTypeBaseline,
    Error,
    Explanation,
    Forecaster,
    LinearForecaster,
    SeasonalNaive,
    binomial,
    default_groups,
    explain,
    global_importance,
    mae,
    mape,
    permutation_shap,
    remote_forecaster,
    rmse,
    run_cli,
    shap_from_table,
    shapley_weight,
    synthetic_dataset,
)

__all__ = [
    "PROTOCOL_VERSION",
    "AdditiveOracle",
    "CallbackForecaster",
    "Capabilities",
    "Dataset",
    "DayTypeBaseline",
    "Error",
    "Explanation",
    "Forecaster",
    "LinearForecaster",
    "SeasonalNaive",
    "binomial",
    "default_groups",
    "explain",
    "global_importance",
    "mae",
    "mape",
    "permutation_shap",
    "remote_forecaster",
    "rmse",
    "run_cli",
    "shap_from_table",
    "shapley_weight",
    "synthetic_dataset",
]
