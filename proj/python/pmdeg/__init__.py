"""Python bindings for the pmdeg power-curve pipeline."""

from ._core import (
    ConfigError,
    DataError,
    SvmModel,
    extract_features,
    feature_names,
    generate_curve,
    run,
    select_features,
    train_svm,
)

__all__ = [
    "ConfigError",
    "DataError",
    "SvmModel",
    "extract_features",
    "feature_names",
    "generate_curve",
    "run",
    "select_features",
    "train_svm",
]
