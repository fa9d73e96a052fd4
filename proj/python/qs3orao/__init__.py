"""Semi-supervised ordinal regression by AUC maximization with random features."""

from ._qs3orao import (
    ConfigError,
    Dataset,
    Error,
    Model,
    ModelFormatError,
    NumericError,
    ParseError,
    Split,
    TrainConfig,
    ValidationError,
    auc,
    discretize,
    evaluate,
    fit_thresholds,
    load_dataset,
    load_model,
    normalize,
    split,
    train,
)

__all__ = [
    "ConfigError",
    "Dataset",
    "Error",
    "Model",
    "ModelFormatError",
    "NumericError",
    "ParseError",
    "Split",
    "TrainConfig",
    "ValidationError",
    "auc",
    "discretize",
    "evaluate",
    "fit_thresholds",
    "load_dataset",
    "load_model",
    "normalize",
    "split",
    "train",
]
