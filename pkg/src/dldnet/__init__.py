"""Single-hidden-layer neural network screening pipeline for DLD vs TD cohorts."""

from dldnet.dataset import (
    FEATURE_ORDER,
    Dataset,
    FoldAssignment,
    Sample,
    SplitSpec,
    StandardizationParams,
    apply_standardizer,
    fit_standardizer,
    load_cohort,
    make_folds,
    split_train_test,
)
from dldnet.network import (
    Hyperparams,
    NetworkWeights,
    TrainedModel,
    count_weights,
    forward,
    gradient,
    init_weights,
    loss,
    predict,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "FEATURE_ORDER",
    "Dataset",
    "FoldAssignment",
    "Hyperparams",
    "NetworkWeights",
    "Sample",
    "SplitSpec",
    "StandardizationParams",
    "TrainedModel",
    "apply_standardizer",
    "count_weights",
    "fit_standardizer",
    "forward",
    "gradient",
    "init_weights",
    "load_cohort",
    "loss",
    "make_folds",
    "predict",
    "split_train_test",
    "train",
]
