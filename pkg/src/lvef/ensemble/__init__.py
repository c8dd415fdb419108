"""LV length regression: voting ensemble of tree, linear and stacked members."""
from .voting import (
    BASE_KINDS,
    EnsembleConfig,
    FeatureVector,
    LengthModel,
    StackModel,
    kfold_indices,
    kfold_r2,
    load_model,
    predict_length,
    save_model,
    train_base,
    train_voting_ensemble,
)

__all__ = [
    "BASE_KINDS", "EnsembleConfig", "FeatureVector", "LengthModel", "StackModel", "kfold_indices",
    "kfold_r2", "load_model", "predict_length", "save_model", "train_base", "train_voting_ensemble",
]
