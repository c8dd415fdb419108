"""The LV-length voting ensemble: Extra Trees, AdaBoost, Lasso and a Ridge/KNN/GBDT stack."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import nnls

from .._io import atomic_write_text
from ..errors import CorruptModel, InsufficientData, NonFiniteInput, UntrainedModel, VersionMismatch
from .linear import KNNRegressor, LinearModel, Standardizer, fit_lasso, fit_ridge
from .trees import AdaBoostR2, ExtraTrees, GradientBoosting

FORMAT_VERSION = "1"
MIN_SAMPLES = 10
BASE_KINDS = ("ET", "ADABOOST", "LASSO", "RIDGE", "KNN", "GBDT")

# per-purpose substream tags for config.seed
_SEED_ET, _SEED_FOLDS, _SEED_LASSO_CV = 1, 2, 3


class FeatureVector(NamedTuple):
    area: float
    width: float
    height: float


@dataclass(frozen=True)
class EnsembleConfig:
    et_trees: int = 100
    et_max_depth: int | None = None
    et_min_samples_split: int = 2
    et_max_features: int | None = None
    ada_rounds: int = 50
    ada_max_depth: int = 3
    ada_loss: str = "linear"
    gbdt_rounds: int = 100
    gbdt_max_depth: int = 3
    gbdt_learning_rate: float = 0.1
    lasso_lambdas: tuple = (1e-3, 1e-2, 1e-1, 1.0, 10.0)
    lasso_lambda: float | None = None  # fixed value skips the CV grid
    ridge_lambda: float = 1.0
    knn_k: int = 5
    k_folds: int = 5
    seed: int = 42

    def __post_init__(self):
        counts = [self.et_trees, self.ada_rounds, self.ada_max_depth, self.gbdt_rounds, self.gbdt_max_depth,
                  self.knn_k, self.k_folds, self.et_min_samples_split]
        if any(c < 1 for c in counts):
            raise ValueError("all counts must be >= 1")
        if not self.gbdt_learning_rate > 0:
            raise ValueError("learning rate must be positive")
        lams = list(self.lasso_lambdas) + [self.ridge_lambda] + \
            ([self.lasso_lambda] if self.lasso_lambda is not None else [])
        if any(v < 0 for v in lams):
            raise ValueError("lambda values must be >= 0")


def _check_xy(features, lengths, minimum=MIN_SAMPLES):
    X = np.asarray([tuple(f) for f in features], dtype=np.float64).reshape(-1, 3)
    y = np.asarray(lengths, dtype=np.float64).ravel()
    if X.shape[0] != y.size:
        raise ValueError(f"{X.shape[0]} feature rows but {y.size} targets")
    if y.size < minimum:
        raise InsufficientData(f"need at least {minimum} samples, got {y.size}")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise NonFiniteInput("features and targets must be finite")
    return X, y


def kfold_indices(n, k, seed):
    """Shuffled, seed-determined partition of ``range(n)`` into ``k`` folds."""
    perm = np.random.default_rng([seed, _SEED_FOLDS]).permutation(n)
    return np.array_split(perm, k)


def _select_lasso_lambda(X, y, config):
    folds = kfold_indices(y.size, min(config.k_folds, y.size), config.seed + _SEED_LASSO_CV)
    best = None
    for lam in config.lasso_lambdas:
        sse = 0.0
        for test in folds:
            train = np.setdiff1d(np.arange(y.size), test)
            m = fit_lasso(X[train], y[train], lam, standardizer=Standardizer.fit(X[train]))
            sse += float(((m.predict(X[test]) - y[test]) ** 2).sum())
        if best is None or sse < best[0]:
            best = (sse, lam)
    return best[1]


def _fit_base(kind, X, y, config, std):
    if kind == "ET":
        return ExtraTrees.fit(X, y, config.et_trees, config.et_max_depth, config.et_min_samples_split,
                              config.et_max_features, seed=[config.seed, _SEED_ET])
    if kind == "ADABOOST":
        return AdaBoostR2.fit(X, y, config.ada_rounds, config.ada_max_depth, config.ada_loss)
    if kind == "LASSO":
        lam = config.lasso_lambda if config.lasso_lambda is not None else _select_lasso_lambda(X, y, config)
        return fit_lasso(X, y, lam, standardizer=std)
    if kind == "RIDGE":
        return fit_ridge(X, y, config.ridge_lambda, standardizer=std)
    if kind == "KNN":
        return KNNRegressor.fit(X, y, config.knn_k, standardizer=std)
    if kind == "GBDT":
        return GradientBoosting.fit(X, y, config.gbdt_rounds, config.gbdt_max_depth, config.gbdt_learning_rate)
    raise ValueError(f"unknown base model kind {kind!r}")


def train_base(kind, features, lengths, config=EnsembleConfig(), standardizer=None):
    """Fit one ensemble member; ``standardizer`` defaults to z-scoring the training features."""
    X, y = _check_xy(features, lengths)
    return _fit_base(kind, X, y, config, standardizer or Standardizer.fit(X))


class StackModel:
    """Ridge + KNN + GBDT refit on all data, combined by NNLS weights learned out of fold."""

    kind = "STACK"

    def __init__(self, members, weights):
        self.members = list(members)
        self.weights = np.asarray(weights, dtype=np.float64)

    @classmethod
    def fit(cls, X, y, config, std):
        kinds = ("RIDGE", "KNN", "GBDT")
        folds = kfold_indices(y.size, config.k_folds, config.seed)
        oof = np.zeros((y.size, len(kinds)))
        for test in folds:
            train = np.setdiff1d(np.arange(y.size), test)
            fold_std = Standardizer.fit(X[train])
            for j, kind in enumerate(kinds):
                m = _fit_base(kind, X[train], y[train], config, fold_std)
                oof[test, j] = m.predict(X[test])
        weights, _ = nnls(oof, y)
        members = [_fit_base(kind, X, y, config, std) for kind in kinds]
        return cls(members, weights)

    def member_predictions(self, X):
        return np.column_stack([m.predict(X) for m in self.members])

    def predict(self, X):
        return self.member_predictions(np.asarray(X, dtype=np.float64)) @ self.weights

    def to_dict(self):
        return {"kind": self.kind, "weights": self.weights.tolist(), "members": [m.to_dict() for m in self.members]}

    @classmethod
    def from_dict(cls, doc):
        return cls([_member_from_dict(m) for m in doc["members"]], doc["weights"])


def _member_from_dict(doc):
    kind = doc["kind"]
    if kind == "ET":
        return ExtraTrees.from_dict(doc)
    if kind == "ADABOOST":
        return AdaBoostR2.from_dict(doc)
    if kind == "GBDT":
        return GradientBoosting.from_dict(doc)
    if kind in ("LASSO", "RIDGE"):
        return LinearModel.from_dict(doc)
    if kind == "KNN":
        return KNNRegressor.from_dict(doc)
    if kind == "STACK":
        return StackModel.from_dict(doc)
    raise CorruptModel(f"unknown member kind {kind!r}")


@dataclass
class LengthModel:
    """Trained voting ensemble. Prediction is the plain mean of the four members."""

    members: dict = field(default_factory=dict)  # name -> model, in voting order
    standardizer: Standardizer | None = None
    config: EnsembleConfig | None = None
    version: str = FORMAT_VERSION

    MEMBER_NAMES = ("extra_trees", "adaboost", "lasso", "stack")

    @property
    def is_trained(self):
        return all(name in self.members for name in self.MEMBER_NAMES)

    def base_predictions(self, X):
        if not self.is_trained:
            raise UntrainedModel("length model has not been trained")
        X = np.asarray(X, dtype=np.float64).reshape(-1, 3)
        return np.vstack([self.members[name].predict(X) for name in self.MEMBER_NAMES])

    def predict(self, X):
        return self.base_predictions(X).mean(axis=0)

    def to_dict(self):
        return {
            "format": "lvef-length-model",
            "version": self.version,
            "config": {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(self.config).items()}
            if self.config else None,
            "standardizer": self.standardizer.to_dict(),
            "members": {name: self.members[name].to_dict() for name in self.MEMBER_NAMES},
        }

    @classmethod
    def from_dict(cls, doc):
        if not isinstance(doc, dict) or doc.get("format") != "lvef-length-model":
            raise CorruptModel("not an lvef length model document")
        if doc.get("version") != FORMAT_VERSION:
            raise VersionMismatch(f"model format version {doc.get('version')!r}, expected {FORMAT_VERSION!r}")
        try:
            cfg = doc.get("config")
            config = EnsembleConfig(**{k: (tuple(v) if isinstance(v, list) else v) for k, v in cfg.items()}) \
                if cfg else None
            members = {name: _member_from_dict(doc["members"][name]) for name in cls.MEMBER_NAMES}
            std = Standardizer.from_dict(doc["standardizer"])
        except (KeyError, TypeError, ValueError) as exc:
            raise CorruptModel(f"malformed model document: {exc}") from None
        return cls(members, std, config)


def train_voting_ensemble(features, lengths, config=EnsembleConfig()):
    X, y = _check_xy(features, lengths)
    std = Standardizer.fit(X)
    members = {
        "extra_trees": _fit_base("ET", X, y, config, std),
        "adaboost": _fit_base("ADABOOST", X, y, config, std),
        "lasso": _fit_base("LASSO", X, y, config, std),
        "stack": StackModel.fit(X, y, config, std),
    }
    return LengthModel(members, std, config)


def predict_length(model, f):
    if model is None or not getattr(model, "is_trained", False):
        raise UntrainedModel("length model has not been trained")
    return float(model.predict(np.asarray(tuple(f), dtype=np.float64).reshape(1, 3))[0])


def kfold_r2(features, lengths, config=EnsembleConfig()):
    """Per-fold held-out R^2 of the full ensemble, and their mean."""
    from ..stats import r2_score

    X, y = _check_xy(features, lengths, minimum=config.k_folds)
    folds = kfold_indices(y.size, config.k_folds, config.seed)
    scores = []
    for test in folds:
        train = np.setdiff1d(np.arange(y.size), test)
        model = train_voting_ensemble(X[train], y[train], config)
        scores.append(r2_score(y[test], model.predict(X[test])))
    return scores, float(np.mean(scores))


def dumps_model(model):
    return json.dumps(model.to_dict(), sort_keys=True, separators=(",", ":"))


def save_model(model, path):
    if not model.is_trained:
        raise UntrainedModel("refusing to save an untrained model")
    atomic_write_text(path, dumps_model(model))


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CorruptModel(f"{path}: {exc}") from None
    return LengthModel.from_dict(doc)

