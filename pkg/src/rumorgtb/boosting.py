"""Stage-wise gradient tree boosting and the two-score rumor detector.

Each class gets its own boosted score model trained on one-vs-rest 0/1
targets under mean squared error. A stage fits a regression tree to the
current residuals ``y - F``, rescales it by the closed-form line-search weight
``gamma = sum(z*h) / sum(h*h)`` and adds it with learning rate ``alpha``. The
two scores are turned into class probabilities with a softmax.
"""

import time
from dataclasses import asdict, dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .data import Label
from .errors import (DimensionMismatch, EmptyInput, LengthMismatch,
                     MissingLabels, NonBinaryTargets)
from .tree import fit_regression_tree, presort

CLASSES = (Label.RUMOR, Label.NONRUMOR)


@dataclass(frozen=True)
class TrainConfig:
    trees: int = 500
    max_depth: int = 6
    learning_rate: float = 0.2
    min_region_size: int = 2
    seed: int = 0  # reserved; training has no randomness

    def __post_init__(self):
        if int(self.trees) < 1:
            raise ValueError(f"trees must be >= 1, got {self.trees}")
        if int(self.max_depth) < 1:
            raise ValueError(f"max_depth must be >= 1, got {self.max_depth}")
        if not 0.0 < float(self.learning_rate) <= 1.0:
            raise ValueError(f"learning_rate must be in (0, 1], got {self.learning_rate}")
        if int(self.min_region_size) < 1:
            raise ValueError(f"min_region_size must be >= 1, got {self.min_region_size}")

    def to_dict(self):
        return asdict(self)


@dataclass
class ScoreModel:
    """``F(x) = base_score + sum_m learning_rate * gamma_m * tree_m(x)``."""

    base_score: float
    learning_rate: float
    trees: list = field(default_factory=list)
    gammas: list = field(default_factory=list)

    @property
    def n_features(self):
        return self.trees[0].n_features if self.trees else None

    def decision_function(self, X):
        X = np.asarray(X, dtype=np.float64)
        F = np.full(X.shape[0], self.base_score)
        for tree, gamma in zip(self.trees, self.gammas):
            # same expression as in training so predictions replay bit-for-bit
            F = F + (self.learning_rate * gamma) * tree.predict(X)
        return F


def _mse(F, y):
    r = F - y
    return float(np.dot(r, r) / len(y))


def fit_score_model(X, y01, cfg=None, presorted=None):
    """Boost one score model on 0/1 targets.

    Returns ``(model, loss_trace)`` where ``loss_trace[m]`` is the training
    mean squared error after ``m`` stages (``m = 0`` is the constant model).
    """
    cfg = cfg or TrainConfig()
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y01, dtype=np.float64).ravel()
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyInput("score model needs a non-empty 2-D matrix")
    if len(y) != X.shape[0]:
        raise LengthMismatch(f"X has {X.shape[0]} rows, targets {len(y)}")
    if not np.isin(y, (0.0, 1.0)).all():
        raise NonBinaryTargets("score model targets must be 0 or 1")
    if presorted is None:
        presorted = presort(X)

    alpha = float(cfg.learning_rate)
    model = ScoreModel(base_score=float(np.mean(y)), learning_rate=alpha)
    F = np.full(len(y), model.base_score)
    trace = [_mse(F, y)]
    for _ in range(int(cfg.trees)):
        z = y - F
        tree = fit_regression_tree(X, z, cfg.max_depth, cfg.min_region_size,
                                   presorted=presorted)
        h = tree.predict(X)
        hh = float(np.dot(h, h))
        gamma = float(np.dot(z, h)) / hh if hh > 0.0 else 0.0
        F = F + (alpha * gamma) * h
        model.trees.append(tree)
        model.gammas.append(gamma)
        trace.append(_mse(F, y))
    return model, trace


def _labels(y):
    try:
        return np.array([Label.coerce(v) for v in y], dtype=object)
    except ValueError as exc:
        raise MissingLabels(f"bad or missing label: {exc}") from None


class RumorDetector(ClassifierMixin, BaseEstimator):
    """Gradient tree boosting rumor classifier.

    Parameters
    ----------
    n_estimators : int, default=500
        Boosting stages per class score model.
    max_depth : int, default=6
        Depth limit of every regression tree.
    learning_rate : float, default=0.2
        Shrinkage applied to every stage, in ``(0, 1]``.
    min_region_size : int, default=2
        Nodes holding fewer rows than this are not split.
    seed : int, default=0
        Recorded for reproducibility manifests; training is deterministic.
    feature_names : sequence of str, optional
        Column names recorded with the model (used by the model file and the
        CLI schema check).

    Attributes
    ----------
    score_rumor_, score_nonrumor_ : ScoreModel
    loss_trace_rumor_, loss_trace_nonrumor_ : list of float
    classes_ : ndarray of Label, ``[RUMOR, NONRUMOR]``
    fit_seconds_ : float
    """

    def __init__(self, n_estimators=500, max_depth=6, learning_rate=0.2,
                 min_region_size=2, seed=0, feature_names=None):
        self.n_estimators = n_estimators
        self.max_depth = max_depth
        self.learning_rate = learning_rate
        self.min_region_size = min_region_size
        self.seed = seed
        self.feature_names = feature_names

    @classmethod
    def from_config(cls, cfg, feature_names=None):
        return cls(n_estimators=cfg.trees, max_depth=cfg.max_depth,
                   learning_rate=cfg.learning_rate,
                   min_region_size=cfg.min_region_size, seed=cfg.seed,
                   feature_names=feature_names)

    @property
    def config(self):
        return TrainConfig(trees=self.n_estimators, max_depth=self.max_depth,
                           learning_rate=self.learning_rate,
                           min_region_size=self.min_region_size, seed=self.seed)

    def fit(self, X, y):
        cfg = self.config
        X = self._validate_X(X, reset=True)
        if y is None:
            raise MissingLabels("labels are required for training")
        labels = _labels(y)
        if len(labels) != X.shape[0]:
            raise LengthMismatch(f"X has {X.shape[0]} rows, y has {len(labels)}")
        if X.shape[0] < 2:
            raise EmptyInput("training needs at least 2 labeled rows")

        start = time.perf_counter()
        order = presort(X)
        is_rumor = np.array([v is Label.RUMOR for v in labels], dtype=np.float64)
        self.score_rumor_, self.loss_trace_rumor_ = fit_score_model(
            X, is_rumor, cfg, presorted=order)
        self.score_nonrumor_, self.loss_trace_nonrumor_ = fit_score_model(
            X, 1.0 - is_rumor, cfg, presorted=order)
        self.fit_seconds_ = time.perf_counter() - start
        self.classes_ = np.array(CLASSES, dtype=object)
        return self

    def decision_scores(self, X):
        """``(n, 2)`` raw scores, columns ordered as :attr:`classes_`."""
        check_is_fitted(self, "score_rumor_")
        X = self._validate_X(X)
        return np.column_stack([self.score_rumor_.decision_function(X),
                                self.score_nonrumor_.decision_function(X)])

    def predict_proba(self, X):
        return softmax_pair(self.decision_scores(X))

    def predict(self, X):
        proba = self.predict_proba(X)
        # exact ties go to NONRUMOR
        rumor = proba[:, 0] > proba[:, 1]
        return self.classes_[np.where(rumor, 0, 1)]

    def trees(self):
        """All fitted trees of both score models."""
        check_is_fitted(self, "score_rumor_")
        return list(self.score_rumor_.trees) + list(self.score_nonrumor_.trees)

    def _validate_X(self, X, reset=False):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.ndim != 2:
            raise DimensionMismatch(f"expected a 2-D matrix, got shape {X.shape}")
        if not np.isfinite(X).all():
            raise ValueError("feature values must be finite")
        if reset:
            self.n_features_in_ = X.shape[1]
            if self.feature_names is not None and len(self.feature_names) != X.shape[1]:
                raise DimensionMismatch(
                    f"{len(self.feature_names)} feature names for {X.shape[1]} columns")
        elif X.shape[1] != self.n_features_in_:
            raise DimensionMismatch(
                f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return X


def softmax_pair(scores):
    """Row-wise two-way softmax with the max subtracted first."""
    scores = np.asarray(scores, dtype=np.float64)
    shifted = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    p_rumor = e[:, 0] / (e[:, 0] + e[:, 1])
    # complement keeps the pair summing to 1 to the last ulp
    return np.column_stack([p_rumor, 1.0 - p_rumor])


def train_detector(fm, cfg=None):
    """Fit a :class:`RumorDetector` on a labeled FeatureMatrix."""
    cfg = cfg or TrainConfig()
    if fm.labels is None:
        raise MissingLabels("feature matrix carries no labels")
    model = RumorDetector.from_config(cfg, feature_names=list(fm.schema.names))
    return model.fit(fm.values, fm.labels)


def predict_proba(model, x):
    """``(p_rumor, p_nonrumor)`` for one feature vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DimensionMismatch(f"expected a vector, got shape {x.shape}")
    p = model.predict_proba(x.reshape(1, -1))[0]
    return float(p[0]), float(p[1])


def predict_label(model, x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DimensionMismatch(f"expected a vector, got shape {x.shape}")
    return model.predict(x.reshape(1, -1))[0]
