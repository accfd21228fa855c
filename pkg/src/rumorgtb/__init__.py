"""Rumor detection on microblog messages with gradient tree boosting."""

__version__ = "0.1.0"

from .boosting import RumorDetector, ScoreModel, TrainConfig, fit_score_model, train_detector
from .data import Dataset, Label, MessageEvent, load_dataset, parse_event, validate_dataset
from .evaluation import (confusion, cross_validate_matrix, deadline_sweep,
                         hyperparam_sweep, kfold_cv, metrics)
from .features import (CANDIDATE_SCHEMA, SELECTED_SCHEMA, DeadlineFeatureExtractor,
                       FeatureSchema, materialize)
from .persistence import load_model, save_model
from .selection import SplitCountSelector, feature_importance, select_features
from .tree import RegressionTree, best_split, fit_regression_tree

__all__ = [
    "CANDIDATE_SCHEMA", "SELECTED_SCHEMA", "Dataset", "DeadlineFeatureExtractor",
    "FeatureSchema", "Label", "MessageEvent", "RegressionTree", "RumorDetector",
    "ScoreModel", "SplitCountSelector", "TrainConfig", "best_split", "confusion",
    "cross_validate_matrix", "deadline_sweep", "feature_importance",
    "fit_regression_tree", "fit_score_model", "hyperparam_sweep", "kfold_cv",
    "load_dataset", "load_model", "materialize", "metrics", "parse_event",
    "save_model", "select_features", "train_detector", "validate_dataset",
]
