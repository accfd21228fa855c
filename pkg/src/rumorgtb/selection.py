"""Split-count feature importance and top-k feature selection.

A feature's importance is the number of internal nodes, over every tree of
both score models, that split on it, divided by the total number of internal
nodes. Ranking is by descending importance, ties by ascending column index.
"""

import csv
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.feature_selection import SelectorMixin
from sklearn.utils.validation import check_is_fitted

from .boosting import RumorDetector, TrainConfig, train_detector
from .errors import BadU1, MissingLabels


@dataclass(frozen=True)
class FeatureImportance:
    index: int
    name: str
    split_count: int
    importance: float


@dataclass(frozen=True)
class ImportanceReport:
    ranking: tuple  # FeatureImportance, best first
    total_splits: int

    @property
    def order(self):
        return [f.index for f in self.ranking]

    def importances(self):
        """Importance per original column index."""
        out = np.zeros(len(self.ranking))
        for f in self.ranking:
            out[f.index] = f.importance
        return out

    def top(self, k):
        return [f.index for f in self.ranking[:k]]


def split_counts(tree):
    return tree.split_counts()


def importance_from_counts(counts, names=None):
    counts = np.asarray(counts, dtype=np.int64)
    total = int(counts.sum())
    if names is None:
        names = [f"x{i}" for i in range(len(counts))]
    frac = counts / total if total > 0 else np.zeros(len(counts))
    order = sorted(range(len(counts)), key=lambda i: (-counts[i], i))
    ranking = tuple(FeatureImportance(i, names[i], int(counts[i]), float(frac[i]))
                    for i in order)
    return ImportanceReport(ranking, total)


def feature_importance(model, names=None):
    """Importance report over all trees of a fitted :class:`RumorDetector`."""
    check_is_fitted(model, "score_rumor_")
    counts = np.zeros(model.n_features_in_, dtype=np.int64)
    for tree in model.trees():
        counts += tree.split_counts()
    if names is None:
        names = model.feature_names
    return importance_from_counts(counts, names)


def select_features(fm, cfg=None, u1=None):
    """Train on every column of ``fm`` and keep the ``u1`` most important.

    Returns ``(report, selected_indices)``.
    """
    cfg = cfg or TrainConfig()
    d = fm.schema.total
    if u1 is None:
        u1 = d
    if isinstance(u1, bool) or not isinstance(u1, (int, np.integer)) or not 1 <= u1 <= d:
        raise BadU1(f"u1 must be an integer in [1, {d}], got {u1!r}")
    if fm.labels is None:
        raise MissingLabels("feature selection needs labels")
    model = train_detector(fm, cfg)
    report = feature_importance(model, list(fm.schema.names))
    return report, report.top(int(u1))


def write_importance_table(report, path, selected=None):
    selected = set(report.order if selected is None else selected)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["rank", "feature", "split_count", "importance", "selected"])
        for rank, f in enumerate(report.ranking, start=1):
            w.writerow([rank, f.name, f.split_count, f"{f.importance:.6f}",
                        int(f.index in selected)])


class SplitCountSelector(SelectorMixin, BaseEstimator):
    """Keep the ``n_features_to_select`` columns used most often for splits.

    The ranking comes from a :class:`RumorDetector` built with the given
    boosting parameters and fitted on all input columns.
    """

    def __init__(self, n_features_to_select=None, n_estimators=500, max_depth=6,
                 learning_rate=0.2, min_region_size=2):
        self.n_features_to_select = n_features_to_select
        self.n_estimators = n_estimators
        self.max_depth = max_depth
        self.learning_rate = learning_rate
        self.min_region_size = min_region_size

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        d = X.shape[1]
        k = d if self.n_features_to_select is None else self.n_features_to_select
        if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or not 1 <= k <= d:
            raise BadU1(f"n_features_to_select must be in [1, {d}], got {k!r}")
        self.estimator_ = RumorDetector(
            n_estimators=self.n_estimators, max_depth=self.max_depth,
            learning_rate=self.learning_rate,
            min_region_size=self.min_region_size).fit(X, y)
        self.report_ = feature_importance(self.estimator_)
        self.feature_importances_ = self.report_.importances()
        self.n_features_in_ = d
        mask = np.zeros(d, dtype=bool)
        mask[self.report_.top(int(k))] = True
        self.support_ = mask
        return self

    def _get_support_mask(self):
        check_is_fitted(self, "support_")
        return self.support_
