"""Classification metrics, repeated stratified k-fold CV, and sweeps.

Rumor is the positive class. Metrics with a zero denominator are reported as
0.0 and the metric name is listed in ``EvalReport.undefined``.
"""

import csv
import itertools
import time
from dataclasses import dataclass, field, replace

import numpy as np
from joblib import Parallel, delayed

from .boosting import RumorDetector, TrainConfig
from .data import Label
from .errors import EmptyInput, LengthMismatch, MissingLabels, SingleClass, TooFewSamples
from .features import SELECTED_SCHEMA, format_deadline, materialize, parse_deadline

METRICS = ("accuracy", "precision", "recall", "f1")


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    @property
    def total(self):
        return self.tp + self.fp + self.tn + self.fn

    def swapped(self):
        """Same counts with NonRumor treated as the positive class."""
        return ConfusionMatrix(tp=self.tn, fp=self.fn, tn=self.tp, fn=self.fp)


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    matrix: ConfusionMatrix
    undefined: tuple = ()

    def as_dict(self):
        return {m: getattr(self, m) for m in METRICS}


def confusion(pred, truth):
    pred = [Label.coerce(p) for p in pred]
    truth = [Label.coerce(t) for t in truth]
    if len(pred) != len(truth):
        raise LengthMismatch(f"{len(pred)} predictions for {len(truth)} labels")
    if not pred:
        raise EmptyInput("confusion matrix of zero samples")
    tp = fp = tn = fn = 0
    for p, t in zip(pred, truth):
        if p is Label.RUMOR:
            if t is Label.RUMOR:
                tp += 1
            else:
                fp += 1
        elif t is Label.RUMOR:
            fn += 1
        else:
            tn += 1
    return ConfusionMatrix(tp, fp, tn, fn)


def metrics(c):
    if c.total <= 0:
        raise EmptyInput("metrics of an empty confusion matrix")
    undefined = []

    def ratio(num, den, name):
        if den == 0:
            undefined.append(name)
            return 0.0
        return num / den

    accuracy = (c.tp + c.tn) / c.total
    precision = ratio(c.tp, c.tp + c.fp, "precision")
    recall = ratio(c.tp, c.tp + c.fn, "recall")
    f1 = ratio(2 * precision * recall, precision + recall, "f1")
    return EvalReport(accuracy, precision, recall, f1, c, tuple(undefined))


def stratified_folds(labels, k, seed):
    """Test-index arrays of ``k`` stratified folds.

    Each class is shuffled with ``default_rng(seed)`` and dealt into ``k``
    near-equal chunks; the starting fold rotates between classes so the
    larger chunks do not pile up in the same folds.
    """
    labels = [Label.coerce(v) for v in labels]
    rng = np.random.default_rng(seed)
    folds = [[] for _ in range(k)]
    offset = 0
    for cls in (Label.RUMOR, Label.NONRUMOR):
        idx = np.flatnonzero([v is cls for v in labels])
        perm = rng.permutation(idx)
        for i, chunk in enumerate(np.array_split(perm, k)):
            folds[(i + offset) % k].extend(chunk.tolist())
        offset += len(idx) % k
    return [np.array(sorted(f), dtype=np.intp) for f in folds]


@dataclass(frozen=True)
class FoldResult:
    repeat: int
    fold: int
    n_train: int
    n_test: int
    report: EvalReport
    seconds: float


@dataclass
class CvResult:
    folds: list
    k: int
    repeats: int
    seed: int
    deadline: float
    config: TrainConfig
    elapsed_seconds: float = 0.0
    mean: dict = field(default_factory=dict)
    std: dict = field(default_factory=dict)
    mean_nonrumor: dict = field(default_factory=dict)

    def __post_init__(self):
        reports = [f.report for f in self.folds]
        swapped = [metrics(r.matrix.swapped()) for r in reports]
        for m in METRICS:
            vals = np.array([getattr(r, m) for r in reports])
            self.mean[m] = float(vals.mean())
            self.std[m] = float(vals.std(ddof=1)) if len(vals) > 1 else 0.0
            self.mean_nonrumor[m] = float(np.mean([getattr(r, m) for r in swapped]))

    def fold_keys(self):
        return [(f.repeat, f.fold) for f in self.folds]


def _check_cv_inputs(labels, k, repeats):
    if int(k) < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if int(repeats) < 1:
        raise ValueError(f"repeats must be >= 1, got {repeats}")
    if labels is None:
        raise MissingLabels("cross-validation needs labeled events")
    if len(labels) < k:
        raise TooFewSamples(f"{len(labels)} samples for {k} folds")
    if len(set(labels)) < 2:
        raise SingleClass("cross-validation needs both classes present")


def _run_fold(X, y, train, test, cfg, repeat, fold):
    start = time.perf_counter()
    model = RumorDetector.from_config(cfg).fit(X[train], y[train])
    report = metrics(confusion(model.predict(X[test]), y[test]))
    return FoldResult(repeat, fold, len(train), len(test), report,
                      time.perf_counter() - start)


def cross_validate_matrix(fm, cfg=None, k=10, repeats=10, seed=0, n_jobs=None):
    """Repeated stratified k-fold CV on an already materialized matrix."""
    cfg = cfg or TrainConfig()
    _check_cv_inputs(fm.labels, k, repeats)
    start = time.perf_counter()
    X = fm.values
    y = np.array(fm.labels, dtype=object)
    all_rows = np.arange(fm.n)
    jobs = []
    for r in range(repeats):
        for f, test in enumerate(stratified_folds(y, k, seed + r)):
            train = np.setdiff1d(all_rows, test, assume_unique=True)
            jobs.append((train, test, r, f))
    if n_jobs in (None, 1):
        folds = [_run_fold(X, y, tr, te, cfg, r, f) for tr, te, r, f in jobs]
    else:
        # joblib returns results in submission order
        folds = Parallel(n_jobs=n_jobs)(
            delayed(_run_fold)(X, y, tr, te, cfg, r, f) for tr, te, r, f in jobs)
    return CvResult(list(folds), int(k), int(repeats), int(seed),
                    fm.deadline_hours, cfg, time.perf_counter() - start)


def kfold_cv(d, T="all", cfg=None, k=10, repeats=10, seed=0,
             schema=SELECTED_SCHEMA, n_jobs=None):
    fm = materialize(d, parse_deadline(T), schema)
    return cross_validate_matrix(fm, cfg, k, repeats, seed, n_jobs)


@dataclass
class SweepResult:
    axis: str
    rows: list  # one dict per grid point
    results: list  # CvResult per grid point, same order

    def column(self, name):
        return [row[name] for row in self.rows]


def _sweep_row(cv, **axis):
    row = dict(axis)
    row.update({
        "deadline": format_deadline(cv.deadline),
        "trees": cv.config.trees,
        "max_depth": cv.config.max_depth,
        "learning_rate": cv.config.learning_rate,
        "min_region_size": cv.config.min_region_size,
        "k": cv.k,
        "repeats": cv.repeats,
        "seed": cv.seed,
    })
    for m in METRICS:
        row[m] = cv.mean[m]
        row[f"{m}_std"] = cv.std[m]
    row["elapsed_seconds"] = cv.elapsed_seconds
    return row


def deadline_sweep(d, Ts, cfg=None, k=10, repeats=10, seed=0,
                   schema=SELECTED_SCHEMA, n_jobs=None):
    """CV accuracy at each deadline; fold assignment is shared across ``Ts``."""
    Ts = [parse_deadline(T) for T in Ts]
    if not Ts:
        raise ValueError("deadline list is empty")
    rows, results = [], []
    for T in Ts:
        cv = kfold_cv(d, T, cfg, k, repeats, seed, schema, n_jobs)
        rows.append(_sweep_row(cv))
        results.append(cv)
    return SweepResult("deadline", rows, results)


def hyperparam_sweep(d, grid, T="all", k=10, repeats=10, seed=0, base_cfg=None,
                     schema=SELECTED_SCHEMA, n_jobs=None):
    """CV at every point of the ``trees x max_depth x learning_rate`` grid.

    ``grid`` maps any of ``trees``, ``max_depth``, ``learning_rate`` to a list
    of values; missing keys keep ``base_cfg``'s value.
    """
    base_cfg = base_cfg or TrainConfig()
    axes = {
        "trees": list(grid.get("trees", [base_cfg.trees])),
        "max_depth": list(grid.get("max_depth", [base_cfg.max_depth])),
        "learning_rate": list(grid.get("learning_rate", [base_cfg.learning_rate])),
    }
    if not all(axes.values()):
        raise ValueError("every grid axis needs at least one value")
    fm = materialize(d, parse_deadline(T), schema)
    rows, results = [], []
    for M, P, alpha in itertools.product(axes["trees"], axes["max_depth"],
                                         axes["learning_rate"]):
        cfg = replace(base_cfg, trees=int(M), max_depth=int(P),
                      learning_rate=float(alpha))
        cv = cross_validate_matrix(fm, cfg, k, repeats, seed, n_jobs)
        rows.append(_sweep_row(cv))
        results.append(cv)
    return SweepResult("grid", rows, results)


CV_COLUMNS = (["repeat", "fold", "n_train", "n_test", "tp", "fp", "tn", "fn"]
              + list(METRICS) + [f"nonrumor_{m}" for m in METRICS[1:]]
              + ["seconds"])


def cv_rows(cv):
    rows = []
    for f in cv.folds:
        r = f.report
        s = metrics(r.matrix.swapped())
        rows.append([f.repeat, f.fold, f.n_train, f.n_test, r.matrix.tp,
                     r.matrix.fp, r.matrix.tn, r.matrix.fn]
                    + [repr(getattr(r, m)) for m in METRICS]
                    + [repr(getattr(s, m)) for m in METRICS[1:]]
                    + [f"{f.seconds:.3f}"])
    return rows


def write_cv_table(cv, path):
    """Long-form fold table followed by ``mean`` and ``std`` summary rows."""
    blank = [""] * 6
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(CV_COLUMNS)
        w.writerows(cv_rows(cv))
        w.writerow(["mean", ""] + blank + [repr(cv.mean[m]) for m in METRICS]
                   + [repr(cv.mean_nonrumor[m]) for m in METRICS[1:]]
                   + [f"{cv.elapsed_seconds:.3f}"])
        w.writerow(["std", ""] + blank + [repr(cv.std[m]) for m in METRICS]
                   + [""] * 3 + [""])


def write_sweep_table(sweep, path):
    if not sweep.rows:
        return
    cols = list(sweep.rows[0])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=cols)
        w.writeheader()
        for row in sweep.rows:
            w.writerow({c: (repr(v) if isinstance(v, float) else v)
                        for c, v in row.items()})


def summary_line(cv):
    m = cv.mean
    return (f"accuracy={m['accuracy']:.4f} precision={m['precision']:.4f} "
            f"recall={m['recall']:.4f} f1={m['f1']:.4f} "
            f"({cv.repeats}x{cv.k}-fold, deadline={format_deadline(cv.deadline)})")
