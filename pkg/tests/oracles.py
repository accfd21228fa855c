"""Brute-force reference implementations, independent of the package code.

All losses are computed in exact rational arithmetic so that ties are true
ties; the tie-break (smaller feature index, then smaller threshold) is then
applied exactly as the trainer is required to.
"""

from fractions import Fraction

import numpy as np


def sse(values):
    if not values:
        return Fraction(0)
    vals = [Fraction(v) for v in values]
    mean = sum(vals) / len(vals)
    return sum((v - mean) ** 2 for v in vals)


def midpoint_candidates(column):
    distinct = sorted(set(float(v) for v in column))
    out = []
    for lo, hi in zip(distinct, distinct[1:]):
        s = (lo + hi) / 2
        if not s < hi:
            s = lo
        out.append(s)
    return out


def brute_best_split(column, targets):
    """Minimum-loss midpoint threshold of one column, or None."""
    best = None
    for s in midpoint_candidates(column):
        left = [t for x, t in zip(column, targets) if x <= s]
        right = [t for x, t in zip(column, targets) if x > s]
        loss = sse(left) + sse(right)
        if best is None or loss < best[1]:
            best = (s, loss)
    return best


def brute_best_feature_split(X, targets):
    """(j, s, loss) over all columns with (j, s) tie-break, or None."""
    best = None
    d = len(X[0])
    for j in range(d):
        col = [row[j] for row in X]
        cand = brute_best_split(col, targets)
        if cand is None:
            continue
        s, loss = cand
        if best is None or loss < best[2]:
            best = (j, s, loss)
    return best


def brute_greedy_tree(X, targets, max_depth, min_region_size=2, depth=0):
    """Greedy tree as nested tuples.

    ("leaf", mean, n) or ("split", j, s, n, left_subtree, right_subtree).
    """
    n = len(targets)
    mean = sum(Fraction(t) for t in targets) / n
    if (depth >= max_depth or n < max(min_region_size, 2)
            or len(set(targets)) == 1):
        return ("leaf", mean, n)
    found = brute_best_feature_split(X, targets)
    if found is None:
        return ("leaf", mean, n)
    j, s, _ = found
    li = [i for i in range(n) if X[i][j] <= s]
    ri = [i for i in range(n) if X[i][j] > s]
    return ("split", j, s, n,
            brute_greedy_tree([X[i] for i in li], [targets[i] for i in li],
                              max_depth, min_region_size, depth + 1),
            brute_greedy_tree([X[i] for i in ri], [targets[i] for i in ri],
                              max_depth, min_region_size, depth + 1))


def tree_as_nested(tree, i=0):
    """Convert a fitted RegressionTree into the oracle's nested form."""
    if tree.feature[i] < 0:
        return ("leaf", float(tree.value[i]), int(tree.n_samples[i]))
    return ("split", int(tree.feature[i]), float(tree.threshold[i]),
            int(tree.n_samples[i]),
            tree_as_nested(tree, int(tree.left[i])),
            tree_as_nested(tree, int(tree.right[i])))


def nested_equal(a, b, leaf_tol=1e-12):
    """Node-for-node comparison; leaf means within ``leaf_tol``."""
    if a[0] != b[0]:
        return False
    if a[0] == "leaf":
        return a[2] == b[2] and abs(float(a[1]) - float(b[1])) <= leaf_tol
    return (a[1:4] == b[1:4]
            and nested_equal(a[4], b[4], leaf_tol)
            and nested_equal(a[5], b[5], leaf_tol))


def random_tree_dataset(rng, max_n=12, max_d=3, dyadic=True):
    n = int(rng.integers(2, max_n + 1))
    d = int(rng.integers(1, max_d + 1))
    if rng.random() < 0.5:
        X = rng.integers(0, 5, size=(n, d)).astype(float)
    else:
        X = rng.random((n, d)).round(3)
    if dyadic:
        y = rng.integers(0, 1025, size=n) / 1024.0
    else:
        y = rng.random(n)
    return X, y


def leaf_mean_violations(score, X, y, tol=1e-12):
    """Replay boosting and compare every leaf with its region's residual mean.

    Residuals are recomputed here from ``y`` and the stored stages rather than
    taken from the trainer. Returns a list of ``(stage, leaf, got, want)``.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    F = np.full(len(y), score.base_score)
    bad = []
    for m, (tree, gamma) in enumerate(zip(score.trees, score.gammas)):
        z = y - F
        leaves = tree.apply(X)
        counts = np.bincount(leaves, minlength=tree.node_count)
        sums = np.bincount(leaves, weights=z, minlength=tree.node_count)
        for leaf in np.flatnonzero(counts):
            want = sums[leaf] / counts[leaf]
            got = float(tree.value[leaf])
            if abs(got - want) > tol:
                bad.append((m, int(leaf), got, float(want)))
        F = F + (score.learning_rate * gamma) * tree.predict(X)
    return bad


def constant_detector(f_rumor, f_nonrumor, d=2):
    """A fitted detector whose two scores are the given constants."""
    from rumorgtb.boosting import CLASSES, RumorDetector, ScoreModel

    m = RumorDetector()
    m.score_rumor_ = ScoreModel(base_score=float(f_rumor), learning_rate=0.2)
    m.score_nonrumor_ = ScoreModel(base_score=float(f_nonrumor), learning_rate=0.2)
    m.n_features_in_ = d
    m.classes_ = np.array(CLASSES, dtype=object)
    return m
