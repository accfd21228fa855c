"""Least-squares regression trees used as the boosting base learner.

Trees are grown breadth first. At every level the rows of all open nodes are
kept grouped by node and, inside each node, sorted by every feature column,
so one vectorized prefix-sum pass scores every candidate split of every node
at once. Columns are sorted a single time per training matrix; the order can
be shared across all trees of a boosting run through ``presorted``.

Split rules:

* a row goes left iff ``x[j] <= s``;
* candidate thresholds are midpoints between consecutive distinct values;
* the split loss is the summed squared error of the two children around their
  means; ties break toward the smaller feature index, then smaller threshold;
* a node becomes a leaf at depth ``max_depth``, when it holds fewer than
  ``max(min_region_size, 2)`` rows, when its targets are constant, or when no
  feature takes two distinct values in it.

Leaf values are the mean target of the rows routed to the leaf.
"""

import math

import numpy as np

from .errors import DimensionMismatch, EmptyInput, LengthMismatch

LEAF = -1


class RegressionTree:
    """A fitted binary regression tree stored as flat arrays in preorder.

    Node ``0`` is the root. For internal nodes ``feature >= 0`` and
    ``left``/``right`` index the children; for leaves ``feature == -1`` and
    ``value`` holds the prediction. ``n_samples`` is the number of training
    rows that reached each node.
    """

    def __init__(self, feature, threshold, left, right, value, n_samples,
                 n_features, max_depth, min_region_size):
        self.feature = np.asarray(feature, dtype=np.intp)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.intp)
        self.right = np.asarray(right, dtype=np.intp)
        self.value = np.asarray(value, dtype=np.float64)
        self.n_samples = np.asarray(n_samples, dtype=np.intp)
        self.n_features = int(n_features)
        self.max_depth = int(max_depth)
        self.min_region_size = int(min_region_size)
        self.depth = _depth(self.left, self.right)

    @property
    def node_count(self):
        return len(self.feature)

    @property
    def is_leaf(self):
        return self.feature == LEAF

    def apply(self, X):
        """Return the index of the leaf each row of ``X`` lands in."""
        X = self._check_X(X)
        n = X.shape[0]
        node = np.zeros(n, dtype=np.intp)
        rows = np.arange(n)
        for _ in range(self.depth):
            f = self.feature[node]
            internal = f >= 0
            if not internal.any():
                break
            go_left = X[rows, np.where(internal, f, 0)] <= self.threshold[node]
            child = np.where(go_left, self.left[node], self.right[node])
            node = np.where(internal, child, node)
        return node

    def predict(self, X):
        return self.value[self.apply(X)]

    def split_counts(self):
        """Number of internal nodes splitting on each feature."""
        used = self.feature[self.feature >= 0]
        return np.bincount(used, minlength=self.n_features).astype(np.int64)

    def to_preorder(self):
        """Serializable preorder node list.

        Internal nodes are ``["split", feature, threshold, n_samples]`` and
        leaves are ``["leaf", value, n_samples]``. Arrays are already stored in
        preorder, so the list index equals the node index.
        """
        out = []
        for i in range(self.node_count):
            if self.feature[i] == LEAF:
                out.append(["leaf", float(self.value[i]), int(self.n_samples[i])])
            else:
                out.append(["split", int(self.feature[i]),
                            float(self.threshold[i]), int(self.n_samples[i])])
        return out

    @classmethod
    def from_preorder(cls, nodes, n_features, max_depth, min_region_size):
        """Rebuild a tree from :meth:`to_preorder` output.

        Raises ``ValueError`` when the list is not a well-formed preorder
        encoding of a binary tree.
        """
        k = len(nodes)
        feature = np.full(k, LEAF, dtype=np.intp)
        threshold = np.zeros(k)
        left = np.full(k, LEAF, dtype=np.intp)
        right = np.full(k, LEAF, dtype=np.intp)
        value = np.zeros(k)
        n_samples = np.zeros(k, dtype=np.intp)

        open_parents = []
        for i, node in enumerate(nodes):
            if i > 0:
                if not open_parents:
                    raise ValueError("trailing nodes after complete tree")
                parent = open_parents[-1]
                if left[parent] == LEAF:
                    left[parent] = i
                else:
                    right[parent] = i
                    open_parents.pop()
            kind = node[0]
            if kind == "leaf":
                _, v, cnt = node
                value[i] = float(v)
                n_samples[i] = int(cnt)
            elif kind == "split":
                _, j, s, cnt = node
                j = int(j)
                if not 0 <= j < n_features:
                    raise ValueError(f"split feature {j} out of range")
                feature[i] = j
                threshold[i] = float(s)
                n_samples[i] = int(cnt)
                open_parents.append(i)
            else:
                raise ValueError(f"unknown node kind {kind!r}")
        if k == 0 or open_parents:
            raise ValueError("truncated preorder node list")
        return cls(feature, threshold, left, right, value, n_samples,
                   n_features, max_depth, min_region_size)

    def _check_X(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise DimensionMismatch(
                f"expected {self.n_features} features, got shape {X.shape}")
        return X

    def __repr__(self):
        return (f"RegressionTree(nodes={self.node_count}, depth={self.depth}, "
                f"n_features={self.n_features})")


def _depth(left, right):
    if len(left) == 0:
        return 0
    depth = np.zeros(len(left), dtype=np.intp)
    # preorder: children always have larger indices than their parent
    for i in range(len(left)):
        if left[i] >= 0:
            depth[left[i]] = depth[i] + 1
            depth[right[i]] = depth[i] + 1
    return int(depth.max())


def tree_predict(tree, x):
    """Predict a single feature vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != tree.n_features:
        raise DimensionMismatch(
            f"expected a vector of {tree.n_features} values, got shape {x.shape}")
    return float(tree.predict(x.reshape(1, -1))[0])


def _midpoints(lo, hi):
    mid = 0.5 * lo + 0.5 * hi
    # adjacent floats: the midpoint may round onto hi and misroute it
    return np.where(mid < hi, mid, lo)


def _segment_gains(xs, ts, starts, lengths):
    """Split score for every candidate position of every segment.

    ``xs``/``ts`` are ``(d, m)`` arrays holding feature values and targets of
    ``m`` rows, grouped into contiguous segments (one per node) and sorted
    ascending by ``xs`` inside each segment. Position ``p`` stands for the
    split putting rows ``start..p`` of its segment on the left.

    The split loss is ``sum(t**2) - gain`` with ``gain = S_l**2 / n_l +
    S_r**2 / n_r``, so the segment's loss minimizer is its gain maximizer.
    Invalid positions (equal neighbours, last row of a segment) get ``-inf``.
    """
    d, m = xs.shape
    ends = starts + lengths
    S = np.cumsum(ts, axis=1)
    S_end = S[:, ends - 1]
    S_before = np.zeros_like(S_end)
    S_before[:, 1:] = S_end[:, :-1]
    S_left = S - np.repeat(S_before, lengths, axis=1)
    S_right = np.repeat(S_end - S_before, lengths, axis=1) - S_left

    seg = np.repeat(np.arange(len(starts)), lengths)
    n_left = (np.arange(m) - starts[seg] + 1).astype(np.float64)
    n_right = (ends[seg] - np.arange(m) - 1).astype(np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        gain = S_left * S_left / n_left + S_right * S_right / n_right

    invalid = np.empty((d, m), dtype=bool)
    np.greater_equal(xs[:, :-1], xs[:, 1:], out=invalid[:, :-1])
    invalid[:, ends - 1] = True
    gain[invalid] = -np.inf
    return gain


# prefix sums over differently ordered rows can differ in the last bits
_TIE_RTOL = 1e-9


def _resolve_near_ties(cols, gain, grouped, tz, a, b):
    """Rescore each column's best split with correctly rounded sums.

    ``math.fsum`` does not depend on summation order, so two columns inducing
    the same partition score identically and the smaller index wins.
    """
    best = None
    for j in cols:
        p = a + int(np.argmax(gain[j, a:b]))
        rows = grouped[j]
        s_l = math.fsum(tz[rows[a:p + 1]])
        s_r = math.fsum(tz[rows[p + 1:b]])
        g = s_l * s_l / (p + 1 - a) + s_r * s_r / (b - p - 1)
        if best is None or g > best[0]:
            best = (g, int(j), p)
    return best[1], best[2]


def _split_loss(ts, gain):
    loss = float(np.dot(ts, ts)) - gain
    return max(loss, 0.0)


def best_split(column, targets):
    """Best threshold for one feature column under squared loss.

    Returns ``(threshold, loss)`` or ``None`` when the column holds a single
    distinct value (or fewer than two rows).
    """
    x = np.asarray(column, dtype=np.float64).ravel()
    t = np.asarray(targets, dtype=np.float64).ravel()
    if x.shape != t.shape:
        raise LengthMismatch(f"column has {len(x)} values, targets {len(t)}")
    n = len(x)
    if n < 2:
        return None
    order = np.argsort(x, kind="stable")
    xs = x[order]
    ts = (t - t.min())[order]
    gain = _segment_gains(xs[None, :], ts[None, :], np.array([0]), np.array([n]))[0]
    p = int(np.argmax(gain))
    if gain[p] == -np.inf:
        return None
    threshold = float(_midpoints(xs[p], xs[p + 1]))
    return threshold, _split_loss(ts, float(gain[p]))


def presort(X):
    """Per-column ascending row order, shape ``(d, n)``, for reuse across fits."""
    X = np.asarray(X, dtype=np.float64)
    return np.ascontiguousarray(np.argsort(X, axis=0, kind="stable").T)


def fit_regression_tree(X, targets, max_depth, min_region_size=2, presorted=None):
    """Grow a least-squares regression tree.

    ``presorted`` may carry :func:`presort` output for ``X`` to skip the
    per-tree column sort.
    """
    X = np.asarray(X, dtype=np.float64)
    t = np.asarray(targets, dtype=np.float64).ravel()
    if X.ndim != 2:
        raise DimensionMismatch(f"X must be 2-D, got shape {X.shape}")
    n, d = X.shape
    if n == 0 or d == 0:
        raise EmptyInput("cannot fit a tree on an empty matrix")
    if len(t) != n:
        raise LengthMismatch(f"X has {n} rows, targets {len(t)}")
    if not (np.isfinite(X).all() and np.isfinite(t).all()):
        raise ValueError("X and targets must be finite")
    if max_depth < 0:
        raise ValueError("max_depth must be >= 0")
    min_size = max(int(min_region_size), 2)

    XT = np.ascontiguousarray(X.T)
    grouped = presort(X) if presorted is None else presorted
    tz = t - t.min()

    # breadth-first node table
    feature = [LEAF]
    threshold = [0.0]
    left = [LEAF]
    right = [LEAF]
    count = [n]
    node_of_row = np.zeros(n, dtype=np.intp)

    seg_nodes = np.array([0])
    lengths = np.array([n])
    level = 0
    while len(seg_nodes) and level < max_depth:
        starts = np.concatenate(([0], np.cumsum(lengths)[:-1]))
        rows0 = grouped[0]
        t0 = t[rows0]
        splittable = ((lengths >= min_size)
                      & (np.minimum.reduceat(t0, starts) < np.maximum.reduceat(t0, starts)))
        if not splittable.all():
            if not splittable.any():
                break
            keep_row = np.zeros(n, dtype=bool)
            keep_row[rows0[np.repeat(splittable, lengths)]] = True
            grouped = grouped[keep_row[grouped]].reshape(d, -1)
            seg_nodes = seg_nodes[splittable]
            lengths = lengths[splittable]
            starts = np.concatenate(([0], np.cumsum(lengths)[:-1]))
            rows0 = grouped[0]

        xs = np.take_along_axis(XT, grouped, axis=1)
        gain = _segment_gains(xs, tz[grouped], starts, lengths)

        colmax = np.maximum.reduceat(gain, starts, axis=1)
        best = colmax.max(axis=0)
        best_j = np.argmax(colmax == best, axis=0)

        child_key = np.full(n, -1, dtype=np.int32)
        next_nodes = []
        next_lengths = []
        k_out = 0
        for k, node in enumerate(seg_nodes):
            if best[k] == -np.inf:
                continue
            a = starts[k]
            b = a + lengths[k]
            j = int(best_j[k])
            p = a + int(np.argmax(gain[j, a:b]))
            near = np.flatnonzero(colmax[:, k] >= best[k] * (1.0 - _TIE_RTOL))
            if len(near) > 1:
                j, p = _resolve_near_ties(near, gain, grouped, tz, a, b)
            s = float(_midpoints(xs[j, p], xs[j, p + 1]))
            rows = rows0[a:b]
            go_left = XT[j, rows] <= s
            n_left = int(go_left.sum())

            li = len(feature)
            ri = li + 1
            feature[node] = j
            threshold[node] = s
            left[node] = li
            right[node] = ri
            feature += [LEAF, LEAF]
            threshold += [0.0, 0.0]
            left += [LEAF, LEAF]
            right += [LEAF, LEAF]
            count += [n_left, len(rows) - n_left]

            node_of_row[rows] = np.where(go_left, li, ri)
            child_key[rows] = np.where(go_left, 2 * k_out, 2 * k_out + 1)
            next_nodes += [li, ri]
            next_lengths += [n_left, len(rows) - n_left]
            k_out += 1

        if not next_nodes or level + 1 >= max_depth:
            break
        keys = child_key[grouped]
        keep = keys >= 0
        if not keep.all():
            grouped = grouped[keep].reshape(d, -1)
            keys = keys[keep].reshape(d, -1)
        key_dtype = np.int16 if len(next_nodes) < 2 ** 15 else np.int32
        order = np.argsort(keys.astype(key_dtype), axis=1, kind="stable")
        grouped = np.take_along_axis(grouped, order, axis=1)
        seg_nodes = np.array(next_nodes)
        lengths = np.array(next_lengths)
        level += 1

    n_nodes = len(feature)
    # row-order summation keeps leaf means independent of column layout
    sums = np.bincount(node_of_row, weights=t, minlength=n_nodes)
    counts = np.bincount(node_of_row, minlength=n_nodes)
    feature = np.array(feature, dtype=np.intp)
    with np.errstate(invalid="ignore", divide="ignore"):
        value = np.where((feature == LEAF) & (counts > 0), sums / np.maximum(counts, 1), 0.0)

    return _to_preorder_tree(feature, np.array(threshold), np.array(left),
                             np.array(right), value, np.array(count),
                             d, max_depth, min_region_size)


def _to_preorder_tree(feature, threshold, left, right, value, count,
                      n_features, max_depth, min_region_size):
    order = []
    stack = [0]
    while stack:
        i = stack.pop()
        order.append(i)
        if feature[i] != LEAF:
            stack.append(right[i])
            stack.append(left[i])
    order = np.array(order, dtype=np.intp)
    new_index = np.empty(len(order), dtype=np.intp)
    new_index[order] = np.arange(len(order))
    internal = feature[order] != LEAF
    new_left = np.where(internal, new_index[np.where(internal, left[order], 0)], LEAF)
    new_right = np.where(internal, new_index[np.where(internal, right[order], 0)], LEAF)
    return RegressionTree(feature[order], np.where(internal, threshold[order], 0.0),
                          new_left, new_right, value[order], count[order],
                          n_features, max_depth, min_region_size)
