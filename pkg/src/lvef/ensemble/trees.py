"""Regression trees and the tree ensembles built on them.

Trees are stored as flat node arrays (``feature == -1`` marks a leaf) so that
prediction can run through the compiled traversal kernel; they serialize to
nested node records.
"""
from __future__ import annotations

import numpy as np

from .. import _core
from ..errors import CorruptModel


class RegressionTree:
    __slots__ = ("feature", "threshold", "left", "right", "value")

    def __init__(self, feature, threshold, left, right, value):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.value = np.asarray(value, dtype=np.float64)

    @property
    def n_nodes(self):
        return self.feature.size

    def predict(self, X):
        return _core.tree_predict(self.feature, self.threshold, self.left, self.right, self.value,
                                  np.asarray(X, dtype=np.float64))

    def to_dict(self):
        def node(i):
            if self.feature[i] < 0:
                return {"value": float(self.value[i])}
            return {
                "feature": int(self.feature[i]),
                "threshold": float(self.threshold[i]),
                "children": [node(self.left[i]), node(self.right[i])],
            }
        return node(0)

    @classmethod
    def from_dict(cls, doc):
        b = _Builder()
        stack = [(doc, None, 0)]
        while stack:
            rec, parent, side = stack.pop()
            try:
                if "children" in rec:
                    i = b.add(int(rec["feature"]), float(rec["threshold"]), 0.0)
                    stack.append((rec["children"][1], i, 1))
                    stack.append((rec["children"][0], i, 0))
                else:
                    i = b.add(-1, 0.0, float(rec["value"]))
            except (KeyError, TypeError, ValueError, IndexError) as exc:
                raise CorruptModel(f"bad tree node: {exc}") from None
            if parent is not None:
                (b.left if side == 0 else b.right)[parent] = i
        return b.finish()


class _Builder:
    def __init__(self):
        self.feature, self.threshold, self.left, self.right, self.value = [], [], [], [], []

    def add(self, feature, threshold, value):
        self.feature.append(feature)
        self.threshold.append(threshold)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(value)
        return len(self.feature) - 1

    def finish(self):
        return RegressionTree(self.feature, self.threshold, self.left, self.right, self.value)


def _midpoint(a, b):
    t = a + (b - a) / 2.0
    return a if t >= b else t


def fit_best_tree(X, y, w=None, max_depth=3, min_samples_split=2):
    """CART regression tree with exhaustive weighted least-squares splits."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    w = np.ones_like(y) if w is None else np.asarray(w, dtype=np.float64)
    b = _Builder()
    root = b.add(-1, 0.0, 0.0)
    stack = [(root, np.arange(y.size), 0)]
    while stack:
        node, idx, depth = stack.pop()
        wi, yi = w[idx], y[idx]
        wsum = wi.sum()
        b.value[node] = float((wi * yi).sum() / wsum)
        if (max_depth is not None and depth >= max_depth) or idx.size < min_samples_split \
                or np.all(yi == yi[0]):
            continue
        base = (wi * yi).sum() ** 2 / wsum
        best = None
        for f in range(X.shape[1]):
            order = np.argsort(X[idx, f], kind="stable")
            xs = X[idx[order], f]
            pos, score = _core.best_split(xs, yi[order], wi[order])
            if pos >= 0 and (best is None or score > best[0]):
                best = (score, f, _midpoint(xs[pos], xs[pos + 1]))
        if best is None or not best[0] > base:
            continue
        _, f, thr = best
        go_left = X[idx, f] <= thr
        b.feature[node], b.threshold[node] = f, thr
        lnode = b.add(-1, 0.0, 0.0)
        rnode = b.add(-1, 0.0, 0.0)
        b.left[node], b.right[node] = lnode, rnode
        stack.append((rnode, idx[~go_left], depth + 1))
        stack.append((lnode, idx[go_left], depth + 1))
    return b.finish()


def fit_random_tree(X, y, rng, max_features=None, max_depth=None, min_samples_split=2):
    """Extremely randomized tree: one uniform random threshold per candidate feature."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    n, p = X.shape
    # every node consumes at most 2p draws and there are at most 2n - 1 nodes
    u = rng.random(2 * n * 2 * p + 1)
    arrays = _core.fit_random_tree(X, y, u, int(max_features or 0),
                                   -1 if max_depth is None else int(max_depth), int(min_samples_split))
    return RegressionTree(*arrays)


class ExtraTrees:
    kind = "ET"

    def __init__(self, trees):
        self.trees = list(trees)

    @classmethod
    def fit(cls, X, y, n_trees=100, max_depth=None, min_samples_split=2, max_features=None, seed=0):
        trees = []
        for t in range(n_trees):
            rng = np.random.default_rng([*np.atleast_1d(seed).tolist(), t])
            trees.append(fit_random_tree(X, y, rng, max_features, max_depth, min_samples_split))
        return cls(trees)

    def predict(self, X):
        X = np.asarray(X, dtype=np.float64)
        return np.mean([t.predict(X) for t in self.trees], axis=0)

    def to_dict(self):
        return {"kind": self.kind, "trees": [t.to_dict() for t in self.trees]}

    @classmethod
    def from_dict(cls, doc):
        return cls([RegressionTree.from_dict(t) for t in doc["trees"]])


class AdaBoostR2:
    """Drucker's AdaBoost.R2 with weighted tree fitting and weighted-median output.

    ``loss_trace[t]`` is the training mean absolute error of the ensemble
    after ``t + 1`` rounds.
    """

    kind = "ADABOOST"

    def __init__(self, trees, weights, loss_trace=()):
        self.trees = list(trees)
        self.weights = np.asarray(weights, dtype=np.float64)
        self.loss_trace = list(loss_trace)

    @classmethod
    def fit(cls, X, y, n_rounds=50, max_depth=3, loss="linear"):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        n = y.size
        sw = np.full(n, 1.0 / n)
        model = cls([], [])
        for _ in range(n_rounds):
            tree = fit_best_tree(X, y, sw, max_depth=max_depth)
            err = np.abs(tree.predict(X) - y)
            emax = err.max()
            if emax == 0:
                model._append(tree, 1.0, X, y)
                break
            rel = err / emax
            if loss == "square":
                rel = rel ** 2
            elif loss == "exponential":
                rel = 1.0 - np.exp(-rel)
            avg = float((sw * rel).sum())
            if avg >= 0.5:
                if not model.trees:
                    model._append(tree, 1.0, X, y)
                break
            beta = avg / (1.0 - avg)
            model._append(tree, float(np.log(1.0 / beta)), X, y)
            sw = sw * np.power(beta, 1.0 - rel)
            sw = sw / sw.sum()
        return model

    def _append(self, tree, weight, X, y):
        self.trees.append(tree)
        self.weights = np.append(self.weights, weight)
        self.loss_trace.append(float(np.mean(np.abs(self.predict(X) - y))))

    def predict(self, X):
        X = np.asarray(X, dtype=np.float64)
        preds = np.array([t.predict(X) for t in self.trees])  # (rounds, n)
        order = np.argsort(preds, axis=0, kind="stable")
        cum = np.cumsum(self.weights[order], axis=0)
        pick = np.argmax(cum >= 0.5 * cum[-1], axis=0)
        cols = np.arange(X.shape[0])
        return preds[order[pick, cols], cols]

    def to_dict(self):
        return {"kind": self.kind, "weights": [float(v) for v in self.weights],
                "trees": [t.to_dict() for t in self.trees]}

    @classmethod
    def from_dict(cls, doc):
        return cls([RegressionTree.from_dict(t) for t in doc["trees"]], doc["weights"])


class GradientBoosting:
    """Least-squares gradient boosting with shrinkage.

    ``loss_trace[0]`` is the MSE of the constant start, ``loss_trace[t]`` the
    training MSE after ``t`` rounds.
    """

    kind = "GBDT"

    def __init__(self, init, trees, learning_rate, loss_trace=()):
        self.init = float(init)
        self.trees = list(trees)
        self.learning_rate = float(learning_rate)
        self.loss_trace = list(loss_trace)

    @classmethod
    def fit(cls, X, y, n_rounds=100, max_depth=3, learning_rate=0.1):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        init = float(y.mean())
        f = np.full(y.size, init)
        trace = [float(np.mean((y - f) ** 2))]
        trees = []
        for _ in range(n_rounds):
            tree = fit_best_tree(X, y - f, max_depth=max_depth)
            f = f + learning_rate * tree.predict(X)
            trees.append(tree)
            trace.append(float(np.mean((y - f) ** 2)))
        return cls(init, trees, learning_rate, trace)

    def predict(self, X):
        X = np.asarray(X, dtype=np.float64)
        f = np.full(X.shape[0], self.init)
        for t in self.trees:
            f = f + self.learning_rate * t.predict(X)
        return f

    def to_dict(self):
        return {"kind": self.kind, "init": self.init, "learning_rate": self.learning_rate,
                "trees": [t.to_dict() for t in self.trees]}

    @classmethod
    def from_dict(cls, doc):
        return cls(doc["init"], [RegressionTree.from_dict(t) for t in doc["trees"]], doc["learning_rate"])
