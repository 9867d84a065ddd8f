"""CART decision tree (weighted Gini) and bagged random forest.

The tree builder is compiled with numba. All randomness (bootstrap draws and
the per-node feature visiting order) is drawn up front from a NumPy
generator seeded with ``[seed, tree_index]``, so a forest of one tree without
bootstrap reproduces a single decision tree with the same seed exactly, and
forest results do not depend on how trees are scheduled across threads.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numba
import numpy as np

from .base import max_features_count

_TIE = 1e-12


@numba.njit(cache=True, nogil=True)
def _build(X, y, w, n_classes, max_depth, min_split, max_features, keys):
    n, d = X.shape
    cap = 2 * n + 1
    feature = np.full(cap, -1, np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, -1, np.int64)
    right = np.full(cap, -1, np.int64)
    value = np.zeros((cap, n_classes))

    idx = np.arange(n)
    tmp = np.empty(n, np.int64)
    st_node = np.empty(cap, np.int64)
    st_lo = np.empty(cap, np.int64)
    st_hi = np.empty(cap, np.int64)
    st_depth = np.empty(cap, np.int64)
    top = 0
    st_node[0] = 0
    st_lo[0] = 0
    st_hi[0] = n
    st_depth[0] = 0
    top = 1
    n_nodes = 1
    lcount = np.empty(n_classes)

    while top > 0:
        top -= 1
        node = st_node[top]
        lo = st_lo[top]
        hi = st_hi[top]
        depth = st_depth[top]
        for j in range(lo, hi):
            value[node, y[idx[j]]] += w[idx[j]]
        total = 0.0
        nonzero = 0
        for c in range(n_classes):
            total += value[node, c]
            if value[node, c] > 0.0:
                nonzero += 1
        if nonzero <= 1 or hi - lo < min_split or (max_depth > 0 and depth >= max_depth):
            continue

        parent_score = 0.0
        for c in range(n_classes):
            parent_score += value[node, c] * value[node, c] / total

        best_score = -1.0
        best_f = -1
        best_thr = 0.0
        order = np.argsort(keys[node])
        visited = 0
        m = hi - lo
        xs = np.empty(m)
        for oi in range(d):
            if visited >= max_features:
                break
            f = order[oi]
            for j in range(m):
                xs[j] = X[idx[lo + j], f]
            srt = np.argsort(xs, kind="mergesort")
            if xs[srt[0]] == xs[srt[m - 1]]:
                continue
            visited += 1
            for c in range(n_classes):
                lcount[c] = 0.0
            wl = 0.0
            for j in range(m - 1):
                r = idx[lo + srt[j]]
                lcount[y[r]] += w[r]
                wl += w[r]
                a = xs[srt[j]]
                b = xs[srt[j + 1]]
                if not a < b:
                    continue
                wr = total - wl
                score = 0.0
                for c in range(n_classes):
                    rc = value[node, c] - lcount[c]
                    score += lcount[c] * lcount[c] / wl + rc * rc / wr
                thr = 0.5 * (a + b)
                if not thr < b:
                    thr = a
                tol = _TIE * max(abs(score), abs(best_score), 1.0)
                if best_f < 0 or score > best_score + tol:
                    better = True
                elif abs(score - best_score) <= tol:
                    better = f < best_f or (f == best_f and thr < best_thr)
                else:
                    better = False
                if better:
                    best_score = score
                    best_f = f
                    best_thr = thr
        if best_f < 0:
            continue

        # stable partition: rows going left keep their order, then rows going right
        nl = 0
        for j in range(lo, hi):
            if X[idx[j], best_f] <= best_thr:
                tmp[nl] = idx[j]
                nl += 1
        k = nl
        for j in range(lo, hi):
            if X[idx[j], best_f] > best_thr:
                tmp[k] = idx[j]
                k += 1
        for j in range(m):
            idx[lo + j] = tmp[j]

        feature[node] = best_f
        threshold[node] = best_thr
        lnode = n_nodes
        rnode = n_nodes + 1
        n_nodes += 2
        left[node] = lnode
        right[node] = rnode
        # right first so the left child is expanded next
        st_node[top] = rnode
        st_lo[top] = lo + nl
        st_hi[top] = hi
        st_depth[top] = depth + 1
        top += 1
        st_node[top] = lnode
        st_lo[top] = lo
        st_hi[top] = lo + nl
        st_depth[top] = depth + 1
        top += 1
    return (feature[:n_nodes].copy(), threshold[:n_nodes].copy(), left[:n_nodes].copy(),
            right[:n_nodes].copy(), value[:n_nodes].copy())


@numba.njit(cache=True, nogil=True)
def _apply(X, feature, threshold, left, right):
    out = np.empty(X.shape[0], np.int64)
    for i in range(X.shape[0]):
        node = 0
        while feature[node] >= 0:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = node
    return out


class Tree:
    """Flat array representation of one fitted CART tree."""

    def __init__(self, feature, threshold, left, right, value):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.value = np.asarray(value, dtype=np.float64)

    @property
    def n_nodes(self) -> int:
        return self.feature.size

    def depth(self) -> int:
        depths = np.zeros(self.n_nodes, dtype=np.int64)
        for node in range(self.n_nodes):
            if self.feature[node] >= 0:
                depths[self.left[node]] = depths[self.right[node]] = depths[node] + 1
        return int(depths.max())

    def predict_proba(self, X):
        leaves = _apply(np.ascontiguousarray(X, dtype=np.float64), self.feature, self.threshold,
                        self.left, self.right)
        v = self.value[leaves]
        return v / v.sum(axis=1, keepdims=True)

    def to_dict(self):
        return {"feature": self.feature.tolist(), "threshold": self.threshold.tolist(),
                "left": self.left.tolist(), "right": self.right.tolist(), "value": self.value.tolist()}

    @classmethod
    def from_dict(cls, doc):
        return cls(doc["feature"], doc["threshold"], doc["left"], doc["right"], doc["value"])


def grow_tree(X, y, n_classes, cw, seed, tree_index=0, *, max_depth=None, min_samples_split=2,
              max_features=None, bootstrap=False) -> Tree:
    rng = np.random.default_rng([seed, tree_index])
    n, d = X.shape
    w = cw[y].astype(np.float64)
    if bootstrap:
        counts = np.bincount(rng.integers(0, n, size=n), minlength=n)
        rows = np.flatnonzero(counts)
        X, y, w = X[rows], y[rows], w[rows] * counts[rows]
    keys = rng.random((2 * X.shape[0] + 1, d))
    arrays = _build(np.ascontiguousarray(X, dtype=np.float64), np.ascontiguousarray(y, dtype=np.int64),
                    np.ascontiguousarray(w), n_classes, -1 if max_depth is None else int(max_depth),
                    int(min_samples_split), max_features_count(max_features, d), keys)
    return Tree(*arrays)


class DecisionTree:
    def __init__(self, hp: dict, seed: int):
        self.hp = hp
        self.seed = seed
        self.tree: Tree | None = None

    def fit(self, X, y, n_classes, cw, threads=1):
        self.tree = grow_tree(X, y, n_classes, cw, self.seed, 0, max_depth=self.hp["max_depth"],
                              min_samples_split=self.hp["min_samples_split"],
                              max_features=self.hp["max_features"], bootstrap=False)
        return self

    def predict_proba(self, X):
        return self.tree.predict_proba(X)

    def get_params(self):
        return {"tree": self.tree.to_dict()}

    @classmethod
    def from_params(cls, hp, seed, params):
        m = cls(hp, seed)
        m.tree = Tree.from_dict(params["tree"])
        return m


class RandomForest:
    """Bootstrap-bagged CART trees with a random feature subset at each split.

    Tree ``t`` is seeded with ``[seed, t]``; with ``threads > 1`` trees are grown
    concurrently (the numba builder releases the GIL) and gathered in index order.
    """

    def __init__(self, hp: dict, seed: int):
        self.hp = hp
        self.seed = seed
        self.trees: list[Tree] = []

    def fit(self, X, y, n_classes, cw, threads=1):
        def grow(t):
            return grow_tree(X, y, n_classes, cw, self.seed, t, max_depth=self.hp["max_depth"],
                             min_samples_split=self.hp["min_samples_split"],
                             max_features=self.hp["max_features"], bootstrap=self.hp["bootstrap"])

        n_trees = int(self.hp["n_trees"])
        if threads > 1 and n_trees > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                self.trees = list(pool.map(grow, range(n_trees)))
        else:
            self.trees = [grow(t) for t in range(n_trees)]
        return self

    def predict_proba(self, X):
        P = self.trees[0].predict_proba(X)
        for tree in self.trees[1:]:
            P = P + tree.predict_proba(X)
        return P / len(self.trees)

    def get_params(self):
        return {"trees": [t.to_dict() for t in self.trees]}

    @classmethod
    def from_params(cls, hp, seed, params):
        m = cls(hp, seed)
        m.trees = [Tree.from_dict(t) for t in params["trees"]]
        return m
