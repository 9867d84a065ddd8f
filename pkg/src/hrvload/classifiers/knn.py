from __future__ import annotations

import numpy as np

_CHUNK = 512


def pairwise_distances(Q: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Euclidean distances between every query row and every stored row."""
    out = np.empty((Q.shape[0], X.shape[0]))
    for s in range(0, Q.shape[0], _CHUNK):
        diff = Q[s:s + _CHUNK, None, :] - X[None, :, :]
        out[s:s + _CHUNK] = np.sqrt(np.sum(diff * diff, axis=2))
    return out


def neighbor_votes(dist_row: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Indices of the k nearest rows (ties to the lower index) and their vote weights.

    Votes are 1/distance; if any selected neighbour sits at distance zero,
    the zero-distance neighbours share all the mass equally.
    """
    k = min(k, dist_row.size)
    nn = np.argsort(dist_row, kind="stable")[:k]
    d = dist_row[nn]
    exact = d == 0.0
    if exact.any():
        return nn, exact.astype(np.float64)
    return nn, 1.0 / d


class KNN:
    """Inverse-distance-weighted k-nearest-neighbour vote over the stored training rows."""

    def __init__(self, hp: dict, seed: int):
        self.k = int(hp["k"])
        self.X = self.y = self.cw = None
        self.n_classes = 0

    def fit(self, X, y, n_classes, cw, threads=1):
        self.X, self.y, self.cw, self.n_classes = X.copy(), y.copy(), cw.copy(), n_classes
        return self

    def predict_proba(self, Q):
        D = pairwise_distances(Q, self.X)
        P = np.zeros((Q.shape[0], self.n_classes))
        for i, row in enumerate(D):
            nn, votes = neighbor_votes(row, self.k)
            np.add.at(P[i], self.y[nn], votes * self.cw[self.y[nn]])
        return P / P.sum(axis=1, keepdims=True)

    def get_params(self):
        return {"X": self.X.tolist(), "y": self.y.tolist(), "class_weight": self.cw.tolist(),
                "n_classes": self.n_classes}

    @classmethod
    def from_params(cls, hp, seed, params):
        m = cls(hp, seed)
        m.X = np.asarray(params["X"], dtype=np.float64)
        m.y = np.asarray(params["y"], dtype=np.int64)
        m.cw = np.asarray(params["class_weight"], dtype=np.float64)
        m.n_classes = int(params["n_classes"])
        return m
