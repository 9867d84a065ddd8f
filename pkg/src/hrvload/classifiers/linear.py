"""Gradient-trained linear classifiers: multinomial logistic and one-vs-rest linear SVM."""

from __future__ import annotations

import numpy as np

from .base import softmax


def add_bias(X: np.ndarray) -> np.ndarray:
    return np.hstack([X, np.ones((X.shape[0], 1))])


def logistic_loss_grad(W, Xb, Y, w, l2=0.0):
    """Weighted mean cross-entropy of a softmax model and its gradient.

    ``W`` is (d+1, K) with the bias in the last row, ``Y`` one-hot (n, K), ``w``
    per-row weights. The bias row is not regularized.
    """
    P = softmax(Xb @ W)
    wn = w / w.sum()
    loss = -np.sum(wn * np.log(np.clip(np.sum(P * Y, axis=1), 1e-300, None)))
    grad = Xb.T @ ((P - Y) * wn[:, None])
    if l2:
        reg = W.copy()
        reg[-1] = 0.0
        loss += 0.5 * l2 * np.sum(reg * reg)
        grad += l2 * reg
    return loss, grad


def hinge_loss_grad(W, Xb, T, w, l2=0.0):
    """Weighted one-vs-rest hinge loss; ``T`` holds +1/-1 targets per class column."""
    wn = w / w.sum()
    margins = T * (Xb @ W)
    active = margins < 1.0
    loss = np.sum(wn[:, None] * np.where(active, 1.0 - margins, 0.0))
    grad = -(Xb.T @ (T * active * wn[:, None]))
    if l2:
        reg = W.copy()
        reg[-1] = 0.0
        loss += 0.5 * l2 * np.sum(reg * reg)
        grad += l2 * reg
    return loss, grad


class _GradientModel:
    loss_grad = None

    def __init__(self, hp: dict, seed: int):
        self.hp = hp
        self.seed = seed
        self.W: np.ndarray | None = None

    def _targets(self, y, n_classes):
        raise NotImplementedError

    def fit(self, X, y, n_classes, cw, threads=1):
        Xb = add_bias(X)
        rng = np.random.default_rng(self.seed)
        W = rng.normal(0.0, 0.01, size=(Xb.shape[1], n_classes))
        T = self._targets(y, n_classes)
        w = cw[y]
        lr, l2 = float(self.hp["learning_rate"]), float(self.hp["l2"])
        loss_grad = type(self).loss_grad
        for _ in range(int(self.hp["epochs"])):
            _, g = loss_grad(W, Xb, T, w, l2)
            W -= lr * g
        self.W = W
        return self

    def decision_function(self, X):
        return add_bias(X) @ self.W

    def predict_proba(self, X):
        return softmax(self.decision_function(X))

    def get_params(self) -> dict:
        return {"W": self.W.tolist()}

    @classmethod
    def from_params(cls, hp, seed, params):
        m = cls(hp, seed)
        m.W = np.asarray(params["W"], dtype=np.float64)
        return m


class LogisticRegression(_GradientModel):
    """Multinomial softmax regression fitted by full-batch gradient descent."""

    loss_grad = staticmethod(logistic_loss_grad)

    def _targets(self, y, n_classes):
        return np.eye(n_classes)[y]


class LinearSVM(_GradientModel):
    """One-vs-rest linear SVM trained by full-batch hinge-loss subgradient descent.

    Probabilities are a softmax over the decision values and are not calibrated.
    """

    loss_grad = staticmethod(hinge_loss_grad)

    def _targets(self, y, n_classes):
        return np.where(np.eye(n_classes)[y] > 0, 1.0, -1.0)
