"""Gaussian generative classifiers: naive Bayes and linear discriminant analysis."""

from __future__ import annotations

import numpy as np

from .base import ClassifierError, softmax


def _priors(y, n_classes, equal):
    if equal:
        return np.full(n_classes, 1.0 / n_classes)
    return np.bincount(y, minlength=n_classes) / y.size


class GaussianNB:
    """Per-class independent Gaussians with variance smoothing.

    ``var_smoothing`` times the largest feature variance is added to every
    class variance so constant features do not produce singular likelihoods.
    """

    def __init__(self, hp: dict, seed: int):
        self.hp = hp
        self.theta = self.var = self.log_prior = None

    def fit(self, X, y, n_classes, cw, threads=1):
        eps = float(self.hp["var_smoothing"]) * float(np.var(X, axis=0).max())
        self.theta = np.array([X[y == c].mean(axis=0) for c in range(n_classes)])
        self.var = np.array([X[y == c].var(axis=0) for c in range(n_classes)]) + eps
        if np.any(self.var <= 0):
            raise ClassifierError("GaussianNB: zero variance; all features are constant")
        # class weights equalize the priors
        self.log_prior = np.log(_priors(y, n_classes, equal=not np.all(cw == 1.0)))
        return self

    def joint_log_likelihood(self, X):
        out = []
        for c in range(self.theta.shape[0]):
            ll = -0.5 * np.sum(np.log(2.0 * np.pi * self.var[c]))
            ll = ll - 0.5 * np.sum((X - self.theta[c]) ** 2 / self.var[c], axis=1)
            out.append(self.log_prior[c] + ll)
        return np.column_stack(out)

    def predict_proba(self, X):
        return softmax(self.joint_log_likelihood(X))

    def get_params(self):
        return {"theta": self.theta.tolist(), "var": self.var.tolist(), "log_prior": self.log_prior.tolist()}

    @classmethod
    def from_params(cls, hp, seed, params):
        m = cls(hp, seed)
        m.theta = np.asarray(params["theta"], dtype=np.float64)
        m.var = np.asarray(params["var"], dtype=np.float64)
        m.log_prior = np.asarray(params["log_prior"], dtype=np.float64)
        return m


class LDA:
    """Shared-covariance Gaussian classifier solved through an SVD of the
    within-class centred data, without forming or inverting the covariance.

    Directions with zero within-class variance are dropped when the class
    means agree along them (e.g. the sum of one-hot columns); if the means
    differ along such a direction the scatter is singular in a way that
    matters and fitting fails, naming the columns involved.
    """

    def __init__(self, hp: dict, seed: int, columns=None):
        self.hp = hp
        self.columns = columns
        self.scaling = self.means = self.log_prior = None

    def fit(self, X, y, n_classes, cw, threads=1):
        n, d = X.shape
        if n <= n_classes:
            raise ClassifierError(f"LDA needs more rows than classes, got {n} rows")
        means = np.array([X[y == c].mean(axis=0) for c in range(n_classes)])
        Xc = X - means[y]
        std = Xc.std(axis=0)
        std[std == 0.0] = 1.0
        Z = (Xc / std) / np.sqrt(n - n_classes)
        _, S, Vt = np.linalg.svd(Z, full_matrices=True)
        S_full = np.zeros(d)
        S_full[: S.size] = S
        tol = float(self.hp["rank_tol"]) * max(float(S_full.max()), 1e-300)
        rank = int(np.sum(S_full > tol))
        if rank == 0:
            raise ClassifierError(f"LDA: within-class scatter is zero for all columns {self._names(range(d))}")
        null = Vt[rank:]
        if null.size:
            scaled_means = means / std
            spread = (scaled_means - scaled_means.mean(axis=0)) @ null.T
            scale = 1.0 + np.abs(scaled_means).max()
            bad = np.abs(spread).max(axis=0) > 1e-7 * scale
            if np.any(bad):
                loadings = np.abs(null[bad]).max(axis=0)
                cols = np.flatnonzero(loadings > 1e-6)
                raise ClassifierError(
                    "LDA: singular within-class scatter separates the classes along columns "
                    f"{self._names(cols)}"
                )
        self.scaling = (Vt[:rank].T / S_full[:rank]) / std[:, None]
        self.means = means @ self.scaling
        self.log_prior = np.log(_priors(y, n_classes, equal=not np.all(cw == 1.0)))
        return self

    def _names(self, idx):
        idx = list(idx)
        if self.columns is None:
            return [f"#{i}" for i in idx]
        return [self.columns[i] for i in idx]

    def predict_proba(self, X):
        Xt = X @ self.scaling
        d2 = ((Xt[:, None, :] - self.means[None, :, :]) ** 2).sum(axis=2)
        return softmax(-0.5 * d2 + self.log_prior)

    def get_params(self):
        return {"scaling": self.scaling.tolist(), "means": self.means.tolist(),
                "log_prior": self.log_prior.tolist()}

    @classmethod
    def from_params(cls, hp, seed, params):
        m = cls(hp, seed)
        m.scaling = np.asarray(params["scaling"], dtype=np.float64)
        m.means = np.asarray(params["means"], dtype=np.float64)
        m.log_prior = np.asarray(params["log_prior"], dtype=np.float64)
        return m
