"""Shared pieces for the classifier implementations."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np


class ClassifierError(ValueError):
    """Invalid hyperparameters, degenerate training data or schema mismatches."""


class SchemaError(ClassifierError):
    pass


class Method(str, enum.Enum):
    LOGISTIC = "logistic"
    LDA = "lda"
    KNN = "knn"
    DECISION_TREE = "tree"
    RANDOM_FOREST = "forest"
    GAUSSIAN_NB = "gnb"
    LINEAR_SVM = "svm"

    @property
    def short(self) -> str:
        return _SHORT[self]

    @classmethod
    def parse(cls, text: str) -> "Method":
        key = text.strip().lower()
        for m in cls:
            if key in (m.value, m.short.lower(), m.name.lower()):
                return m
        if key in _ALIASES:
            return _ALIASES[key]
        raise ClassifierError(f"unknown method {text!r}")


_SHORT = {
    Method.LOGISTIC: "LR",
    Method.LDA: "LDA",
    Method.KNN: "KN",
    Method.DECISION_TREE: "DT",
    Method.RANDOM_FOREST: "RF",
    Method.GAUSSIAN_NB: "GNB",
    Method.LINEAR_SVM: "SVM",
}
_ALIASES = {"knn": Method.KNN, "linearsvm": Method.LINEAR_SVM, "randomforest": Method.RANDOM_FOREST,
            "decisiontree": Method.DECISION_TREE, "gaussiannb": Method.GAUSSIAN_NB}

# roster order used in every report
ALL_METHODS = tuple(Method)

# the classifiers run with inverse-frequency class weights unless told otherwise
WEIGHTED_BY_DEFAULT = {Method.LOGISTIC, Method.DECISION_TREE, Method.RANDOM_FOREST}

DEFAULTS: dict[Method, dict[str, Any]] = {
    Method.LOGISTIC: {"learning_rate": 0.1, "epochs": 500, "l2": 0.0},
    Method.LDA: {"rank_tol": 1e-9},
    Method.KNN: {"k": 5},
    Method.DECISION_TREE: {"max_depth": None, "min_samples_split": 2, "max_features": None},
    Method.RANDOM_FOREST: {"n_trees": 100, "max_depth": None, "min_samples_split": 2,
                           "max_features": "sqrt", "bootstrap": True},
    Method.GAUSSIAN_NB: {"var_smoothing": 1e-9},
    Method.LINEAR_SVM: {"learning_rate": 0.1, "epochs": 500, "l2": 0.0},
}


def _check(cond: bool, msg: str) -> None:
    if not cond:
        raise ClassifierError(msg)


def _is_int(v) -> bool:
    return isinstance(v, (int, np.integer)) and not isinstance(v, bool)


def _validate(method: Method, hp: dict) -> None:
    unknown = set(hp) - set(DEFAULTS[method])
    _check(not unknown, f"{method.value}: unknown hyperparameter(s) {sorted(unknown)}")
    if "learning_rate" in hp:
        _check(isinstance(hp["learning_rate"], (int, float)) and hp["learning_rate"] > 0,
               "learning_rate must be > 0")
    if "epochs" in hp:
        _check(_is_int(hp["epochs"]) and hp["epochs"] >= 1, "epochs must be an integer >= 1")
    if "l2" in hp:
        _check(hp["l2"] >= 0, "l2 must be >= 0")
    if "k" in hp:
        _check(_is_int(hp["k"]) and hp["k"] >= 1, "k must be an integer >= 1")
    if "n_trees" in hp:
        _check(_is_int(hp["n_trees"]) and hp["n_trees"] >= 1, "n_trees must be an integer >= 1")
    if hp.get("max_depth") is not None:
        _check(_is_int(hp["max_depth"]) and hp["max_depth"] >= 1,
               "max_depth must be an integer >= 1 or None (unlimited)")
    if "min_samples_split" in hp:
        _check(_is_int(hp["min_samples_split"]) and hp["min_samples_split"] >= 2,
               "min_samples_split must be an integer >= 2")
    mf = hp.get("max_features")
    if mf is not None:
        _check(mf == "sqrt" or (_is_int(mf) and mf >= 1), "max_features must be 'sqrt', an integer >= 1 or None")
    if "bootstrap" in hp:
        _check(isinstance(hp["bootstrap"], bool), "bootstrap must be a boolean")
    if "var_smoothing" in hp:
        _check(hp["var_smoothing"] >= 0, "var_smoothing must be >= 0")
    if "rank_tol" in hp:
        _check(0 < hp["rank_tol"] < 1, "rank_tol must be in (0, 1)")


@dataclass(frozen=True)
class ClassifierSpec:
    method: Method
    hyperparameters: dict = field(default_factory=dict)
    seed: int = 0
    use_class_weights: bool | None = None

    def __post_init__(self):
        method = self.method if isinstance(self.method, Method) else Method.parse(str(self.method))
        object.__setattr__(self, "method", method)
        hp = dict(self.hyperparameters)
        _validate(method, hp)
        object.__setattr__(self, "hyperparameters", {**DEFAULTS[method], **hp})
        if self.use_class_weights is None:
            object.__setattr__(self, "use_class_weights", method in WEIGHTED_BY_DEFAULT)
        _check(_is_int(self.seed), "seed must be an integer")

    def __hash__(self):
        return hash((self.method, tuple(sorted(self.hyperparameters.items())), self.seed,
                     self.use_class_weights))

    @property
    def name(self) -> str:
        return self.method.short

    def to_dict(self) -> dict:
        return {"method": self.method.value, "hyperparameters": dict(self.hyperparameters),
                "seed": int(self.seed), "use_class_weights": bool(self.use_class_weights)}

    @classmethod
    def from_dict(cls, doc: dict) -> "ClassifierSpec":
        return cls(Method.parse(doc["method"]), dict(doc.get("hyperparameters", {})),
                   int(doc.get("seed", 0)), doc.get("use_class_weights"))


def class_weights(labels) -> dict:
    """Inverse-frequency weights ``N / (K * N_c)`` over the K classes present."""
    labels = np.asarray(labels)
    if labels.size == 0:
        raise ClassifierError("cannot weight an empty label vector")
    classes, counts = np.unique(labels, return_counts=True)
    n, k = labels.size, classes.size
    return {c.item(): n / (k * int(cnt)) for c, cnt in zip(classes, counts)}


def softmax(Z: np.ndarray) -> np.ndarray:
    Z = Z - Z.max(axis=1, keepdims=True)
    E = np.exp(Z)
    return E / E.sum(axis=1, keepdims=True)


def max_features_count(value, d: int) -> int:
    if value is None:
        return d
    if value == "sqrt":
        return max(1, math.ceil(math.sqrt(d)))
    return min(int(value), d)
