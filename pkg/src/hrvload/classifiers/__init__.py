"""Seven from-scratch classifiers behind one fit / predict / predict_proba interface."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..dataset import FeatureMatrix
from .base import (
    ALL_METHODS,
    ClassifierError,
    ClassifierSpec,
    Method,
    SchemaError,
    class_weights,
)
from .gaussian import LDA, GaussianNB
from .knn import KNN
from .linear import LinearSVM, LogisticRegression
from .tree import DecisionTree, RandomForest

FORMAT_VERSION = 1

ESTIMATORS = {
    Method.LOGISTIC: LogisticRegression,
    Method.LDA: LDA,
    Method.KNN: KNN,
    Method.DECISION_TREE: DecisionTree,
    Method.RANDOM_FOREST: RandomForest,
    Method.GAUSSIAN_NB: GaussianNB,
    Method.LINEAR_SVM: LinearSVM,
}

__all__ = [
    "ALL_METHODS", "ClassifierError", "ClassifierSpec", "Method", "ModelLoadError", "SchemaError",
    "TrainedModel", "class_weights", "fit", "load_model", "predict", "predict_proba", "save_model",
]


class ModelLoadError(ClassifierError):
    pass


@dataclass(frozen=True, eq=False)
class TrainedModel:
    spec: ClassifierSpec
    classes: tuple[int, ...]
    feature_names: tuple[str, ...]
    estimator: object

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "spec": self.spec.to_dict(),
            "feature_names": list(self.feature_names),
            "class_order": list(self.classes),
            "parameters": self.estimator.get_params(),
        }


def fit(spec: ClassifierSpec, matrix: FeatureMatrix, classes=None, threads: int = 1) -> TrainedModel:
    """Train ``spec`` on a labelled matrix.

    ``classes`` fixes the probability-column order; by default it is the sorted
    set of labels present.
    """
    if matrix.y is None:
        raise ClassifierError("training matrix has no labels")
    if len(matrix) == 0:
        raise ClassifierError("training matrix is empty")
    present = np.unique(matrix.y)
    classes = tuple(int(c) for c in (present if classes is None else classes))
    if present.size < 2:
        raise ClassifierError(f"training set holds a single class ({int(present[0])})")
    lookup = {c: i for i, c in enumerate(classes)}
    missing = [int(c) for c in present if int(c) not in lookup]
    if missing:
        raise ClassifierError(f"labels {missing} not in class order {list(classes)}")
    y = np.array([lookup[int(c)] for c in matrix.y], dtype=np.int64)

    K = len(classes)
    cw = np.ones(K)
    if spec.use_class_weights:
        for c, wt in class_weights(y).items():
            cw[c] = wt

    cls = ESTIMATORS[spec.method]
    if cls is LDA:
        est = LDA(spec.hyperparameters, spec.seed, columns=matrix.columns)
    else:
        est = cls(spec.hyperparameters, spec.seed)
    est.fit(matrix.X, y, K, cw, threads=threads)
    return TrainedModel(spec, classes, tuple(matrix.columns), est)


def _check_columns(model: TrainedModel, matrix: FeatureMatrix) -> None:
    if tuple(matrix.columns) != model.feature_names:
        raise SchemaError(
            f"feature columns {list(matrix.columns)} do not match training columns {list(model.feature_names)}"
        )


def predict_proba(model: TrainedModel, matrix: FeatureMatrix) -> np.ndarray:
    _check_columns(model, matrix)
    if len(matrix) == 0:
        return np.zeros((0, len(model.classes)))
    return model.estimator.predict_proba(matrix.X)


def predict(model: TrainedModel, matrix: FeatureMatrix) -> np.ndarray:
    """Class labels by argmax of the probabilities; ties go to the lowest class index."""
    P = predict_proba(model, matrix)
    return np.asarray(model.classes, dtype=np.int64)[np.argmax(P, axis=1)]


def save_model(model: TrainedModel, path: str | Path) -> None:
    text = json.dumps(model.to_dict(), separators=(",", ":"), sort_keys=True)
    Path(path).write_text(text + "\n", encoding="utf-8")


def model_from_dict(doc: dict) -> TrainedModel:
    if not isinstance(doc, dict):
        raise ModelLoadError("model document is not a JSON object")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelLoadError(f"unsupported model format_version {version!r}; expected {FORMAT_VERSION}")
    try:
        spec = ClassifierSpec.from_dict(doc["spec"])
        classes = tuple(int(c) for c in doc["class_order"])
        names = tuple(str(n) for n in doc["feature_names"])
        est = ESTIMATORS[spec.method].from_params(spec.hyperparameters, spec.seed, doc["parameters"])
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ModelLoadError(f"malformed model document: {exc!r}") from None
    return TrainedModel(spec, classes, names, est)


def load_model(path: str | Path) -> TrainedModel:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelLoadError(f"cannot read model file {path}: {exc}") from None
    model = model_from_dict(doc)
    # a truncated-but-parseable document could still be inconsistent; probe it once
    try:
        probe = FeatureMatrix.from_arrays(np.zeros((1, len(model.feature_names))), None, model.feature_names)
        P = predict_proba(model, probe)
    except Exception as exc:
        raise ModelLoadError(f"model file {path} is inconsistent: {exc!r}") from None
    if P.shape != (1, len(model.classes)):
        raise ModelLoadError(f"model file {path} yields {P.shape[1]} probability columns for "
                             f"{len(model.classes)} classes")
    return model
