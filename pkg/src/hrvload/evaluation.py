"""Cross-validation, ROC/AUC, confusion matrices and method comparison."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .classifiers import ClassifierSpec, fit, predict, predict_proba
from .dataset import (
    CLASS_NAMES,
    DataError,
    FeatureMatrix,
    ModelSpec,
    SessionRecord,
    encode,
    standardize,
    stratified_folds,
    stratified_split,
)

LOAD_CLASSES = (0, 1, 2)


class UndefinedROCError(ValueError):
    pass


@dataclass(frozen=True)
class CVResult:
    method: str
    accuracies: tuple[float, ...]
    mean: float
    std: float  # population standard deviation over folds
    folds: tuple[tuple[int, ...], ...] = field(default=(), repr=False)


@dataclass(frozen=True, eq=False)
class ROCCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray

    def to_dict(self) -> dict:
        return {"fpr": self.fpr.tolist(), "tpr": self.tpr.tolist(), "thresholds": self.thresholds.tolist()}


@dataclass(frozen=True)
class AUCReport:
    per_class: tuple[float, ...]
    micro: float
    macro: float


@dataclass(frozen=True)
class PrecisionRecall:
    precision: float
    recall: float
    undefined_precision: tuple[int, ...] = ()  # classes never predicted
    undefined_recall: tuple[int, ...] = ()  # classes absent from the truth


def accuracy(pred, true) -> float:
    pred, true = np.asarray(pred), np.asarray(true)
    return float(np.mean(pred == true))


def roc_curve(scores, labels) -> ROCCurve:
    """One point per distinct score, visited from the highest score down.

    The leading sentinel threshold (max score + 1) gives the (0, 0) point.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels).astype(bool)
    if scores.shape != labels.shape:
        raise ValueError("scores and labels differ in length")
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedROCError("ROC needs both positive and negative labels")
    order = np.argsort(-scores, kind="mergesort")
    s, l = scores[order], labels[order]
    last = np.r_[np.flatnonzero(np.diff(s) != 0), s.size - 1]
    tps = np.cumsum(l)[last]
    fps = (last + 1) - tps
    thresholds = np.r_[s[0] + 1.0, s[last]]
    return ROCCurve(np.r_[0.0, fps / n_neg], np.r_[0.0, tps / n_pos], thresholds)


def auc(curve: ROCCurve) -> float:
    """Trapezoidal area; tied scores form one diagonal segment (half credit per tied pair)."""
    return float(np.sum(np.diff(curve.fpr) * (curve.tpr[1:] + curve.tpr[:-1]) / 2.0))


def _check_classes(labels, classes):
    labels = np.asarray(labels)
    missing = [c for c in classes if not np.any(labels == c)]
    if missing:
        names = [CLASS_NAMES[c] if set(classes) == set(LOAD_CLASSES) else str(c) for c in missing]
        raise UndefinedROCError(f"class(es) {', '.join(names)} absent from labels; ROC undefined")
    if len(classes) < 2 or labels.size == 0:
        raise UndefinedROCError("multiclass ROC needs at least two classes")


def micro_roc_curve(P, labels, classes=LOAD_CLASSES) -> ROCCurve:
    P = np.asarray(P, dtype=np.float64)
    Y = (np.asarray(labels)[:, None] == np.asarray(classes)[None, :])
    return roc_curve(P.ravel(), Y.ravel())


def macro_roc_curve(curves: Sequence[ROCCurve]) -> ROCCurve:
    """Average of per-class TPRs interpolated on the union of their FPR grids (for plotting)."""
    grid = np.unique(np.concatenate([c.fpr for c in curves]))
    tpr = np.mean([np.interp(grid, c.fpr, c.tpr) for c in curves], axis=0)
    if tpr[0] > 0.0:
        # vertical steps at fpr 0 would otherwise hide the origin
        grid, tpr = np.r_[0.0, grid], np.r_[0.0, tpr]
    return ROCCurve(grid, tpr, np.full(grid.size, np.nan))


def multiclass_roc(P, labels, classes=LOAD_CLASSES) -> tuple[list[ROCCurve], AUCReport]:
    """One-vs-rest curves per class, macro = mean per-class AUC, micro = AUC of the
    flattened (n * K scores, n * K indicators) problem."""
    P = np.asarray(P, dtype=np.float64)
    labels = np.asarray(labels)
    _check_classes(labels, classes)
    curves = [roc_curve(P[:, j], labels == c) for j, c in enumerate(classes)]
    per_class = tuple(auc(c) for c in curves)
    micro = auc(micro_roc_curve(P, labels, classes))
    return curves, AUCReport(per_class, micro, float(np.mean(per_class)))


def confusion_matrix(pred, true, n_classes: int = 3) -> np.ndarray:
    """Counts with rows = true class, columns = predicted class."""
    pred, true = np.asarray(pred, dtype=np.int64), np.asarray(true, dtype=np.int64)
    if pred.shape != true.shape:
        raise DataError(f"{pred.size} predictions for {true.size} labels")
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (true, pred), 1)
    return cm


def precision_recall_macro(pred, true, n_classes: int = 3) -> PrecisionRecall:
    """Unweighted per-class means; a class with an empty denominator contributes 0 and is flagged."""
    cm = confusion_matrix(pred, true, n_classes)
    tp = np.diag(cm).astype(np.float64)
    predicted = cm.sum(axis=0)
    actual = cm.sum(axis=1)
    prec = np.divide(tp, predicted, out=np.zeros(n_classes), where=predicted > 0)
    rec = np.divide(tp, actual, out=np.zeros(n_classes), where=actual > 0)
    return PrecisionRecall(
        float(prec.mean()), float(rec.mean()),
        tuple(int(c) for c in np.flatnonzero(predicted == 0)),
        tuple(int(c) for c in np.flatnonzero(actual == 0)),
    )


def fit_scaled(spec: ClassifierSpec, train: FeatureMatrix, others=(), classes=LOAD_CLASSES, threads=1):
    """Standardize on ``train``, fit, and return (model, scaled others, scaler)."""
    scaled, scaler = standardize(train, others)
    model = fit(spec, scaled[0], classes=classes, threads=threads)
    return model, scaled[1:], scaler


def kfold_cv(spec: ClassifierSpec, matrix: FeatureMatrix, k: int = 10, seed: int = 0,
             classes=LOAD_CLASSES, threads: int = 1) -> CVResult:
    """Stratified k-fold accuracy with the scaler refitted inside every training fold."""
    folds = stratified_folds(matrix.y, k, seed)
    accs = []
    for i, val in enumerate(folds):
        train = np.sort(np.concatenate([f for j, f in enumerate(folds) if j != i]))
        model, (v,), _ = fit_scaled(spec, matrix.take(train), [matrix.take(val)], classes, threads)
        accs.append(accuracy(predict(model, v), v.y))
    accs_arr = np.array(accs)
    return CVResult(spec.name, tuple(float(a) for a in accs), float(accs_arr.mean()),
                    float(accs_arr.std()), tuple(tuple(int(i) for i in f) for f in folds))


@dataclass(frozen=True, eq=False)
class Evaluation:
    """Everything measured for one (model specification, classifier) pair."""

    model: ModelSpec
    spec: ClassifierSpec
    cv: CVResult
    auc: AUCReport
    test_accuracy: float
    precision_recall: PrecisionRecall
    confusion: np.ndarray
    curves: list[ROCCurve]
    micro_curve: ROCCurve
    macro_curve: ROCCurve

    def to_dict(self) -> dict:
        pr = self.precision_recall
        return {
            "model": self.model.label,
            "model_id": self.model.model_id.value,
            "include_activity": self.model.include_activity,
            "method": self.spec.name,
            "classifier": self.spec.to_dict(),
            "cv": {"accuracies": list(self.cv.accuracies), "mean": self.cv.mean, "std": self.cv.std},
            "auc": {"per_class": dict(zip(CLASS_NAMES, self.auc.per_class)),
                    "micro": self.auc.micro, "macro": self.auc.macro},
            "test_accuracy": self.test_accuracy,
            "precision": pr.precision,
            "recall": pr.recall,
            "undefined_precision": [CLASS_NAMES[c] for c in pr.undefined_precision],
            "undefined_recall": [CLASS_NAMES[c] for c in pr.undefined_recall],
            "confusion_matrix": self.confusion.tolist(),
            "roc": {
                **{name: c.to_dict() for name, c in zip(CLASS_NAMES, self.curves)},
                "micro": self.micro_curve.to_dict(),
                "macro": {"fpr": self.macro_curve.fpr.tolist(), "tpr": self.macro_curve.tpr.tolist()},
            },
        }


@dataclass(frozen=True)
class Protocol:
    k: int = 10
    test_fraction: float = 0.25
    seed: int = 0

    def to_dict(self) -> dict:
        return {"k": self.k, "test_fraction": self.test_fraction, "seed": self.seed}


@dataclass(frozen=True, eq=False)
class ComparisonReport:
    protocol: Protocol
    n_sessions: int
    train_rows: tuple[int, ...]
    test_rows: tuple[int, ...]
    entries: list[Evaluation]

    def get(self, model_label: str, method: str) -> Evaluation:
        for e in self.entries:
            if e.model.label == model_label and e.spec.name == method:
                return e
        raise KeyError((model_label, method))

    def to_dict(self) -> dict:
        return {
            "report_version": 1,
            "protocol": self.protocol.to_dict(),
            "n_sessions": self.n_sessions,
            "classes": list(CLASS_NAMES),
            "split": {"train": list(self.train_rows), "test": list(self.test_rows)},
            "entries": [e.to_dict() for e in self.entries],
        }


def evaluate_holdout(spec: ClassifierSpec, model_spec: ModelSpec, train: FeatureMatrix, test: FeatureMatrix,
                     protocol: Protocol, threads: int = 1, with_cv: bool = True) -> Evaluation:
    if with_cv:
        cv = kfold_cv(spec, train, protocol.k, protocol.seed, threads=threads)
    else:
        cv = CVResult(spec.name, (), float("nan"), float("nan"))
    model, (te,), _ = fit_scaled(spec, train, [test], threads=threads)
    P = predict_proba(model, te)
    pred = predict(model, te)
    curves, report = multiclass_roc(P, te.y)
    return Evaluation(
        model=model_spec, spec=spec, cv=cv, auc=report,
        test_accuracy=accuracy(pred, te.y),
        precision_recall=precision_recall_macro(pred, te.y),
        confusion=confusion_matrix(pred, te.y),
        curves=curves, micro_curve=micro_roc_curve(P, te.y), macro_curve=macro_roc_curve(curves),
    )


def compare(models: Sequence[ModelSpec], specs: Sequence[ClassifierSpec], records: Sequence[SessionRecord],
            protocol: Protocol = Protocol(), threads: int = 1, with_cv: bool = True) -> ComparisonReport:
    """Evaluate every (model, classifier) pair on one shared stratified split.

    CV runs on the training portion; the hold-out metrics come from a fit on the
    whole training portion. Pairs may run concurrently; results keep grid order.
    """
    if not models or not specs:
        raise DataError("compare needs at least one model and one classifier")
    matrices = {m: encode(records, m) for m in models}
    first = matrices[models[0]]
    train_idx, test_idx = stratified_split(first, protocol.test_fraction, protocol.seed)
    grid = [(m, s) for m in models for s in specs]

    def run(pair):
        m, s = pair
        mat = matrices[m]
        return evaluate_holdout(s, m, mat.take(train_idx), mat.take(test_idx), protocol, with_cv=with_cv)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            entries = list(pool.map(run, grid))
    else:
        entries = [run(p) for p in grid]
    return ComparisonReport(protocol, len(records), tuple(int(i) for i in train_idx),
                            tuple(int(i) for i in test_idx), entries)
