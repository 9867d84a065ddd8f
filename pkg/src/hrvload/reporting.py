"""Serialize comparison reports to JSON, summary CSVs, raw ROC points and SVG figures."""

from __future__ import annotations

import csv
import io
import json
from importlib import resources
from pathlib import Path

from .dataset import CLASS_NAMES
from .evaluation import ComparisonReport, Evaluation
from .plots import boxplot_svg, confusion_svg, roc_svg

SUMMARY_COLUMNS = ("model", "method", "auc_micro", "auc_macro", "acc_mean", "acc_std",
                   "test_accuracy", "precision", "recall")


def report_schema() -> dict:
    return json.loads(resources.files("hrvload").joinpath("report_schema.json").read_text("utf-8"))


def dumps(doc) -> str:
    return json.dumps(doc, indent=1, sort_keys=True, allow_nan=False) + "\n"


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _num(x: float) -> str:
    return repr(float(x))


def summary_rows(doc: dict) -> list[list]:
    """One summary row per (model, method) entry of a serialized report."""
    return [[e["model"], e["method"], _num(e["auc"]["micro"]), _num(e["auc"]["macro"]),
             _num(e["cv"]["mean"]), _num(e["cv"]["std"]), _num(e["test_accuracy"]),
             _num(e["precision"]), _num(e["recall"])] for e in doc["entries"]]


def summary_csv(doc: dict) -> str:
    return _csv_text(SUMMARY_COLUMNS, summary_rows(doc))


def cv_csv(doc: dict) -> str:
    k = max((len(e["cv"]["accuracies"]) for e in doc["entries"]), default=0)
    header = ["model", "method", "mean", "std"] + [f"fold_{i + 1}" for i in range(k)]
    rows = [[e["model"], e["method"], _num(e["cv"]["mean"]), _num(e["cv"]["std"])]
            + [_num(a) for a in e["cv"]["accuracies"]] for e in doc["entries"]]
    return _csv_text(header, rows)


def roc_points_csv(doc: dict) -> str:
    rows = []
    for e in doc["entries"]:
        for curve, pts in e["roc"].items():
            thr = pts.get("thresholds") or [""] * len(pts["fpr"])
            for x, y, t in zip(pts["fpr"], pts["tpr"], thr):
                rows.append([e["model"], e["method"], curve, _num(x), _num(y), "" if t == "" else _num(t)])
    return _csv_text(["model", "method", "curve", "fpr", "tpr", "threshold"], rows)


def confusion_csv(doc: dict) -> str:
    rows = []
    for e in doc["entries"]:
        for name, row in zip(CLASS_NAMES, e["confusion_matrix"]):
            rows.append([e["model"], e["method"], name, *row])
    return _csv_text(["model", "method", "true"] + [f"pred_{c}" for c in CLASS_NAMES], rows)


def file_tag(model_label: str) -> str:
    return model_label.replace("+A", "_with_A").replace("-A", "_no_A")


def _per_method_roc(e: Evaluation) -> str:
    a = e.auc
    curves = {f"{name} (AUC {v:.2f})": (c.fpr, c.tpr) for name, c, v in zip(CLASS_NAMES, e.curves, a.per_class)}
    curves[f"micro (AUC {a.micro:.2f})"] = (e.micro_curve.fpr, e.micro_curve.tpr)
    curves[f"macro (AUC {a.macro:.2f})"] = (e.macro_curve.fpr, e.macro_curve.tpr)
    return roc_svg(curves, f"ROC {e.spec.name}, {e.model.label}")


def write_report(report: ComparisonReport, out_dir: str | Path, prefix: str) -> list[Path]:
    """Write every artifact for ``report``; returns the paths in a fixed order."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    doc = report.to_dict()
    files: dict[str, str] = {
        f"{prefix}.json": dumps(doc),
        f"{prefix}-summary.csv": summary_csv(doc),
        f"{prefix}-cv.csv": cv_csv(doc),
        f"{prefix}-roc-points.csv": roc_points_csv(doc),
        f"{prefix}-confusion.csv": confusion_csv(doc),
    }
    labels = list(dict.fromkeys(e.model.label for e in report.entries))
    for label in labels:
        entries = [e for e in report.entries if e.model.label == label]
        tag = file_tag(label)
        files[f"{prefix}-{tag}-cv-box.svg"] = boxplot_svg(
            {e.spec.name: e.cv.accuracies for e in entries}, f"K-fold accuracy, {label}")
        files[f"{prefix}-{tag}-roc.svg"] = roc_svg(
            {f"{e.spec.name} micro={e.auc.micro:.2f} macro={e.auc.macro:.2f}": (e.macro_curve.fpr, e.macro_curve.tpr)
             for e in entries}, f"Macro-average ROC, {label}")
        for e in entries:
            files[f"{prefix}-{tag}-{e.spec.name}-roc.svg"] = _per_method_roc(e)
            files[f"{prefix}-{tag}-{e.spec.name}-confusion.svg"] = confusion_svg(
                e.confusion, CLASS_NAMES, f"Confusion matrix {e.spec.name}, {label}")
    paths = []
    for name, text in files.items():
        p = out / name
        with open(p, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        paths.append(p)
    return paths
