"""Command-line front end: synth, features, train, predict, evaluate, compare, ablate, report, replay."""

from __future__ import annotations

import csv
import hashlib
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import click

from . import __version__
from .classifiers import (
    ALL_METHODS,
    ClassifierError,
    ClassifierSpec,
    Method,
    fit,
    load_model,
    predict,
    predict_proba,
    save_model,
)
from .dataset import (
    CLASS_NAMES,
    DataError,
    ModelSpec,
    Scaler,
    encode,
    load_sessions,
    save_sessions,
    standardize,
    stratified_split,
)
from .evaluation import Protocol, accuracy, compare
from .hrv import DEFAULT_BIN_WIDTH_MS, FEATURE_NAMES, InvalidRRError, extract_all, read_rr_file
from .reporting import SUMMARY_COLUMNS, summary_csv, summary_rows, write_report
from .synth import SynthConfig, generate

OUT_DIR_ENV = "HRVLOAD_OUT_DIR"


@dataclass
class Context:
    seed: int
    threads: int
    out_dir: Path
    fmt: str
    argv: list[str] = field(default_factory=list)


def config_hash(config: dict) -> str:
    text = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:10]


def file_digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def artifact_stem(command: str, seed: int, config: dict) -> str:
    return f"{command}-{seed}-{config_hash(config)}"


class Run:
    """Collects what a command did and writes exactly one manifest for it."""

    def __init__(self, ctx: Context, command: str, config: dict):
        self.ctx = ctx
        self.command = command
        self.config = config
        self.inputs: list[str] = []
        self.outputs: list[str] = []
        self.errors: list[str] = []
        self.extra: dict = {}
        self.start = time.perf_counter()

    def write(self, path: Path, status: str) -> None:
        doc = {
            "command": self.command,
            "argv": self.ctx.argv,
            "out_dir": str(self.ctx.out_dir),
            "config": self.config,
            "seeds": {"global": self.ctx.seed, **self.extra.pop("seeds", {})},
            "threads": self.ctx.threads,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "status": status,
            "partial": status != "ok",
            "errors": self.errors,
            "version": __version__,
            "duration_s": round(time.perf_counter() - self.start, 3),
            **self.extra,
        }
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n", encoding="utf-8")


def _fail(msg: str) -> None:
    raise click.ClickException(msg)


def _load(path: str):
    try:
        return load_sessions(path)
    except (DataError, OSError) as exc:
        _fail(f"{path}: {exc}")


def _parse_params(items) -> dict:
    out = {}
    for item in items:
        if "=" not in item:
            raise click.BadParameter(f"expected NAME=VALUE, got {item!r}", param_hint="--param")
        k, v = item.split("=", 1)
        try:
            out[k] = json.loads(v)
        except json.JSONDecodeError:
            out[k] = v
    return out


def _model_specs(models: str, ablate: bool) -> list[ModelSpec]:
    specs = []
    try:
        for part in [p for p in models.split(",") if p.strip()]:
            base = ModelSpec.parse(part)
            variants = [ModelSpec(base.model_id, True), ModelSpec(base.model_id, False)] if ablate else [base]
            for v in variants:
                if v not in specs:
                    specs.append(v)
    except DataError as exc:
        raise click.BadParameter(str(exc), param_hint="--models")
    if not specs:
        raise click.BadParameter("no models given", param_hint="--models")
    return specs


def _methods(text: str) -> list[Method]:
    if text.strip().lower() == "all":
        return list(ALL_METHODS)
    try:
        return [Method.parse(t) for t in text.split(",") if t.strip()]
    except ClassifierError as exc:
        raise click.BadParameter(str(exc), param_hint="--methods")


class _Group(click.Group):
    def parse_args(self, ctx, args):
        ctx.meta["hrvload.argv"] = list(args)
        return super().parse_args(ctx, args)


@click.group(cls=_Group)
@click.version_option(__version__, prog_name="hrvload")
@click.option("--seed", default=0, show_default=True, type=int, help="Seed for splits, folds and generation.")
@click.option("--threads", default=1, show_default=True, type=click.IntRange(1, 256),
              help="Worker threads; results do not depend on it.")
@click.option("--out-dir", envvar=OUT_DIR_ENV, default=".", show_default=True,
              type=click.Path(file_okay=False), help=f"Output directory (env {OUT_DIR_ENV}).")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="csv", show_default=True,
              help="Format of tables printed to stdout.")
@click.pass_context
def main(ctx, seed, threads, out_dir, fmt):
    """Post-exercise HRV features and training-load classification."""
    ctx.obj = Context(seed, threads, Path(out_dir), fmt, argv=ctx.meta.get("hrvload.argv", []))


def _ctx() -> Context:
    return click.get_current_context().find_object(Context)


def _override(attr, convert=lambda v: v):
    def callback(ctx, param, value):
        if value is not None:
            setattr(ctx.find_object(Context), attr, convert(value))
    return callback


def _global_options(f):
    """Let the global flags also appear after the subcommand name."""
    f = click.option("--format", "fmt_", type=click.Choice(["json", "csv"]), expose_value=False,
                     callback=_override("fmt"), help="Same as the global flag.")(f)
    f = click.option("--out-dir", type=click.Path(file_okay=False), expose_value=False,
                     callback=_override("out_dir", Path), help="Same as the global flag.")(f)
    f = click.option("--threads", type=click.IntRange(1, 256), expose_value=False,
                     callback=_override("threads"), help="Same as the global flag.")(f)
    return click.option("--seed", type=int, expose_value=False, callback=_override("seed"),
                        help="Same as the global flag.")(f)


@main.command()
@_global_options
@click.option("--n", "n_sessions", default=300, show_default=True, type=int)
@click.option("--signal", default=1.0, show_default=True, type=click.FloatRange(0.0, 1.0))
@click.option("--class-mix", default="0.3,0.4,0.3", show_default=True, help="low,medium,high fractions")
@click.option("--calorie-noise", default=0.02, show_default=True, type=float)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              help="JSON SynthConfig; flags given explicitly are overridden by it.")
@click.option("--out", type=click.Path(dir_okay=False), help="Output CSV (default: deterministic name in --out-dir).")
def synth(n_sessions, signal, class_mix, calorie_noise, config_path, out):
    """Generate a synthetic sessions CSV."""
    c = _ctx()
    try:
        mix = tuple(float(v) for v in class_mix.split(","))
    except ValueError:
        raise click.BadParameter(f"not a list of numbers: {class_mix!r}", param_hint="--class-mix")
    doc = {"n_sessions": n_sessions, "seed": c.seed, "signal_strength": signal, "class_mix": mix,
           "calorie_noise": calorie_noise}
    try:
        if config_path:
            doc.update(json.loads(Path(config_path).read_text(encoding="utf-8")))
        config = SynthConfig.from_dict(doc)
    except (DataError, TypeError, json.JSONDecodeError) as exc:
        raise click.UsageError(str(exc))
    cfg = config.to_dict()
    path = Path(out) if out else c.out_dir / f"{artifact_stem('synth', config.seed, cfg)}.csv"
    run = Run(c, "synth", cfg)
    run.extra["seeds"] = {"generator": config.seed}
    try:
        records = generate(config)
    except DataError as exc:
        _fail(str(exc))
    path.parent.mkdir(parents=True, exist_ok=True)
    save_sessions(records, path)
    run.outputs.append(str(path))
    run.write(path.with_suffix(".manifest.json"), "ok")
    click.echo(str(path))


def _rr_inputs(paths) -> list[Path]:
    files: list[Path] = []
    for p in map(Path, paths):
        if p.is_dir():
            files.extend(sorted(q for q in p.iterdir() if q.is_file()))
        else:
            files.append(p)
    return files


@main.command()
@_global_options
@click.argument("inputs", nargs=-1, required=True, type=click.Path(exists=True))
@click.option("--bin-width", default=DEFAULT_BIN_WIDTH_MS, show_default=True, type=float)
@click.option("--pnn50-denominator", type=click.Choice(["intervals", "pairs"]), default="intervals",
              show_default=True)
@click.option("--out", type=click.Path(dir_okay=False))
def features(inputs, bin_width, pnn50_denominator, out):
    """Extract the nine HRV features from RR files (one interval in ms per line)."""
    c = _ctx()
    files = _rr_inputs(inputs)
    cfg = {"inputs": [{"path": str(f), "sha256": file_digest(f)} for f in files],
           "bin_width": bin_width, "pnn50_denominator": pnn50_denominator}
    path = Path(out) if out else c.out_dir / f"{artifact_stem('features', c.seed, cfg)}.csv"
    run = Run(c, "features", cfg)
    run.inputs = [str(f) for f in files]
    rows = []
    for f in files:
        try:
            feats = extract_all(read_rr_file(f), bin_width, pnn50_denominator)
        except (InvalidRRError, UnicodeDecodeError, OSError) as exc:
            msg = str(exc) if str(f) in str(exc) else f"{f}: {exc}"
            run.errors.append(msg)
            click.echo(f"error: {msg}", err=True)
            continue
        rows.append([str(f)] + [str(v) if isinstance(v, int) else repr(float(v)) for v in feats.as_tuple()])
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("file",) + FEATURE_NAMES)
        w.writerows(rows)
    run.outputs.append(str(path))
    run.write(path.with_suffix(".manifest.json"), "partial" if run.errors else "ok")
    click.echo(str(path))
    if run.errors:
        sys.exit(1)


def _classifier(method: str, params, seed: int, weights) -> ClassifierSpec:
    try:
        return ClassifierSpec(Method.parse(method), _parse_params(params), seed, weights)
    except ClassifierError as exc:
        raise click.UsageError(str(exc))


def _model_option(f):
    f = click.option("--model", "model_name", default="post_full", show_default=True,
                     help="in_full, post_full or post_short, optionally suffixed +A / -A.")(f)
    return click.option("--no-activity", is_flag=True, help="Drop the activity one-hot columns.")(f)


def _resolve_model(name: str, no_activity: bool) -> ModelSpec:
    try:
        m = ModelSpec.parse(name)
    except DataError as exc:
        raise click.BadParameter(str(exc), param_hint="--model")
    return ModelSpec(m.model_id, False) if no_activity else m


def _classifier_options(f):
    f = click.option("--method", default="rf", show_default=True, help="lr, lda, kn, dt, rf, gnb or svm.")(f)
    f = click.option("--param", "params", multiple=True, metavar="NAME=VALUE", help="Hyperparameter override.")(f)
    return click.option("--class-weights/--no-class-weights", "weights", default=None,
                        help="Override the method's default class weighting.")(f)


@main.command()
@_global_options
@click.option("--data", required=True, type=click.Path(exists=True, dir_okay=False))
@_model_option
@_classifier_options
@click.option("--test-fraction", default=0.25, show_default=True, type=click.FloatRange(0.0, 1.0, max_open=True),
              help="Held-out share excluded from training (0 trains on everything).")
@click.option("--out", type=click.Path(dir_okay=False), help="Model JSON path; the scaler goes next to it.")
def train(data, model_name, no_activity, method, params, weights, test_fraction, out):
    """Fit one classifier and persist it together with its scaler."""
    c = _ctx()
    mspec = _resolve_model(model_name, no_activity)
    cspec = _classifier(method, params, c.seed, weights)
    cfg = {"data": {"path": str(data), "sha256": file_digest(data)}, "model": mspec.label,
           "classifier": cspec.to_dict(), "test_fraction": test_fraction}
    run = Run(c, "train", cfg)
    run.inputs.append(str(data))
    matrix = encode(_load(data), mspec)
    if test_fraction > 0:
        try:
            train_idx, _ = stratified_split(matrix, test_fraction, c.seed)
        except DataError as exc:
            _fail(str(exc))
        matrix = matrix.take(train_idx)
    (scaled,), scaler = standardize(matrix)
    try:
        model = fit(cspec, scaled, classes=(0, 1, 2), threads=c.threads)
    except ClassifierError as exc:
        _fail(str(exc))
    path = Path(out) if out else c.out_dir / f"{artifact_stem('train', c.seed, cfg)}.model.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    save_model(model, path)
    scaler_path = scaler_path_for(path)
    scaler.save(scaler_path)
    run.outputs += [str(path), str(scaler_path)]
    run.extra["seeds"] = {"split": c.seed, "classifier": cspec.seed}
    run.extra["scaler"] = scaler.to_dict()
    run.extra["train_rows"] = len(matrix)
    run.write(_manifest_path(path), "ok")
    click.echo(str(path))


def scaler_path_for(model_path: Path) -> Path:
    name = model_path.name
    stem = name[: -len(".model.json")] if name.endswith(".model.json") else model_path.stem
    return model_path.with_name(stem + ".scaler.json")


def _manifest_path(path: Path) -> Path:
    name = path.name
    for suffix in (".model.json", ".json", ".csv"):
        if name.endswith(suffix):
            name = name[: -len(suffix)]
            break
    return path.with_name(name + ".manifest.json")


@main.command("predict")
@_global_options
@click.option("--model", "model_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--data", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--scaler", "scaler_file", type=click.Path(exists=True, dir_okay=False),
              help="Scaler JSON (default: next to the model).")
@click.option("--out", type=click.Path(dir_okay=False))
def predict_cmd(model_path, data, scaler_file, out):
    """Predict load classes for a sessions CSV and print accuracy."""
    c = _ctx()
    try:
        model = load_model(model_path)
        scaler = Scaler.load(scaler_file or scaler_path_for(Path(model_path)))
        mspec = ModelSpec.from_columns(model.feature_names)
    except (ClassifierError, DataError, OSError) as exc:
        _fail(str(exc))
    cfg = {"model": file_digest(model_path), "data": file_digest(data)}
    run = Run(c, "predict", cfg)
    run.inputs += [str(model_path), str(data)]
    matrix = scaler.transform(encode(_load(data), mspec))
    P = predict_proba(model, matrix)
    pred = predict(model, matrix)
    acc = accuracy(pred, matrix.y)
    path = Path(out) if out else c.out_dir / f"{artifact_stem('predict', c.seed, cfg)}.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["row", "true", "predicted"] + [f"p_{n}" for n in CLASS_NAMES])
        for i, (t, p, probs) in enumerate(zip(matrix.y, pred, P)):
            w.writerow([i, CLASS_NAMES[t], CLASS_NAMES[p]] + [repr(float(v)) for v in probs])
    run.outputs.append(str(path))
    run.extra["accuracy"] = acc
    run.write(_manifest_path(path), "ok")
    if c.fmt == "json":
        click.echo(json.dumps({"accuracy": acc, "n": int(len(pred)), "predictions": str(path)}))
    else:
        click.echo(f"accuracy,{acc!r}")


def _protocol_options(f):
    f = click.option("--k", default=10, show_default=True, type=click.IntRange(2, None), help="CV folds.")(f)
    return click.option("--test-fraction", default=0.25, show_default=True,
                        type=click.FloatRange(0.0, 1.0, min_open=True, max_open=True))(f)


def _emit_table(doc: dict, fmt: str) -> None:
    if fmt == "json":
        click.echo(json.dumps([dict(zip(SUMMARY_COLUMNS, r)) for r in summary_rows(doc)], indent=1))
    else:
        click.echo(summary_csv(doc), nl=False)


@main.command()
@_global_options
@click.option("--data", required=True, type=click.Path(exists=True, dir_okay=False))
@_model_option
@_classifier_options
@_protocol_options
def evaluate(data, model_name, no_activity, method, params, weights, k, test_fraction):
    """CV accuracy plus hold-out ROC/AUC, confusion matrix and precision/recall for one pair."""
    c = _ctx()
    mspec = _resolve_model(model_name, no_activity)
    cspec = _classifier(method, params, c.seed, weights)
    _run_grid(c, "evaluate", data, [mspec], [cspec], Protocol(k, test_fraction, c.seed))


def _run_grid(c: Context, command, data, models, specs, protocol):
    cfg = {"data": {"path": str(data), "sha256": file_digest(data)},
           "models": [m.label for m in models], "classifiers": [s.to_dict() for s in specs],
           "protocol": protocol.to_dict()}
    run = Run(c, command, cfg)
    run.inputs.append(str(data))
    records = _load(data)
    try:
        report = compare(models, specs, records, protocol, threads=c.threads)
    except (DataError, ClassifierError, ValueError) as exc:
        _fail(str(exc))
    stem = artifact_stem(command, c.seed, cfg)
    paths = write_report(report, c.out_dir, stem)
    run.outputs += [str(p) for p in paths]
    run.extra["seeds"] = {"split": protocol.seed}
    run.write(c.out_dir / f"{stem}.manifest.json", "ok")
    _emit_table(report.to_dict(), c.fmt)
    click.echo(f"wrote {len(paths)} files to {c.out_dir} ({stem}.*)", err=True)


def _grid_command(name, default_models, force_ablate, help_text):
    @click.option("--data", required=True, type=click.Path(exists=True, dir_okay=False))
    @click.option("--models", default=default_models, show_default=True,
                  help="Comma-separated models (in_full, post_full, post_short; optional +A/-A).")
    @click.option("--methods", default="all", show_default=True, help="Comma-separated methods or 'all'.")
    @_protocol_options
    def command(data, models, methods, k, test_fraction, ablate_activity=False):
        c = _ctx()
        mspecs = _model_specs(models, ablate_activity or force_ablate)
        cspecs = [ClassifierSpec(m, seed=c.seed) for m in _methods(methods)]
        _run_grid(c, name, data, mspecs, cspecs, Protocol(k, test_fraction, c.seed))

    command.__doc__ = help_text
    if not force_ablate:
        command = click.option("--ablate-activity", is_flag=True,
                               help="Evaluate each model with and without the activity columns.")(command)
    return main.command(name)(_global_options(command))


_grid_command("compare", "post_full", False,
              "Evaluate all methods on the requested models; writes JSON, CSV tables and SVG figures.")
_grid_command("ablate", "post_full,post_short", True,
              "Compare every model with and without the activity columns.")


@main.command()
@_global_options
@click.argument("report_path", type=click.Path(exists=True, dir_okay=False))
def report(report_path):
    """Print the summary table of a saved comparison report."""
    c = _ctx()
    try:
        doc = json.loads(Path(report_path).read_text(encoding="utf-8"))
        _emit_table(doc, c.fmt)
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        _fail(f"{report_path}: not a comparison report ({exc})")


@main.command()
@_global_options
@click.argument("manifest", type=click.Path(exists=True, dir_okay=False))
def replay(manifest):
    """Re-run the command recorded in a manifest."""
    try:
        doc = json.loads(Path(manifest).read_text(encoding="utf-8"))
        argv = ["--out-dir", doc["out_dir"]] + list(doc["argv"])
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        _fail(f"{manifest}: not a manifest ({exc})")
    if "replay" in argv:
        _fail("refusing to replay a replay")
    main.main(args=argv, prog_name="hrvload", standalone_mode=False)


if __name__ == "__main__":  # pragma: no cover
    main()
