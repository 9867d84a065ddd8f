"""Session records, calorie binning, feature encoding, scaling, splitting and CSV I/O."""

from __future__ import annotations

import csv
import enum
import json
import math
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .hrv import HRVFeatures


class DataError(ValueError):
    """Invalid records, malformed files, or unusable inputs."""


class StratificationError(DataError):
    pass


class ActivityType(enum.Enum):
    SWIM = "swim"
    CYCLE = "cycle"
    RUN = "run"

    @classmethod
    def parse(cls, text: str) -> "ActivityType":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise DataError(f"unknown activity {text!r}; expected one of swim, cycle, run") from None


ACTIVITIES = (ActivityType.SWIM, ActivityType.CYCLE, ActivityType.RUN)


class LoadClass(enum.IntEnum):
    LOW = 0
    MEDIUM = 1
    HIGH = 2


CLASS_NAMES = tuple(c.name.lower() for c in LoadClass)

# upper edges of Low and Medium; bins are [0,400), [400,1000), [1000,4000]
CALORIE_EDGES = (400.0, 1000.0)
CALORIE_MAX = 4000.0


def bin_calories(calories: float) -> LoadClass:
    if not (0.0 < calories <= CALORIE_MAX):
        raise DataError(f"calories {calories} outside (0, {CALORIE_MAX:g}]")
    if calories < CALORIE_EDGES[0]:
        return LoadClass.LOW
    if calories < CALORIE_EDGES[1]:
        return LoadClass.MEDIUM
    return LoadClass.HIGH


@dataclass(frozen=True)
class SessionRecord:
    activity: ActivityType
    distance_m: float
    duration_s: float
    ahr: float
    mhr: float
    calories: float
    post: HRVFeatures

    def __post_init__(self):
        validate_record(self)

    @property
    def load_class(self) -> LoadClass:
        return bin_calories(self.calories)


def validate_record(r: SessionRecord) -> None:
    if not isinstance(r.activity, ActivityType):
        raise DataError(f"activity must be an ActivityType, got {r.activity!r}")
    checks = [
        ("distance_m", r.distance_m, 300.0, 200000.0),
        ("duration_s", r.duration_s, 600.0, 32400.0),
        ("ahr", r.ahr, 45.0, 195.0),
        ("mhr", r.mhr, 45.0, 195.0),
    ]
    for name, value, lo, hi in checks:
        if not (lo <= value <= hi):
            raise DataError(f"{name}={value} outside [{lo:g}, {hi:g}]")
    if r.mhr < r.ahr:
        raise DataError(f"mhr={r.mhr} below ahr={r.ahr}")
    if not (0.0 < r.calories <= CALORIE_MAX):
        raise DataError(f"calories={r.calories} outside (0, {CALORIE_MAX:g}]")


def derive_in_exercise(record: SessionRecord) -> tuple[float, float, float]:
    """Impulse (total beats = minutes x AHR), velocity (m/s) and power (V**2)."""
    impulse = record.duration_s / 60.0 * record.ahr
    velocity = record.distance_m / record.duration_s
    return impulse, velocity, velocity * velocity


class ModelId(enum.Enum):
    IN_EXERCISE_FULL = "in_full"
    POST_FULL = "post_full"
    POST_SHORT = "post_short"


MODEL_FEATURES = {
    ModelId.IN_EXERCISE_FULL: ("D", "T", "AHR", "MHR", "I", "V", "P"),
    ModelId.POST_FULL: ("AVNN", "SDNN", "RMSSD", "NN50", "pNN50", "HRV", "RAHR", "RMHR"),
    ModelId.POST_SHORT: ("AVNN", "SDNN", "RMSSD", "HRV"),
}

ACTIVITY_COLUMNS = tuple(f"activity_{a.value}" for a in ACTIVITIES)


@dataclass(frozen=True)
class ModelSpec:
    model_id: ModelId
    include_activity: bool = True

    @property
    def columns(self) -> tuple[str, ...]:
        numeric = MODEL_FEATURES[self.model_id]
        return (ACTIVITY_COLUMNS + numeric) if self.include_activity else numeric

    @property
    def label(self) -> str:
        return f"{self.model_id.value}{'+A' if self.include_activity else '-A'}"

    @classmethod
    def parse(cls, text: str) -> "ModelSpec":
        """Parse ``post_full``, ``post_full+A`` or ``post_full-A`` (default +A)."""
        text = text.strip()
        include = True
        if text.endswith("+A"):
            text = text[:-2]
        elif text.endswith("-A"):
            text, include = text[:-2], False
        try:
            return cls(ModelId(text), include)
        except ValueError:
            valid = ", ".join(m.value for m in ModelId)
            raise DataError(f"unknown model {text!r}; expected one of {valid}") from None

    @classmethod
    def from_columns(cls, columns: Sequence[str]) -> "ModelSpec":
        for model_id in ModelId:
            for include in (True, False):
                spec = cls(model_id, include)
                if tuple(columns) == spec.columns:
                    return spec
        raise DataError(f"columns {list(columns)} match no model specification")


def _feature_value(record: SessionRecord, name: str) -> float:
    if name in ("I", "V", "P"):
        return derive_in_exercise(record)["IVP".index(name)]
    post = record.post
    return {
        "D": record.distance_m,
        "T": record.duration_s,
        "AHR": record.ahr,
        "MHR": record.mhr,
        "AVNN": post.avnn,
        "SDNN": post.sdnn,
        "RMSSD": post.rmssd,
        "NN50": post.nn50,
        "pNN50": post.pnn50,
        "HRV": post.hrv_index,
        "RAHR": post.rahr,
        "RMHR": post.rmhr,
    }[name]


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """Numeric design matrix with named columns and optional integer labels."""

    X: np.ndarray
    y: np.ndarray | None
    columns: tuple[str, ...]

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        if X.ndim != 2:
            raise DataError("feature matrix must be two-dimensional")
        if X.shape[1] != len(self.columns):
            raise DataError(f"{X.shape[1]} columns but {len(self.columns)} names")
        if len(set(self.columns)) != len(self.columns):
            raise DataError("column names must be unique")
        if not np.all(np.isfinite(X)):
            raise DataError("feature matrix contains missing or non-finite values")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "columns", tuple(self.columns))
        if self.y is not None:
            y = np.asarray(self.y, dtype=np.int64)
            if y.shape != (X.shape[0],):
                raise DataError(f"{X.shape[0]} rows but {y.size} labels")
            object.__setattr__(self, "y", y)

    @classmethod
    def from_arrays(cls, X, y=None, columns: Sequence[str] | None = None) -> "FeatureMatrix":
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if columns is None:
            columns = tuple(f"x{i}" for i in range(X.shape[1]))
        return cls(X, y, tuple(columns))

    def __len__(self) -> int:
        return self.X.shape[0]

    def take(self, idx) -> "FeatureMatrix":
        idx = np.asarray(idx, dtype=np.int64)
        return FeatureMatrix(self.X[idx], None if self.y is None else self.y[idx], self.columns)

    def with_X(self, X: np.ndarray) -> "FeatureMatrix":
        return FeatureMatrix(X, self.y, self.columns)


def encode(records: Sequence[SessionRecord], spec: ModelSpec) -> FeatureMatrix:
    if not records:
        raise DataError("cannot encode an empty record list")
    numeric = MODEL_FEATURES[spec.model_id]
    rows = []
    for r in records:
        row = [_feature_value(r, name) for name in numeric]
        if spec.include_activity:
            row = [1.0 if r.activity is a else 0.0 for a in ACTIVITIES] + row
        rows.append(row)
    labels = [int(r.load_class) for r in records]
    return FeatureMatrix(np.array(rows, dtype=np.float64), np.array(labels), spec.columns)


@dataclass(frozen=True)
class Scaler:
    """Per-column z-score parameters; one-hot and zero-variance columns pass through."""

    columns: tuple[str, ...]
    mean: tuple[float, ...]
    std: tuple[float, ...]

    def transform(self, m: FeatureMatrix) -> FeatureMatrix:
        if m.columns != self.columns:
            raise DataError(f"scaler fitted on {list(self.columns)}, got {list(m.columns)}")
        return m.with_X((m.X - np.array(self.mean)) / np.array(self.std))

    def to_dict(self) -> dict:
        return {c: {"mean": mu, "std": sd} for c, mu, sd in zip(self.columns, self.mean, self.std)}

    @classmethod
    def from_dict(cls, doc: dict) -> "Scaler":
        try:
            cols = tuple(doc)
            return cls(cols, tuple(float(doc[c]["mean"]) for c in cols),
                       tuple(float(doc[c]["std"]) for c in cols))
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"malformed scaler document: {exc}") from None

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Scaler":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def fit_scaler(train: FeatureMatrix) -> Scaler:
    if len(train) == 0:
        raise DataError("cannot fit a scaler on an empty matrix")
    mean = train.X.mean(axis=0)
    std = train.X.std(axis=0)
    for j, name in enumerate(train.columns):
        if name.startswith("activity_") or std[j] == 0.0:
            mean[j], std[j] = 0.0, 1.0
    return Scaler(train.columns, tuple(float(v) for v in mean), tuple(float(v) for v in std))


def standardize(
    train: FeatureMatrix, others: Sequence[FeatureMatrix] = ()
) -> tuple[list[FeatureMatrix], Scaler]:
    """Fit z-scoring on ``train`` and apply it to ``train`` and every matrix in ``others``."""
    scaler = fit_scaler(train)
    return [scaler.transform(m) for m in (train, *others)], scaler


def stratified_split(
    matrix: FeatureMatrix, test_fraction: float, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Return sorted (train_idx, test_idx) with per-class proportional test shares."""
    if not 0.0 < test_fraction < 1.0:
        raise DataError(f"test_fraction must be in (0, 1), got {test_fraction}")
    if matrix.y is None:
        raise StratificationError("stratified split needs labels")
    rng = np.random.default_rng(seed)
    test: list[np.ndarray] = []
    train: list[np.ndarray] = []
    for c in np.unique(matrix.y):
        members = np.flatnonzero(matrix.y == c)
        if members.size < 2:
            raise StratificationError(f"class {c} has {members.size} member(s); need at least 2")
        members = rng.permutation(members)
        n_test = int(round(test_fraction * members.size))
        n_test = min(max(n_test, 1), members.size - 1)
        test.append(members[:n_test])
        train.append(members[n_test:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


def stratified_folds(y: np.ndarray, k: int, seed: int) -> list[np.ndarray]:
    """Partition row indices into ``k`` folds, dealing each shuffled class round-robin.

    The dealing position carries over between classes so fold sizes differ by at most one.
    """
    if k < 2:
        raise DataError(f"k must be at least 2, got {k}")
    y = np.asarray(y)
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    pos = 0
    for c in np.unique(y):
        members = np.flatnonzero(y == c)
        if members.size < k:
            raise StratificationError(f"class {c} has {members.size} member(s); need at least k={k}")
        for i in rng.permutation(members):
            folds[pos % k].append(int(i))
            pos += 1
    return [np.sort(np.array(f, dtype=np.int64)) for f in folds]


SESSION_COLUMNS = (
    "activity", "distance_m", "duration_s", "ahr", "mhr", "calories",
    "avnn", "sdnn", "rmssd", "sdsd", "nn50", "pnn50", "hrv_index", "rahr", "rmhr",
)
_POST_FIELDS = tuple(f.name for f in fields(HRVFeatures))


def save_sessions(records: Iterable[SessionRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SESSION_COLUMNS)
        for r in records:
            post = r.post
            w.writerow(
                [r.activity.value, repr(float(r.distance_m)), repr(float(r.duration_s)),
                 repr(float(r.ahr)), repr(float(r.mhr)), repr(float(r.calories))]
                + [str(int(post.nn50)) if name == "nn50" else repr(float(getattr(post, name)))
                   for name in _POST_FIELDS]
            )


def _parse_row(row: dict, lineno: int) -> SessionRecord:
    try:
        values = {}
        for name in SESSION_COLUMNS[1:]:
            text = row[name]
            if text is None or text.strip() == "":
                raise DataError(f"missing value for {name!r}")
            values[name] = float(text)
            if not math.isfinite(values[name]):
                raise DataError(f"non-finite value for {name!r}")
        nn50 = values["nn50"]
        if nn50 != int(nn50) or nn50 < 0:
            raise DataError(f"nn50 must be a non-negative integer, got {row['nn50']!r}")
        post = HRVFeatures(**{n: (int(nn50) if n == "nn50" else values[n]) for n in _POST_FIELDS})
        return SessionRecord(
            activity=ActivityType.parse(row["activity"] or ""),
            distance_m=values["distance_m"],
            duration_s=values["duration_s"],
            ahr=values["ahr"],
            mhr=values["mhr"],
            calories=values["calories"],
            post=post,
        )
    except DataError as exc:
        raise DataError(f"line {lineno}: {exc}") from None
    except ValueError as exc:
        raise DataError(f"line {lineno}: {exc}") from None


def load_sessions(path: str | Path) -> list[SessionRecord]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in SESSION_COLUMNS if c not in header]
        if missing:
            raise DataError(f"{path}: missing column(s): {', '.join(missing)}")
        # line 1 is the header
        return [_parse_row(row, lineno) for lineno, row in enumerate(reader, start=2)]
