"""Time-domain heart-rate-variability features from a short RR-interval series.

All functions take a sequence of beat-to-beat intervals in milliseconds and
are pure. Invalid input raises :class:`InvalidRRError`.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

RR_MIN_MS = 0.0
RR_MAX_MS = 3000.0
DEFAULT_BIN_WIDTH_MS = 1000.0 / 128.0  # 7.8125 ms
NN50_THRESHOLD_MS = 50.0

FEATURE_NAMES = ("avnn", "sdnn", "rmssd", "sdsd", "nn50", "pnn50", "hrv_index", "rahr", "rmhr")


class InvalidRRError(ValueError):
    """Raised for RR series that violate length or physiological bounds."""


@dataclass(frozen=True)
class RRSeries:
    intervals: tuple[float, ...]
    recording_window: float = 60.0

    def __post_init__(self):
        object.__setattr__(self, "intervals", tuple(float(x) for x in self.intervals))
        validate_intervals(self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.intervals, dtype=np.float64)


@dataclass(frozen=True)
class HRVFeatures:
    avnn: float
    sdnn: float
    rmssd: float
    sdsd: float
    nn50: int
    pnn50: float
    hrv_index: float
    rahr: float
    rmhr: float

    def as_tuple(self) -> tuple:
        return tuple(getattr(self, name) for name in FEATURE_NAMES)

    def as_dict(self) -> dict:
        return asdict(self)


def validate_intervals(rr, min_length: int = 2) -> np.ndarray:
    """Return ``rr`` as a float array after checking length and bounds."""
    if isinstance(rr, RRSeries):
        rr = rr.intervals
    arr = np.asarray(rr, dtype=np.float64)
    if arr.ndim != 1:
        raise InvalidRRError("RR series must be one-dimensional")
    if arr.size < min_length:
        raise InvalidRRError(f"RR series needs at least {min_length} intervals, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise InvalidRRError("RR series contains non-finite values")
    bad = np.flatnonzero((arr <= RR_MIN_MS) | (arr >= RR_MAX_MS))
    if bad.size:
        i = int(bad[0])
        raise InvalidRRError(
            f"interval #{i} = {arr[i]} ms outside ({RR_MIN_MS:g}, {RR_MAX_MS:g}) ms"
        )
    return arr


def compute_avnn(rr) -> float:
    return float(np.mean(validate_intervals(rr)))


def compute_sdnn(rr) -> float:
    """Population standard deviation (divide by N) of the intervals."""
    return float(np.std(validate_intervals(rr)))


def compute_rmssd(rr) -> float:
    d = np.diff(validate_intervals(rr))
    return float(math.sqrt(np.mean(d * d)))


def compute_sdsd(rr) -> float:
    """Population standard deviation of the N-1 successive differences."""
    return float(np.std(np.diff(validate_intervals(rr, min_length=3))))


def compute_nn50(rr, threshold: float = NN50_THRESHOLD_MS) -> int:
    # strict inequality: a difference of exactly 50 ms does not count
    return int(np.count_nonzero(np.abs(np.diff(validate_intervals(rr))) > threshold))


def compute_pnn50(rr, denominator: str = "intervals") -> float:
    """NN50 as a fraction.

    ``denominator="intervals"`` divides by N (the number of intervals);
    ``"pairs"`` divides by N-1, the Task Force convention.
    """
    arr = validate_intervals(rr)
    if denominator == "intervals":
        n = arr.size
    elif denominator == "pairs":
        n = arr.size - 1
    else:
        raise ValueError(f"unknown pNN50 denominator {denominator!r}")
    return compute_nn50(arr) / n


def compute_hrv_index(rr, bin_width: float = DEFAULT_BIN_WIDTH_MS) -> float:
    """HRV triangular index: N divided by the count in the modal histogram bin.

    Bins are anchored at 0 ms; an interval ``x`` falls in bin ``floor(x / bin_width)``.
    """
    if not bin_width > 0:
        raise InvalidRRError(f"bin_width must be positive, got {bin_width}")
    arr = validate_intervals(rr)
    bins = np.floor(arr / bin_width).astype(np.int64)
    _, counts = np.unique(bins, return_counts=True)
    return arr.size / int(counts.max())


def instantaneous_hr(rr) -> np.ndarray:
    """Beat-wise heart rate in beats/min, 60000 / interval."""
    return 60000.0 / validate_intervals(rr)


def compute_rahr(rr) -> float:
    return float(np.mean(instantaneous_hr(rr)))


def compute_rmhr(rr) -> float:
    return 60000.0 / float(np.min(validate_intervals(rr)))


def extract_all(
    rr,
    bin_width: float = DEFAULT_BIN_WIDTH_MS,
    pnn50_denominator: str = "intervals",
) -> HRVFeatures:
    arr = validate_intervals(rr)
    return HRVFeatures(
        avnn=compute_avnn(arr),
        sdnn=compute_sdnn(arr),
        rmssd=compute_rmssd(arr),
        sdsd=compute_sdsd(arr),
        nn50=compute_nn50(arr),
        pnn50=compute_pnn50(arr, pnn50_denominator),
        hrv_index=compute_hrv_index(arr, bin_width),
        rahr=compute_rahr(arr),
        rmhr=compute_rmhr(arr),
    )


def read_rr_file(path: str | Path) -> RRSeries:
    """Read one interval (ms) per line, with an optional ``rr_ms`` header line.

    Errors name the file and 1-based line number.
    """
    path = Path(path)
    values: list[float] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if lineno == 1 and line.lower() == "rr_ms":
                continue
            try:
                x = float(line)
            except ValueError:
                raise InvalidRRError(f"{path}:{lineno}: not a number: {line!r}") from None
            if not (RR_MIN_MS < x < RR_MAX_MS) or not math.isfinite(x):
                raise InvalidRRError(
                    f"{path}:{lineno}: interval {x:g} ms outside ({RR_MIN_MS:g}, {RR_MAX_MS:g})"
                )
            values.append(x)
    try:
        return RRSeries(tuple(values), recording_window=sum(values) / 1000.0)
    except InvalidRRError as exc:
        raise InvalidRRError(f"{path}: {exc}") from None


def write_rr_file(rr: Sequence[float] | RRSeries, path: str | Path) -> None:
    if isinstance(rr, RRSeries):
        rr = rr.intervals
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("rr_ms\n")
        for x in rr:
            fh.write(f"{float(x)!r}\n")
