"""Lag expansion of a clean SeriesFrame into a supervised design matrix."""
from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date
from typing import Optional

import numpy as np

from .errors import InvalidLagSpec, TooShortSeries, UnknownColumn
from .frame import SeriesFrame, is_policy_column

DOW_COLUMNS = [f"dow_{i}" for i in range(7)]
CONTROLLABLE_BASES = ("tests", "mobility_index")  # plus every policy_* column


@dataclass(frozen=True)
class LagSpec:
    """Per-column day-lags plus current-day inclusion flags."""

    lags: dict[str, tuple[int, ...]] = field(default_factory=dict)
    include_current: dict[str, bool] = field(default_factory=dict)

    def __post_init__(self):
        for col, ks in self.lags.items():
            if any(k < 1 for k in ks):
                raise InvalidLagSpec(f"lags for {col!r} must be >= 1")
            if len(set(ks)) != len(ks):
                raise InvalidLagSpec(f"duplicate lags for {col!r}")

    @property
    def max_lag(self) -> int:
        return max((k for ks in self.lags.values() for k in ks), default=0)

    def to_json(self) -> dict:
        return {
            "lags": {c: list(ks) for c, ks in self.lags.items()},
            "include_current": {c: bool(v) for c, v in self.include_current.items() if v},
        }

    @staticmethod
    def from_json(obj: dict) -> "LagSpec":
        return LagSpec(
            lags={c: tuple(int(k) for k in ks) for c, ks in obj.get("lags", {}).items()},
            include_current={c: bool(v) for c, v in obj.get("include_current", {}).items()},
        )


def default_lag_spec() -> LagSpec:
    """Feature set shared by the cases and revenue heads: reporting-cycle and
    incubation-scale lags of cases, weekly lags of the controllables, and
    current-day values for weather and policy."""
    return LagSpec(
        lags={
            "new_cases": (1, 2, 3, 7, 14),
            "tests": (1, 7),
            "mobility_index": (1, 7),
            "policy_stay_at_home": (1, 7),
            "policy_school_closing": (1, 7),
            "policy_workplace_closing": (1, 7),
            "policy_gatherings": (1, 7),
            "temperature_c": (1,),
            "wind_speed_ms": (1,),
            "humidity_pct": (1,),
        },
        include_current={
            "policy_stay_at_home": True,
            "policy_school_closing": True,
            "policy_workplace_closing": True,
            "policy_gatherings": True,
            "temperature_c": True,
            "wind_speed_ms": True,
            "humidity_pct": True,
        },
    )


def day_of_week(d: date) -> int:
    """Monday=0 .. Sunday=6."""
    return d.weekday()


def is_controllable_feature(name: str) -> bool:
    """Columns a policymaker can steer: policy levels, mobility, testing,
    at every lag and the current day; weather and calendar are not."""
    base = name
    if "_lag" in name:
        stem, _, lagpart = name.rpartition("_lag")
        if lagpart.isdigit():
            base = stem
    if base in DOW_COLUMNS:
        return False
    return is_policy_column(base) or base in CONTROLLABLE_BASES


def parse_feature_name(name: str) -> tuple[str, Optional[int]]:
    """Split a matrix column name into (base column, lag); lag None means
    current-day, and dow_* names return themselves."""
    if name in DOW_COLUMNS:
        return name, None
    stem, _, lagpart = name.rpartition("_lag")
    if stem and lagpart.isdigit():
        return stem, int(lagpart)
    return name, None


@dataclass
class FeatureMatrix:
    """Dense design matrix with named, controllability-tagged columns."""

    rows: np.ndarray  # (n, d) float64
    column_names: list[str]
    controllable: list[bool]
    row_dates: list[date]
    target: np.ndarray  # (n,)
    target_name: str

    def __post_init__(self):
        n, d = self.rows.shape
        if len(self.column_names) != d or len(self.controllable) != d:
            raise ValueError("column metadata width mismatch")
        if len(self.row_dates) != n or len(self.target) != n:
            raise ValueError("row metadata length mismatch")
        if len(set(self.column_names)) != d:
            raise ValueError("duplicate column names")
        if not np.all(np.isfinite(self.rows)) or not np.all(np.isfinite(self.target)):
            raise ValueError("non-finite values in matrix")

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def width(self) -> int:
        return self.rows.shape[1]

    def take(self, start: int, stop: int) -> "FeatureMatrix":
        return FeatureMatrix(
            rows=self.rows[start:stop],
            column_names=list(self.column_names),
            controllable=list(self.controllable),
            row_dates=self.row_dates[start:stop],
            target=self.target[start:stop],
            target_name=self.target_name,
        )


def build_matrix(frame: SeriesFrame, spec: LagSpec, target_name: str) -> FeatureMatrix:
    """Lag-expand an imputed frame: row t holds col[t-k] for each (col, k),
    current-day values where requested, and 7 day-of-week one-hots; the first
    max_lag rows are dropped."""
    if target_name not in frame.columns:
        raise UnknownColumn(target_name)
    for col in list(spec.lags) + [c for c, v in spec.include_current.items() if v]:
        if col not in frame.columns:
            raise UnknownColumn(col)
        if spec.include_current.get(col) and frame.meta(col).kind == "target":
            raise InvalidLagSpec(f"target column {col!r} cannot be a current-day feature")

    max_lag = spec.max_lag
    n_total = len(frame.dates)
    if n_total <= max_lag:
        raise TooShortSeries(f"need more than {max_lag} days, have {n_total}")
    n = n_total - max_lag

    names: list[str] = []
    series: list[np.ndarray] = []
    as_array = {c: np.asarray(v, dtype=float) for c, v in frame.columns.items()}
    for col in frame.columns:
        for k in sorted(spec.lags.get(col, ())):
            names.append(f"{col}_lag{k}")
            series.append(as_array[col][max_lag - k : n_total - k])
        if spec.include_current.get(col):
            names.append(col)
            series.append(as_array[col][max_lag:])
    dows = np.array([day_of_week(d) for d in frame.dates[max_lag:]])
    for i in range(7):
        names.append(f"dow_{i}")
        series.append((dows == i).astype(float))

    rows = np.column_stack(series) if series else np.empty((n, 0))
    return FeatureMatrix(
        rows=rows,
        column_names=names,
        controllable=[is_controllable_feature(c) for c in names],
        row_dates=frame.dates[max_lag:],
        target=as_array[target_name][max_lag:].copy(),
        target_name=target_name,
    )


def controllable_columns(matrix: FeatureMatrix) -> list[str]:
    """Names of the human-steerable columns of a built matrix."""
    return [c for c, flag in zip(matrix.column_names, matrix.controllable) if flag]
