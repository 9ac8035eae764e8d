"""Regional daily time series: CSV parsing, source merging, imputation, validation.

A SeriesFrame holds one region's raw or cleaned daily observations. Ingestion
is CSV-only; alternate sources are just extra CSVs merged by priority.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from datetime import date, timedelta
from typing import Optional, Sequence

from .errors import (
    AllMissingColumn,
    BadDate,
    MalformedCsv,
    NonNumericCell,
    RegionMismatch,
)

# Canonical CSV schema, header names are bit-exact.
CSV_COLUMNS = [
    "new_cases",
    "tests",
    "temperature_c",
    "wind_speed_ms",
    "humidity_pct",
    "mobility_index",
    "policy_stay_at_home",
    "policy_school_closing",
    "policy_workplace_closing",
    "policy_gatherings",
    "small_business_revenue_delta",
]

TARGETS = ("new_cases", "small_business_revenue_delta")
POLICY_PREFIX = "policy_"


@dataclass(frozen=True)
class ColumnMeta:
    kind: str = "feature"  # "target" | "feature"
    controllable: bool = False
    bounds: Optional[tuple[Optional[float], Optional[float]]] = None


DEFAULT_META: dict[str, ColumnMeta] = {
    "new_cases": ColumnMeta(kind="target", bounds=(0.0, None)),
    "tests": ColumnMeta(controllable=True, bounds=(0.0, None)),
    "temperature_c": ColumnMeta(),
    "wind_speed_ms": ColumnMeta(bounds=(0.0, None)),
    "humidity_pct": ColumnMeta(bounds=(0.0, 100.0)),
    "mobility_index": ColumnMeta(controllable=True, bounds=(0.0, None)),
    "policy_stay_at_home": ColumnMeta(controllable=True, bounds=(0.0, 3.0)),
    "policy_school_closing": ColumnMeta(controllable=True, bounds=(0.0, 3.0)),
    "policy_workplace_closing": ColumnMeta(controllable=True, bounds=(0.0, 3.0)),
    "policy_gatherings": ColumnMeta(controllable=True, bounds=(0.0, 4.0)),
    "small_business_revenue_delta": ColumnMeta(kind="target", bounds=(-1.0, None)),
}


def is_policy_column(name: str) -> bool:
    return name.startswith(POLICY_PREFIX)


def _nonnegative(meta: ColumnMeta) -> bool:
    return meta.bounds is not None and meta.bounds[0] == 0.0


@dataclass
class SeriesFrame:
    """Date-indexed daily observations for one region; None marks missing."""

    region_id: str
    dates: list[date]
    columns: dict[str, list[Optional[float]]]
    column_meta: dict[str, ColumnMeta] = field(default_factory=dict)

    def __post_init__(self):
        for name, values in self.columns.items():
            if len(values) != len(self.dates):
                raise ValueError(f"column {name!r} length != number of dates")
            self.column_meta.setdefault(name, DEFAULT_META.get(name, ColumnMeta()))

    def __len__(self) -> int:
        return len(self.dates)

    def meta(self, name: str) -> ColumnMeta:
        return self.column_meta[name]

    def truncate_through(self, last: date) -> "SeriesFrame":
        """Sub-frame containing only dates <= last."""
        n = sum(1 for d in self.dates if d <= last)
        return SeriesFrame(
            region_id=self.region_id,
            dates=self.dates[:n],
            columns={c: v[:n] for c, v in self.columns.items()},
            column_meta=dict(self.column_meta),
        )

    def copy(self) -> "SeriesFrame":
        return SeriesFrame(
            region_id=self.region_id,
            dates=list(self.dates),
            columns={c: list(v) for c, v in self.columns.items()},
            column_meta=dict(self.column_meta),
        )


@dataclass(frozen=True)
class ImputationPolicy:
    source_priority: tuple[str, ...] = ()
    max_interp_gap: int = 7
    negative_handling: str = "treat_as_missing"

    def __post_init__(self):
        if self.max_interp_gap < 1:
            raise ValueError("max_interp_gap must be >= 1")
        if self.negative_handling != "treat_as_missing":
            raise ValueError("unsupported negative_handling")


def parse_region_csv(raw_bytes: bytes, region_id: str) -> SeriesFrame:
    """Parse a daily CSV into a SeriesFrame, sorted with calendar gaps filled.

    Duplicate dates are rejected; empty cells become missing; gap days are
    inserted as all-missing rows so the 1-day-step invariant holds.
    """
    try:
        text = raw_bytes.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedCsv(f"not valid UTF-8: {exc}") from exc

    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedCsv("empty CSV") from None
    header = [h.strip() for h in header]
    if "date" not in header:
        raise MalformedCsv("missing mandatory 'date' column")
    if len(set(header)) != len(header):
        raise MalformedCsv("duplicate column names in header")
    date_idx = header.index("date")
    value_cols = [h for h in header if h != "date"]

    rows: dict[date, list[Optional[float]]] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row or all(cell.strip() == "" for cell in row):
            continue
        if len(row) != len(header):
            raise MalformedCsv(f"row {lineno}: expected {len(header)} cells, got {len(row)}")
        try:
            d = date.fromisoformat(row[date_idx].strip())
        except ValueError as exc:
            raise BadDate(f"row {lineno}: bad date {row[date_idx]!r}") from exc
        if d in rows:
            raise BadDate(f"duplicate date {d.isoformat()}")
        values: list[Optional[float]] = []
        for i, cell in enumerate(row):
            if i == date_idx:
                continue
            cell = cell.strip()
            if cell == "":
                values.append(None)
            else:
                try:
                    values.append(float(cell))
                except ValueError as exc:
                    raise NonNumericCell(
                        f"row {lineno}, column {header[i]!r}: {cell!r}"
                    ) from exc
        rows[d] = values

    if not rows:
        raise MalformedCsv("CSV contains no data rows")

    ordered = sorted(rows)
    full_dates: list[date] = []
    d = ordered[0]
    while d <= ordered[-1]:
        full_dates.append(d)
        d += timedelta(days=1)

    columns: dict[str, list[Optional[float]]] = {c: [] for c in value_cols}
    for d in full_dates:
        row_values = rows.get(d)
        for j, c in enumerate(value_cols):
            columns[c].append(row_values[j] if row_values is not None else None)

    return SeriesFrame(region_id=region_id, dates=full_dates, columns=columns)


def merge_sources(
    primary: SeriesFrame,
    alternates: Sequence[SeriesFrame],
    policy: ImputationPolicy,
    source_names: Optional[Sequence[str]] = None,
) -> SeriesFrame:
    """Fill primary's missing cells from alternates, first non-missing wins.

    Alternates are consulted in list order; when source_names is given and
    policy.source_priority is non-empty, named sources listed there are
    consulted first, in priority order. Date ranges are intersected when
    they differ. column_meta comes from the primary.
    """
    for alt in alternates:
        if alt.region_id != primary.region_id:
            raise RegionMismatch(
                f"alternate region {alt.region_id!r} != primary {primary.region_id!r}"
            )

    order = list(range(len(alternates)))
    if source_names is not None and policy.source_priority:
        if len(source_names) != len(alternates):
            raise ValueError("source_names must parallel alternates")
        rank = {name: i for i, name in enumerate(policy.source_priority)}
        order.sort(key=lambda i: (rank.get(source_names[i], len(rank)), i))
    ordered_alts = [alternates[i] for i in order]

    dates = list(primary.dates)
    for alt in ordered_alts:
        alt_set = set(alt.dates)
        dates = [d for d in dates if d in alt_set]
    if not ordered_alts:
        dates = list(primary.dates)

    idx_primary = {d: i for i, d in enumerate(primary.dates)}
    idx_alts = [{d: i for i, d in enumerate(a.dates)} for a in ordered_alts]

    columns: dict[str, list[Optional[float]]] = {}
    for name, primary_vals in primary.columns.items():
        merged: list[Optional[float]] = []
        for d in dates:
            v = primary_vals[idx_primary[d]]
            if v is None:
                for alt, idx in zip(ordered_alts, idx_alts):
                    alt_col = alt.columns.get(name)
                    if alt_col is None:
                        continue
                    cand = alt_col[idx[d]]
                    if cand is not None:
                        v = cand
                        break
            merged.append(v)
        columns[name] = merged

    return SeriesFrame(
        region_id=primary.region_id,
        dates=dates,
        columns=columns,
        column_meta=dict(primary.column_meta),
    )


def _missing_runs(values: list[Optional[float]]) -> list[tuple[int, int]]:
    """Maximal runs of None as (start, stop) half-open index pairs."""
    runs = []
    i = 0
    n = len(values)
    while i < n:
        if values[i] is None:
            j = i
            while j < n and values[j] is None:
                j += 1
            runs.append((i, j))
            i = j
        else:
            i += 1
    return runs


def _fill_column(
    values: list[Optional[float]], max_interp_gap: int, step_hold: bool
) -> list[float]:
    n = len(values)
    out = list(values)
    for start, stop in _missing_runs(values):
        left = start - 1  # index of nearest non-missing on the left, or -1
        right = stop if stop < n else -1
        if step_hold:
            # previous level carries forward; a leading run takes the first level
            fill_from = left if left >= 0 else right
            for k in range(start, stop):
                out[k] = values[fill_from]
            continue
        if left < 0:  # head run: backward fill
            for k in range(start, stop):
                out[k] = values[right]
        elif right < 0:  # tail run: forward fill
            for k in range(start, stop):
                out[k] = values[left]
        elif stop - start <= max_interp_gap:  # short interior run: interpolate
            lv, rv = values[left], values[right]
            span = right - left
            for k in range(start, stop):
                frac = (k - left) / span
                out[k] = lv + (rv - lv) * frac
        else:  # long interior run: nearest value, ties to the earlier side
            for k in range(start, stop):
                out[k] = values[left] if (k - left) <= (right - k) else values[right]
    return out  # type: ignore[return-value]


def impute(frame: SeriesFrame, policy: ImputationPolicy = ImputationPolicy()) -> SeriesFrame:
    """Resolve all missing values; negatives in nonnegative columns first
    become missing, then short gaps interpolate, long/edge gaps carry the
    nearest value, and policy columns hold their previous level."""
    columns: dict[str, list[Optional[float]]] = {}
    for name, values in frame.columns.items():
        meta = frame.meta(name)
        vals = list(values)
        if _nonnegative(meta):
            vals = [None if (v is not None and v < 0) else v for v in vals]
        if all(v is None for v in vals):
            raise AllMissingColumn(name)
        columns[name] = _fill_column(
            vals, policy.max_interp_gap, step_hold=is_policy_column(name)
        )
    return SeriesFrame(
        region_id=frame.region_id,
        dates=list(frame.dates),
        columns=columns,
        column_meta=dict(frame.column_meta),
    )


@dataclass
class ColumnReport:
    missing: int = 0
    negative: int = 0
    bound_violations: int = 0


@dataclass
class ValidationReport:
    ok: bool
    columns: dict[str, ColumnReport]
    date_gaps: int

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "columns": {
                name: {
                    "missing": r.missing,
                    "negative": r.negative,
                    "bound_violations": r.bound_violations,
                }
                for name, r in self.columns.items()
            },
            "date_gaps": self.date_gaps,
        }


def validate(frame: SeriesFrame) -> ValidationReport:
    """Report data-quality counts; ok iff the post-imputation invariants hold."""
    gaps = 0
    for prev, cur in zip(frame.dates, frame.dates[1:]):
        if (cur - prev).days > 1:
            gaps += 1
    dates_ok = gaps == 0 and all(
        (cur - prev).days == 1 for prev, cur in zip(frame.dates, frame.dates[1:])
    )

    columns: dict[str, ColumnReport] = {}
    ok = dates_ok
    for name, values in frame.columns.items():
        meta = frame.meta(name)
        rep = ColumnReport()
        lo, hi = meta.bounds if meta.bounds is not None else (None, None)
        for v in values:
            if v is None:
                rep.missing += 1
                continue
            if _nonnegative(meta) and v < 0:
                rep.negative += 1
            if (lo is not None and v < lo) or (hi is not None and v > hi):
                rep.bound_violations += 1
            elif is_policy_column(name) and v != int(v):
                rep.bound_violations += 1
        columns[name] = rep
        if rep.missing:
            ok = False
        if name == "new_cases" and rep.negative:
            ok = False
        if is_policy_column(name) and rep.bound_violations:
            ok = False
    return ValidationReport(ok=ok, columns=columns, date_gaps=gaps)


def frame_to_csv(frame: SeriesFrame) -> str:
    """Serialize back to the canonical CSV layout (known columns first)."""
    known = [c for c in CSV_COLUMNS if c in frame.columns]
    extra = [c for c in frame.columns if c not in CSV_COLUMNS]
    cols = known + extra
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["date"] + cols)
    for i, d in enumerate(frame.dates):
        row = [d.isoformat()]
        for c in cols:
            v = frame.columns[c][i]
            row.append("" if v is None else repr(v))
        writer.writerow(row)
    return out.getvalue()
