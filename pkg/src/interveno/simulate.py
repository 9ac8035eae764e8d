"""Recursive scenario forecasting, Rt estimation, vaccine attenuation, and
best-case scenario search over policy and vaccine grids."""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from datetime import date, timedelta
from typing import Optional, Sequence

import numpy as np

from .ensemble import ModelArtifact, predict
from .errors import (
    EmptySearchSpace,
    InsufficientHistory,
    InvalidScenario,
    SchemaMismatch,
    TooShortSeries,
    ZeroDenominator,
)
from .features import DOW_COLUMNS, parse_feature_name
from .frame import SeriesFrame, is_policy_column


@dataclass(frozen=True)
class VaccineSpec:
    """Per-day coverage fractions with a fixed efficacy; protect rate = c_t*e."""

    coverage_path: tuple[float, ...]
    efficacy: float
    generation_interval_days: float = 5.0

    def __post_init__(self):
        if not self.coverage_path:
            raise InvalidScenario("coverage_path must be nonempty")
        if any(not 0.0 <= c <= 1.0 for c in self.coverage_path):
            raise InvalidScenario("coverage values must lie in [0, 1]")
        if any(b < a for a, b in zip(self.coverage_path, self.coverage_path[1:])):
            raise InvalidScenario("coverage_path must be nondecreasing")
        if not 0.0 <= self.efficacy <= 1.0:
            raise InvalidScenario("efficacy must lie in [0, 1]")
        if self.generation_interval_days <= 0:
            raise InvalidScenario("generation_interval_days must be positive")

    def protect_rate_path(self) -> list[float]:
        return [c * self.efficacy for c in self.coverage_path]

    def to_json(self) -> dict:
        return {
            "coverage_path": list(self.coverage_path),
            "efficacy": self.efficacy,
            "generation_interval_days": self.generation_interval_days,
        }

    @staticmethod
    def from_json(obj: dict) -> "VaccineSpec":
        return VaccineSpec(
            coverage_path=tuple(float(c) for c in obj["coverage_path"]),
            efficacy=float(obj["efficacy"]),
            generation_interval_days=float(obj.get("generation_interval_days", 5.0)),
        )


def coverage_ramp(end_coverage: float, ramp_days: int, horizon_days: int) -> tuple[float, ...]:
    """Linear climb from 0 to end_coverage over ramp_days, then flat."""
    if ramp_days < 0:
        raise InvalidScenario("ramp_days must be >= 0")
    if ramp_days == 0:
        return (float(end_coverage),) * horizon_days
    return tuple(
        end_coverage * min(t / ramp_days, 1.0) for t in range(1, horizon_days + 1)
    )


@dataclass(frozen=True)
class ScenarioSpec:
    horizon_days: int = 35
    policy_overrides: dict[str, tuple[float, ...]] = field(default_factory=dict)
    mobility_multiplier: float = 1.0
    tests_multiplier: float = 1.0
    vaccine: Optional[VaccineSpec] = None

    def __post_init__(self):
        if self.horizon_days < 1:
            raise InvalidScenario("horizon_days must be >= 1")
        if self.mobility_multiplier <= 0 or self.tests_multiplier <= 0:
            raise InvalidScenario("multipliers must be positive")
        for name, path in self.policy_overrides.items():
            if not is_policy_column(name):
                raise InvalidScenario(f"{name!r} is not a policy column")
            if len(path) not in (1, self.horizon_days):
                raise InvalidScenario(
                    f"override path for {name!r} must have length 1 or {self.horizon_days}"
                )
            if any(lvl != int(lvl) for lvl in path):
                raise InvalidScenario(f"levels for {name!r} must be integers")
        if self.vaccine is not None and len(self.vaccine.coverage_path) != self.horizon_days:
            raise InvalidScenario("coverage_path length must equal horizon_days")

    def level_on_day(self, name: str, t: int) -> float:
        """Override value for 1-indexed horizon day t."""
        path = self.policy_overrides[name]
        return float(path[0] if len(path) == 1 else path[t - 1])

    def to_json(self) -> dict:
        return {
            "horizon_days": self.horizon_days,
            "policy_overrides": {c: list(p) for c, p in sorted(self.policy_overrides.items())},
            "mobility_multiplier": self.mobility_multiplier,
            "tests_multiplier": self.tests_multiplier,
            "vaccine": self.vaccine.to_json() if self.vaccine else None,
        }

    @staticmethod
    def from_json(obj: dict) -> "ScenarioSpec":
        vacc = obj.get("vaccine")
        return ScenarioSpec(
            horizon_days=int(obj.get("horizon_days", 35)),
            policy_overrides={
                c: tuple(float(v) for v in p)
                for c, p in obj.get("policy_overrides", {}).items()
            },
            mobility_multiplier=float(obj.get("mobility_multiplier", 1.0)),
            tests_multiplier=float(obj.get("tests_multiplier", 1.0)),
            vaccine=VaccineSpec.from_json(vacc) if vacc else None,
        )


@dataclass
class ForecastResult:
    dates: list[date]
    cases_baseline: list[float]
    cases_scenario: list[float]
    revenue_baseline: list[float]
    revenue_scenario: list[float]
    rt_path: list[float]
    protect_rate_path: list[float]

    def __post_init__(self):
        n = len(self.dates)
        vectors = (
            self.cases_baseline,
            self.cases_scenario,
            self.revenue_baseline,
            self.revenue_scenario,
            self.rt_path,
            self.protect_rate_path,
        )
        if any(len(v) != n for v in vectors):
            raise ValueError("misaligned forecast vectors")
        if any(c < 0 for c in self.cases_baseline + self.cases_scenario):
            raise ValueError("negative case prediction escaped clamping")

    def to_json(self) -> dict:
        return {
            "dates": [d.isoformat() for d in self.dates],
            "cases_baseline": list(self.cases_baseline),
            "cases_scenario": list(self.cases_scenario),
            "revenue_baseline": list(self.revenue_baseline),
            "revenue_scenario": list(self.revenue_scenario),
            "rt_path": list(self.rt_path),
            "protect_rate_path": list(self.protect_rate_path),
        }

    @staticmethod
    def from_json(obj: dict) -> "ForecastResult":
        return ForecastResult(
            dates=[date.fromisoformat(d) for d in obj["dates"]],
            cases_baseline=[float(v) for v in obj["cases_baseline"]],
            cases_scenario=[float(v) for v in obj["cases_scenario"]],
            revenue_baseline=[float(v) for v in obj["revenue_baseline"]],
            revenue_scenario=[float(v) for v in obj["revenue_scenario"]],
            rt_path=[float(v) for v in obj["rt_path"]],
            protect_rate_path=[float(v) for v in obj["protect_rate_path"]],
        )


def estimate_rt(cases: Sequence[float], g: float) -> list[float]:
    """Ratio of consecutive generation-interval case sums.

    Rt(t) = sum(cases[t-w+1..t]) / sum(cases[t-2w+1..t-w]) with w = round(g);
    one value per day t from the first full double window onward.
    """
    if g <= 0:
        raise ValueError("generation interval must be positive")
    w = max(1, int(round(g)))
    c = np.asarray(cases, dtype=float)
    n = c.shape[0]
    if n < 2 * w:
        raise InsufficientHistory(f"need at least {2 * w} days, have {n}")
    out = []
    for t in range(2 * w - 1, n):
        num = float(c[t - w + 1 : t + 1].sum())
        den = float(c[t - 2 * w + 1 : t - w + 1].sum())
        if den == 0.0:
            raise ZeroDenominator(f"no cases in the window ending day {t - w}")
        out.append(num / den)
    return out


def vaccine_adjust(cases_path: Sequence[float], vspec: VaccineSpec) -> list[float]:
    """Attenuate day t by (1 - c_s*e)^(1/g) compounded over s = 1..t, one
    full (1 - c*e) factor per generation interval under constant coverage."""
    if len(cases_path) != len(vspec.coverage_path):
        raise ValueError("cases_path and coverage_path lengths differ")
    inv_g = 1.0 / vspec.generation_interval_days
    factor = 1.0
    out = []
    for value, c in zip(cases_path, vspec.coverage_path):
        factor *= (1.0 - c * vspec.efficacy) ** inv_g
        out.append(value * factor)
    return out


@dataclass(frozen=True)
class _ParsedSchema:
    """(base, lag) per column; lag None means current-day or dow one-hot."""

    names: tuple[str, ...]
    bases: tuple[str, ...]
    lags: tuple[Optional[int], ...]


def _parse_schema(artifact: ModelArtifact, frame: SeriesFrame) -> _ParsedSchema:
    bases, lags = [], []
    for name in artifact.feature_schema.column_names:
        base, lag = parse_feature_name(name)
        if base not in frame.columns and base not in DOW_COLUMNS:
            raise SchemaMismatch(f"feature {name!r} has no source column in the frame")
        if lag is None and base == artifact.target_name:
            raise SchemaMismatch(f"current-day target feature {name!r} is not forecastable")
        bases.append(base)
        lags.append(lag)
    return _ParsedSchema(
        names=tuple(artifact.feature_schema.column_names),
        bases=tuple(bases),
        lags=tuple(lags),
    )


def _validate_scenario(spec: ScenarioSpec, frame: SeriesFrame) -> None:
    for name, path in spec.policy_overrides.items():
        if name not in frame.columns:
            raise InvalidScenario(f"unknown policy column {name!r}")
        lo, hi = frame.meta(name).bounds
        for lvl in path:
            if (lo is not None and lvl < lo) or (hi is not None and lvl > hi):
                raise InvalidScenario(f"level {lvl} out of bounds for {name!r}")


def _feature_row(
    parsed: _ParsedSchema, work: dict[str, list[float]], day: date, pos: int
) -> np.ndarray:
    """Feature vector for the day stored at 0-indexed position pos."""
    row = np.empty(len(parsed.names))
    for j, (base, lag) in enumerate(zip(parsed.bases, parsed.lags)):
        if base in DOW_COLUMNS:
            row[j] = 1.0 if f"dow_{day.weekday()}" == base else 0.0
        elif lag is None:
            row[j] = work[base][pos]
        else:
            row[j] = work[base][pos - lag]
    return row


def _run_scenario(
    artifact_cases: ModelArtifact,
    artifact_revenue: ModelArtifact,
    frame: SeriesFrame,
    spec: ScenarioSpec,
) -> tuple[list[float], list[float], list[date]]:
    """One recursion pass; returns (raw cases path, revenue path, dates)."""
    parsed_cases = _parse_schema(artifact_cases, frame)
    parsed_revenue = _parse_schema(artifact_revenue, frame)
    max_lag = max(
        (lag for p in (parsed_cases, parsed_revenue) for lag in p.lags if lag),
        default=0,
    )
    n_obs = len(frame.dates)
    if n_obs < max_lag:
        raise TooShortSeries(f"need at least {max_lag} observed days, have {n_obs}")
    _validate_scenario(spec, frame)

    work = {c: [float(v) for v in vals] for c, vals in frame.columns.items()}
    last = {c: vals[-1] for c, vals in work.items()}
    cases_name = artifact_cases.target_name

    cases_path: list[float] = []
    revenue_path: list[float] = []
    dates: list[date] = []
    for t in range(1, spec.horizon_days + 1):
        day = frame.dates[-1] + timedelta(days=t)
        pos = n_obs + t - 1
        dates.append(day)
        for col in frame.columns:
            if col == cases_name:
                continue  # appended below, after prediction
            if col in spec.policy_overrides:
                value = spec.level_on_day(col, t)
            elif col == "mobility_index":
                value = last[col] * spec.mobility_multiplier
            elif col == "tests":
                value = last[col] * spec.tests_multiplier
            else:
                value = last[col]  # weather and revenue hold at last observed
            work[col].append(value)
        x = _feature_row(parsed_cases, work, day, pos)
        pred = max(0.0, float(predict(artifact_cases, x[None, :])[0]))
        work[cases_name].append(pred)
        cases_path.append(pred)
        x = _feature_row(parsed_revenue, work, day, pos)
        # revenue never feeds back; the held value placed above stays in work
        revenue_path.append(float(predict(artifact_revenue, x[None, :])[0]))
    return cases_path, revenue_path, dates


def _rt_over_horizon(
    observed: Sequence[float], scenario_cases: Sequence[float], g: float
) -> list[float]:
    """Rt per horizon day over observed history + scenario path; windows that
    reach before the data or divide by zero report 0.0 instead of raising."""
    w = max(1, int(round(g)))
    combined = [float(v) for v in observed] + [float(v) for v in scenario_cases]
    n_obs = len(observed)
    out = []
    for t in range(n_obs, len(combined)):
        if t - 2 * w + 1 < 0:
            out.append(0.0)
            continue
        num = sum(combined[t - w + 1 : t + 1])
        den = sum(combined[t - 2 * w + 1 : t - w + 1])
        out.append(num / den if den > 0.0 else 0.0)
    return out


def forecast(
    artifact_cases: ModelArtifact,
    artifact_revenue: ModelArtifact,
    frame: SeriesFrame,
    spec: ScenarioSpec,
) -> ForecastResult:
    """Day-by-day recursion over the horizon: exogenous columns hold their
    last observed value, controllables follow the scenario, and each case
    prediction is clamped at zero and appended so later lags consume it.
    The baseline is the same recursion under an empty scenario; vaccine
    attenuation and Rt apply to the reported scenario path only."""
    identity = ScenarioSpec(horizon_days=spec.horizon_days)
    baseline_cases, baseline_revenue, dates = _run_scenario(
        artifact_cases, artifact_revenue, frame, identity
    )
    return _assemble(
        artifact_cases, artifact_revenue, frame, spec,
        baseline_cases, baseline_revenue, dates,
    )


def _assemble(
    artifact_cases: ModelArtifact,
    artifact_revenue: ModelArtifact,
    frame: SeriesFrame,
    spec: ScenarioSpec,
    baseline_cases: list[float],
    baseline_revenue: list[float],
    dates: list[date],
) -> ForecastResult:
    """Scenario pass + report assembly against a precomputed baseline."""
    scenario_cases, scenario_revenue, _ = _run_scenario(
        artifact_cases, artifact_revenue, frame, spec
    )
    if spec.vaccine is not None:
        scenario_cases = vaccine_adjust(scenario_cases, spec.vaccine)
        protect = spec.vaccine.protect_rate_path()
        g = spec.vaccine.generation_interval_days
    else:
        protect = [0.0] * spec.horizon_days
        g = 5.0
    observed = [float(v) for v in frame.columns[artifact_cases.target_name]]
    return ForecastResult(
        dates=dates,
        cases_baseline=baseline_cases,
        cases_scenario=scenario_cases,
        revenue_baseline=baseline_revenue,
        revenue_scenario=scenario_revenue,
        rt_path=_rt_over_horizon(observed, scenario_cases, g),
        protect_rate_path=protect,
    )


@dataclass(frozen=True)
class SearchSpace:
    """Exhaustive grid: constant policy levels × coverage ramps × efficacies."""

    policy_levels: dict[str, tuple[int, ...]] = field(default_factory=dict)
    coverage_ramps: tuple[tuple[float, int], ...] = ()  # (end_coverage, ramp_days)
    efficacies: tuple[float, ...] = ()
    horizon_days: int = 35
    generation_interval_days: float = 5.0

    def scenarios(self) -> list[ScenarioSpec]:
        if bool(self.coverage_ramps) != bool(self.efficacies):
            raise EmptySearchSpace("coverage ramps and efficacies must come together")
        if any(not levels for levels in self.policy_levels.values()):
            raise EmptySearchSpace("a policy axis has no candidate levels")
        names = sorted(self.policy_levels)
        level_axes = [self.policy_levels[n] for n in names]
        if self.coverage_ramps:
            vaccines = [
                VaccineSpec(
                    coverage_path=coverage_ramp(end, ramp, self.horizon_days),
                    efficacy=e,
                    generation_interval_days=self.generation_interval_days,
                )
                for (end, ramp), e in itertools.product(self.coverage_ramps, self.efficacies)
            ]
        else:
            vaccines = [None]
        out = []
        for combo in itertools.product(*level_axes):
            overrides = {n: (float(lvl),) for n, lvl in zip(names, combo)}
            for vacc in vaccines:
                out.append(
                    ScenarioSpec(
                        horizon_days=self.horizon_days,
                        policy_overrides=overrides,
                        vaccine=vacc,
                    )
                )
        return out


def _spec_sort_key(spec: ScenarioSpec) -> str:
    return json.dumps(spec.to_json(), sort_keys=True)


def best_case_search(
    artifact_cases: ModelArtifact,
    artifact_revenue: ModelArtifact,
    frame: SeriesFrame,
    search_space: SearchSpace,
    objective_weights: tuple[float, float] = (1.0, 1.0),
) -> list[tuple[ScenarioSpec, ForecastResult, float]]:
    """Evaluate every grid point; objective = w_protect*mean(protect rate) +
    w_revenue*mean(scenario revenue - baseline revenue), descending; ties go
    to the lexicographically smaller canonical scenario encoding."""
    scenarios = search_space.scenarios()
    if not scenarios:
        raise EmptySearchSpace("search space has no scenarios")
    w_protect, w_revenue = objective_weights
    identity = ScenarioSpec(horizon_days=search_space.horizon_days)
    baseline_cases, baseline_revenue, dates = _run_scenario(
        artifact_cases, artifact_revenue, frame, identity
    )
    ranked = []
    for spec in scenarios:
        result = _assemble(
            artifact_cases, artifact_revenue, frame, spec,
            list(baseline_cases), list(baseline_revenue), list(dates),
        )
        revenue_gain = float(
            np.mean(np.asarray(result.revenue_scenario) - np.asarray(result.revenue_baseline))
        )
        objective = w_protect * float(np.mean(result.protect_rate_path)) + w_revenue * revenue_gain
        ranked.append((spec, result, objective))
    ranked.sort(key=lambda item: (-item[2], _spec_sort_key(item[0])))
    return ranked
