"""Out-of-time evaluation: r² scoring, rolling origins, and the retrain clock."""
from __future__ import annotations

from dataclasses import dataclass
from datetime import date, timedelta
from typing import TYPE_CHECKING, Optional, Sequence

import numpy as np

from .errors import FutureArtifact, TooShortSeries, ZeroVariance
from .features import FeatureMatrix, LagSpec
from .frame import SeriesFrame

if TYPE_CHECKING:
    from .ensemble import TuningGrids

RETRAIN_INTERVAL_DAYS = 28  # "monthly" without calendar-month length ambiguity


@dataclass
class BacktestReport:
    r_squared: float
    horizon_days: int
    train_through: date
    test_dates: list[date]
    y_true: list[float]
    y_pred: list[float]

    def __post_init__(self):
        if not len(self.test_dates) == len(self.y_true) == len(self.y_pred):
            raise ValueError("misaligned report vectors")

    def to_json(self) -> dict:
        return {
            "r_squared": self.r_squared,
            "horizon_days": self.horizon_days,
            "train_through": self.train_through.isoformat(),
            "test_dates": [d.isoformat() for d in self.test_dates],
            "y_true": list(self.y_true),
            "y_pred": list(self.y_pred),
        }

    def to_csv(self) -> str:
        lines = ["date,y_true,y_pred"]
        for d, yt, yp in zip(self.test_dates, self.y_true, self.y_pred):
            lines.append(f"{d.isoformat()},{yt!r},{yp!r}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class BacktestConfig:
    """None-valued fields fall back to the package defaults at run time."""

    lag_spec: Optional[LagSpec] = None
    grids: Optional["TuningGrids"] = None
    val_days: int = 14
    test_days: int = 14
    target: str = "new_cases"
    seed: int = 0


def oot_split(matrix: FeatureMatrix, test_days: int = 14) -> tuple[FeatureMatrix, FeatureMatrix]:
    """Last test_days rows become the out-of-time test set."""
    if matrix.n <= test_days:
        raise TooShortSeries(f"need more than {test_days} rows, have {matrix.n}")
    cut = matrix.n - test_days
    return matrix.take(0, cut), matrix.take(cut, matrix.n)


def r_squared(y_true: Sequence[float], y_pred: Sequence[float]) -> float:
    """1 - SSres/SStot; negative when the fit is worse than the mean."""
    yt = np.asarray(y_true, dtype=float)
    yp = np.asarray(y_pred, dtype=float)
    if yt.shape != yp.shape or yt.ndim != 1 or yt.size == 0:
        raise ValueError("need equal-length nonempty 1-d vectors")
    ss_tot = float(((yt - yt.mean()) ** 2).sum())
    if ss_tot == 0.0:
        raise ZeroVariance("y_true is constant")
    ss_res = float(((yt - yp) ** 2).sum())
    return 1.0 - ss_res / ss_tot


def run_backtest(frame: SeriesFrame, config: BacktestConfig = BacktestConfig()) -> BacktestReport:
    """Train both heads on everything up to the test window, then predict the
    window by the same recursive simulation used for live forecasts (the test
    window's rows are never visible to fitting)."""
    # imported here: these sit above the model layer that uses r_squared
    from .ensemble import default_grids, train_artifact
    from .features import default_lag_spec
    from .simulate import ScenarioSpec, forecast

    lag_spec = config.lag_spec or default_lag_spec()
    grids = config.grids or default_grids(config.seed)
    if len(frame.dates) <= config.test_days:
        raise TooShortSeries("frame shorter than the test window")
    cut_date = frame.dates[-(config.test_days + 1)]
    history = frame.truncate_through(cut_date)

    artifacts = {
        name: train_artifact(
            history, name, lag_spec, grids, config.val_days, config.seed
        )
        for name in ("new_cases", "small_business_revenue_delta")
    }
    result = forecast(
        artifacts["new_cases"],
        artifacts["small_business_revenue_delta"],
        history,
        ScenarioSpec(horizon_days=config.test_days),
    )
    y_pred = (
        result.cases_baseline
        if config.target == "new_cases"
        else result.revenue_baseline
    )
    test_dates = frame.dates[-config.test_days :]
    y_true = [float(v) for v in frame.columns[config.target][-config.test_days :]]
    return BacktestReport(
        r_squared=r_squared(y_true, y_pred),
        horizon_days=config.test_days,
        train_through=cut_date,
        test_dates=list(test_dates),
        y_true=y_true,
        y_pred=list(y_pred),
    )


def rolling_backtest(
    frame: SeriesFrame, n_origins: int, step: int, config: BacktestConfig = BacktestConfig()
) -> list[BacktestReport]:
    """One report per origin; origin k trims k*step days off the end first."""
    if n_origins < 1 or step < 1:
        raise ValueError("n_origins and step must be >= 1")
    reports = []
    for k in range(n_origins):
        trimmed = k * step
        if trimmed >= len(frame.dates):
            raise TooShortSeries("origin falls before the start of the series")
        sub = frame.truncate_through(frame.dates[-(trimmed + 1)])
        reports.append(run_backtest(sub, config))
    return reports


def retrain_due(trained_through: date, today: date) -> bool:
    """Monthly retrain clock: due once 28 days have elapsed."""
    if trained_through > today:
        raise FutureArtifact(f"artifact trained_through {trained_through} is after {today}")
    return today >= trained_through + timedelta(days=RETRAIN_INTERVAL_DAYS)
