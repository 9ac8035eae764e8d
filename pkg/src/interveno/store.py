"""Per-region state: frames, artifact pairs, back-test history, train locks."""
from __future__ import annotations

import json
import re
import threading
import time
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Optional

from .backtest import BacktestConfig, BacktestReport, retrain_due, run_backtest
from .config import RunConfig
from .ensemble import ModelArtifact, TuningGrids, train_artifact
from .errors import TrainingInProgress, UnknownRegion
from .explain import Explanation, LimeConfig, lime_explain
from .features import build_matrix
from .frame import SeriesFrame, ValidationReport, frame_to_csv, impute, parse_region_csv, validate
from .persistence import load_artifact, save_artifact
from .simulate import (
    ForecastResult,
    ScenarioSpec,
    SearchSpace,
    best_case_search,
    forecast,
)

CASES_TARGET = "new_cases"
REVENUE_TARGET = "small_business_revenue_delta"
_REGION_ID = re.compile(r"^[A-Za-z0-9_-]{1,64}$")


@dataclass
class _RegionState:
    frame: Optional[SeriesFrame] = None
    artifacts: Optional[tuple[ModelArtifact, ModelArtifact]] = None  # (cases, revenue)
    backtests: list[BacktestReport] = field(default_factory=list)
    train_lock: threading.Lock = field(default_factory=threading.Lock)


class RegionStore:
    """Disk-backed region registry; one concurrent training job per region.

    Layout under data_dir/{region}/: data.csv (imputed series), cases.json
    and revenue.json (current artifact pair), backtests.json (report
    history), archive/ (superseded artifacts stamped by wall clock).
    """

    def __init__(self, config: RunConfig):
        self.config = config
        self._mutex = threading.Lock()
        self._regions: dict[str, _RegionState] = {}
        self.config.data_dir.mkdir(parents=True, exist_ok=True)
        for child in sorted(self.config.data_dir.iterdir()):
            if child.is_dir() and _REGION_ID.match(child.name):
                self._load_region(child.name)

    # -- plumbing ---------------------------------------------------------

    def _dir(self, region: str) -> Path:
        return self.config.data_dir / region

    def _load_region(self, region: str) -> None:
        state = _RegionState()
        folder = self._dir(region)
        csv_path = folder / "data.csv"
        if csv_path.exists():
            state.frame = parse_region_csv(csv_path.read_bytes(), region_id=region)
        cases_path = folder / "cases.json"
        revenue_path = folder / "revenue.json"
        if cases_path.exists() and revenue_path.exists():
            state.artifacts = (load_artifact(cases_path), load_artifact(revenue_path))
        reports_path = folder / "backtests.json"
        if reports_path.exists():
            docs = json.loads(reports_path.read_text(encoding="utf-8"))
            state.backtests = [_report_from_json(doc) for doc in docs]
        self._regions[region] = state

    def _state(self, region: str) -> _RegionState:
        if not _REGION_ID.match(region):
            raise UnknownRegion(f"invalid region id {region!r}")
        with self._mutex:
            state = self._regions.get(region)
        if state is None:
            raise UnknownRegion(region)
        return state

    def regions(self) -> list[str]:
        with self._mutex:
            return sorted(self._regions)

    # -- data -------------------------------------------------------------

    def put_data(self, region: str, csv_bytes: bytes) -> ValidationReport:
        """Parse, report on the raw upload, store the imputed series."""
        if not _REGION_ID.match(region):
            raise UnknownRegion(f"invalid region id {region!r}")
        raw = parse_region_csv(csv_bytes, region_id=region)
        report = validate(raw)
        clean = impute(raw)
        folder = self._dir(region)
        folder.mkdir(parents=True, exist_ok=True)
        (folder / "data.csv").write_text(frame_to_csv(clean), encoding="utf-8")
        with self._mutex:
            state = self._regions.setdefault(region, _RegionState())
            state.frame = clean
        return report

    def frame(self, region: str) -> SeriesFrame:
        state = self._state(region)
        if state.frame is None:
            raise UnknownRegion(f"region {region!r} has no data")
        return state.frame

    # -- training ---------------------------------------------------------

    def train(
        self, region: str, grids: Optional[TuningGrids] = None, seed: Optional[int] = None
    ) -> dict:
        """Back-test, fit both heads on the full series, swap in the pair."""
        frame = self.frame(region)
        state = self._state(region)
        if not state.train_lock.acquire(blocking=False):
            raise TrainingInProgress(f"a training job is already running for {region!r}")
        try:
            run_seed = self.config.seed if seed is None else seed
            run_grids = grids if grids is not None else self.config.grid_axes.to_grids(run_seed)
            report = run_backtest(
                frame,
                BacktestConfig(
                    lag_spec=self.config.lag_spec,
                    grids=run_grids,
                    val_days=self.config.val_days,
                    test_days=self.config.test_days,
                    seed=run_seed,
                ),
            )
            pair = tuple(
                train_artifact(
                    frame, target, self.config.lag_spec, run_grids, self.config.val_days, run_seed
                )
                for target in (CASES_TARGET, REVENUE_TARGET)
            )
            self._persist_training(region, state, pair, report)
            return self.training_summary(region)
        finally:
            state.train_lock.release()

    def _persist_training(
        self,
        region: str,
        state: _RegionState,
        pair: tuple[ModelArtifact, ModelArtifact],
        report: BacktestReport,
    ) -> None:
        folder = self._dir(region)
        folder.mkdir(parents=True, exist_ok=True)
        stamp = time.strftime("%Y%m%dT%H%M%S", time.gmtime())
        for name, artifact in zip(("cases", "revenue"), pair):
            path = folder / f"{name}.json"
            if path.exists():
                archive = folder / "archive"
                archive.mkdir(exist_ok=True)
                path.replace(archive / f"{stamp}_{name}.json")
            save_artifact(artifact, path)
        with self._mutex:
            state.artifacts = pair
            state.backtests.append(report)
            history = [r.to_json() for r in state.backtests]
        (folder / "backtests.json").write_text(
            json.dumps(history, sort_keys=True, indent=1) + "\n", encoding="utf-8"
        )

    def artifacts(self, region: str) -> tuple[ModelArtifact, ModelArtifact]:
        state = self._state(region)
        with self._mutex:
            pair = state.artifacts
        if pair is None:
            raise UnknownRegion(f"region {region!r} has no trained model")
        return pair

    def training_summary(self, region: str) -> dict:
        cases, revenue = self.artifacts(region)
        report = self.latest_backtest(region)
        return {
            "region": region,
            "trained_through": cases.trained_through.isoformat(),
            "backtest_r_squared": report.r_squared if report else None,
            "heads": {
                name: {
                    "target_name": artifact.target_name,
                    "ensemble_weights": {
                        "linear": artifact.ensemble_weights[0],
                        "forest": artifact.ensemble_weights[1],
                        "gbm": artifact.ensemble_weights[2],
                    },
                    "val_r2": {
                        "linear": artifact.val_r2[0],
                        "forest": artifact.val_r2[1],
                        "gbm": artifact.val_r2[2],
                    },
                    "hyperparams": {
                        "ridge_lambda": artifact.hyperparams.linear.ridge_lambda,
                        "forest_trees": artifact.hyperparams.forest.n_trees,
                        "forest_depth": artifact.hyperparams.forest.tree.max_depth,
                        "gbm_rounds": artifact.hyperparams.gbm.n_rounds,
                        "gbm_learning_rate": artifact.hyperparams.gbm.learning_rate,
                        "gbm_depth": artifact.hyperparams.gbm.tree.max_depth,
                    },
                }
                for name, artifact in (("cases", cases), ("revenue", revenue))
            },
        }

    # -- reads ------------------------------------------------------------

    def latest_backtest(self, region: str) -> Optional[BacktestReport]:
        state = self._state(region)
        with self._mutex:
            return state.backtests[-1] if state.backtests else None

    def simulate(self, region: str, spec: ScenarioSpec) -> ForecastResult:
        cases, revenue = self.artifacts(region)
        return forecast(cases, revenue, self.frame(region), spec)

    def explain(self, region: str, target_date: date, config: LimeConfig) -> Explanation:
        cases, _ = self.artifacts(region)
        matrix = build_matrix(self.frame(region), self.config.lag_spec, CASES_TARGET)
        return lime_explain(cases, matrix, target_date, config)

    def best_case(
        self, region: str, space: SearchSpace, objective_weights: tuple[float, float]
    ) -> list:
        cases, revenue = self.artifacts(region)
        return best_case_search(cases, revenue, self.frame(region), space, objective_weights)

    def status(self, region: str, today: Optional[date] = None) -> dict:
        cases, _ = self.artifacts(region)
        now = today or date.today()
        return {
            "region": region,
            "trained_through": cases.trained_through.isoformat(),
            "retrain_due": retrain_due(cases.trained_through, now),
        }


def _report_from_json(doc: dict) -> BacktestReport:
    return BacktestReport(
        r_squared=float(doc["r_squared"]),
        horizon_days=int(doc["horizon_days"]),
        train_through=date.fromisoformat(doc["train_through"]),
        test_dates=[date.fromisoformat(d) for d in doc["test_dates"]],
        y_true=[float(v) for v in doc["y_true"]],
        y_pred=[float(v) for v in doc["y_pred"]],
    )
