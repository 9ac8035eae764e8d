"""HTTP surface: JSON endpoints over a RegionStore."""
from __future__ import annotations

import json
from datetime import date
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .config import GridAxes, RunConfig
from .errors import (
    AllMissingColumn,
    BadDate,
    EmptyExplanation,
    EmptySearchSpace,
    InsufficientHistory,
    IntervenoError,
    InvalidLagSpec,
    InvalidScenario,
    MalformedCsv,
    NonNumericCell,
    RegionMismatch,
    SchemaMismatch,
    TooShortSeries,
    TrainingInProgress,
    UnknownColumn,
    UnknownDate,
    UnknownRegion,
    ZeroDenominator,
    ZeroVariance,
)
from .explain import LimeConfig
from .simulate import ScenarioSpec, SearchSpace
from .store import RegionStore

_STATUS_BY_ERROR = {
    UnknownRegion: 404,
    TrainingInProgress: 409,
    TooShortSeries: 422,
    InsufficientHistory: 422,
    # everything else under IntervenoError is a bad request
    MalformedCsv: 400,
    BadDate: 400,
    NonNumericCell: 400,
    RegionMismatch: 400,
    AllMissingColumn: 400,
    UnknownColumn: 400,
    InvalidLagSpec: 400,
    InvalidScenario: 400,
    SchemaMismatch: 400,
    UnknownDate: 400,
    EmptyExplanation: 400,
    EmptySearchSpace: 400,
    ZeroDenominator: 400,
    ZeroVariance: 400,
}


def _status_for(exc: IntervenoError) -> int:
    return _STATUS_BY_ERROR.get(type(exc), 400)


def _parse_date(raw, field: str) -> date:
    try:
        return date.fromisoformat(str(raw))
    except ValueError as exc:
        raise InvalidScenario(f"{field}: expected YYYY-MM-DD, got {raw!r}") from exc


def _grid_overrides(body: dict, config: RunConfig):
    """Optional per-request grid axes; absent keys keep configured values."""
    axes = config.grid_axes
    known = {
        "ridge_lambdas": lambda v: tuple(float(x) for x in v),
        "forest_trees": lambda v: tuple(int(x) for x in v),
        "forest_depths": lambda v: tuple(int(x) for x in v),
        "forest_feature_subsample": float,
        "gbm_rounds": lambda v: tuple(int(x) for x in v),
        "gbm_learning_rates": lambda v: tuple(float(x) for x in v),
        "gbm_depths": lambda v: tuple(int(x) for x in v),
    }
    fields = {}
    for key, value in body.items():
        if key == "seed":
            continue
        if key not in known:
            raise InvalidScenario(f"unknown training option {key!r}")
        try:
            fields[key] = known[key](value)
        except (TypeError, ValueError) as exc:
            raise InvalidScenario(f"bad value for {key!r}") from exc
    if not fields:
        return None
    axes = GridAxes(**{**_axes_dict(axes), **fields})
    return axes


def _axes_dict(axes: GridAxes) -> dict:
    return {
        "ridge_lambdas": axes.ridge_lambdas,
        "forest_trees": axes.forest_trees,
        "forest_depths": axes.forest_depths,
        "forest_feature_subsample": axes.forest_feature_subsample,
        "gbm_rounds": axes.gbm_rounds,
        "gbm_learning_rates": axes.gbm_learning_rates,
        "gbm_depths": axes.gbm_depths,
    }


def create_app(store: RegionStore) -> FastAPI:
    app = FastAPI(title="interveno", version="0.1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(IntervenoError)
    async def _engine_error(_request: Request, exc: IntervenoError):
        return JSONResponse(
            status_code=_status_for(exc),
            content={"error": type(exc).__name__, "detail": str(exc)},
        )

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.put("/regions/{region}/data")
    async def put_data(region: str, request: Request):
        report = store.put_data(region, await request.body())
        return report.to_json()

    @app.post("/regions/{region}/train")
    async def train(region: str, request: Request):
        body = await _json_object(request)
        seed = body.get("seed")
        if seed is not None:
            seed = int(seed)
        axes = _grid_overrides(body, store.config)
        grids = axes.to_grids(seed if seed is not None else store.config.seed) if axes else None
        return store.train(region, grids=grids, seed=seed)

    @app.get("/regions/{region}/backtest")
    def backtest(region: str):
        report = store.latest_backtest(region)
        if report is None:
            raise UnknownRegion(f"region {region!r} has no back-test yet")
        return report.to_json()

    @app.post("/regions/{region}/simulate")
    async def simulate(region: str, request: Request):
        body = await _json_object(request)
        body.setdefault("horizon_days", store.config.horizon_days)
        spec = _scenario_from_body(body)
        return store.simulate(region, spec).to_json()

    @app.post("/regions/{region}/explain")
    async def explain(region: str, request: Request):
        body = await _json_object(request)
        if "date" not in body:
            raise InvalidScenario("explain body needs a 'date'")
        target = _parse_date(body["date"], "date")
        kwargs = {}
        for key in (
            "n_samples",
            "kernel_width",
            "recency_halflife_days",
            "case_weight_floor",
            "surrogate_ridge",
            "seed",
        ):
            if key in body and body[key] is not None:
                kwargs[key] = body[key]
        try:
            config = LimeConfig(**kwargs)
        except (TypeError, ValueError) as exc:
            raise InvalidScenario(f"bad explain config: {exc}") from exc
        return store.explain(region, target, config).to_json()

    @app.post("/regions/{region}/best-case")
    async def best_case(region: str, request: Request):
        body = await _json_object(request)
        try:
            space = SearchSpace(
                policy_levels={
                    str(k): tuple(int(x) for x in v)
                    for k, v in body.get("policy_levels", {}).items()
                },
                coverage_ramps=tuple(
                    (float(end), int(days)) for end, days in body.get("coverage_ramps", ())
                ),
                efficacies=tuple(float(e) for e in body.get("efficacies", ())),
                horizon_days=int(body.get("horizon_days", store.config.horizon_days)),
                generation_interval_days=float(body.get("generation_interval_days", 5.0)),
            )
            weights = body.get("objective_weights", (1.0, 1.0))
            w_protect, w_revenue = (float(weights[0]), float(weights[1]))
            top = body.get("top")
            top = int(top) if top is not None else None
        except (TypeError, ValueError, KeyError) as exc:
            raise InvalidScenario(f"bad search space: {exc}") from exc
        ranked = store.best_case(region, space, (w_protect, w_revenue))
        if top is not None:
            ranked = ranked[:top]
        return {
            "ranked": [
                {
                    "scenario": spec.to_json(),
                    "objective": objective,
                    "result": result.to_json(),
                }
                for spec, result, objective in ranked
            ]
        }

    @app.get("/regions/{region}/status")
    def status(region: str, today: Optional[str] = None):
        on = _parse_date(today, "today") if today else None
        return store.status(region, today=on)

    return app


async def _json_object(request: Request) -> dict:
    raw = await request.body()
    if not raw.strip():
        return {}
    try:
        body = json.loads(raw)
    except ValueError as exc:
        raise InvalidScenario(f"body is not JSON: {exc}") from exc
    if not isinstance(body, dict):
        raise InvalidScenario("body must be a JSON object")
    return body


def _scenario_from_body(body: dict) -> ScenarioSpec:
    try:
        return ScenarioSpec.from_json(body)
    except (TypeError, ValueError, KeyError) as exc:
        raise InvalidScenario(f"bad scenario: {exc}") from exc


def serve(config: RunConfig) -> None:
    """Blocking uvicorn server over a fresh store."""
    import uvicorn

    app = create_app(RegionStore(config))
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
