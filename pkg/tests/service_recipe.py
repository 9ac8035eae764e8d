"""Shared recipe for the HTTP service tests and the golden-file recorder.

Both sides build the same store (same region, series, grid, and seeds) so
recorded responses stay bit-comparable with live ones. scripts/record_golden.py
imports this module to regenerate tests/golden/*.json.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

from fastapi.testclient import TestClient

from interveno.api import create_app
from interveno.config import GridAxes, RunConfig
from interveno.store import RegionStore
from interveno.synthetic import generate_csv

GOLDEN_DIR = Path(__file__).parent / "golden"

REGION = "CA"
N_DAYS = 240  # the full frozen fixture; shorter cuts miss high policy levels
DATA_SEED = 2020
TRAIN_SEED = 0

TINY_AXES = GridAxes(
    ridge_lambdas=(1.0,),
    forest_trees=(20,),
    forest_depths=(3,),
    gbm_rounds=(30,),
    gbm_learning_rates=(0.1,),
    gbm_depths=(2,),
)

SIMULATE_IDENTITY_BODY: dict = {"horizon_days": 10}
SIMULATE_STAY_BODY: dict = {
    "horizon_days": 14,
    "policy_overrides": {"policy_stay_at_home": [3]},
}
EXPLAIN_BODY: dict = {"date": "2020-07-01", "n_samples": 200, "seed": 0}
BEST_CASE_BODY: dict = {
    "policy_levels": {"policy_stay_at_home": [0, 3]},
    "coverage_ramps": [[0.6, 14]],
    "efficacies": [0.7],
    "horizon_days": 14,
    "top": 2,
}
STATUS_DUE_QUERY = "today=2020-11-25"  # 30 days past the frame end 2020-10-26


def make_config(data_dir: Path) -> RunConfig:
    return RunConfig(data_dir=data_dir, grid_axes=TINY_AXES, seed=TRAIN_SEED)


def region_csv() -> str:
    return generate_csv(region_id=REGION, n_days=N_DAYS, seed=DATA_SEED)


def build_client(data_dir: Path) -> TestClient:
    return TestClient(create_app(RegionStore(make_config(data_dir))))


def upload_and_train(client: TestClient) -> tuple[dict, dict]:
    """Returns (data report, training summary) for the canonical region."""
    put = client.put(f"/regions/{REGION}/data", content=region_csv().encode())
    put.raise_for_status()
    train = client.post(f"/regions/{REGION}/train", json={"seed": TRAIN_SEED})
    train.raise_for_status()
    return put.json(), train.json()


def load_golden(name: str) -> dict:
    path = GOLDEN_DIR / f"{name}.json"
    return json.loads(path.read_text(encoding="utf-8"))


def assert_matches(live, golden, path="$"):
    """Structural equality with a float tolerance for round-trip noise."""
    if isinstance(golden, dict):
        assert isinstance(live, dict), f"{path}: expected object"
        assert sorted(live) == sorted(golden), f"{path}: key sets differ"
        for key in golden:
            assert_matches(live[key], golden[key], f"{path}.{key}")
    elif isinstance(golden, list):
        assert isinstance(live, list), f"{path}: expected array"
        assert len(live) == len(golden), f"{path}: length differs"
        for i, (a, b) in enumerate(zip(live, golden)):
            assert_matches(a, b, f"{path}[{i}]")
    elif isinstance(golden, bool) or golden is None or isinstance(golden, str):
        assert live == golden, f"{path}: {live!r} != {golden!r}"
    else:
        assert isinstance(live, (int, float)), f"{path}: expected number"
        assert math.isclose(live, golden, rel_tol=1e-9, abs_tol=1e-12), (
            f"{path}: {live!r} != {golden!r}"
        )


def golden_exchanges(client: TestClient) -> dict[str, dict]:
    """All recorded request/response pairs, keyed by golden file stem."""
    report, summary = upload_and_train(client)
    out = {
        "health": client.get("/health").json(),
        "data_report": report,
        "train_summary": summary,
        "backtest": client.get(f"/regions/{REGION}/backtest").json(),
        "simulate_identity": client.post(
            f"/regions/{REGION}/simulate", json=SIMULATE_IDENTITY_BODY
        ).json(),
        "simulate_stay": client.post(
            f"/regions/{REGION}/simulate", json=SIMULATE_STAY_BODY
        ).json(),
        "explain": client.post(f"/regions/{REGION}/explain", json=EXPLAIN_BODY).json(),
        "best_case": client.post(f"/regions/{REGION}/best-case", json=BEST_CASE_BODY).json(),
        "status": client.get(f"/regions/{REGION}/status?{STATUS_DUE_QUERY}").json(),
    }
    return out
