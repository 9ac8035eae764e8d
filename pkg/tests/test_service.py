"""HTTP service contract: golden responses, error mapping, concurrency."""
from __future__ import annotations

import math

import pytest

import service_recipe as recipe
from fastapi.testclient import TestClient

from interveno.api import create_app
from interveno.store import RegionStore
from interveno.synthetic import generate_csv

REGION = recipe.REGION


@pytest.fixture(scope="module")
def client(tmp_path_factory):
    data_dir = tmp_path_factory.mktemp("service_store")
    client = recipe.build_client(data_dir)
    recipe.upload_and_train(client)
    return client


load_golden = recipe.load_golden
assert_matches = recipe.assert_matches


class TestGoldenResponses:
    """Live responses against recorded ones (scripts/record_golden.py)."""

    def test_health(self, client):
        assert_matches(client.get("/health").json(), load_golden("health"))

    def test_data_report(self, client):
        response = client.put(
            f"/regions/{REGION}/data", content=recipe.region_csv().encode()
        )
        assert response.status_code == 200
        assert_matches(response.json(), load_golden("data_report"))

    def test_train_summary(self, client):
        golden = load_golden("train_summary")
        response = client.post(f"/regions/{REGION}/train", json={"seed": recipe.TRAIN_SEED})
        assert response.status_code == 200
        assert_matches(response.json(), golden)
        weights = golden["heads"]["cases"]["ensemble_weights"]
        assert math.isclose(sum(weights.values()), 1.0, rel_tol=1e-12)

    def test_backtest(self, client):
        response = client.get(f"/regions/{REGION}/backtest")
        assert response.status_code == 200
        assert_matches(response.json(), load_golden("backtest"))

    def test_simulate_identity(self, client):
        response = client.post(
            f"/regions/{REGION}/simulate", json=recipe.SIMULATE_IDENTITY_BODY
        )
        assert response.status_code == 200
        assert_matches(response.json(), load_golden("simulate_identity"))

    def test_simulate_stay_at_home(self, client):
        response = client.post(f"/regions/{REGION}/simulate", json=recipe.SIMULATE_STAY_BODY)
        assert response.status_code == 200
        assert_matches(response.json(), load_golden("simulate_stay"))

    def test_explain(self, client):
        response = client.post(f"/regions/{REGION}/explain", json=recipe.EXPLAIN_BODY)
        assert response.status_code == 200
        assert_matches(response.json(), load_golden("explain"))

    def test_best_case(self, client):
        response = client.post(f"/regions/{REGION}/best-case", json=recipe.BEST_CASE_BODY)
        assert response.status_code == 200
        assert_matches(response.json(), load_golden("best_case"))

    def test_status(self, client):
        response = client.get(f"/regions/{REGION}/status?{recipe.STATUS_DUE_QUERY}")
        assert response.status_code == 200
        assert_matches(response.json(), load_golden("status"))


class TestScenarioSemantics:
    def test_empty_scenario_is_the_baseline(self, client):
        body = client.post(f"/regions/{REGION}/simulate", json={"horizon_days": 12}).json()
        assert body["cases_scenario"] == body["cases_baseline"]
        assert body["revenue_scenario"] == body["revenue_baseline"]
        assert body["protect_rate_path"] == [0.0] * 12

    def test_stay_at_home_shifts_the_scenario_paths(self, client):
        body = client.post(f"/regions/{REGION}/simulate", json=recipe.SIMULATE_STAY_BODY).json()
        assert sum(body["cases_scenario"]) < sum(body["cases_baseline"])
        assert sum(body["revenue_scenario"]) < sum(body["revenue_baseline"])

    def test_best_case_objectives_descend(self, client):
        ranked = client.post(
            f"/regions/{REGION}/best-case", json=recipe.BEST_CASE_BODY
        ).json()["ranked"]
        objectives = [entry["objective"] for entry in ranked]
        assert objectives == sorted(objectives, reverse=True)

    def test_status_not_due_right_after_training(self, client):
        body = client.get(f"/regions/{REGION}/status?today=2020-11-01").json()
        assert body["retrain_due"] is False

    def test_simulate_is_deterministic(self, client):
        first = client.post(f"/regions/{REGION}/simulate", json=recipe.SIMULATE_STAY_BODY).json()
        second = client.post(f"/regions/{REGION}/simulate", json=recipe.SIMULATE_STAY_BODY).json()
        assert first == second


class TestErrorMapping:
    def test_unknown_region_is_404(self, client):
        response = client.get("/regions/ZZ/status")
        assert response.status_code == 404
        assert response.json()["error"] == "UnknownRegion"

    def test_invalid_region_id_is_404(self, client):
        response = client.get("/regions/bad%20id/status")
        assert response.status_code == 404

    def test_malformed_csv_is_400(self, client):
        response = client.put(f"/regions/{REGION}/data", content=b"not,a,frame\n1,2\n")
        assert response.status_code == 400
        body = response.json()
        assert "error" in body and "detail" in body

    def test_bad_scenario_body_is_400(self, client):
        response = client.post(
            f"/regions/{REGION}/simulate", json={"policy_overrides": {"tests": [1]}}
        )
        assert response.status_code == 400
        assert response.json()["error"] == "InvalidScenario"

    def test_non_object_body_is_400(self, client):
        response = client.post(f"/regions/{REGION}/simulate", content=b"[1,2]")
        assert response.status_code == 400

    def test_short_series_is_422(self, tmp_path):
        client = recipe.build_client(tmp_path)
        csv = generate_csv(region_id=REGION, n_days=30, seed=1)
        assert client.put(f"/regions/{REGION}/data", content=csv.encode()).status_code == 200
        response = client.post(f"/regions/{REGION}/train", json={})
        assert response.status_code == 422
        assert response.json()["error"] == "TooShortSeries"

    def test_unknown_training_option_is_400(self, client):
        response = client.post(f"/regions/{REGION}/train", json={"tree_count": [5]})
        assert response.status_code == 400

    def test_bad_explain_date_is_400(self, client):
        response = client.post(f"/regions/{REGION}/explain", json={"date": "yesterday"})
        assert response.status_code == 400

    def test_missing_explain_date_is_400(self, client):
        response = client.post(f"/regions/{REGION}/explain", json={})
        assert response.status_code == 400


class TestConcurrentTraining:
    def test_second_train_gets_409_while_lock_is_held(self, tmp_path):
        store = RegionStore(recipe.make_config(tmp_path))
        store.put_data(REGION, recipe.region_csv().encode())
        client = TestClient(create_app(store))
        lock = store._state(REGION).train_lock
        assert lock.acquire(blocking=False)
        try:
            response = client.post(f"/regions/{REGION}/train", json={})
            assert response.status_code == 409
            assert response.json()["error"] == "TrainingInProgress"
        finally:
            lock.release()
        # once the lock is free the same request succeeds
        response = client.post(f"/regions/{REGION}/train", json={})
        assert response.status_code == 200


class TestPersistenceAcrossRestart:
    def test_fresh_store_serves_the_same_artifacts(self, tmp_path):
        first = recipe.build_client(tmp_path)
        recipe.upload_and_train(first)
        body = {"horizon_days": 8}
        before = first.post(f"/regions/{REGION}/simulate", json=body).json()
        reborn = recipe.build_client(tmp_path)
        after = reborn.post(f"/regions/{REGION}/simulate", json=body).json()
        assert after == before
        assert reborn.get(f"/regions/{REGION}/backtest").json() == first.get(
            f"/regions/{REGION}/backtest"
        ).json()


class TestTrainingOverrides:
    def test_grid_override_changes_the_fit(self, tmp_path):
        client = recipe.build_client(tmp_path)
        recipe.upload_and_train(client)
        response = client.post(
            f"/regions/{REGION}/train",
            json={"ridge_lambdas": [1e6], "forest_trees": [5], "gbm_rounds": [5]},
        )
        assert response.status_code == 200
        params = response.json()["heads"]["cases"]["hyperparams"]
        assert params["ridge_lambda"] == 1e6
        assert params["forest_trees"] == 5
        assert params["gbm_rounds"] == 5
