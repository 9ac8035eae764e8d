"""Shared fixtures and the acceptance-summary reporter."""
from __future__ import annotations

import pytest

from interveno.ensemble import TuningGrids, train_artifact
from interveno.features import default_lag_spec
from interveno.forest import ForestParams
from interveno.gbm import GbmParams
from interveno.linear import LinearParams
from interveno.synthetic import generate_frame
from interveno.tree import TreeParams

# Real-but-reduced grids: every model family still tuned over 2+ points,
# sized so an end-to-end train stays in seconds.
SMALL_GRIDS = TuningGrids(
    linear=(LinearParams(0.1), LinearParams(1.0)),
    forest=(
        ForestParams(tree=TreeParams(max_depth=4), n_trees=100, seed=0),
        ForestParams(tree=TreeParams(max_depth=8), n_trees=100, seed=0),
    ),
    gbm=(
        GbmParams(tree=TreeParams(max_depth=2), n_rounds=100, learning_rate=0.1),
        GbmParams(tree=TreeParams(max_depth=3), n_rounds=100, learning_rate=0.1),
    ),
)

# Minimal grids for shape-level service/CLI tests where fit quality is moot.
TINY_GRIDS = TuningGrids(
    linear=(LinearParams(1.0),),
    forest=(ForestParams(tree=TreeParams(max_depth=3), n_trees=20, seed=0),),
    gbm=(GbmParams(tree=TreeParams(max_depth=2), n_rounds=30, learning_rate=0.1),),
)

TINY_CONFIG_TEXT = """\
grid.ridge_lambdas=1
grid.forest_trees=20
grid.forest_depths=3
grid.gbm_rounds=30
grid.gbm_learning_rates=0.1
grid.gbm_depths=2
"""


@pytest.fixture(scope="session")
def frame_2020():
    return generate_frame(seed=2020)


@pytest.fixture(scope="session")
def artifact_pair(frame_2020):
    """(cases, revenue) heads trained on the frozen fixture region."""
    spec = default_lag_spec()
    cases = train_artifact(frame_2020, "new_cases", spec, SMALL_GRIDS, 14, 0)
    revenue = train_artifact(
        frame_2020, "small_business_revenue_delta", spec, SMALL_GRIDS, 14, 0
    )
    return cases, revenue


# ---------------------------------------------------------------------------
# Acceptance summary: one pass/fail line per criterion after the run.

_ACCEPTANCE_RESULTS: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid or report.when != "call":
        return
    name = report.nodeid.split("::")[-1]
    _ACCEPTANCE_RESULTS[name] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, outcome in _ACCEPTANCE_RESULTS.items():
        terminalreporter.write_line(f"[{outcome}] {name}")
