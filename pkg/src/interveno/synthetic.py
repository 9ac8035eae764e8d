"""Synthetic region generator with known dynamics for tests and demos.

Daily cases follow a multiplicative model: an AR(1) level in log space, a
weekly reporting cycle with weekend dips, and a 0.8 multiplier per
stay-at-home level. Small-business revenue delta falls 0.065 per
stay-at-home level (plus a smaller workplace-closing effect). Policies hold
block-constant levels and freeze over the final three weeks so out-of-time
windows never straddle a policy flip. Everything is reproducible from the
seed; 2020 is the frozen fixture seed used by the test suite.
"""
from __future__ import annotations

import math
from datetime import date, timedelta

from .frame import CSV_COLUMNS, SeriesFrame, frame_to_csv
from .rng import Stream

CASE_SCALE = 900.0
AR_PHI = 0.85
AR_SIGMA = 0.05
WEEK_CYCLE = (1.06, 1.10, 1.07, 1.03, 0.98, 0.70, 0.62)  # Monday..Sunday
STAY_HOME_CASE_MULT = 0.8  # per level
STAY_HOME_REVENUE_DROP = 0.065  # per level
WORKPLACE_REVENUE_DROP = 0.012  # per level
POLICY_FREEZE_DAYS = 21


def _policy_schedule(stream: Stream, n_days: int, n_levels: int) -> list[float]:
    """Block-constant levels (2-4 week blocks), frozen for the final weeks."""
    levels: list[float] = []
    moving = max(0, n_days - POLICY_FREEZE_DAYS)
    while len(levels) < moving:
        level = float(stream.randint(n_levels))
        block = 14 + stream.randint(15)
        levels.extend([level] * min(block, moving - len(levels)))
    last = levels[-1] if levels else float(stream.randint(n_levels))
    levels.extend([last] * (n_days - len(levels)))
    return levels


def generate_frame(
    region_id: str = "CA",
    n_days: int = 240,
    seed: int = 2020,
    start: date = date(2020, 3, 1),
) -> SeriesFrame:
    if n_days < 1:
        raise ValueError("n_days must be >= 1")
    dates = [start + timedelta(days=t) for t in range(n_days)]

    ar = Stream(seed, 0)
    stay = _policy_schedule(Stream(seed, 1), n_days, 4)
    school = _policy_schedule(Stream(seed, 2), n_days, 4)
    workplace = _policy_schedule(Stream(seed, 3), n_days, 4)
    gatherings = _policy_schedule(Stream(seed, 4), n_days, 5)
    mobility_noise = Stream(seed, 5)
    tests_noise = Stream(seed, 6)
    temp_noise = Stream(seed, 7)
    wind_noise = Stream(seed, 8)
    humidity_noise = Stream(seed, 9)
    revenue_noise = Stream(seed, 10)
    obs_noise = Stream(seed, 11)

    cases, tests, temp, wind, humidity, mobility, revenue = ([] for _ in range(7))
    log_level = 0.0
    for t in range(n_days):
        log_level = AR_PHI * log_level + AR_SIGMA * ar.normal()
        dow = dates[t].weekday()
        lam = (
            CASE_SCALE
            * math.exp(log_level)
            * WEEK_CYCLE[dow]
            * STAY_HOME_CASE_MULT ** stay[t]
            * math.exp(0.03 * obs_noise.normal())
        )
        cases.append(float(max(0, round(lam))))
        tests.append(float(round(5000.0 * (1.0 + 0.001 * t) * math.exp(0.05 * tests_noise.normal()))))
        temp.append(15.0 + 8.0 * math.sin(2.0 * math.pi * t / 365.0) + 2.0 * temp_noise.normal())
        wind.append(4.0 + abs(1.5 * wind_noise.normal()))
        humidity.append(min(98.0, max(5.0, 60.0 + 10.0 * humidity_noise.normal())))
        mobility.append(100.0 + 2.0 * mobility_noise.normal())
        rev = (
            0.03
            - STAY_HOME_REVENUE_DROP * stay[t]
            - WORKPLACE_REVENUE_DROP * workplace[t]
            + 0.008 * revenue_noise.normal()
        )
        revenue.append(max(-0.99, rev))

    columns = {
        "new_cases": cases,
        "tests": tests,
        "temperature_c": temp,
        "wind_speed_ms": wind,
        "humidity_pct": humidity,
        "mobility_index": mobility,
        "policy_stay_at_home": stay,
        "policy_school_closing": school,
        "policy_workplace_closing": workplace,
        "policy_gatherings": gatherings,
        "small_business_revenue_delta": revenue,
    }
    assert list(columns) == CSV_COLUMNS
    return SeriesFrame(region_id=region_id, dates=dates, columns=columns)


def generate_csv(
    region_id: str = "CA",
    n_days: int = 240,
    seed: int = 2020,
    start: date = date(2020, 3, 1),
) -> str:
    return frame_to_csv(generate_frame(region_id, n_days, seed, start))
