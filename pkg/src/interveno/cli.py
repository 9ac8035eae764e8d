"""Command-line interface: one subcommand per pipeline stage."""
from __future__ import annotations

import argparse
import json
import sys
from datetime import date
from pathlib import Path
from typing import Optional

from .backtest import BacktestConfig, run_backtest
from .config import RunConfig, load_config
from .errors import IntervenoError
from .explain import LimeConfig
from .frame import parse_region_csv, validate
from .simulate import ScenarioSpec, SearchSpace, VaccineSpec, coverage_ramp
from .store import RegionStore


class _Usage(Exception):
    """Bad invocation detected after argparse (exit code 2)."""


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key=value config file")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--seed", type=int, help="override the run seed")
    common.add_argument("--region", metavar="ID", help="region identifier")
    common.add_argument("--data-dir", metavar="PATH", help="override the data directory")

    parser = argparse.ArgumentParser(
        prog="interveno",
        description="Epidemic intervention forecasting: ingest, train, simulate.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("ingest", parents=[common], help="store a region CSV")
    p.add_argument("csv", type=Path, help="path to the daily CSV")

    p = sub.add_parser("validate", parents=[common], help="report on a CSV without storing it")
    p.add_argument("csv", type=Path)

    sub.add_parser("train", parents=[common], help="back-test, tune, and fit both heads")

    sub.add_parser("backtest", parents=[common], help="out-of-time evaluation on stored data")

    p = sub.add_parser("forecast", parents=[common], help="baseline forecast, no overrides")
    p.add_argument("--horizon", type=int, help="days ahead (default from config)")

    p = sub.add_parser("simulate", parents=[common], help="what-if scenario forecast")
    p.add_argument("--horizon", type=int)
    p.add_argument(
        "--set",
        dest="sets",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="scenario knob: a policy_* level, mobility_multiplier, "
        "tests_multiplier, vaccine.coverage, vaccine.ramp_days, "
        "vaccine.efficacy, vaccine.generation_interval_days",
    )

    p = sub.add_parser("explain", parents=[common], help="local explanation for one date")
    p.add_argument("--date", required=True, metavar="YYYY-MM-DD")
    p.add_argument("--n-samples", type=int)
    p.add_argument("--kernel-width", type=float)
    p.add_argument("--halflife", type=float, help="recency half-life in days")
    p.add_argument("--case-floor", type=float)
    p.add_argument("--surrogate-ridge", type=float)
    p.add_argument("--top", type=int, default=10, help="contributions to print")

    p = sub.add_parser("best-case", parents=[common], help="rank scenarios on a grid")
    p.add_argument(
        "--levels",
        action="append",
        default=[],
        metavar="POLICY=L1,L2,...",
        help="candidate levels per policy column (repeatable)",
    )
    p.add_argument(
        "--coverage-ramp",
        dest="coverage_ramps",
        action="append",
        default=[],
        metavar="END:DAYS",
        help="vaccine coverage ramp candidates (repeatable)",
    )
    p.add_argument("--efficacies", metavar="E1,E2,...", help="vaccine efficacy candidates")
    p.add_argument("--w-protect", type=float, default=1.0)
    p.add_argument("--w-revenue", type=float, default=1.0)
    p.add_argument("--horizon", type=int)
    p.add_argument("--top", type=int, help="only print the best N")

    p = sub.add_parser("serve", parents=[common], help="run the HTTP service")
    p.add_argument("--host")
    p.add_argument("--port", type=int)

    return parser


def _load_run_config(ns: argparse.Namespace) -> RunConfig:
    overrides = {}
    if ns.data_dir:
        overrides["data_dir"] = ns.data_dir
    if ns.seed is not None:
        overrides["seed"] = str(ns.seed)
    return load_config(ns.config, overrides)


def _require_region(ns: argparse.Namespace) -> str:
    if not ns.region:
        raise _Usage(f"{ns.command}: --region is required")
    return ns.region


def _emit(ns: argparse.Namespace, obj, lines: list[str]) -> None:
    if ns.json:
        print(json.dumps(obj, indent=2, sort_keys=True))
    else:
        for line in lines:
            print(line)


def _report_lines(report) -> list[str]:
    lines = [f"ok: {report.ok}", f"date gaps: {report.date_gaps}"]
    for name, col in report.columns.items():
        if col.missing or col.negative or col.bound_violations:
            lines.append(
                f"  {name}: missing={col.missing} negative={col.negative} "
                f"bound_violations={col.bound_violations}"
            )
    return lines


def _parse_date_arg(raw: str) -> date:
    try:
        return date.fromisoformat(raw)
    except ValueError as exc:
        raise _Usage(f"--date: expected YYYY-MM-DD, got {raw!r}") from exc


def _scenario_from_sets(sets: list[str], horizon: int) -> ScenarioSpec:
    overrides: dict[str, tuple[float, ...]] = {}
    mobility, tests = 1.0, 1.0
    vaccine_knobs: dict[str, float] = {}
    for item in sets:
        if "=" not in item:
            raise _Usage(f"--set needs KEY=VALUE, got {item!r}")
        key, _, raw = item.partition("=")
        key = key.strip()
        try:
            value = float(raw)
        except ValueError as exc:
            raise _Usage(f"--set {key}: expected a number, got {raw!r}") from exc
        if key.startswith("policy_"):
            overrides[key] = (value,)
        elif key == "mobility_multiplier":
            mobility = value
        elif key == "tests_multiplier":
            tests = value
        elif key == "horizon_days":
            horizon = int(value)
        elif key.startswith("vaccine."):
            vaccine_knobs[key[len("vaccine.") :]] = value
        else:
            raise _Usage(f"--set: unknown key {key!r}")
    vaccine: Optional[VaccineSpec] = None
    if vaccine_knobs:
        unknown = set(vaccine_knobs) - {
            "coverage",
            "ramp_days",
            "efficacy",
            "generation_interval_days",
        }
        if unknown:
            raise _Usage(f"--set: unknown vaccine keys {sorted(unknown)}")
        if "coverage" not in vaccine_knobs or "efficacy" not in vaccine_knobs:
            raise _Usage("--set: a vaccine needs vaccine.coverage and vaccine.efficacy")
        vaccine = VaccineSpec(
            coverage_path=coverage_ramp(
                vaccine_knobs["coverage"],
                int(vaccine_knobs.get("ramp_days", 0)),
                horizon,
            ),
            efficacy=vaccine_knobs["efficacy"],
            generation_interval_days=vaccine_knobs.get("generation_interval_days", 5.0),
        )
    return ScenarioSpec(
        horizon_days=horizon,
        policy_overrides=overrides,
        mobility_multiplier=mobility,
        tests_multiplier=tests,
        vaccine=vaccine,
    )


def _forecast_lines(result) -> list[str]:
    total_base = sum(result.cases_baseline)
    total_scen = sum(result.cases_scenario)
    lines = [
        f"horizon: {len(result.dates)} days ({result.dates[0]} .. {result.dates[-1]})",
        f"cumulative cases: baseline {total_base:.0f}, scenario {total_scen:.0f}",
        f"mean revenue delta: baseline {sum(result.revenue_baseline)/len(result.dates):+.4f}, "
        f"scenario {sum(result.revenue_scenario)/len(result.dates):+.4f}",
        f"final Rt: {result.rt_path[-1]:.3f}  final protect rate: {result.protect_rate_path[-1]:.3f}",
    ]
    return lines


def _cmd_ingest(ns: argparse.Namespace, config: RunConfig) -> int:
    region = _require_region(ns)
    store = RegionStore(config)
    report = store.put_data(region, ns.csv.read_bytes())
    _emit(ns, report.to_json(), _report_lines(report))
    return 0


def _cmd_validate(ns: argparse.Namespace, config: RunConfig) -> int:
    report = validate(parse_region_csv(ns.csv.read_bytes(), region_id=ns.region or "unspecified"))
    _emit(ns, report.to_json(), _report_lines(report))
    return 0


def _cmd_train(ns: argparse.Namespace, config: RunConfig) -> int:
    region = _require_region(ns)
    summary = RegionStore(config).train(region)
    lines = [
        f"trained {region} through {summary['trained_through']}",
        f"backtest r2: {summary['backtest_r_squared']:.4f}",
    ]
    for name, head in summary["heads"].items():
        weights = head["ensemble_weights"]
        lines.append(
            f"  {name}: weights linear={weights['linear']:.3f} "
            f"forest={weights['forest']:.3f} gbm={weights['gbm']:.3f}"
        )
    _emit(ns, summary, lines)
    return 0


def _cmd_backtest(ns: argparse.Namespace, config: RunConfig) -> int:
    region = _require_region(ns)
    store = RegionStore(config)
    report = run_backtest(
        store.frame(region),
        BacktestConfig(
            lag_spec=config.lag_spec,
            grids=config.grids(),
            val_days=config.val_days,
            test_days=config.test_days,
            seed=config.seed,
        ),
    )
    _emit(
        ns,
        report.to_json(),
        [
            f"r-squared: {report.r_squared:.4f}",
            f"trained through {report.train_through}, tested "
            f"{report.test_dates[0]} .. {report.test_dates[-1]}",
        ],
    )
    return 0


def _cmd_forecast(ns: argparse.Namespace, config: RunConfig) -> int:
    region = _require_region(ns)
    spec = ScenarioSpec(horizon_days=ns.horizon or config.horizon_days)
    result = RegionStore(config).simulate(region, spec)
    _emit(ns, result.to_json(), _forecast_lines(result))
    return 0


def _cmd_simulate(ns: argparse.Namespace, config: RunConfig) -> int:
    region = _require_region(ns)
    spec = _scenario_from_sets(ns.sets, ns.horizon or config.horizon_days)
    result = RegionStore(config).simulate(region, spec)
    _emit(ns, result.to_json(), _forecast_lines(result))
    return 0


def _cmd_explain(ns: argparse.Namespace, config: RunConfig) -> int:
    region = _require_region(ns)
    kwargs = {"seed": config.seed}
    if ns.n_samples is not None:
        kwargs["n_samples"] = ns.n_samples
    if ns.kernel_width is not None:
        kwargs["kernel_width"] = ns.kernel_width
    if ns.halflife is not None:
        kwargs["recency_halflife_days"] = ns.halflife
    if ns.case_floor is not None:
        kwargs["case_weight_floor"] = ns.case_floor
    if ns.surrogate_ridge is not None:
        kwargs["surrogate_ridge"] = ns.surrogate_ridge
    explanation = RegionStore(config).explain(
        region, _parse_date_arg(ns.date), LimeConfig(**kwargs)
    )
    lines = [
        f"explanation for {explanation.target_date} (fidelity r2 = {explanation.fidelity_r2:.4f})"
    ]
    for name, weight in explanation.contributions[: ns.top]:
        lines.append(f"  {name:32s} {weight:+.5f}")
    _emit(ns, explanation.to_json(), lines)
    return 0


def _cmd_best_case(ns: argparse.Namespace, config: RunConfig) -> int:
    region = _require_region(ns)
    levels: dict[str, tuple[int, ...]] = {}
    for item in ns.levels:
        if "=" not in item:
            raise _Usage(f"--levels needs POLICY=L1,L2,..., got {item!r}")
        name, _, raw = item.partition("=")
        try:
            levels[name.strip()] = tuple(int(v) for v in raw.split(",") if v.strip())
        except ValueError as exc:
            raise _Usage(f"--levels {name}: levels must be integers") from exc
    ramps = []
    for item in ns.coverage_ramps:
        try:
            end, _, days = item.partition(":")
            ramps.append((float(end), int(days or 0)))
        except ValueError as exc:
            raise _Usage(f"--coverage-ramp needs END:DAYS, got {item!r}") from exc
    efficacies = ()
    if ns.efficacies:
        try:
            efficacies = tuple(float(v) for v in ns.efficacies.split(",") if v.strip())
        except ValueError as exc:
            raise _Usage(f"--efficacies: expected numbers, got {ns.efficacies!r}") from exc
    space = SearchSpace(
        policy_levels=levels,
        coverage_ramps=tuple(ramps),
        efficacies=efficacies,
        horizon_days=ns.horizon or config.horizon_days,
    )
    ranked = RegionStore(config).best_case(region, space, (ns.w_protect, ns.w_revenue))
    if ns.top is not None:
        ranked = ranked[: ns.top]
    lines = []
    for rank, (spec, _result, objective) in enumerate(ranked, start=1):
        knobs = {k: v[0] for k, v in spec.policy_overrides.items()}
        if spec.vaccine:
            knobs["coverage"] = spec.vaccine.coverage_path[-1]
            knobs["efficacy"] = spec.vaccine.efficacy
        lines.append(f"{rank}. objective={objective:+.5f} {knobs}")
    payload = {
        "ranked": [
            {"scenario": spec.to_json(), "objective": obj, "result": result.to_json()}
            for spec, result, obj in ranked
        ]
    }
    _emit(ns, payload, lines)
    return 0


def _cmd_serve(ns: argparse.Namespace, config: RunConfig) -> int:
    from .api import serve

    overrides = {}
    if ns.host:
        overrides["host"] = ns.host
    if ns.port is not None:
        overrides["port"] = str(ns.port)
    if overrides:
        from .config import apply_settings

        config = apply_settings(config, overrides)
    serve(config)
    return 0


_COMMANDS = {
    "ingest": _cmd_ingest,
    "validate": _cmd_validate,
    "train": _cmd_train,
    "backtest": _cmd_backtest,
    "forecast": _cmd_forecast,
    "simulate": _cmd_simulate,
    "explain": _cmd_explain,
    "best-case": _cmd_best_case,
    "serve": _cmd_serve,
}


def cli(argv: list[str]) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config = _load_run_config(ns)
        return _COMMANDS[ns.command](ns, config)
    except _Usage as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except IntervenoError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(cli(sys.argv[1:]))


if __name__ == "__main__":
    entrypoint()
