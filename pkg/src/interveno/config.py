"""Run configuration: defaults, flat key=value files, and overrides.

Resolution order is defaults < config file < explicit overrides. The file
path comes from the caller or the INTERVENO_CONFIG environment variable.
"""
from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Union

from .ensemble import TuningGrids
from .errors import ConfigError
from .features import LagSpec, default_lag_spec
from .forest import ForestParams
from .gbm import GbmParams
from .linear import LinearParams
from .tree import TreeParams

ENV_CONFIG_PATH = "INTERVENO_CONFIG"


@dataclass(frozen=True)
class GridAxes:
    """Per-model hyperparameter axes expanded to full grids at train time."""

    ridge_lambdas: tuple[float, ...] = (0.01, 0.1, 1.0, 10.0)
    forest_trees: tuple[int, ...] = (100, 300)
    forest_depths: tuple[int, ...] = (4, 8)
    forest_feature_subsample: float = 1.0 / 3.0
    gbm_rounds: tuple[int, ...] = (100, 300)
    gbm_learning_rates: tuple[float, ...] = (0.05, 0.1)
    gbm_depths: tuple[int, ...] = (2, 3)

    def to_grids(self, seed: int) -> TuningGrids:
        return TuningGrids(
            linear=tuple(LinearParams(ridge_lambda=lam) for lam in self.ridge_lambdas),
            forest=tuple(
                ForestParams(
                    tree=TreeParams(max_depth=depth),
                    n_trees=n,
                    feature_subsample=self.forest_feature_subsample,
                    seed=seed,
                )
                for n, depth in itertools.product(self.forest_trees, self.forest_depths)
            ),
            gbm=tuple(
                GbmParams(tree=TreeParams(max_depth=depth), n_rounds=r, learning_rate=lr)
                for r, lr, depth in itertools.product(
                    self.gbm_rounds, self.gbm_learning_rates, self.gbm_depths
                )
            ),
        )


@dataclass(frozen=True)
class RunConfig:
    data_dir: Path = Path("data")
    lag_spec: LagSpec = field(default_factory=default_lag_spec)
    grid_axes: GridAxes = GridAxes()
    test_days: int = 14
    horizon_days: int = 35
    val_days: int = 14
    seed: int = 0
    host: str = "127.0.0.1"
    port: int = 8000

    def grids(self) -> TuningGrids:
        return self.grid_axes.to_grids(self.seed)


def _parse_int(key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}") from exc


def _parse_float(key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from exc


def _parse_list(key: str, raw: str, kind) -> tuple:
    return tuple(kind(key, part.strip()) for part in raw.split(",") if part.strip())


def _parse_bool(key: str, raw: str) -> bool:
    if raw.lower() in ("true", "1", "yes"):
        return True
    if raw.lower() in ("false", "0", "no"):
        return False
    raise ConfigError(f"{key}: expected true/false, got {raw!r}")


def parse_config_text(text: str) -> dict[str, str]:
    """key=value lines; '#' starts a comment; blank lines ignored."""
    out: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, _, value = stripped.partition("=")
        out[key.strip()] = value.strip()
    return out


def apply_settings(config: RunConfig, settings: dict[str, str]) -> RunConfig:
    axes = config.grid_axes
    lags = dict(config.lag_spec.lags)
    current = dict(config.lag_spec.include_current)
    lag_touched = False
    for key, raw in settings.items():
        if key == "data_dir":
            config = replace(config, data_dir=Path(raw))
        elif key == "test_days":
            config = replace(config, test_days=_parse_int(key, raw))
        elif key == "horizon_days":
            config = replace(config, horizon_days=_parse_int(key, raw))
        elif key == "val_days":
            config = replace(config, val_days=_parse_int(key, raw))
        elif key == "seed":
            config = replace(config, seed=_parse_int(key, raw))
        elif key == "host":
            config = replace(config, host=raw)
        elif key == "port":
            config = replace(config, port=_parse_int(key, raw))
        elif key == "grid.ridge_lambdas":
            axes = replace(axes, ridge_lambdas=_parse_list(key, raw, _parse_float))
        elif key == "grid.forest_trees":
            axes = replace(axes, forest_trees=_parse_list(key, raw, _parse_int))
        elif key == "grid.forest_depths":
            axes = replace(axes, forest_depths=_parse_list(key, raw, _parse_int))
        elif key == "grid.forest_feature_subsample":
            axes = replace(axes, forest_feature_subsample=_parse_float(key, raw))
        elif key == "grid.gbm_rounds":
            axes = replace(axes, gbm_rounds=_parse_list(key, raw, _parse_int))
        elif key == "grid.gbm_learning_rates":
            axes = replace(axes, gbm_learning_rates=_parse_list(key, raw, _parse_float))
        elif key == "grid.gbm_depths":
            axes = replace(axes, gbm_depths=_parse_list(key, raw, _parse_int))
        elif key.startswith("lags."):
            lags[key[len("lags.") :]] = tuple(
                int(v) for v in _parse_list(key, raw, _parse_int)
            )
            lag_touched = True
        elif key.startswith("current."):
            current[key[len("current.") :]] = _parse_bool(key, raw)
            lag_touched = True
        else:
            raise ConfigError(f"unknown config key {key!r}")
    config = replace(config, grid_axes=axes)
    if lag_touched:
        config = replace(config, lag_spec=LagSpec(lags=lags, include_current=current))
    return config


def load_config(
    path: Optional[Union[str, Path]] = None, overrides: Optional[dict[str, str]] = None
) -> RunConfig:
    config = RunConfig()
    resolved = path or os.environ.get(ENV_CONFIG_PATH)
    if resolved:
        try:
            text = Path(resolved).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config file {resolved}: {exc}") from exc
        config = apply_settings(config, parse_config_text(text))
    if overrides:
        config = apply_settings(config, overrides)
    return config
