"""Versioned JSON artifact files with exact float round-trip."""
from __future__ import annotations

import json
import os
import tempfile
from datetime import date
from pathlib import Path
from typing import Union

import numpy as np

from .ensemble import EnsembleConfig, FeatureSchema, ModelArtifact
from .errors import IoError, ParseError, VersionError
from .forest import Forest, ForestParams
from .gbm import GBM, GbmParams
from .linear import LinearModel, LinearParams
from .tree import Leaf, Node, RegressionTree, Split, TreeParams

FORMAT_VERSION = 1


def _node_to_json(node: Node) -> dict:
    if isinstance(node, Leaf):
        return {"value": node.value}
    return {
        "feature": node.feature,
        "threshold": node.threshold,
        "left": _node_to_json(node.left),
        "right": _node_to_json(node.right),
    }


def _node_from_json(obj: dict) -> Node:
    if "value" in obj:
        return Leaf(value=float(obj["value"]))
    return Split(
        feature=int(obj["feature"]),
        threshold=float(obj["threshold"]),
        left=_node_from_json(obj["left"]),
        right=_node_from_json(obj["right"]),
    )


def _tree_to_json(tree: RegressionTree) -> dict:
    return {"root": _node_to_json(tree.root), "n_features": tree.n_features}


def _tree_from_json(obj: dict) -> RegressionTree:
    return RegressionTree(root=_node_from_json(obj["root"]), n_features=int(obj["n_features"]))


def _config_to_json(config: EnsembleConfig) -> dict:
    return {
        "linear": {"ridge_lambda": config.linear.ridge_lambda},
        "forest": {
            "tree": {
                "max_depth": config.forest.tree.max_depth,
                "min_samples_leaf": config.forest.tree.min_samples_leaf,
            },
            "n_trees": config.forest.n_trees,
            "feature_subsample": config.forest.feature_subsample,
            "seed": config.forest.seed,
        },
        "gbm": {
            "tree": {
                "max_depth": config.gbm.tree.max_depth,
                "min_samples_leaf": config.gbm.tree.min_samples_leaf,
            },
            "n_rounds": config.gbm.n_rounds,
            "learning_rate": config.gbm.learning_rate,
        },
        "val_days": config.val_days,
        "seed": config.seed,
    }


def _config_from_json(obj: dict) -> EnsembleConfig:
    forest = obj["forest"]
    gbm = obj["gbm"]
    return EnsembleConfig(
        linear=LinearParams(ridge_lambda=float(obj["linear"]["ridge_lambda"])),
        forest=ForestParams(
            tree=TreeParams(
                max_depth=int(forest["tree"]["max_depth"]),
                min_samples_leaf=int(forest["tree"]["min_samples_leaf"]),
            ),
            n_trees=int(forest["n_trees"]),
            feature_subsample=float(forest["feature_subsample"]),
            seed=int(forest["seed"]),
        ),
        gbm=GbmParams(
            tree=TreeParams(
                max_depth=int(gbm["tree"]["max_depth"]),
                min_samples_leaf=int(gbm["tree"]["min_samples_leaf"]),
            ),
            n_rounds=int(gbm["n_rounds"]),
            learning_rate=float(gbm["learning_rate"]),
        ),
        val_days=int(obj["val_days"]),
        seed=int(obj["seed"]),
    )


def artifact_to_json(artifact: ModelArtifact) -> dict:
    return {
        "format_version": artifact.format_version,
        "target_name": artifact.target_name,
        "trained_through": artifact.trained_through.isoformat(),
        "seed": artifact.seed,
        "ensemble_weights": list(artifact.ensemble_weights),
        "val_r2": list(artifact.val_r2),
        "feature_schema": {
            "column_names": list(artifact.feature_schema.column_names),
            "controllable": list(artifact.feature_schema.controllable),
        },
        "hyperparams": _config_to_json(artifact.hyperparams),
        "base_models": {
            "linear": {
                "slopes": [float(s) for s in artifact.linear.slopes],
                "intercept": artifact.linear.intercept,
                "n_features": artifact.linear.n_features,
            },
            "forest": {
                "trees": [_tree_to_json(t) for t in artifact.forest.trees],
                "n_features": artifact.forest.n_features,
            },
            "gbm": {
                "base_value": artifact.gbm.base_value,
                "learning_rate": artifact.gbm.learning_rate,
                "trees": [_tree_to_json(t) for t in artifact.gbm.trees],
                "n_features": artifact.gbm.n_features,
            },
        },
    }


def artifact_from_json(doc: dict) -> ModelArtifact:
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise VersionError(f"unsupported artifact format_version {version!r}")
    try:
        base = doc["base_models"]
        linear = LinearModel(
            slopes=np.asarray(base["linear"]["slopes"], dtype=float),
            intercept=float(base["linear"]["intercept"]),
            n_features=int(base["linear"]["n_features"]),
        )
        forest = Forest(
            trees=[_tree_from_json(t) for t in base["forest"]["trees"]],
            n_features=int(base["forest"]["n_features"]),
        )
        gbm = GBM(
            base_value=float(base["gbm"]["base_value"]),
            learning_rate=float(base["gbm"]["learning_rate"]),
            trees=[_tree_from_json(t) for t in base["gbm"]["trees"]],
            n_features=int(base["gbm"]["n_features"]),
        )
        return ModelArtifact(
            linear=linear,
            forest=forest,
            gbm=gbm,
            ensemble_weights=tuple(float(w) for w in doc["ensemble_weights"]),
            val_r2=tuple(float(v) for v in doc["val_r2"]),
            feature_schema=FeatureSchema(
                column_names=tuple(doc["feature_schema"]["column_names"]),
                controllable=tuple(bool(b) for b in doc["feature_schema"]["controllable"]),
            ),
            target_name=str(doc["target_name"]),
            trained_through=date.fromisoformat(doc["trained_through"]),
            hyperparams=_config_from_json(doc["hyperparams"]),
            seed=int(doc["seed"]),
            format_version=int(version),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed artifact document: {exc}") from exc


def save_artifact(artifact: ModelArtifact, path: Union[str, Path]) -> None:
    """Write the artifact atomically: temp file in place, then rename."""
    path = Path(path)
    text = json.dumps(artifact_to_json(artifact), sort_keys=True, indent=1)
    try:
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        os.replace(tmp, path)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def load_artifact(path: Union[str, Path]) -> ModelArtifact:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except ValueError as exc:
        raise ParseError(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError(f"artifact document in {path} is not an object")
    return artifact_from_json(doc)
