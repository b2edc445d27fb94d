"""Run configuration: a single YAML/JSON file validated against a closed
schema (unknown keys are errors, seeds are always explicit)."""

from __future__ import annotations

import glob
import os
from dataclasses import dataclass, field

import yaml

from layerprobe.corpus import SPLIT_NAMES
from layerprobe.probes.forest import ForestConfig
from layerprobe.probes.mlp import MlpConfig
from layerprobe.probes.tuning import (
    DEFAULT_FOREST_GRID,
    DEFAULT_LINEAR_GRID,
    FAMILIES,
)

TASKS = ("lemma", "inflection")


class ConfigError(ValueError):
    pass


_MLP_KEYS = {"hidden", "epochs", "batch_size", "learning_rate", "weight_decay"}
_FOREST_KEYS = {"trees", "depth", "max_classes"}

_SCHEMA = {
    "output": str,
    "seeds": {"split": int, "control": int, "probe": int},
    "dataset": {
        "conllu": [str],
        "manifest": str,
        "split": str,
        "controls": {"lemma": str, "inflection": str},
    },
    "models": [{"id": str, "store": str}],
    "tasks": [str],
    "families": [str],
    "grids": {"linear": [(int, float)], "mlp": [dict], "forest": [dict]},
    "mlp_base": dict,
    "thresholds": [(int, float)],
    "pca_split": str,
    "analogy": {"queries": str, "words": str},
    "workers": int,
}


def _check(node, schema, path: str) -> None:
    if isinstance(schema, dict):
        if not isinstance(node, dict):
            raise ConfigError(f"{path or 'config'}: expected a mapping")
        for key in node:
            if key not in schema:
                raise ConfigError(f"unknown config key: {path + '.' if path else ''}{key}")
        for key, value in node.items():
            _check(value, schema[key], f"{path + '.' if path else ''}{key}")
    elif isinstance(schema, list):
        if not isinstance(node, list):
            raise ConfigError(f"{path}: expected a list")
        for i, item in enumerate(node):
            _check(item, schema[0], f"{path}[{i}]")
    elif schema is dict:
        if not isinstance(node, dict):
            raise ConfigError(f"{path}: expected a mapping")
    else:
        types = schema if isinstance(schema, tuple) else (schema,)
        if isinstance(node, bool) or not isinstance(node, types):
            raise ConfigError(f"{path}: expected {'/'.join(t.__name__ for t in types)}")


def _mlp_config(base: dict, override: dict, path: str) -> MlpConfig:
    merged = dict(base)
    for key, value in override.items():
        if key not in _MLP_KEYS:
            raise ConfigError(f"unknown config key: {path}.{key}")
        merged[key] = value
    return MlpConfig(**merged)


def _forest_config(override: dict, path: str) -> ForestConfig:
    for key in override:
        if key not in _FOREST_KEYS:
            raise ConfigError(f"unknown config key: {path}.{key}")
    return ForestConfig(**override)


@dataclass(frozen=True)
class ModelSpec:
    model_id: str
    store: str


@dataclass(frozen=True)
class RunConfig:
    raw: dict
    output: str
    seeds: dict
    conllu: tuple[str, ...] = ()
    manifest: str = ""
    split: str = ""
    controls: dict = field(default_factory=dict)
    models: tuple[ModelSpec, ...] = ()
    tasks: tuple[str, ...] = TASKS
    families: tuple[str, ...] = ("linear", "mlp")
    linear_grid: tuple[float, ...] = DEFAULT_LINEAR_GRID
    mlp_grid: tuple[MlpConfig, ...] = (MlpConfig(),)
    forest_grid: tuple[ForestConfig, ...] = DEFAULT_FOREST_GRID
    thresholds: tuple[int, ...] = (50, 60, 70, 80, 90, 95, 99, 100)
    pca_split: str = "train"
    analogy_queries: str = ""
    analogy_words: str = ""
    workers: int | None = None

    def grid_for(self, family: str):
        return {
            "linear": self.linear_grid,
            "mlp": self.mlp_grid,
            "forest": self.forest_grid,
        }[family]


def load_config(path) -> RunConfig:
    """Parse and validate a run configuration file."""
    try:
        with open(path, encoding="utf-8") as f:
            raw = yaml.safe_load(f)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except yaml.YAMLError as err:
        raise ConfigError(f"config is not valid YAML: {err}")
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")
    _check(raw, _SCHEMA, "")

    for required in ("output", "seeds"):
        if required not in raw:
            raise ConfigError(f"missing required config key: {required}")
    seeds = raw["seeds"]
    for name in ("split", "control", "probe"):
        if name not in seeds:
            raise ConfigError(f"seeds.{name} must be set explicitly")

    dataset = raw.get("dataset", {})
    output = raw["output"]
    manifest = dataset.get("manifest", os.path.join(output, "manifest.jsonl"))
    split = dataset.get("split", os.path.join(output, "split.json"))
    controls = dataset.get(
        "controls",
        {task: os.path.join(output, f"control_{task}.json") for task in TASKS},
    )

    tasks = tuple(raw.get("tasks", TASKS))
    for task in tasks:
        if task not in TASKS:
            raise ConfigError(f"unknown task {task!r}")
    families = tuple(raw.get("families", ("linear", "mlp")))
    for family in families:
        if family not in FAMILIES:
            raise ConfigError(f"unknown probe family {family!r}")
    pca_split = raw.get("pca_split", "train")
    if pca_split not in SPLIT_NAMES:
        raise ConfigError(f"pca_split must be one of {SPLIT_NAMES}")

    grids = raw.get("grids", {})
    mlp_base = raw.get("mlp_base", {})
    for key in mlp_base:
        if key not in _MLP_KEYS:
            raise ConfigError(f"unknown config key: mlp_base.{key}")
    try:
        linear_grid = tuple(float(v) for v in grids.get("linear", DEFAULT_LINEAR_GRID))
        mlp_grid = tuple(
            _mlp_config(mlp_base, o, f"grids.mlp[{i}]")
            for i, o in enumerate(grids.get("mlp", [{}]))
        )
        if "forest" in grids:
            forest_grid = tuple(
                _forest_config(o, f"grids.forest[{i}]")
                for i, o in enumerate(grids["forest"])
            )
        else:
            forest_grid = DEFAULT_FOREST_GRID
    except (TypeError, ValueError) as err:
        if isinstance(err, ConfigError):
            raise
        raise ConfigError(f"bad grid entry: {err}")

    analogy = raw.get("analogy", {})
    return RunConfig(
        raw=raw,
        output=output,
        seeds=dict(seeds),
        conllu=tuple(dataset.get("conllu", ())),
        manifest=manifest,
        split=split,
        controls=dict(controls),
        models=tuple(ModelSpec(m["id"], m["store"]) for m in raw.get("models", ())),
        tasks=tasks,
        families=families,
        linear_grid=linear_grid,
        mlp_grid=mlp_grid,
        forest_grid=forest_grid,
        thresholds=tuple(int(t) for t in raw.get("thresholds", (50, 60, 70, 80, 90, 95, 99, 100))),
        pca_split=pca_split,
        analogy_queries=analogy.get("queries", ""),
        analogy_words=analogy.get("words", ""),
        workers=raw.get("workers"),
    )


def expand_conllu_paths(patterns) -> list[str]:
    paths: list[str] = []
    for pattern in patterns:
        matches = sorted(glob.glob(pattern))
        paths.extend(matches if matches else [pattern])
    return paths


def override_output(config: RunConfig, output: str) -> RunConfig:
    """Point the run at a different output directory, re-deriving any
    dataset paths that were defaulted rather than configured."""
    dataset = config.raw.get("dataset", {})
    manifest = dataset.get("manifest", os.path.join(output, "manifest.jsonl"))
    split = dataset.get("split", os.path.join(output, "split.json"))
    controls = dataset.get(
        "controls",
        {task: os.path.join(output, f"control_{task}.json") for task in TASKS},
    )
    return RunConfig(
        **{
            **config.__dict__,
            "output": output,
            "manifest": manifest,
            "split": split,
            "controls": dict(controls),
        }
    )


def apply_seed_overrides(config: RunConfig, overrides) -> RunConfig:
    """Apply --seed-override KEY=VALUE pairs."""
    if not overrides:
        return config
    seeds = dict(config.seeds)
    raw = dict(config.raw)
    for item in overrides:
        key, sep, value = item.partition("=")
        if not sep or key not in seeds:
            raise ConfigError(f"bad seed override {item!r}; use split|control|probe=INT")
        try:
            seeds[key] = int(value)
        except ValueError:
            raise ConfigError(f"seed override {item!r} is not an integer")
    raw["seeds"] = seeds
    return RunConfig(**{**config.__dict__, "seeds": seeds, "raw": raw})
