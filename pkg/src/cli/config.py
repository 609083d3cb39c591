"""Run configuration: a strict JSON schema with explicit defaults.

A run is described by seven blocks: ``model``, ``innovation``, ``grid``,
``mc``, ``quad``, ``output`` and ``experiment``. Values resolve as
schema defaults < environment defaults < config file < command-line flags.
Unknown keys are rejected everywhere except the model parameter maps, which
the model registry checks.
"""

import copy
import json
import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

from src.density.bridge_density import BridgeConfig
from src.density.chain import LatticeConfig
from src.edgeworth.corrections import ExpansionContext
from src.edgeworth.kernels import QuadratureConfig
from src.limits.parallel import MonteCarloConfig
from src.models.coefficients import CoefficientModel
from src.models.grid import GridSpec
from src.models.innovations import InnovationModel
from src.models.registry import ModelRegistry
from src.models.validation import SampleGrid, ScheduleConfig
from src.utils.errors import ConfigError

# Get the module logger
logger = logging.getLogger(__name__)

COMMON_DEFAULTS: Dict[str, Any] = {
    "model": {"kind": "unit", "params": {}},
    "innovation": {"kind": "mixture", "params": {}},
    "grid": {"h": 0.001, "k": 100, "n": 10, "kh": None},
    "mc": {"n_paths": 2000, "seed": 12345, "chunk_size": 250, "workers": 1},
    "quad": {
        "time_nodes": 64,
        "space_nodes": 128,
        "space_sd": 10.0,
        "rtol": 1e-3,
        "atol": 1e-10,
        "nested_time_nodes": 32,
        "nested_space_nodes": 48,
        "nested_lattice_points": 64,
        "nested_space_sd": 8.0,
        "nested_rtol": 5e-3,
        "nested_max_refinements": 2,
        "bridge_samples": 256,
        "bridge_mesh": 64,
        "lattice_std_multiplier": 12.0,
        "lattice_spacing_fraction": 0.125,
        "lattice_max_cells": 4096,
        "leak_tolerance": 1e-6,
    },
    "output": {"format": None, "path": None},
}

EXPERIMENT_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "validate": {
        "states_lower": -5.0,
        "states_upper": 5.0,
        "states_points": 21,
        "kappa": 0.19,
        "upper_constant": 1.0,
        "lower_constant": 10.0,
    },
    "simulate": {"process": "chain", "paths": 4, "x0": 0.0},
    "density": {
        "quantity": "p",
        "t": [0.1, 0.5, 1.0],
        "x": [0.0],
        "y": [-1.0, 0.0, 1.0, 2.0],
    },
    "edgeworth": {
        "t": [0.1],
        "x": [0.0],
        "y": [-0.5, 0.0, 0.1, 0.5],
        "second_order": True,
        "method": "auto",
    },
    "regime": {"k_values": [64, 256, 1024], "x0": 0.0},
    "clt": {"c": 1.0, "x0": 0.0},
    "remainder": {"k_values": [4, 8, 16], "x": 0.0},
    "euler-bench": {"k_values": [4, 16, 64], "x0": 0.0},
}

# Subcommands that write tables rather than reports.
TABLE_COMMANDS = ("simulate", "density", "edgeworth")

# Keys whose content is checked by the model registry instead of the schema.
FREE_FORM = {("model", "params"), ("innovation", "params")}

OPTIONAL_TYPES: Dict[tuple, tuple] = {
    ("grid", "kh"): (int, float),
    ("output", "format"): (str,),
    ("output", "path"): (str,),
}


def schema_defaults(command: str) -> Dict[str, Any]:
    """Fully populated default configuration of a subcommand.

    Raises:
        ConfigError: If the subcommand is unknown
    """
    if command not in EXPERIMENT_DEFAULTS:
        raise ConfigError(f"Subcommand {command} is not supported")
    defaults = copy.deepcopy(COMMON_DEFAULTS)
    defaults["experiment"] = copy.deepcopy(EXPERIMENT_DEFAULTS[command])
    defaults["output"]["format"] = "csv" if command in TABLE_COMMANDS else "json"
    return defaults


def _check_type(path: tuple, default: Any, value: Any) -> Any:
    name = ".".join(path)
    if default is None:
        allowed = OPTIONAL_TYPES.get(path, (object,))
        if value is not None and (isinstance(value, bool) or not isinstance(value, allowed)):
            raise ConfigError(f"{name} has the wrong type: {value!r}")
        return value
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{name} must be a boolean, got {value!r}")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{name} must be an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{name} must be a number, got {value!r}")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{name} must be a string, got {value!r}")
        return value
    if isinstance(default, list):
        if not isinstance(value, list) or not value:
            raise ConfigError(f"{name} must be a non-empty list, got {value!r}")
        return [_check_type(path, default[0], item) for item in value]
    return value


def merge_block(defaults: Dict[str, Any], overrides: Mapping[str, Any], path: tuple = ()) -> Dict[str, Any]:
    """Overlay ``overrides`` on ``defaults``, rejecting unknown keys and bad types.

    Raises:
        ConfigError: On unknown keys or values of the wrong type
    """
    if not isinstance(overrides, Mapping):
        raise ConfigError(f"{'.'.join(path) or 'config'} must be an object")
    merged = copy.deepcopy(defaults)
    for key, value in overrides.items():
        here = path + (key,)
        if key not in defaults:
            raise ConfigError(f"Unknown configuration key {'.'.join(here)}")
        if here in FREE_FORM:
            if not isinstance(value, Mapping):
                raise ConfigError(f"{'.'.join(here)} must be an object")
            merged[key] = {**merged[key], **value}
        elif isinstance(defaults[key], dict):
            merged[key] = merge_block(defaults[key], value, here)
        else:
            merged[key] = _check_type(here, defaults[key], value)
    return merged


def _nest(dotted: Mapping[str, Any]) -> Dict[str, Any]:
    nested: Dict[str, Any] = {}
    for key, value in dotted.items():
        parts = key.split(".")
        node = nested
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = value
    return nested


@dataclass
class RunConfig:
    """A resolved, validated run configuration."""

    command: str
    model: Dict[str, Any]
    innovation: Dict[str, Any]
    grid: Dict[str, Any]
    mc: Dict[str, Any]
    quad: Dict[str, Any]
    output: Dict[str, Any]
    experiment: Dict[str, Any]

    def to_dict(self, include_workers: bool = False) -> Dict[str, Any]:
        """Serializable form; ``mc.workers`` only on request since it never changes results."""
        mc = dict(self.mc)
        if not include_workers:
            mc.pop("workers", None)
        return {
            "command": self.command,
            "model": copy.deepcopy(self.model),
            "innovation": copy.deepcopy(self.innovation),
            "grid": dict(self.grid),
            "mc": mc,
            "quad": dict(self.quad),
            "output": dict(self.output),
            "experiment": copy.deepcopy(self.experiment),
        }

    def grid_spec(self) -> GridSpec:
        return GridSpec(h=self.grid["h"], k=self.grid["k"], n=self.grid["n"])

    def coefficient_model(self, registry: Optional[ModelRegistry] = None) -> CoefficientModel:
        registry = registry or ModelRegistry()
        return registry.get_coefficient_model(self.model["kind"], self.model["params"])

    def innovation_model(
        self, coeff: CoefficientModel, registry: Optional[ModelRegistry] = None
    ) -> InnovationModel:
        registry = registry or ModelRegistry()
        return registry.get_innovation_model(self.innovation["kind"], self.innovation["params"], coeff)

    def monte_carlo(self) -> MonteCarloConfig:
        return MonteCarloConfig(**self.mc)

    def quadrature(self) -> QuadratureConfig:
        q = self.quad
        return QuadratureConfig(
            time_nodes=q["time_nodes"],
            space_nodes=q["space_nodes"],
            space_sd=q["space_sd"],
            rtol=q["rtol"],
            atol=q["atol"],
            nested_time_nodes=q["nested_time_nodes"],
            nested_space_nodes=q["nested_space_nodes"],
            nested_lattice_points=q["nested_lattice_points"],
            nested_space_sd=q["nested_space_sd"],
            nested_rtol=q["nested_rtol"],
            nested_max_refinements=q["nested_max_refinements"],
        )

    def bridge(self) -> BridgeConfig:
        return BridgeConfig(samples=self.quad["bridge_samples"], mesh=self.quad["bridge_mesh"], seed=self.mc["seed"])

    def lattice(self) -> LatticeConfig:
        return LatticeConfig(
            std_multiplier=self.quad["lattice_std_multiplier"],
            spacing_fraction=self.quad["lattice_spacing_fraction"],
            max_cells=self.quad["lattice_max_cells"],
            leak_tolerance=self.quad["leak_tolerance"],
        )

    def sample_grid(self) -> SampleGrid:
        e = self.experiment
        return SampleGrid(lower=e["states_lower"], upper=e["states_upper"], points=e["states_points"])

    def schedule(self) -> ScheduleConfig:
        e = self.experiment
        if "kappa" not in e:
            return ScheduleConfig()
        return ScheduleConfig(kappa=e["kappa"], upper_constant=e["upper_constant"], lower_constant=e["lower_constant"])

    def context(self, grid: Optional[GridSpec] = None) -> ExpansionContext:
        """Expansion context for this run's models, optionally on another grid."""
        coeff = self.coefficient_model()
        return ExpansionContext(
            coeff=coeff,
            innov=self.innovation_model(coeff),
            grid=grid or self.grid_spec(),
            quad=self.quadrature(),
            bridge=self.bridge(),
            schedule=self.schedule(),
        )


def _validate(config: RunConfig) -> None:
    config.grid_spec()
    config.monte_carlo()
    if config.output["format"] not in ("csv", "json"):
        raise ConfigError(f"output.format must be 'csv' or 'json', got {config.output['format']!r}")
    for key in (
        "time_nodes", "space_nodes", "nested_time_nodes", "nested_space_nodes", "nested_lattice_points", "bridge_samples"
    ):
        if config.quad[key] < 2:
            raise ConfigError(f"quad.{key} must be at least 2, got {config.quad[key]}")
    if config.quad["bridge_mesh"] < 2:
        raise ConfigError(f"quad.bridge_mesh must be at least 2, got {config.quad['bridge_mesh']}")
    if config.command == "simulate" and config.experiment["process"] not in ("chain", "euler", "diffusion"):
        raise ConfigError(f"experiment.process must be chain, euler or diffusion, not {config.experiment['process']}")
    for key in ("k_values",):
        if key in config.experiment and any(k < 1 for k in config.experiment[key]):
            raise ConfigError(f"experiment.{key} must hold positive integers")


def load_run_config(
    command: str,
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Mapping[str, Any]] = None,
    env_defaults: Optional[Mapping[str, Any]] = None,
) -> RunConfig:
    """Resolve the configuration of one run.

    Args:
        command: Subcommand name
        path: Optional JSON config file
        overrides: Dotted-key values from command-line flags, e.g. {"grid.k": 128}
        env_defaults: Dotted-key values from the environment, applied below the file

    Returns:
        The validated configuration

    Raises:
        ConfigError: If the file cannot be read or any value violates the schema
    """
    resolved = schema_defaults(command)
    if env_defaults:
        resolved = merge_block(resolved, _nest(env_defaults))
    if path is not None:
        try:
            with open(path) as handle:
                document = json.load(handle)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"Cannot read config {path}: {exc}") from exc
        resolved = merge_block(resolved, document)
        logger.info(f"Loaded configuration from {path}")
    if overrides:
        resolved = merge_block(resolved, _nest(overrides))

    grid = resolved["grid"]
    if grid["kh"] is not None:
        if isinstance(grid["k"], int) and grid["k"] > 0:
            grid["h"] = float(grid["kh"]) / grid["k"]
        grid["kh"] = None

    config = RunConfig(command=command, **resolved)
    _validate(config)
    output_dir = os.getenv("MARKOVDIFF_OUTPUT_DIR")
    if output_dir and config.output["path"] and not os.path.isabs(config.output["path"]):
        config.output["path"] = os.path.join(output_dir, config.output["path"])
    return config
