import math
import os
import re
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional

import yaml

from .exceptions import ConfigError

COMMANDS = ("simulate", "audit", "converge", "oracle")

_ASSIGNMENT = re.compile(r"^\s*([A-Za-z_][\w.]*)\s*=\s*(.*?)\s*$")

# block -> key -> expected type; model parameters are checked against
# ModelFactory metadata
_SETTINGS: Dict[str, Dict[str, type]] = {
    "grid": {"zmin": float, "n": float, "cells": int, "spacing": str},
    "time": {
        "method": str,
        "dt_init": float,
        "dt_min": float,
        "dt_max": float,
        "rel_tol": float,
        "abs_tol": float,
        "t_end": float,
        "snapshots": list,
        "adaptive": bool,
    },
    "initial": {
        "family": str,
        "number": float,
        "scale": float,
        "a": float,
        "b": float,
        "z0": float,
        "amplitude": float,
        "path": str,
    },
    "audit": {
        "samples": int,
        "seed": int,
        "deltas": list,
        "w_values": list,
        "tolerance": float,
        "z1_fraction": float,
        "decay_ratio": float,
    },
    "study": {"n_values": list, "t_end": float, "cells_per_doubling": int},
    "output": {"dir": str},
    "logging": {"level": str},
}

_REQUIRED: Dict[str, List[str]] = {
    "simulate": [
        "kernel.form",
        "probability.form",
        "grid.n",
        "time.t_end",
        "initial.family",
    ],
    "audit": ["kernel.form", "probability.form"],
    "converge": ["kernel.form", "probability.form", "initial.family", "study.n_values"],
    "oracle": [],
}

_INITIAL_FAMILIES = {
    "exponential": [],
    "uniform": ["a", "b"],
    "monodisperse": ["z0"],
    "tabulated": ["path"],
}


def flatten(tree: Dict[str, Any], prefix: str = "") -> Dict[str, Any]:
    """Turn nested blocks into dotted keys; dotted keys pass through unchanged"""
    flat: Dict[str, Any] = {}
    for key, value in (tree or {}).items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(flatten(value, f"{name}."))
        else:
            flat[name] = value
    return flat


class Config:
    """
    Configuration file reader.

    Accepts YAML, either nested (`kernel: {form: constant}`) or with flat dotted
    keys (`kernel.form: constant`), and plain `kernel.form = constant` lines.
    Values of the `key = value` form are typed with the YAML scalar rules.
    """

    def __init__(self, config_path: str):
        self.config_path = config_path
        self.config = self._load_config()

    def _load_config(self) -> Dict[str, Any]:
        with open(self.config_path, "r", encoding="utf-8") as f:
            text = f.read()
        lines = [
            line
            for line in text.splitlines()
            if line.strip() and not line.lstrip().startswith("#")
        ]
        if lines and all(_ASSIGNMENT.match(line) for line in lines):
            return self._parse_assignments(lines)
        try:
            loaded = yaml.safe_load(text)
        except yaml.YAMLError as e:
            raise ConfigError([f"{self.config_path}: not valid YAML ({e})"])
        if loaded is None:
            return {}
        if not isinstance(loaded, dict):
            raise ConfigError([f"{self.config_path}: expected a mapping of settings"])
        return flatten(loaded)

    def _parse_assignments(self, lines: List[str]) -> Dict[str, Any]:
        flat: Dict[str, Any] = {}
        for line in lines:
            key, raw = _ASSIGNMENT.match(line).groups()
            raw = raw.split(" #", 1)[0].strip()
            try:
                flat[key] = yaml.safe_load(raw) if raw else None
            except yaml.YAMLError:
                flat[key] = raw
        return flat

    def block(self, name: str) -> Dict[str, Any]:
        prefix = f"{name}."
        return {
            key[len(prefix) :]: value
            for key, value in self.config.items()
            if key.startswith(prefix)
        }


@dataclass(frozen=True)
class RunConfig:
    """Validated settings of one CLI invocation, defaults filled in"""

    command: str
    kernel: Dict[str, Any]
    probability: Dict[str, Any]
    breakup: Dict[str, Any]
    grid: Dict[str, Any]
    time: Dict[str, Any]
    initial: Dict[str, Any]
    audit: Dict[str, Any] = field(default_factory=dict)
    study: Dict[str, Any] = field(default_factory=dict)
    output_dir: str = "output"
    logging_level: str = "INFO"

    @property
    def allow_noncompliant(self) -> bool:
        return bool(self.kernel.get("allow_noncompliant", False))

    @property
    def truncation_n(self) -> float:
        return float(self.kernel.get("truncation_n", self.grid.get("n", math.inf)))


def _coerce(key: str, value: Any, expected: type, errors: List[str]) -> Any:
    try:
        if expected is bool:
            if isinstance(value, bool):
                return value
            raise ValueError
        if expected is list:
            items = value if isinstance(value, (list, tuple)) else [value]
            return [float(item) for item in items]
        if expected is int:
            if isinstance(value, bool) or float(value) != int(float(value)):
                raise ValueError
            return int(float(value))
        if expected is float:
            if isinstance(value, bool):
                raise ValueError
            return float(value)
        return str(value)
    except (TypeError, ValueError):
        errors.append(f"{key}={value!r} is not a valid {expected.__name__}")
        return None


def _validate_model_block(
    component: str, block: Dict[str, Any], errors: List[str]
) -> Dict[str, Any]:
    from src.model.model_factory import ModelFactory

    forms = ModelFactory.get_available_forms()[component]
    form = block.get("form")
    if form is None:
        return dict(block)
    if form not in forms:
        errors.append(f"{component}.form={form!r} is not one of {list(forms)}")
        return dict(block)

    extras = {"form"}
    if component == "kernel":
        extras |= {"allow_noncompliant", "truncation_n"}
    parameters = forms[form]["parameters"]
    validated: Dict[str, Any] = {"form": form}
    for key, value in block.items():
        if key in extras:
            continue
        if key not in parameters:
            errors.append(
                f"{component}.{key} is not a parameter of {component}.form={form}"
            )
            continue
        info = parameters[key]
        expected = str if info["type"] == "str" else float
        coerced = _coerce(f"{component}.{key}", value, expected, errors)
        if coerced is None:
            continue
        if "min" in info and coerced < info["min"]:
            errors.append(
                f"{component}.{key}={coerced} is below the minimum {info['min']}"
            )
        if "max" in info and coerced > info["max"]:
            errors.append(
                f"{component}.{key}={coerced} exceeds the maximum {info['max']}"
            )
        validated[key] = coerced
    for key, info in parameters.items():
        if key not in validated:
            if "default" in info:
                validated[key] = info["default"]
            else:
                errors.append(
                    f"missing key {component}.{key} "
                    f"(required by {component}.form={form})"
                )

    if component == "kernel":
        if "truncation_n" in block:
            truncation = _coerce(
                "kernel.truncation_n", block["truncation_n"], float, errors
            )
            if truncation is not None:
                if truncation <= 0:
                    errors.append("kernel.truncation_n must be positive")
                validated["truncation_n"] = truncation
        flag = block.get("allow_noncompliant", False)
        if not isinstance(flag, bool):
            errors.append(f"kernel.allow_noncompliant={flag!r} is not a valid bool")
            flag = False
        validated["allow_noncompliant"] = flag
    return validated


def _check_kernel_compliance(kernel: Dict[str, Any], errors: List[str]) -> None:
    if kernel.get("allow_noncompliant"):
        return
    if kernel.get("form") == "constant":
        errors.append(
            "kernel.form=constant is not of product-sum form "
            "with 0 < alpha <= beta < 1; "
            "set kernel.allow_noncompliant=true to run it anyway"
        )
        return
    if kernel.get("form") != "product_sum":
        return
    alpha, beta = kernel.get("alpha"), kernel.get("beta")
    if not isinstance(alpha, float) or not isinstance(beta, float):
        return
    if alpha > beta:
        errors.append(
            f"kernel.alpha={alpha:g} > kernel.beta={beta:g} "
            "violates 0 < alpha <= beta < 1"
        )
    elif not (0 < alpha and beta < 1):
        errors.append(
            f"kernel.alpha={alpha:g}, kernel.beta={beta:g} "
            "violate 0 < alpha <= beta < 1"
        )


def _check_breakup(breakup: Dict[str, Any], errors: List[str]) -> None:
    if breakup.get("form") != "power_law":
        return
    nu = breakup.get("nu")
    if not isinstance(nu, float):
        return
    # the range check of ModelFactory covers nu > 0
    if nu == -1.0:
        errors.append(
            "breakup.nu=-1: unsupported-regime, "
            "an infinite number of daughter particles"
        )
    elif nu < -1.0:
        errors.append(
            f"breakup.nu={nu:g}: unsupported-regime, "
            "infeasible number of daughter particles"
        )


def parse_config(path: str, command: str = "simulate") -> RunConfig:
    """
    Read and validate a configuration file for one command.

    Every problem found is collected; nothing is reported until the whole file
    has been checked.

    Args:
        path: YAML or `key = value` file
        command: simulate, audit, converge or oracle

    Returns:
        RunConfig with documented defaults filled in

    Raises:
        ConfigError: With the complete list of problems
    """
    if not os.path.isfile(path):
        raise ConfigError([f"config file not found: {path}"])
    config = Config(path)
    errors: List[str] = []

    if command not in COMMANDS:
        errors.append(f"command must be one of {list(COMMANDS)}, got {command!r}")
        raise ConfigError(errors)

    for key in _REQUIRED[command]:
        if config.config.get(key) is None:
            errors.append(f"missing key {key} (required by {command})")

    known_blocks = set(_SETTINGS) | {"kernel", "probability", "breakup"}
    for key in config.config:
        block_name = key.split(".", 1)[0]
        if block_name not in known_blocks or "." not in key:
            errors.append(f"unknown key {key}")

    blocks: Dict[str, Dict[str, Any]] = {}
    for name, schema in _SETTINGS.items():
        block: Dict[str, Any] = {}
        for key, value in config.block(name).items():
            if key not in schema:
                errors.append(f"unknown key {name}.{key}")
                continue
            coerced = _coerce(f"{name}.{key}", value, schema[key], errors)
            if coerced is not None:
                block[key] = coerced
        blocks[name] = block

    breakup_block = {"form": "power_law", **config.block("breakup")}
    kernel = _validate_model_block("kernel", config.block("kernel"), errors)
    probability = _validate_model_block("probability", config.block("probability"), errors)
    breakup = _validate_model_block("breakup", breakup_block, errors)
    _check_kernel_compliance(kernel, errors)
    _check_breakup(breakup, errors)

    grid = blocks["grid"]
    if command == "simulate":
        if "n" in grid:
            grid.setdefault("zmin", 1e-4 * grid["n"])
        grid.setdefault("cells", 128)
        grid.setdefault("spacing", "geometric")
    if "zmin" in grid and not 0 < grid["zmin"] < grid.get("n", math.inf):
        errors.append(
            "grid bounds must satisfy 0 < grid.zmin < grid.n, "
            f"got zmin={grid['zmin']}, n={grid.get('n')}"
        )
    if "cells" in grid and grid["cells"] < 2:
        errors.append(f"grid.cells must be >= 2, got {grid['cells']}")
    if "spacing" in grid and grid["spacing"] not in ("geometric", "uniform"):
        errors.append(
            f"grid.spacing must be geometric or uniform, got {grid['spacing']!r}"
        )
    if "n" in grid and "truncation_n" in kernel and kernel["truncation_n"] > grid["n"]:
        errors.append("kernel.truncation_n must not exceed grid.n")

    time = blocks["time"]
    if command == "simulate" and "t_end" in time:
        from src.engine.integrator import TimeStepperConfig

        try:
            stepper = TimeStepperConfig.from_dict(time)
            time = {
                "method": stepper.method,
                "dt_init": stepper.dt_init,
                "dt_min": stepper.dt_min,
                "dt_max": stepper.dt_max,
                "rel_tol": stepper.rel_tol,
                "abs_tol": stepper.abs_tol,
                "t_end": stepper.t_end,
                "snapshots": list(stepper.snapshot_times),
                "adaptive": stepper.adaptive,
            }
        except ConfigError as e:
            errors.extend(e.errors)

    initial = blocks["initial"]
    family = initial.get("family")
    if family is not None:
        if family not in _INITIAL_FAMILIES:
            errors.append(
                f"initial.family={family!r} is not one of {list(_INITIAL_FAMILIES)}"
            )
        else:
            for key in _INITIAL_FAMILIES[family]:
                if key not in initial:
                    errors.append(
                        f"missing key initial.{key} "
                        f"(required by initial.family={family})"
                    )
            tabulated = family == "tabulated" and "path" in initial
            if tabulated and not os.path.isfile(initial["path"]):
                errors.append(f"initial.path={initial['path']} does not exist")

    study = blocks["study"]
    if "n_values" in study:
        values = study["n_values"]
        if len(values) < 2 or any(b < a for a, b in zip(values, values[1:])):
            errors.append("study.n_values must hold at least two nondecreasing values")

    tabulated = breakup.get("form") == "tabulated" and "path" in breakup
    if tabulated and not os.path.isfile(breakup["path"]):
        errors.append(f"breakup.path={breakup['path']} does not exist")

    level = str(blocks["logging"].get("level", "INFO")).upper()
    if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
        errors.append(f"logging.level={level!r} is not a logging level")

    output_dir = blocks["output"].get("dir", "output")

    if errors:
        raise ConfigError(errors)

    return RunConfig(
        command=command,
        kernel=kernel,
        probability=probability,
        breakup=breakup,
        grid=grid,
        time=time,
        initial=initial,
        audit=blocks["audit"],
        study=study,
        output_dir=output_dir,
        logging_level=level,
    )


def output_dir_error(path: str) -> Optional[str]:
    """Why outputs cannot be written under `path`, or None"""
    existing = os.path.abspath(path)
    while not os.path.exists(existing):
        parent = os.path.dirname(existing)
        if parent == existing:
            break
        existing = parent
    if not os.path.isdir(existing):
        return f"output.dir={path}: {existing} is not a directory"
    if not os.access(existing, os.W_OK | os.X_OK):
        return f"output.dir={path}: {existing} is not writable"
    return None


def override_output_dir(config: RunConfig, output_dir: Optional[str]) -> RunConfig:
    """
    Apply the --out override and check the final output directory.

    Raises:
        ConfigError: If the directory cannot be created or written
    """
    if output_dir:
        config = replace(config, output_dir=output_dir)
    error = output_dir_error(config.output_dir)
    if error:
        raise ConfigError([error])
    return config
