"""
CHC-COMP Toolkit - Configuration Module
Loads pipeline configuration and provides the shared input-file readers.
"""

import csv
import json
import os
import sys
from dataclasses import dataclass, fields, replace
from multiprocessing import Pool
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple, TypeVar

from tqdm import tqdm

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from chc_model_module import ChcCompError

# === CONFIGURATION ===
BUDGET_PRESETS = {
    # cpu seconds, wall seconds, memory GB
    "competition": (1800, 1800, 64),
    "test": (600, 600, 64),
}
CONFLICT_POLICIES = ["exclude", "abort"]
CACTUS_AXES = ["linear", "log"]
TIME_KINDS = ["cpu", "wall"]


class ConfigError(ChcCompError):
    """Raised when a configuration file cannot be read or is invalid."""


class InputFormatError(ChcCompError):
    """Schema violation in an input file, pinned to a line."""

    def __init__(self, file_path: str, line_no: int, message: str):
        super().__init__(f"{file_path}:{line_no}: {message}")
        self.file_path = file_path
        self.line_no = line_no


@dataclass(frozen=True)
class Config:
    seed: int = 0
    quotas: Optional[str] = None
    cpu_budget: float = 1800
    wall_budget: float = 1800
    memory_budget_gb: float = 64
    conflict_policy: str = "exclude"
    out_dir: str = "results"
    hors_concours: Tuple[str, ...] = ()
    cactus_axis: str = "linear"
    log_epsilon: float = 0.01
    time_kind: str = "cpu"
    jobs: int = 1


def read_config_from_file(config_file_path: str) -> Dict[str, Any]:
    """Read configuration from a TOML (.toml) or JSON (.json) file."""
    try:
        if config_file_path.endswith(".json"):
            with open(config_file_path, 'r', encoding='utf-8') as f:
                return json.load(f)
        with open(config_file_path, 'rb') as f:
            return tomllib.load(f)
    except FileNotFoundError:
        raise ConfigError(f"Configuration file not found: {config_file_path}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"Invalid JSON in configuration file: {e}")
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"Invalid TOML in configuration file: {e}")


def validate_config(config: Config) -> List[str]:
    """Validate the configuration values; returns the list of errors."""
    errors = []

    if not isinstance(config.seed, int) or not 0 <= config.seed < 2 ** 64:
        errors.append(f"Invalid seed: {config.seed}. Must be a 64-bit unsigned integer")

    for name in ("cpu_budget", "wall_budget", "memory_budget_gb", "log_epsilon"):
        value = getattr(config, name)
        if not isinstance(value, (int, float)) or value <= 0:
            errors.append(f"{name} must be a positive number, got {value!r}")

    if isinstance(config.jobs, bool) or not isinstance(config.jobs, int) or config.jobs < 1:
        errors.append(f"jobs must be a positive integer, got {config.jobs!r}")

    if config.conflict_policy not in CONFLICT_POLICIES:
        errors.append(f"Invalid conflict_policy: {config.conflict_policy}. "
                      f"Must be one of: {', '.join(CONFLICT_POLICIES)}")
    if config.cactus_axis not in CACTUS_AXES:
        errors.append(f"Invalid cactus_axis: {config.cactus_axis}. Must be one of: {', '.join(CACTUS_AXES)}")
    if config.time_kind not in TIME_KINDS:
        errors.append(f"Invalid time_kind: {config.time_kind}. Must be one of: {', '.join(TIME_KINDS)}")

    if config.quotas is not None and not os.path.isfile(config.quotas):
        errors.append(f"Quotas file not found: {config.quotas}")

    return errors


def build_config(file_values: Mapping[str, Any], overrides: Mapping[str, Any]) -> Config:
    """Merge file values and command-line overrides (flags win) into a Config."""
    known = {f.name for f in fields(Config)}
    unknown = sorted(set(file_values) - known)
    if unknown:
        raise ConfigError(f"Unknown configuration keys: {', '.join(unknown)}")
    values = dict(file_values)
    values.update({k: v for k, v in overrides.items() if v is not None})
    if "hors_concours" in values:
        values["hors_concours"] = tuple(values["hors_concours"])
    config = replace(Config(), **values)
    if config.quotas is not None:
        config = replace(config, quotas=os.path.abspath(config.quotas))
    return replace(config, out_dir=os.path.abspath(config.out_dir))


def load_config(config_file_path: Optional[str], overrides: Mapping[str, Any]) -> Config:
    file_values = read_config_from_file(config_file_path) if config_file_path else {}
    config = build_config(file_values, overrides)
    errors = validate_config(config)
    if errors:
        raise ConfigError("; ".join(errors))
    return config


# === SHARED INPUT READERS ===

def read_csv_rows(csv_file_path: str, required_columns: List[str]) -> List[Tuple[int, Dict[str, str]]]:
    """Read a CSV file with a header; returns (line number, row) pairs."""
    try:
        with open(csv_file_path, 'r', encoding='utf-8', newline='') as f:
            reader = csv.DictReader(f)
            header = reader.fieldnames or []
            missing = [c for c in required_columns if c not in header]
            if missing:
                raise InputFormatError(csv_file_path, 1, f"missing required column(s): {', '.join(missing)}")
            rows = []
            for row in reader:
                if None in row or any(row.get(c) is None for c in required_columns):
                    raise InputFormatError(csv_file_path, reader.line_num, "wrong number of fields")
                rows.append((reader.line_num, row))
            return rows
    except FileNotFoundError:
        raise FileNotFoundError(f"CSV file not found: {csv_file_path}")
    except UnicodeDecodeError as e:
        raise InputFormatError(csv_file_path, 1, f"invalid UTF-8: {e.reason}")


def read_quota_file(quota_file_path: Optional[str]) -> Dict[str, int]:
    """Read per-repository quotas N_r from a JSON or TOML mapping."""
    if not quota_file_path:
        raise ConfigError("A quotas file is required for selection. Use --quotas option.")
    raw = read_config_from_file(quota_file_path)
    quotas: Dict[str, int] = {}
    for repo, value in raw.items():
        if isinstance(value, bool) or not isinstance(value, int) or value < 1:
            raise ConfigError(f"Quota for {repo} must be a positive integer, got {value!r}")
        quotas[repo] = value
    return quotas


# === FILE-LEVEL PARALLELISM ===

T = TypeVar("T")
Item = TypeVar("Item")


def map_files(func: Callable[[Item], T], items: Sequence[Item], jobs: int = 1, desc: str = "",
              show_progress: bool = True) -> List[T]:
    """Apply func to every per-file item; results come back in input order whatever the number of jobs.

    func must be a module-level function (it is pickled for the worker processes).
    """
    bar = dict(desc=desc, unit="file", total=len(items), disable=not show_progress, file=sys.stderr)
    if jobs <= 1 or len(items) < 2:
        return [func(item) for item in tqdm(items, **bar)]
    with Pool(processes=min(jobs, len(items))) as pool:
        return list(tqdm(pool.imap(func, items), **bar))
