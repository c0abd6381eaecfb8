"""Experiment configuration files and the CSV result contract.

Configs are declarative TOML: no code runs while loading one, and
saving then reloading reproduces the dataclass exactly.  Results go
to UTF-8 CSV files whose first line pins the schema version; readers
reject anything else.  The runtime column is informational only and
is excluded from the determinism signature.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass

import tomli

from .states import StateRecipe

CSV_SCHEMA_LINE = "#schema=1"

RESULT_COLUMNS = (
    "experiment", "protocol", "t", "n", "n1", "n2",
    "trial", "seed", "estimate", "abs_error", "runtime_s",
)
SUMMARY_COLUMNS = (
    "experiment", "protocol", "t", "n", "n1", "n2",
    "trials", "mean_abs_error", "stddev_estimate",
)

PROTOCOL_CHOICES = ("symmetric", "asymmetric", "both")


class ConfigError(ValueError):
    """Unreadable, unknown, or inconsistent configuration input."""


class SchemaError(ValueError):
    """CSV whose schema line does not match the supported version."""


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    recipe: StateRecipe
    recipe_b: StateRecipe | None = None
    protocol: str = "symmetric"
    mode: str = "exact-oracle"
    n1: int = 1000
    n2: int = 1000
    n_rho: int = 1000
    n_sigma: int = 1000
    lam: float = 0.1
    t_values: tuple = ()
    n2_values: tuple = ()
    seed_root: int = 0
    trials: int = 10
    out: str = "results.csv"

    def __post_init__(self):
        if not self.experiment:
            raise ConfigError("experiment id must be nonempty")
        if self.protocol not in PROTOCOL_CHOICES:
            raise ConfigError(f"protocol must be one of {PROTOCOL_CHOICES}")
        if min(self.n1, self.n2, self.n_rho, self.n_sigma) < 1:
            raise ConfigError("shot counts must be positive")
        if not 0.0 < self.lam < 1.0:
            raise ConfigError("lam must lie strictly between 0 and 1")
        if self.trials < 1:
            raise ConfigError("need at least one trial")
        if any(t < 0 for t in self.t_values):
            raise ConfigError("t_values must be nonnegative")
        if any(m < 1 for m in self.n2_values):
            raise ConfigError("n2_values must be positive")


def _check_keys(table, allowed, where):
    unknown = set(table) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in [{where}]: {', '.join(sorted(unknown))}")


def _recipe_from_table(table, where):
    _check_keys(table, ("kind", "n", "seed", "params"), where)
    try:
        return StateRecipe(
            kind=table["kind"],
            n=int(table["n"]),
            seed=int(table.get("seed", 0)),
            params=dict(table.get("params", {})),
        )
    except KeyError as exc:
        raise ConfigError(f"[{where}] is missing required key {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad [{where}] section: {exc}") from None


def config_from_toml_text(text):
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error: {exc}") from None

    _check_keys(data, ("experiment", "state", "state_b", "protocol_params",
                       "grid", "seeds"), "top level")
    if "experiment" not in data or "state" not in data:
        raise ConfigError("config needs [experiment] and [state] sections")

    exp = data["experiment"]
    _check_keys(exp, ("id", "protocol", "mode", "out"), "experiment")
    params = data.get("protocol_params", {})
    _check_keys(params, ("n1", "n2", "n_rho", "n_sigma", "lam"), "protocol_params")
    grid = data.get("grid", {})
    _check_keys(grid, ("t_values", "n2_values"), "grid")
    seeds = data.get("seeds", {})
    _check_keys(seeds, ("root", "trials"), "seeds")

    recipe_b = None
    if "state_b" in data:
        recipe_b = _recipe_from_table(data["state_b"], "state_b")

    try:
        return ExperimentConfig(
            experiment=exp.get("id", ""),
            recipe=_recipe_from_table(data["state"], "state"),
            recipe_b=recipe_b,
            protocol=exp.get("protocol", "symmetric"),
            mode=exp.get("mode", "exact-oracle"),
            n1=int(params.get("n1", 1000)),
            n2=int(params.get("n2", 1000)),
            n_rho=int(params.get("n_rho", 1000)),
            n_sigma=int(params.get("n_sigma", 1000)),
            lam=float(params.get("lam", 0.1)),
            t_values=tuple(int(t) for t in grid.get("t_values", ())),
            n2_values=tuple(int(m) for m in grid.get("n2_values", ())),
            seed_root=int(seeds.get("root", 0)),
            trials=int(seeds.get("trials", 10)),
            out=exp.get("out", "results.csv"),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad config value: {exc}") from None


def _toml_scalar(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_scalar(v) for v in value) + "]"
    raise ConfigError(f"cannot serialize value of type {type(value).__name__}")


def _recipe_lines(recipe, section):
    lines = [f"[{section}]",
             f"kind = {_toml_scalar(recipe.kind)}",
             f"n = {recipe.n}",
             f"seed = {recipe.seed}"]
    if recipe.params:
        lines += ["", f"[{section}.params]"]
        lines += [f"{k} = {_toml_scalar(v)}" for k, v in sorted(recipe.params.items())]
    return lines


def config_to_toml_text(cfg: ExperimentConfig):
    lines = [
        "[experiment]",
        f"id = {_toml_scalar(cfg.experiment)}",
        f"protocol = {_toml_scalar(cfg.protocol)}",
        f"mode = {_toml_scalar(cfg.mode)}",
        f"out = {_toml_scalar(cfg.out)}",
        "",
    ]
    lines += _recipe_lines(cfg.recipe, "state")
    if cfg.recipe_b is not None:
        lines += [""] + _recipe_lines(cfg.recipe_b, "state_b")
    lines += [
        "",
        "[protocol_params]",
        f"n1 = {cfg.n1}",
        f"n2 = {cfg.n2}",
        f"n_rho = {cfg.n_rho}",
        f"n_sigma = {cfg.n_sigma}",
        f"lam = {_toml_scalar(cfg.lam)}",
        "",
        "[grid]",
        f"t_values = {_toml_scalar(list(cfg.t_values))}",
        f"n2_values = {_toml_scalar(list(cfg.n2_values))}",
        "",
        "[seeds]",
        f"root = {cfg.seed_root}",
        f"trials = {cfg.trials}",
    ]
    return "\n".join(lines) + "\n"


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return config_from_toml_text(text)


def save_config(cfg, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(config_to_toml_text(cfg))


@dataclass(frozen=True)
class ResultRow:
    experiment: str
    protocol: str
    t: int
    n: int
    n1: int
    n2: int
    trial: int
    seed: int
    estimate: float
    abs_error: float
    runtime_s: float

    def as_csv(self):
        return (self.experiment, self.protocol, str(self.t), str(self.n),
                str(self.n1), str(self.n2), str(self.trial), str(self.seed),
                repr(float(self.estimate)), repr(float(self.abs_error)),
                f"{self.runtime_s:.6f}")


@dataclass(frozen=True)
class SummaryRow:
    experiment: str
    protocol: str
    t: int
    n: int
    n1: int
    n2: int
    trials: int
    mean_abs_error: float
    stddev_estimate: float

    def as_csv(self):
        return (self.experiment, self.protocol, str(self.t), str(self.n),
                str(self.n1), str(self.n2), str(self.trials),
                repr(float(self.mean_abs_error)), repr(float(self.stddev_estimate)))


def write_csv(path, columns, rows):
    """Schema line, header row, then one line per row tuple."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(CSV_SCHEMA_LINE + "\n")
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow(row.as_csv() if hasattr(row, "as_csv") else row)


def read_csv(path):
    """(header, rows-as-dicts) after validating the schema line."""
    with open(path, encoding="utf-8", newline="") as fh:
        first = fh.readline().rstrip("\r\n")
        if first != CSV_SCHEMA_LINE:
            raise SchemaError(f"unsupported schema line {first!r}")
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise SchemaError("missing CSV header row")
        rows = [dict(zip(header, row, strict=True)) for row in reader]
    return header, rows


def csv_signature(path):
    """Hash of the CSV content with any runtime column blanked out."""
    header, rows = read_csv(path)
    keep = [c for c in header if c != "runtime_s"]
    blob = "\n".join(
        [",".join(keep)] + [",".join(row[c] for c in keep) for row in rows]
    )
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()
