"""Command-line harness around the experiment engine.

Each subcommand reads a YAML (or JSON) config file describing an
:class:`~blockboot.harness.ExperimentConfig`, runs the experiment, and writes
plot-ready CSV files plus a ``manifest.json`` echoing the configuration.
Exit codes: 0 success, 2 config error, 3 resource limit exceeded.
"""

from __future__ import annotations

import argparse
import os
import sys

import yaml

from . import harness
from .models import model_from_name
from .resample import ResourceLimitError


class ConfigError(Exception):
    """A config file is missing, malformed, or holds an unknown/invalid key."""


_COMMON_KEYS = {
    "experiment",
    "model",
    "n",
    "n_list",
    "p",
    "x",
    "y",
    "alpha",
    "kind",
    "grid",
    "replications",
    "bootstrap_samples",
    "ref_replications",
    "ref_value",
    "ref_values",
    "exact",
    "c1_grid",
    "c2_grid",
    "subsample_len",
    "subsample_count",
    "rho",
    "seed",
    "workers",
    "out",
}

_GRID_KEYS = {"b", "ell", "ell_step", "include_mbb", "cap_to_n", "cells"}
_MODEL_KEYS = {"name", "nu", "n_terms"}

_REQUIRED = {
    "reference": ("model", "x"),
    "mse-grid": ("model", "x"),
    "coverage-grid": ("model", "alpha"),
    "cdf-mse-grid": ("model", "x", "y"),
    "tune": ("model", "x"),
    "rate-study": ("model", "x", "n_list"),
}

EXPERIMENTS = tuple(_REQUIRED)


def _load_config(path: str) -> dict:
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path, encoding="utf-8") as handle:
        try:
            raw = yaml.safe_load(handle)
        except yaml.YAMLError as exc:
            raise ConfigError(f"config file is not valid YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config file must hold a mapping of keys to values")
    return raw


def _check_keys(raw: dict) -> None:
    for key in raw:
        if key not in _COMMON_KEYS:
            raise ConfigError(f"unknown config key: {key!r}")
    grid = raw.get("grid")
    if grid is not None:
        if not isinstance(grid, dict):
            raise ConfigError("config key 'grid' must be a mapping")
        for key in grid:
            if key not in _GRID_KEYS:
                raise ConfigError(f"unknown config key: grid.{key!r}")
    model = raw.get("model")
    if isinstance(model, dict):
        for key in model:
            if key not in _MODEL_KEYS:
                raise ConfigError(f"unknown config key: model.{key!r}")


def _require(raw: dict, experiment: str) -> None:
    for key in _REQUIRED[experiment]:
        if raw.get(key) is None:
            raise ConfigError(f"missing required config key: {key!r} (needed by {experiment})")


def _coerce(raw: dict, key: str, kind, default=None):
    value = raw.get(key, default)
    if value is None:
        return None
    try:
        return kind(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config key {key!r} has invalid value {value!r}") from exc


def _model_from_config(raw: dict, args):
    model = raw["model"]
    if isinstance(model, str):
        model = {"name": model}
    if not isinstance(model, dict):
        raise ConfigError("config key 'model' must be a preset name or a mapping with 'name'")
    if "name" not in model:
        raise ConfigError("missing required config key: model.'name'")
    nu = args.nu if args.nu is not None else model.get("nu")
    n_terms = args.n_terms if args.n_terms is not None else model.get("n_terms")
    try:
        return model_from_name(model["name"], nu=None if nu is None else float(nu), n_terms=None if n_terms is None else int(n_terms))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _grid_from_config(raw: dict) -> harness.GridSpec:
    grid = raw.get("grid")
    if grid is None:
        return harness.GridSpec()
    kwargs = {}
    if "b" in grid:
        lo, hi = grid["b"]
        kwargs["b_min"], kwargs["b_max"] = int(lo), int(hi)
    if "ell" in grid:
        lo, hi = grid["ell"]
        kwargs["ell_min"], kwargs["ell_max"] = int(lo), int(hi)
    if "ell_step" in grid:
        kwargs["ell_step"] = int(grid["ell_step"])
    if "include_mbb" in grid:
        kwargs["include_mbb"] = bool(grid["include_mbb"])
    if "cap_to_n" in grid:
        kwargs["cap_to_n"] = bool(grid["cap_to_n"])
    if "cells" in grid and grid["cells"] is not None:
        kwargs["cells"] = tuple((int(b), int(ell)) for b, ell in grid["cells"])
    try:
        return harness.GridSpec(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config key 'grid' is invalid: {exc}") from exc


def build_config(raw: dict, args) -> harness.ExperimentConfig:
    """Assemble an ExperimentConfig from a parsed config mapping and CLI overrides."""
    _check_keys(raw)
    if raw.get("model") is None:
        raise ConfigError("missing required config key: 'model'")
    ref_values = raw.get("ref_values") or {}
    if not isinstance(ref_values, dict):
        raise ConfigError("config key 'ref_values' must map sample sizes to values")
    seed = args.seed if args.seed is not None else _coerce(raw, "seed", int, 0)
    workers = args.workers if args.workers is not None else _coerce(raw, "workers", int, 1)
    try:
        return harness.ExperimentConfig(
            model=_model_from_config(raw, args),
            n=_coerce(raw, "n", int, 200),
            n_list=tuple(int(v) for v in raw.get("n_list") or ()),
            p=_coerce(raw, "p", float, 0.5),
            x=_coerce(raw, "x", float, 0.0),
            y=_coerce(raw, "y", float),
            alpha=_coerce(raw, "alpha", float),
            grid=_grid_from_config(raw),
            n_reps=_coerce(raw, "replications", int, 2000),
            n_boot=_coerce(raw, "bootstrap_samples", int, 2000),
            ref_sims=_coerce(raw, "ref_replications", int, 1_000_000),
            ref_value=_coerce(raw, "ref_value", float),
            ref_values=tuple(sorted((int(k), float(v)) for k, v in ref_values.items())),
            exact=bool(raw.get("exact", False)),
            c1_grid=tuple(float(v) for v in raw.get("c1_grid") or (0.5, 0.75, 1.0, 1.5, 2.0)),
            c2_grid=tuple(float(v) for v in raw.get("c2_grid") or (0.5, 0.75, 1.0, 1.5, 2.0)),
            subsample_len=_coerce(raw, "subsample_len", int),
            subsample_count=_coerce(raw, "subsample_count", int, 20),
            rho=_coerce(raw, "rho", float, 2.0),
            master_seed=seed,
            workers=max(1, workers),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _out_dir(raw: dict, args) -> str:
    out = args.out if args.out is not None else raw.get("out", ".")
    os.makedirs(out, exist_ok=True)
    return out


def _run_reference(cfg, raw, out):
    kind = raw.get("kind", "quantile")
    if kind not in ("quantile", "cdf"):
        raise ConfigError(f"config key 'kind' must be 'quantile' or 'cdf', got {kind!r}")
    if kind == "cdf" and cfg.y is None:
        raise ConfigError("missing required config key: 'y' (needed by reference kind='cdf')")
    cache = harness.ReferenceCache(os.path.join(out, "reference_cache.json"))
    ref = cache.get_or_compute(cfg.model, cfg.n, kind, cfg.x, y=cfg.y, p=cfg.p, n_sims=cfg.ref_sims, seed=cfg.master_seed, workers=cfg.workers)
    path = os.path.join(out, "reference.csv")
    harness.write_reference_csv(path, cfg.model.kind, cfg.n, kind, cfg.x, cfg.y, ref)
    print(f"reference {ref.value:.6g} (stderr {ref.stderr:.3g}, {ref.n_sims} sims) -> {path}")
    return [path]


def _run_grid(cfg, out, runner, filename, label):
    result = runner(cfg)
    path = os.path.join(out, filename)
    harness.write_grid_csv(path, result)
    best = result.min_row()
    print(f"{label}: {len(result.rows)} cells, min {best.value:.6g} at (b={best.n_blocks}, ell={best.block_length}) -> {path}")
    return [path]


def _run_tune(cfg, out):
    result = harness.adaptive_study(cfg)
    err_path = os.path.join(out, "tune_err_grid.csv")
    harness.write_err_table_csv(err_path, harness.err_table_rows(result.cell_rows))
    study_path = os.path.join(out, "tune_study.csv")
    harness.write_tune_study_csv(study_path, result)
    print(
        f"tune: adaptive mse {result.adaptive_mse:.6g} vs fixed-cell range "
        f"[{result.best_cell_mse():.6g}, {result.worst_cell_mse():.6g}] -> {study_path}"
    )
    return [err_path, study_path]


def _run_rate(cfg, out):
    result = harness.rate_study(cfg)
    written = harness.write_rate_csvs(out, result)
    print(f"rate-study: slope {result.slope:.4f} over n={list(cfg.n_list)} -> {written[0]}")
    return written


def run_experiment(experiment: str, raw: dict, args) -> int:
    """Dispatch one experiment; returns the written output paths."""
    _require(raw, experiment)
    cfg = build_config(raw, args)
    out = _out_dir(raw, args)
    if experiment == "reference":
        outputs = _run_reference(cfg, raw, out)
    elif experiment == "mse-grid":
        outputs = _run_grid(cfg, out, harness.mse_grid, "mse_grid.csv", "mse-grid")
    elif experiment == "cdf-mse-grid":
        outputs = _run_grid(cfg, out, harness.cdf_mse_grid, "cdf_mse_grid.csv", "cdf-mse-grid")
    elif experiment == "coverage-grid":
        outputs = _run_grid(cfg, out, harness.coverage_grid, "coverage_grid.csv", "coverage-grid")
    elif experiment == "tune":
        outputs = _run_tune(cfg, out)
    elif experiment == "rate-study":
        outputs = _run_rate(cfg, out)
    else:
        raise ConfigError(f"unknown experiment {experiment!r}; expected one of {EXPERIMENTS}")
    harness.write_manifest(os.path.join(out, "manifest.json"), experiment, cfg, outputs)
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="blockboot", description="Block bootstrap Monte Carlo experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS + ("run",):
        cmd = sub.add_parser(name, help=f"{name} experiment" if name != "run" else "dispatch on the 'experiment' config key")
        cmd.add_argument("--config", required=True, help="path to a YAML config file")
        cmd.add_argument("--seed", type=int, default=None, help="override the master seed")
        cmd.add_argument("--workers", type=int, default=None, help="override the worker count")
        cmd.add_argument("--out", default=None, help="override the output directory")
        cmd.add_argument("--nu", type=float, default=None, help="override the polymix decay exponent")
        cmd.add_argument("--n-terms", dest="n_terms", type=int, default=None, help="override the polymix truncation point")
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        raw = _load_config(args.config)
        _check_keys(raw)
        if args.command == "run":
            experiment = raw.get("experiment")
            if experiment is None:
                raise ConfigError("missing required config key: 'experiment' (needed by run)")
            if experiment not in EXPERIMENTS:
                raise ConfigError(f"unknown experiment {experiment!r}; expected one of {EXPERIMENTS}")
        else:
            experiment = args.command
            declared = raw.get("experiment")
            if declared is not None and declared != experiment:
                raise ConfigError(f"config declares experiment {declared!r} but {experiment!r} was invoked")
        return run_experiment(experiment, raw, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
