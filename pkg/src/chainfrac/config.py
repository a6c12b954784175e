"""Declarative experiment configuration.

One YAML file describes the whole experiment: the potential alphabet, the
letter law, study layout, tolerances, and output paths. Command-line flags
override single values; validation happens here with field paths in every
error message so a typo points at itself.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np
import yaml

from . import potentials as pot
from .environment import EnvironmentSpec, IIDLaw, MarkovLaw, PeriodicLaw
from .errors import ConfigError, InvalidSpec
from .threshold import DEFAULT_EPS_ENERGY, MODE_MEAN_DELTA, MODE_RESCALED

_POTENTIAL_FIELDS = {
    pot.LENNARD_JONES: {"family", "m", "n", "depth"},
    pot.MORSE: {"family", "depth", "width"},
    pot.SCALED_SHIFTED: {"family", "base", "scale", "depth_scale"},
}


@dataclass(frozen=True)
class Tolerances:
    ell_tol: float | None = None
    eps_energy: float = DEFAULT_EPS_ENERGY
    tol_h: float = 0.1
    tol_plateau: float | None = None


@dataclass(frozen=True)
class OutputPaths:
    csv: str | None = None
    summary: str | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    environment: EnvironmentSpec
    mode: str
    n_list: tuple[int, ...]
    replicates: int
    master_seed: int
    n: int | None
    ell: float | None
    seed: int | None
    parallel: int
    k_max: int
    budget_seconds: float
    tolerances: Tolerances
    gamma_grid: tuple[float, ...] | None
    ell_grid: tuple[float, ...] | None
    output: OutputPaths


def _expect(value: Any, kinds: tuple[type, ...], path: str, what: str) -> Any:
    if isinstance(value, bool) and bool not in kinds:
        raise ConfigError(f"{path}: expected {what}, got a boolean")
    if not isinstance(value, kinds):
        raise ConfigError(f"{path}: expected {what}, got {type(value).__name__}")
    return value


def _number(raw: dict, key: str, path: str, default=None, required=False):
    if key not in raw or raw[key] is None:
        if required:
            raise ConfigError(f"{path}.{key}: missing required field")
        return default
    return float(_expect(raw[key], (int, float), f"{path}.{key}", "a number"))


def _integer(raw: dict, key: str, path: str, default=None, required=False):
    if key not in raw or raw[key] is None:
        if required:
            raise ConfigError(f"{path}.{key}: missing required field")
        return default
    return int(_expect(raw[key], (int,), f"{path}.{key}", "an integer"))


def build_potential(entry: Any, path: str) -> pot.PotentialSpec:
    entry = _expect(entry, (dict,), path, "a mapping")
    family = entry.get("family")
    if family not in _POTENTIAL_FIELDS:
        known = ", ".join(sorted(_POTENTIAL_FIELDS))
        raise ConfigError(f"{path}.family: expected one of {known}, got {family!r}")
    unknown = set(entry) - _POTENTIAL_FIELDS[family]
    if unknown:
        raise ConfigError(f"{path}.{sorted(unknown)[0]}: unknown field for {family}")
    try:
        if family == pot.LENNARD_JONES:
            return pot.lennard_jones(
                m=_number(entry, "m", path, 12.0),
                n=_number(entry, "n", path, 6.0),
                depth=_number(entry, "depth", path, 1.0),
            )
        if family == pot.MORSE:
            return pot.morse(
                depth=_number(entry, "depth", path, 1.0),
                width=_number(entry, "width", path, 6.0),
            )
        if "base" not in entry:
            raise ConfigError(f"{path}.base: missing required field")
        return pot.scaled_shifted(
            base=build_potential(entry["base"], f"{path}.base"),
            scale=_number(entry, "scale", path, 1.0),
            depth_scale=_number(entry, "depth_scale", path, 1.0),
        )
    except InvalidSpec as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _build_environment(raw: dict) -> EnvironmentSpec:
    entries = raw.get("potentials")
    if not isinstance(entries, list) or not entries:
        raise ConfigError("potentials: expected a nonempty list")
    alphabet = tuple(
        build_potential(entry, f"potentials[{i}]") for i, entry in enumerate(entries)
    )
    env = _expect(raw.get("environment"), (dict,), "environment", "a mapping")
    law_name = env.get("law")
    try:
        if law_name == "iid":
            weights = _expect(env.get("weights"), (list,), "environment.weights",
                              "a list of probabilities")
            law = IIDLaw(tuple(float(w) for w in weights))
        elif law_name == "periodic":
            pattern = _expect(env.get("pattern"), (list,), "environment.pattern",
                              "a list of letter indices")
            law = PeriodicLaw(tuple(int(i) for i in pattern))
        elif law_name == "markov":
            transition = _expect(env.get("transition"), (list,),
                                 "environment.transition", "a matrix")
            initial = _expect(env.get("initial"), (list,), "environment.initial",
                              "a list of probabilities")
            law = MarkovLaw(
                tuple(tuple(float(p) for p in row) for row in transition),
                tuple(float(p) for p in initial),
            )
        else:
            raise ConfigError(
                f"environment.law: expected iid, periodic, or markov, got {law_name!r}"
            )
        return EnvironmentSpec(law=law, alphabet=alphabet)
    except InvalidSpec as exc:
        raise ConfigError(f"environment: {exc}") from exc


def _build_grid(raw: Any, path: str) -> tuple[float, ...] | None:
    if raw is None:
        return None
    if isinstance(raw, list):
        return tuple(float(v) for v in raw)
    if isinstance(raw, dict):
        unknown = set(raw) - {"start", "stop", "count"}
        if unknown:
            raise ConfigError(f"{path}.{sorted(unknown)[0]}: unknown field")
        start = _number(raw, "start", path, required=True)
        stop = _number(raw, "stop", path, required=True)
        count = _integer(raw, "count", path, required=True)
        if count < 2 or stop <= start:
            raise ConfigError(f"{path}: need stop > start and count >= 2")
        return tuple(float(v) for v in np.linspace(start, stop, count))
    raise ConfigError(f"{path}: expected a list or a start/stop/count mapping")


def build_config(raw: dict) -> ExperimentConfig:
    raw = _expect(raw, (dict,), "config", "a mapping")
    environment = _build_environment(raw)

    mode = raw.get("mode", MODE_MEAN_DELTA)
    if mode not in (MODE_MEAN_DELTA, MODE_RESCALED):
        raise ConfigError(
            f"mode: expected {MODE_MEAN_DELTA} or {MODE_RESCALED}, got {mode!r}"
        )

    n_list_raw = raw.get("n_list", [])
    if not isinstance(n_list_raw, list):
        raise ConfigError("n_list: expected a list of integers")
    n_list = tuple(
        int(_expect(v, (int,), f"n_list[{i}]", "an integer"))
        for i, v in enumerate(n_list_raw)
    )
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ConfigError("n_list: entries must be strictly increasing")
    if any(n < 1 for n in n_list):
        raise ConfigError("n_list: entries must be positive")

    replicates = _integer(raw, "replicates", "config", 1)
    if replicates < 1:
        raise ConfigError("replicates: must be at least 1")
    parallel = _integer(raw, "parallel", "config", 1)
    if parallel < 1:
        raise ConfigError("parallel: must be at least 1")
    k_max = _integer(raw, "k_max", "config", 1)
    if k_max < 0:
        raise ConfigError("k_max: must be nonnegative")
    n = _integer(raw, "n", "config")
    if n is not None and n < 1:
        raise ConfigError("n: must be positive")

    tol_raw = raw.get("tolerances", {}) or {}
    _expect(tol_raw, (dict,), "tolerances", "a mapping")
    unknown = set(tol_raw) - {"ell_tol", "eps_energy", "tol_h", "tol_plateau"}
    if unknown:
        raise ConfigError(f"tolerances.{sorted(unknown)[0]}: unknown field")
    tolerances = Tolerances(
        ell_tol=_number(tol_raw, "ell_tol", "tolerances"),
        eps_energy=_number(tol_raw, "eps_energy", "tolerances", DEFAULT_EPS_ENERGY),
        tol_h=_number(tol_raw, "tol_h", "tolerances", 0.1),
        tol_plateau=_number(tol_raw, "tol_plateau", "tolerances"),
    )
    for name in ("ell_tol", "eps_energy", "tol_h", "tol_plateau"):
        value = getattr(tolerances, name)
        if value is not None and value <= 0.0:
            raise ConfigError(f"tolerances.{name}: must be positive")

    out_raw = raw.get("output", {}) or {}
    _expect(out_raw, (dict,), "output", "a mapping")
    unknown = set(out_raw) - {"csv", "summary"}
    if unknown:
        raise ConfigError(f"output.{sorted(unknown)[0]}: unknown field")

    gamma_raw = raw.get("gamma_grid")
    gamma_grid = (
        None if gamma_raw is None
        else tuple(float(v) for v in _expect(gamma_raw, (list,), "gamma_grid", "a list"))
    )

    return ExperimentConfig(
        environment=environment,
        mode=mode,
        n_list=n_list,
        replicates=replicates,
        master_seed=_integer(raw, "master_seed", "config", 0),
        n=n,
        ell=_number(raw, "ell", "config"),
        seed=_integer(raw, "seed", "config"),
        parallel=parallel,
        k_max=k_max,
        budget_seconds=_number(raw, "budget_seconds", "config", 900.0),
        tolerances=tolerances,
        gamma_grid=gamma_grid,
        ell_grid=_build_grid(raw.get("ell_grid"), "ell_grid"),
        output=OutputPaths(
            csv=out_raw.get("csv"), summary=out_raw.get("summary")
        ),
    )


def load_raw(path: str) -> dict:
    """Parse the YAML config file into a plain dict."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            raw = yaml.safe_load(handle)
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config: {path} is not valid YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config: {path} must contain a mapping at the top level")
    return raw


def potential_to_dict(spec: pot.PotentialSpec) -> dict:
    if spec.family == pot.LENNARD_JONES:
        m, n, depth = spec.params
        return {"family": spec.family, "m": m, "n": n, "depth": depth}
    if spec.family == pot.MORSE:
        depth, width = spec.params
        return {"family": spec.family, "depth": depth, "width": width}
    scale, depth_scale = spec.params
    return {
        "family": spec.family,
        "scale": scale,
        "depth_scale": depth_scale,
        "base": potential_to_dict(spec.base),
    }


def config_to_dict(cfg: ExperimentConfig) -> dict:
    """Canonical dict form of the effective configuration, for echoing."""
    env = cfg.environment
    if isinstance(env.law, IIDLaw):
        law: dict[str, Any] = {"law": "iid", "weights": list(env.law.weights)}
    elif isinstance(env.law, PeriodicLaw):
        law = {"law": "periodic", "pattern": list(env.law.pattern)}
    else:
        law = {
            "law": "markov",
            "transition": [list(row) for row in env.law.transition],
            "initial": list(env.law.initial),
        }
    return {
        "potentials": [potential_to_dict(p) for p in env.alphabet],
        "environment": law,
        "mode": cfg.mode,
        "n_list": list(cfg.n_list),
        "replicates": cfg.replicates,
        "master_seed": cfg.master_seed,
        "n": cfg.n,
        "ell": cfg.ell,
        "seed": cfg.seed,
        "parallel": cfg.parallel,
        "k_max": cfg.k_max,
        "budget_seconds": cfg.budget_seconds,
        "tolerances": {
            "ell_tol": cfg.tolerances.ell_tol,
            "eps_energy": cfg.tolerances.eps_energy,
            "tol_h": cfg.tolerances.tol_h,
            "tol_plateau": cfg.tolerances.tol_plateau,
        },
        "gamma_grid": None if cfg.gamma_grid is None else list(cfg.gamma_grid),
        "ell_grid": None if cfg.ell_grid is None else list(cfg.ell_grid),
        "output": {"csv": cfg.output.csv, "summary": cfg.output.summary},
    }
