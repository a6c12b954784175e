"""Command-line front end.

Subcommands cover the whole workflow: `validate` checks the potential
alphabet against the model assumptions, `min-energy` and `critical-stretch`
run single instances, `sweep` runs a seeded (n, replicate) study and writes
CSV plus a summary JSON, `gamma-check` compares rescaled excess energies to
their limit, and `oracle` exposes the brute-force reference minimizer for
small chains. Configuration lives in a YAML file; flags override single
values and every artifact echoes the effective configuration it ran with.

Exit codes: 0 success, 2 configuration or validation failure, 3 solver or
numerical failure. Logs go to stderr, one `LEVEL key=value ...` line each;
artifacts and stdout stay machine-readable.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict

import numpy as np

from . import oracle as reference
from . import potentials as pot
from .config import (
    ExperimentConfig,
    build_config,
    config_to_dict,
    load_raw,
)
from .environment import derive_seed, realize
from .errors import ChainfracError, ConfigError
from .solver import global_minimize
from .threshold import (
    convergence_study,
    critical_stretch,
    homogenized_checks,
    write_rows_csv,
)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_SOLVER = 3

_ROW_COST_ESTIMATE_S = 1.0


def _log(level: str, **fields) -> None:
    parts = [f"{key}={value}" for key, value in fields.items()]
    print(f"{level} " + " ".join(parts), file=sys.stderr)


def _to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _emit(doc: dict, out_path: str | None) -> None:
    text = json.dumps(_to_jsonable(doc), indent=2)
    print(text)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as handle:
            handle.write(text + "\n")


def _resolve_n(cfg: ExperimentConfig, command: str) -> int:
    if cfg.n is None:
        raise ConfigError(f"n: required for {command} (set in the config or via --n)")
    return cfg.n


def _resolve_seed(cfg: ExperimentConfig, n: int) -> int:
    return cfg.seed if cfg.seed is not None else derive_seed(cfg.master_seed, n, 0)


def _cmd_validate(cfg: ExperimentConfig, args) -> int:
    letters = []
    all_passed = True
    for i, spec in enumerate(cfg.environment.alphabet):
        report = pot.validate_assumptions(spec)
        for check in report.checks:
            _log("INFO", command="validate", letter=i, check=check.label,
                 passed=check.passed)
        _log("INFO", command="validate", letter=i,
             nondegeneracy_constant=report.nondegeneracy)
        all_passed = all_passed and report.passed
        letters.append(
            {
                "index": i,
                "family": spec.family,
                "checks": [asdict(c) for c in report.checks],
                "nondegeneracy_constant": report.nondegeneracy,
            }
        )
    doc = {
        "effective_config": config_to_dict(cfg),
        "letters": letters,
        "passed": all_passed,
    }
    _emit(doc, args.out)
    return EXIT_OK if all_passed else EXIT_INVALID


def _cmd_min_energy(cfg: ExperimentConfig, args) -> int:
    n = _resolve_n(cfg, "min-energy")
    if cfg.ell is None:
        raise ConfigError("ell: required for min-energy (set in the config or via --ell)")
    seed = _resolve_seed(cfg, n)
    r = realize(cfg.environment, n, seed)
    res = global_minimize(r, cfg.ell, k_max=cfg.k_max)
    doc = {"effective_config": config_to_dict(cfg), "seed": seed}
    doc.update(res.to_json_dict())
    doc["diagnostics"] = res.diagnostics
    if args.oracle:
        ref = reference.grid_minimize(r, cfg.ell)
        doc["oracle_energy"] = ref.energy
        doc["oracle_abs_diff"] = abs(ref.energy - res.energy)
        doc["oracle_error_bound"] = reference.error_bound(r, ref.grid)
    if args.dump_strains:
        with open(args.dump_strains, "wb") as handle:
            handle.write(res.profile.astype("<f8").tobytes())
        _log("INFO", command="min-energy", dumped=args.dump_strains,
             bytes=res.profile.size * 8)
    _log("INFO", command="min-energy", n=n, ell=cfg.ell, energy=res.energy,
         mode=res.mode)
    _emit(doc, args.out)
    return EXIT_OK


def _cmd_critical_stretch(cfg: ExperimentConfig, args) -> int:
    n = _resolve_n(cfg, "critical-stretch")
    seed = _resolve_seed(cfg, n)
    r = realize(cfg.environment, n, seed)
    res = critical_stretch(
        r,
        ell_tol=cfg.tolerances.ell_tol,
        eps_energy=cfg.tolerances.eps_energy,
        k_max=cfg.k_max,
    )
    doc = {
        "effective_config": config_to_dict(cfg),
        "n": res.n,
        "seed": res.seed,
        "ell_star": res.ell_star,
        "gamma_star": res.gamma_star,
        "bracket": list(res.bracket),
        "gap_tolerance": res.gap_tolerance,
        "ell_tol": res.ell_tol,
        "bisection_iterations": res.bisection_iterations,
        "diagnostics": res.diagnostics,
    }
    if args.oracle:
        doc["oracle_scan"] = reference.critical_stretch_scan(r)
        doc["oracle_abs_diff"] = abs(doc["oracle_scan"] - res.ell_star)
    _log("INFO", command="critical-stretch", n=n, seed=seed,
         ell_star=res.ell_star, gamma_star=res.gamma_star,
         anomaly=res.diagnostics["anomaly"])
    _emit(doc, args.out)
    return EXIT_OK


def _cmd_sweep(cfg: ExperimentConfig, args) -> int:
    if not cfg.n_list:
        raise ConfigError("n_list: required for sweep")
    rows_total = len(cfg.n_list) * cfg.replicates
    estimate_s = rows_total * _ROW_COST_ESTIMATE_S / max(1, cfg.parallel)
    if estimate_s > cfg.budget_seconds:
        _log("WARN", command="sweep", estimated_seconds=round(estimate_s, 1),
             budget_seconds=cfg.budget_seconds, rows=rows_total)
    rows, summary = convergence_study(
        cfg.environment,
        list(cfg.n_list),
        cfg.replicates,
        cfg.master_seed,
        mode=cfg.mode,
        ell_tol=cfg.tolerances.ell_tol,
        eps_energy=cfg.tolerances.eps_energy,
        parallel=cfg.parallel,
        k_max=cfg.k_max,
    )
    csv_path = args.out or cfg.output.csv
    if not csv_path:
        raise ConfigError("output.csv: required for sweep (or pass --out)")
    write_rows_csv(rows, csv_path)
    summary_path = cfg.output.summary
    if not summary_path:
        summary_path = (
            csv_path[: -len(".csv")] if csv_path.endswith(".csv") else csv_path
        ) + "_summary.json"
    doc = {"effective_config": config_to_dict(cfg)}
    doc.update(summary)
    with open(summary_path, "w", encoding="utf-8") as handle:
        handle.write(json.dumps(_to_jsonable(doc), indent=2) + "\n")
    for n, agg in summary["per_n"].items():
        _log("INFO", command="sweep", n=n, metric=summary["metric"],
             mean=agg["mean"], std=agg["std"], count=agg["count"])
    _log("INFO", command="sweep", csv=csv_path, summary=summary_path,
         total_ms=round(summary["timing"]["total_wall_time_ms"], 1))
    return EXIT_OK


def _cmd_gamma_check(cfg: ExperimentConfig, args) -> int:
    n = _resolve_n(cfg, "gamma-check")
    seed = _resolve_seed(cfg, n)
    report = homogenized_checks(
        cfg.environment,
        n,
        seed,
        ell_grid=None if cfg.ell_grid is None else np.asarray(cfg.ell_grid),
        gamma_grid=cfg.gamma_grid,
        tol_plateau=cfg.tolerances.tol_plateau,
        tol_h=cfg.tolerances.tol_h,
    )
    zeroth_ok = report["zeroth"]["decreasing_ok"] and report["zeroth"]["plateau_ok"]
    first_ok = report["first"] is None or report["first"]["within_tolerance"]
    _log("INFO", command="gamma-check", n=n, seed=seed,
         zeroth_ok=zeroth_ok, first_ok=first_ok)
    if report["first"] is not None:
        for row in report["first"]["rows"]:
            _log("INFO", command="gamma-check", gamma=row["gamma"],
                 rescaled_excess=row["rescaled_excess"], target=row["target"],
                 ok=row["ok"])
    doc = {"effective_config": config_to_dict(cfg)}
    doc.update(report)
    _emit(doc, args.out)
    return EXIT_OK if zeroth_ok and first_ok else EXIT_INVALID


def _cmd_oracle(cfg: ExperimentConfig, args) -> int:
    n = _resolve_n(cfg, "oracle")
    seed = _resolve_seed(cfg, n)
    r = realize(cfg.environment, n, seed)
    doc = {"effective_config": config_to_dict(cfg), "n": n, "seed": seed}
    if cfg.ell is not None:
        res = reference.grid_minimize(r, cfg.ell)
        doc["ell"] = cfg.ell
        doc["energy"] = res.energy
        doc["profile"] = None if res.profile is None else list(res.profile)
        doc["grid"] = {"lo": res.grid.lo, "hi": res.grid.hi, "step": res.grid.step}
        doc["error_bound"] = reference.error_bound(r, res.grid)
        _log("INFO", command="oracle", n=n, ell=cfg.ell, energy=res.energy)
    else:
        doc["ell_star_scan"] = reference.critical_stretch_scan(r)
        _log("INFO", command="oracle", n=n, ell_star_scan=doc["ell_star_scan"])
    _emit(doc, args.out)
    return EXIT_OK


_COMMANDS = {
    "validate": _cmd_validate,
    "min-energy": _cmd_min_energy,
    "critical-stretch": _cmd_critical_stretch,
    "sweep": _cmd_sweep,
    "gamma-check": _cmd_gamma_check,
    "oracle": _cmd_oracle,
}


def _apply_overrides(raw: dict, args) -> None:
    for key in ("mode", "n", "ell", "seed", "replicates", "parallel"):
        value = getattr(args, key, None)
        if value is not None:
            raw[key] = value
    tol_overrides = {}
    if getattr(args, "ell_tol", None) is not None:
        tol_overrides["ell_tol"] = args.ell_tol
    if getattr(args, "eps_e", None) is not None:
        tol_overrides["eps_energy"] = args.eps_e
    if tol_overrides:
        tolerances = raw.get("tolerances") or {}
        if not isinstance(tolerances, dict):
            raise ConfigError("tolerances: expected a mapping")
        tolerances.update(tol_overrides)
        raw["tolerances"] = tolerances


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chainfrac",
        description="Minimum energies and critical stretches of random chains",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str, *, n=False, ell=False, seed=False,
            oracle=False, tols=False, sweep=False, dump=False):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="YAML experiment config")
        p.add_argument("--out", help="artifact path (JSON, or CSV for sweep)")
        if n:
            p.add_argument("--n", type=int, help="chain length override")
        if ell:
            p.add_argument("--ell", type=float, help="mean strain override")
        if seed:
            p.add_argument("--seed", type=int, help="realization seed override")
        if oracle:
            p.add_argument("--oracle", action="store_true",
                           help="cross-check against the brute-force reference")
        if tols:
            p.add_argument("--ell-tol", type=float, dest="ell_tol",
                           help="critical-stretch bracket width")
            p.add_argument("--eps-e", type=float, dest="eps_e",
                           help="energy gap tolerance")
        if sweep:
            p.add_argument("--mode", choices=("mean_delta", "rescaled"),
                           help="study mode override")
            p.add_argument("--replicates", type=int, help="replicates per n")
            p.add_argument("--parallel", type=int, help="worker process count")
        if dump:
            p.add_argument("--dump-strains", dest="dump_strains",
                           help="write the strain profile as little-endian float64")
        return p

    add("validate", "check every alphabet letter against the model assumptions")
    add("min-energy", "minimum mean energy of one realization at one mean strain",
        n=True, ell=True, seed=True, oracle=True, dump=True)
    add("critical-stretch", "locate the critical stretch of one realization",
        n=True, seed=True, oracle=True, tols=True)
    add("sweep", "critical-stretch study over n_list x replicates",
        tols=True, sweep=True)
    add("gamma-check", "limit-shape checks of the minimum energy",
        n=True, seed=True)
    add("oracle", "brute-force reference results for small chains",
        n=True, ell=True, seed=True)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        raw = load_raw(args.config)
        _apply_overrides(raw, args)
        cfg = build_config(raw)
        return _COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        _log("ERROR", command=args.command, error=str(exc))
        return EXIT_INVALID
    except ChainfracError as exc:
        _log("ERROR", command=args.command,
             error_type=type(exc).__name__, error=str(exc))
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
