#!/usr/bin/env python3
"""Reproduce both threshold limits empirically.

Runs two seeded convergence studies and prints per-n tables against the
closed-form targets:

  * mean mode: a two-letter mixture with ground states (1, 1.2) whose
    critical stretch approaches 1.1;
  * rescaled mode: the homogeneous Lennard-Jones chain, whose excess
    stretch times sqrt(n) approaches sqrt(beta/alpha) = 1/6, and the
    half-depth mixture with target sqrt(1/48).

Example:
    python scripts/reproduce_limit_theorems.py --replicates 4 --max-n 1000
"""
import argparse
import math

from chainfrac import (
    EnvironmentSpec,
    IIDLaw,
    convergence_study,
    lennard_jones,
    scaled_shifted,
)


def print_study(title: str, summary: dict, target: float) -> None:
    print(f"\n{title} (target {target:.6f})")
    print(f"{'n':>7} {'mean':>12} {'std':>10} {'|mean-target|':>14}")
    for n, agg in summary["per_n"].items():
        print(
            f"{n:>7} {agg['mean']:>12.6f} {agg['std']:>10.2e} "
            f"{abs(agg['mean'] - target):>14.6f}"
        )


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--replicates", type=int, default=6)
    parser.add_argument("--max-n", type=int, default=10000)
    parser.add_argument("--master-seed", type=int, default=20260822)
    parser.add_argument("--parallel", type=int, default=1)
    args = parser.parse_args()

    n_list = [n for n in (100, 1000, 10000) if n <= args.max_n]
    lj = lennard_jones()

    mixture = EnvironmentSpec(
        law=IIDLaw((0.5, 0.5)),
        alphabet=(lj, scaled_shifted(lj, scale=1.2)),
    )
    _, summary = convergence_study(
        mixture, n_list, args.replicates, args.master_seed,
        mode="mean_delta", parallel=args.parallel,
    )
    print_study("critical stretch, mixed ground states (1, 1.2)", summary,
                summary["targets"]["mean_delta"])

    homogeneous = EnvironmentSpec(law=IIDLaw((1.0,)), alphabet=(lj,))
    _, summary = convergence_study(
        homogeneous, n_list, 1, args.master_seed,
        mode="rescaled", parallel=args.parallel,
    )
    print_study("rescaled threshold, homogeneous", summary, 1.0 / 6.0)

    half_depth = EnvironmentSpec(
        law=IIDLaw((0.5, 0.5)),
        alphabet=(lj, lennard_jones(depth=0.5)),
    )
    _, summary = convergence_study(
        half_depth, n_list, args.replicates, args.master_seed,
        mode="rescaled", parallel=args.parallel,
    )
    print_study("rescaled threshold, half-depth mixture", summary,
                math.sqrt(1.0 / 48.0))


if __name__ == "__main__":
    main()
