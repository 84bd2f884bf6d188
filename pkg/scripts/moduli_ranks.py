"""Rank of the restricted form on unit-level reductions of moduli recipes.

    python3 scripts/moduli_ranks.py --handles 0 1 2 --classes "0.2,-0.2;0.3,-0.3"
"""
import argparse

from qhwz import lie
from qhwz.cli import parse_classes
from qhwz.defects import case_moduli
from qhwz.qham import InfeasibleConstraint


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--group", default="su2")
    p.add_argument("--grid", type=int, default=32)
    p.add_argument("--handles", type=int, nargs="+", default=[1, 2])
    p.add_argument("--boundaries", type=int, default=0)
    p.add_argument("--classes", type=parse_classes, default=[])
    p.add_argument("--points", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    g = lie.group_from_name(args.group)
    print(f"{'recipe':>10} {'constraint':>10} {'orbit':>6} {'ranks':>10} {'formula':>8} {'gauge':>9}")
    for k in args.handles:
        tag = f"({args.boundaries},{len(args.classes)},{k})"
        try:
            r = case_moduli(g, args.boundaries, args.classes, k, args.grid, args.seed, args.points)
        except InfeasibleConstraint as exc:
            print(f"{tag:>10} infeasible: {exc}")
            continue
        e = r.extra
        ranks = ",".join(map(str, e["ranks"]))
        print(
            f"{tag:>10} {e['constraint_dim']:>10} {e['orbit_dim']:>6} {ranks:>10} "
            f"{e.get('expected_rank', '-'):>8} {e['gauge_residual']:9.1e}"
        )


if __name__ == "__main__":
    main()
