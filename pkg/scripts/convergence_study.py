"""Grid refinement of the loop-space axioms for both discretizations.

    python3 scripts/convergence_study.py --group su2 --grids 16 32 64 128 256
"""
import argparse
import json

from qhwz import lie
from qhwz.suites import loop_convergence


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--group", default="su2")
    p.add_argument("--grids", type=int, nargs="+", default=[32, 64, 128, 256])
    p.add_argument("--samples", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fd-step", type=float, default=1e-4)
    p.add_argument("--json", help="also dump the tables here")
    args = p.parse_args()
    g = lie.group_from_name(args.group)
    tables = {}
    for scheme in ("spectral", "central"):
        t = loop_convergence(g, tuple(args.grids), args.samples, args.seed, args.fd_step, scheme)
        tables[scheme] = t
        print(f"{scheme}:")
        print(f"  {'N':>5} {'qh2':>10} {'qh3':>10}")
        for i, n in enumerate(t["grids"]):
            print(f"  {n:>5} {t['qh2'][i]:10.2e} {t['qh3'][i]:10.2e}")
        print("  observed orders qh2:", " ".join("-" if o is None else f"{o:.2f}" for o in t["orders"]["qh2"]))
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(tables, fh, indent=2, sort_keys=True)


if __name__ == "__main__":
    main()
