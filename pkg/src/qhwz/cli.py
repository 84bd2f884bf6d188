"""Command-line entry: ``python3 -m qhwz --suite defects --grid 64``.

Exit status: 0 when every case passes, 1 on a failing case, 2 on a bad
configuration.
"""
from __future__ import annotations

import argparse
import json
import sys

from .suites import SUITES, SuiteConfig, run_suite


def parse_classes(text: str) -> list[list[float]]:
    """``"0.2,-0.2;0.1,-0.1"`` -> ``[[0.2, -0.2], [0.1, -0.1]]``."""
    out = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if chunk:
            out.append([float(x) for x in chunk.split(",")])
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qhwz", description="Quasi-Hamiltonian WZNW verification suites")
    p.add_argument("--config", help="JSON file with the same keys as the flags")
    p.add_argument("--group", choices=["su2", "su3"])
    p.add_argument("--pairing-scale", type=float, dest="pairing_scale", help="c in (x, y) = -c Re tr(xy)")
    p.add_argument("--grid", type=int, help="loop grid size N")
    p.add_argument("--seed", type=int)
    p.add_argument("--tol", type=float, help="tolerance for defect identities")
    p.add_argument("--fd-step", type=float, dest="fd_step")
    p.add_argument("--suite", choices=SUITES)
    p.add_argument("--case", help="run a single defect case")
    p.add_argument("--classes", type=parse_classes, help='alcove vectors, e.g. "0.2,-0.2;0.1,-0.1"')
    p.add_argument("--handles", type=int)
    p.add_argument("--boundaries", type=int)
    p.add_argument("--points", type=int, help="constrained points per defect case")
    p.add_argument("--pairs", type=int, help="tangent pairs per point")
    p.add_argument("--axiom-samples", type=int, dest="axiom_samples")
    p.add_argument("--report", help="write the JSON report here")
    return p


def load_config(args: argparse.Namespace) -> SuiteConfig:
    values = {}
    if args.config:
        with open(args.config) as fh:
            values = json.load(fh)
        unknown = set(values) - set(SuiteConfig.keys())
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if isinstance(values.get("classes"), str):
            values["classes"] = parse_classes(values["classes"])
    for key in SuiteConfig.keys():
        val = getattr(args, key, None)
        if val is not None:
            values[key] = val
    return SuiteConfig(**values)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        cfg = load_config(args)
    except (OSError, ValueError, TypeError) as exc:
        print(f"qhwz: bad configuration: {exc}", file=sys.stderr)
        return 2
    report = run_suite(cfg)
    text = json.dumps(report.to_dict(), sort_keys=True, indent=2, allow_nan=False) + "\n"
    if cfg.report:
        with open(cfg.report, "w") as fh:
            fh.write(text)
    for case in report.cases:
        flag = "PASS" if case.passed else "FAIL"
        line = f"{flag} {case.name}: max residual {case.max_residual:.3e} (tol {case.tolerance:.1e})"
        if case.extra.get("failed_checks"):
            line += " failed: " + ", ".join(case.extra["failed_checks"])
        print(line)
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
