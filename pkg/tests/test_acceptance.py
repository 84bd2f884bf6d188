"""Acceptance criteria, SU(2) and N = 64 unless stated otherwise.

Each test records one PASS/FAIL line that is echoed in the terminal summary.
"""
import json
import subprocess
import sys

import numpy as np

from qhwz import lie
from qhwz.catalog import conjugacy_class, double, fused_double, invert
from qhwz.defects import CASES, DEFAULT_CLASSES, case_moduli
from qhwz.fusion import associativity_residual
from qhwz.loops import ChiralWZNW
from qhwz.suites import (
    CONVERGENCE_FLOOR,
    axiom_suite,
    convergence_case,
    convergence_ok,
    evolution_case,
    factorization_case,
    reversal_case,
)

G = lie.SU2
N = 64
TOL = {"qh1": 1e-10, "qh2": 1e-6, "qh3": 1e-8, "qh4": 1e-6}


def test_criterion_1_axiom_suite(criterion):
    cases = axiom_suite(G, n_samples=50, seed=0, fd_step=1e-4)
    assert len(cases) == 10  # three classes, D, DD and the five inverses
    bad = []
    for c in cases:
        for k, a in c.extra["axioms"].items():
            assert a["tolerance"] == TOL[k]
            if not a["max_residual"] <= TOL[k]:
                bad.append((c.name, k, a["max_residual"]))
    worst = {k: max(c.extra["axioms"][k]["max_residual"] for c in cases) for k in TOL}
    msg = "10 spaces x 50 points, worst " + ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    criterion(1, not bad, msg)
    assert not bad, bad


def test_criterion_2_fusion_associativity(criterion):
    triples = [
        (conjugacy_class(G, DEFAULT_CLASSES[2][0]), double(G), fused_double(G)),
        (invert(fused_double(G)), conjugacy_class(G, DEFAULT_CLASSES[2][2]), double(G)),
    ]
    worst = max(associativity_residual(*t, n_samples=100, seed=i) for i, t in enumerate(triples))
    w = ChiralWZNW(G, N)
    worst = max(worst, associativity_residual(w, invert(w), conjugacy_class(G, DEFAULT_CLASSES[2][1]), 100, 5))
    ok = worst < 1e-12
    criterion(2, ok, f"|Omega_(12)3 - Omega_1(23)| = {worst:.1e} over 3 x 100 samples (tol 1e-12)")
    assert ok


def test_criterion_3_discretized_w_convergence(criterion):
    res = convergence_case(G, seed=0, fd_step=1e-4)
    spectral = res.extra["spectral"]
    assert spectral["grids"] == [32, 64, 128, 256]
    orders_ok = convergence_ok(spectral["qh2"]) and convergence_ok(spectral["qh3"])
    qh2_128 = spectral["qh2"][spectral["grids"].index(128)]
    ok = orders_ok and qh2_128 < 1e-5
    criterion(
        3, ok,
        f"qh2 over N=32..256: {', '.join(f'{r:.1e}' for r in spectral['qh2'])} "
        f"(order >= 2 or floor {CONVERGENCE_FLOOR:.0e}); qh2 at N=128 {qh2_128:.1e} (tol 1e-5)",
    )
    assert ok


def test_criterion_4_loop_reversal(criterion):
    res = reversal_case(G, grid=N, n_loops=50, seed=0, tol=1e-8)
    ok = res.extra["form_residual"] < 1e-8 and res.extra["moment_residual"] < 1e-8
    criterion(
        4, ok,
        f"I*Omega + Omega {res.extra['form_residual']:.1e}, mu(Il) mu(l) - 1 "
        f"{res.extra['moment_residual']:.1e} on 50 loops (tol 1e-8)",
    )
    assert ok


def test_criterion_5_defect_cases(criterion):
    results = [fn(G, grid=N, n_points=30, n_pairs=20, seed=i, tol=1e-8) for i, fn in enumerate(CASES.values())]
    assert len(results) == 5
    for r in results:
        assert r.samples["points"] >= 30 and r.samples["tangent_pairs"] >= 20
    aux = next(r for r in results if r.name == "two_defects").extra["chart_identity_residual"]
    ok = all(r.max_residual < 1e-8 for r in results) and aux < 1e-8
    ok = ok and all(r.passed for r in results)
    msg = ", ".join(f"{r.name} {r.max_residual:.1e}" for r in results)
    criterion(5, ok, f"{msg}; chart identity {aux:.1e} (tol 1e-8, 30 points x 20 pairs)")
    assert ok


def test_criterion_6_moduli_ranks(criterion):
    torus = case_moduli(G, 0, (), 1, N, seed=0)
    genus2 = case_moduli(G, 0, (), 2, N, seed=0)
    gauge = max(torus.extra["gauge_residual"], genus2.extra["gauge_residual"])
    ok_torus = all(r == 0 for r in torus.extra["ranks"])
    ok_g2 = all(r == 6 for r in genus2.extra["ranks"])
    ok = ok_torus and ok_g2 and gauge < 1e-9
    criterion(
        6, ok,
        f"(0,0,1) ranks {torus.extra['ranks']} (expected 0); (0,0,2) ranks {genus2.extra['ranks']} "
        f"(expected 6); gauge residual {gauge:.1e} (tol 1e-9)",
    )
    assert ok_g2 and gauge < 1e-9
    assert ok_torus, f"torus reduction has rank {torus.extra['ranks']}, not 0"


def test_criterion_7_factorization(criterion):
    res = factorization_case(G, grids=(N, 2 * N), seed=0, ratio=3.5)
    ratios = res.extra["ratios"]
    ok = all(r > 3.5 for r in ratios.values())
    criterion(7, ok, "residual reduction on halving: " + ", ".join(f"{k} {v:.2f}x" for k, v in ratios.items()) + " (need > 3.5)")
    assert ok


def test_criterion_8_evolution_field(criterion):
    res = evolution_case(G, grid=N, n_points=3, seed=0, tol=1e-6)
    r = res.extra["residuals"]
    ok = r["omega"] < 1e-6 * N and r["moment"] < 1e-6 * N and r["dH"] < 1e-6 and r["dmu"] < 1e-6
    criterion(
        8, ok,
        f"iota(v)Omega - dH {r['omega']:.1e}, moment condition {r['moment']:.1e} (tol {1e-6 * N:.1e}); "
        f"dH(v) {r['dH']:.1e}, dmu(v) {r['dmu']:.1e} (tol 1e-6)",
    )
    assert ok


def test_criterion_9_cli_determinism(criterion, tmp_path):
    outs = []
    for k in range(2):
        path = tmp_path / f"r{k}.json"
        cmd = [sys.executable, "-m", "qhwz", "--suite", "defects", "--case", "two_defects",
               "--points", "4", "--pairs", "5", "--seed", "11", "--grid", "64", "--report", str(path)]
        proc = subprocess.run(cmd, capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        outs.append(path.read_bytes())
    json.loads(outs[0])
    ok = outs[0] == outs[1]
    criterion(9, ok, f"two CLI runs with seed 11 give {'identical' if ok else 'different'} JSON ({len(outs[0])} bytes)")
    assert ok
