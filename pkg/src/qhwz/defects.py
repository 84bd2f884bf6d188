"""Defect and moduli scenarios built by fusion and unit-level reduction.

Each case compares the fused form, restricted to the unit level, with a
closed-form expression written out independently below: moment variations
are hand-coded from the charts, class forms go through the alternative
``k^-1 dk`` presentation, and the wedge pairing has its own helper.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from . import lie
from .catalog import ConjugacyClass, FusedDouble, Inverse, double, fused_double, invert
from .fusion import (
    Fusion,
    fuse,
    fuse_many,
    gauge_degeneracy_check,
    sample_constraint,
)
from .lie import GroupSpec, dagger
from .loops import ChiralWZNW, loop_reverse, omega_chart_identity, push_reverse
from .qham import check_axioms

DEFAULT_TOL = 1e-8

DEFAULT_CLASSES = {
    2: [(0.2, -0.2), (1 / 6, -1 / 6), (0.3, -0.3)],
    3: [(0.4, 0.1, -0.5), (0.3, 0.0, -0.3), (0.25, 0.05, -0.3)],
}


# ---------------------------------------------------------------------------
# independent oracle pieces
# ---------------------------------------------------------------------------


def _wedge(group, a_u, b_u, a_v, b_v) -> np.ndarray:
    """Matrix of 1/2[(a(u), b(v)) - (a(v), b(u))] for stacks indexed by u and v."""
    s = group.pairing_scale
    left = np.einsum("iab,jba->ij", a_u, b_v).real
    right = np.einsum("iab,jba->ij", a_v, b_u).real.T
    return -0.5 * s * (left - right)


def class_variation(cls: ConjugacyClass, k, coords) -> tuple[np.ndarray, np.ndarray]:
    """``(mu, dmu)`` for ``mu = k f k^-1`` and ``dk = eta k``."""
    g = cls.group
    eta = g.to_algebra(np.atleast_2d(coords.T).T)
    mu = k @ cls.center @ dagger(k)
    return mu, eta @ mu - mu @ eta


def loop_variation(space: ChiralWZNW, l, coords) -> tuple[np.ndarray, np.ndarray]:
    """``(mu, dmu)`` for ``mu = g0 exp(-2 pi i tau) g0^-1`` under ``(dtau, dg0 = zeta0 g0)``."""
    _, dtau, zeta = space.slot.unpack(coords)
    e = lie.alcove_embed(-l.tau)
    mu = l.g0 @ e @ dagger(l.g0)
    de = (-2j * np.pi * dtau)[:, None, :] * np.eye(len(l.tau)) @ e
    return mu, zeta @ mu - mu @ zeta + l.g0 @ de @ dagger(l.g0)


def class_alpha(cls: ConjugacyClass, k, u, v) -> np.ndarray:
    return cls.form_alt((k,), u, v)


def loop_omega(space: ChiralWZNW, l, u, v) -> np.ndarray:
    return space.form((l,), u, v)


def _left(mu, dmu):
    return dagger(mu) @ dmu


def _right(mu, dmu):
    return dmu @ dagger(mu)


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


@dataclass
class CaseResult:
    name: str
    max_residual: float
    tolerance: float
    passed: bool
    samples: dict
    identity: str
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d


@dataclass
class SuiteReport:
    group: str
    grid: int
    seed: int
    cases: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cases)

    def to_dict(self) -> dict:
        return {
            "schema": "qham-report/1",
            "group": self.group,
            "grid": self.grid,
            "seed": self.seed,
            "pass": self.passed,
            "cases": [c.to_dict() for c in self.cases],
        }


@dataclass(frozen=True)
class DefectCase:
    name: str
    factors: tuple
    solve_slot: int
    oracle: object
    identity: str
    n_points: int = 30
    n_pairs: int = 20
    seed: int = 0


def _leaf_data(space: Fusion, point, u, v):
    pts = space.leaf_points(point)
    sl = space.leaf_tangent_slices()
    return pts, [u[s] for s in sl], [v[s] for s in sl]


def run_case(case: DefectCase, tol: float = DEFAULT_TOL, axiom_samples: int = 3, extra_check=None):
    """Sample the unit level, project smooth tangents onto it and compare forms."""
    space = fuse_many(case.factors)
    rng = lie.as_rng(case.seed)
    worst = 0.0
    extra_worst = 0.0
    moment_worst = 0.0
    p = case.n_pairs
    for _ in range(case.n_points):
        sample = sample_constraint(space, case.solve_slot, rng)
        moment_worst = max(moment_worst, sample.moment_residual)
        b = sample.basis
        t = space.random_tangent(rng, sample.point, 2 * p)
        t = b @ (b.T @ t)
        u, v = t[:, :p], t[:, p:]
        fused = space.form(sample.point, u, v)
        pts, us, vs = _leaf_data(space, sample.point, u, v)
        expected = case.oracle(case.factors, pts, us, vs)
        worst = max(worst, float(np.max(np.abs(fused - expected))))
        if extra_check is not None:
            extra_worst = max(extra_worst, extra_check(case.factors, pts, us, vs))
    extra = {"moment_residual": moment_worst}
    failed = [] if moment_worst <= 1e-12 else ["moment"]
    if extra_check is not None:
        extra["chart_identity_residual"] = extra_worst
        if extra_worst > tol:
            failed.append("chart_identity")
    if axiom_samples:
        rep = check_axioms(space, axiom_samples, case.seed)
        extra["axioms"] = rep.to_dict()["axioms"]
        failed += [f"axiom {k}" for k, a in rep.axioms.items() if not a.passed]
    extra["failed_checks"] = failed
    ok = worst <= tol and not failed
    return CaseResult(
        name=case.name,
        max_residual=worst,
        tolerance=tol,
        passed=bool(ok),
        samples={"points": case.n_points, "tangent_pairs": p},
        identity=case.identity,
        extra=extra,
    )


# ---------------------------------------------------------------------------
# the five defect scenarios
# ---------------------------------------------------------------------------


def _bulk_oracle(factors, pts, us, vs):
    w, wm = factors[0], factors[1].base
    return loop_omega(w, pts[0][0], us[0], vs[0]) - loop_omega(wm, pts[1][0], us[1], vs[1])


def _loop_cross(w, wm, pts, us, vs, il=0, ir=1):
    """1/2 (mu_l^-1 dmu_l, dmu_r^-1 mu_r) with dmu_r^-1 mu_r = -mu_r^-1 dmu_r."""
    ml, dl_u = loop_variation(w, pts[il][0], us[il])
    _, dl_v = loop_variation(w, pts[il][0], vs[il])
    mr, dr_u = loop_variation(wm, pts[ir][0], us[ir])
    _, dr_v = loop_variation(wm, pts[ir][0], vs[ir])
    return _wedge(w.group, _left(ml, dl_u), -_left(mr, dr_u), _left(ml, dl_v), -_left(mr, dr_v))


def case_bulk(group: GroupSpec = lie.SU2, grid: int = 64, n_points=50, n_pairs=20, seed=0, tol=DEFAULT_TOL, axiom_samples=3):
    w = ChiralWZNW(group, grid)
    case = DefectCase(
        "bulk", (w, invert(w)), 1, _bulk_oracle, "Omega(l) - Omega(r) on mu_l = mu_r",
        n_points, n_pairs, seed,
    )
    return run_case(case, tol, axiom_samples)


def case_one_defect(group: GroupSpec = lie.SU2, lam=None, grid: int = 64, n_points=30, n_pairs=20, seed=0, tol=DEFAULT_TOL, axiom_samples=3):
    lam = DEFAULT_CLASSES[group.n][0] if lam is None else lam
    w = ChiralWZNW(group, grid)
    c = ConjugacyClass(group, lam)

    def oracle(factors, pts, us, vs):
        w, wm, c = factors[0], factors[1].base, factors[2]
        out = _bulk_oracle(factors, pts, us, vs)
        out += class_alpha(c, pts[2][0], us[2], vs[2])
        return out + _loop_cross(w, wm, pts, us, vs)

    case = DefectCase(
        "one_defect", (w, invert(w), c), 1, oracle,
        "Omega(l) - Omega(r) + alpha_C + 1/2(mu_l^-1 dmu_l, dmu_r^-1 mu_r) on mu = mu_r mu_l^-1",
        n_points, n_pairs, seed,
    )
    return run_case(case, tol, axiom_samples)


def _aux_check(factors, pts, us, vs):
    worst = 0.0
    for idx in (0, 1):
        w = factors[idx] if idx == 0 else factors[idx].base
        l = pts[idx][0]
        diff = w.form((l,), us[idx], vs[idx]) - omega_chart_identity(w, l, us[idx], vs[idx])
        worst = max(worst, float(np.max(np.abs(diff))))
    return worst


def case_two_defects(group: GroupSpec = lie.SU2, lam1=None, lam2=None, grid: int = 64, n_points=30, n_pairs=20, seed=0, tol=DEFAULT_TOL, axiom_samples=3):
    lam1 = DEFAULT_CLASSES[group.n][1] if lam1 is None else lam1
    lam2 = DEFAULT_CLASSES[group.n][0] if lam2 is None else lam2
    w = ChiralWZNW(group, grid)
    c1, c2 = ConjugacyClass(group, lam1), ConjugacyClass(group, lam2)

    def oracle(factors, pts, us, vs):
        w, wm, c1, c2 = factors[0], factors[1].base, factors[2], factors[3]
        out = _bulk_oracle(factors, pts, us, vs)
        out += class_alpha(c1, pts[2][0], us[2], vs[2]) + class_alpha(c2, pts[3][0], us[3], vs[3])
        out += _loop_cross(w, wm, pts, us, vs)
        m1, d1u = class_variation(c1, pts[2][0], us[2])
        _, d1v = class_variation(c1, pts[2][0], vs[2])
        m2, d2u = class_variation(c2, pts[3][0], us[3])
        _, d2v = class_variation(c2, pts[3][0], vs[3])
        return out + _wedge(w.group, _left(m1, d1u), _right(m2, d2u), _left(m1, d1v), _right(m2, d2v))

    case = DefectCase(
        "two_defects", (w, invert(w), c1, c2), 1, oracle,
        "Omega(l) - Omega(r) + alpha_1 + alpha_2 + 1/2(mu_l^-1 dmu_l, dmu_r^-1 mu_r)"
        " + 1/2(mu_1^-1 dmu_1, dmu_2 mu_2^-1) on mu_r mu_l^-1 = mu_1 mu_2",
        n_points, n_pairs, seed,
    )
    return run_case(case, tol, axiom_samples, extra_check=_aux_check)


def case_boundary(group: GroupSpec = lie.SU2, lam1=None, lam2=None, grid: int = 64, n_points=30, n_pairs=20, seed=0, tol=DEFAULT_TOL, axiom_samples=3):
    lam1 = DEFAULT_CLASSES[group.n][0] if lam1 is None else lam1
    lam2 = DEFAULT_CLASSES[group.n][2] if lam2 is None else lam2
    w = ChiralWZNW(group, grid)
    c1, c2 = ConjugacyClass(group, lam1), ConjugacyClass(group, lam2)

    def oracle(factors, pts, us, vs):
        c2, c1, w = factors[0], factors[1].base, factors[2]
        out = loop_omega(w, pts[2][0], us[2], vs[2])
        out -= class_alpha(c1, pts[1][0], us[1], vs[1])
        out += class_alpha(c2, pts[0][0], us[0], vs[0])
        m1, d1u = class_variation(c1, pts[1][0], us[1])
        _, d1v = class_variation(c1, pts[1][0], vs[1])
        ml, dlu = loop_variation(w, pts[2][0], us[2])
        _, dlv = loop_variation(w, pts[2][0], vs[2])
        # mu_1 d(mu_1^-1) = -dmu_1 mu_1^-1
        return out + _wedge(w.group, -_right(m1, d1u), _right(ml, dlu), -_right(m1, d1v), _right(ml, dlv))

    case = DefectCase(
        "boundary", (c2, invert(c1), w), 2, oracle,
        "Omega(l) + 1/2(mu_1 dmu_1^-1, dmu_l mu_l^-1) - alpha_1 + alpha_2 on mu_l^-1 mu_1 = mu_2",
        n_points, n_pairs, seed,
    )
    return run_case(case, tol, axiom_samples)


def case_boundary_one_defect(group: GroupSpec = lie.SU2, lam1=None, lam2=None, lam3=None, grid: int = 64, n_points=30, n_pairs=20, seed=0, tol=DEFAULT_TOL, axiom_samples=3):
    d = DEFAULT_CLASSES[group.n]
    lam1 = d[0] if lam1 is None else lam1
    lam2 = d[1] if lam2 is None else lam2
    lam3 = d[2] if lam3 is None else lam3
    w = ChiralWZNW(group, grid)
    c1, c2, c3 = (ConjugacyClass(group, x) for x in (lam1, lam2, lam3))

    def oracle(factors, pts, us, vs):
        c1, c2, w, c3 = factors[0].base, factors[1], factors[2], factors[3]
        out = loop_omega(w, pts[2][0], us[2], vs[2])
        out -= class_alpha(c1, pts[0][0], us[0], vs[0])
        out += class_alpha(c2, pts[1][0], us[1], vs[1])
        out += class_alpha(c3, pts[3][0], us[3], vs[3])
        m1, d1u = class_variation(c1, pts[0][0], us[0])
        _, d1v = class_variation(c1, pts[0][0], vs[0])
        m2, d2u = class_variation(c2, pts[1][0], us[1])
        _, d2v = class_variation(c2, pts[1][0], vs[1])
        ml, dlu = loop_variation(w, pts[2][0], us[2])
        _, dlv = loop_variation(w, pts[2][0], vs[2])
        m3, d3u = class_variation(c3, pts[3][0], us[3])
        _, d3v = class_variation(c3, pts[3][0], vs[3])
        out += _wedge(w.group, -_right(m1, d1u), _right(m2, d2u), -_right(m1, d1v), _right(m2, d2v))
        return out + _wedge(w.group, _left(ml, dlu), _right(m3, d3u), _left(ml, dlv), _right(m3, d3v))

    case = DefectCase(
        "boundary_one_defect", (invert(c1), c2, w, c3), 2, oracle,
        "Omega(l) + 1/2(mu_1 dmu_1^-1, dmu_2 mu_2^-1) + 1/2(mu_l^-1 dmu_l, dmu_3 mu_3^-1)"
        " - alpha_1 + alpha_2 + alpha_3 on mu_1 = mu_2 mu_l mu_3",
        n_points, n_pairs, seed,
    )
    return run_case(case, tol, axiom_samples)


CASES = {
    "bulk": case_bulk,
    "one_defect": case_one_defect,
    "two_defects": case_two_defects,
    "boundary": case_boundary,
    "boundary_one_defect": case_boundary_one_defect,
}


# ---------------------------------------------------------------------------
# moduli spaces and partial fusion
# ---------------------------------------------------------------------------


def moduli_recipe(group: GroupSpec, n_boundaries: int, taus, k_handles: int, grid: int = 64) -> list:
    """Factors ``W^- x n, C_1^- .. C_m^-, DD x k`` in this order."""
    taus = list(taus or [])
    if n_boundaries + len(taus) + k_handles < 1:
        raise ValueError("need at least one factor")
    factors = []
    if n_boundaries:
        wm = invert(ChiralWZNW(group, grid))
        factors += [wm] * n_boundaries
    factors += [invert(ConjugacyClass(group, t)) for t in taus]
    factors += [fused_double(group)] * k_handles
    return factors


def expected_moduli_rank(group: GroupSpec, taus, k_handles: int) -> int:
    dims = sum(ConjugacyClass(group, t).class_dim for t in taus)
    return dims + 2 * k_handles * group.dim - 2 * group.dim


def case_moduli(group: GroupSpec = lie.SU2, n_boundaries=0, taus=(), k_handles=1, grid=64, seed=0, n_points=3, tol=1e-9):
    """Unit-level reduction of the moduli recipe; ranks compared for closed surfaces."""
    factors = moduli_recipe(group, n_boundaries, taus, k_handles, grid)
    space = fuse_many(factors)
    rng = lie.as_rng(seed)
    ranks, worst = [], 0.0
    reports = []
    for _ in range(n_points):
        sample = sample_constraint(space, len(factors) - 1, rng)
        rep = gauge_degeneracy_check(space, sample, seed=rng)
        ranks.append(rep.rank)
        worst = max(worst, rep.gauge_tangency, rep.gauge_contraction)
        reports.append(rep)
    extra = {
        "ranks": ranks,
        "constraint_dim": reports[-1].constraint_dim,
        "orbit_dim": reports[-1].orbit_dim,
        "gauge_residual": worst,
        "kernel_angle": max(r.kernel_angle for r in reports),
    }
    failed = [] if worst <= tol else ["gauge"]
    identity = "gauge directions in ker Omega"
    if n_boundaries == 0:
        expected = expected_moduli_rank(group, taus, k_handles)
        extra["expected_rank"] = expected
        if any(r != expected for r in ranks):
            failed.append(f"rank {sorted(set(ranks))} != {expected}")
        identity = "reduced rank = sum dim C_i + (2k - 2) dim G"
    if n_boundaries == 2 and not taus and k_handles == 0:
        rev = reversal_equivalence(group, grid, seed=seed)
        extra["reversal_residual"] = rev
        if rev > DEFAULT_TOL:
            failed.append("reversal")
        identity += "; W^- * W^- equals W * W^- after loop reversal"
    extra["failed_checks"] = failed
    ok = not failed
    name = f"moduli_{n_boundaries}_{len(taus)}_{k_handles}"
    return CaseResult(name, worst, tol, bool(ok), {"points": n_points}, identity, extra)


def reversal_equivalence(group: GroupSpec, grid=64, n_points=10, n_pairs=10, seed=0) -> float:
    """Compare W^- * W^- at (l, r) with W * W^- at (I l, r) on pushed tangents."""
    w = ChiralWZNW(group, grid)
    mm = fuse(invert(w), invert(w))
    pm = fuse(w, invert(w))
    rng = lie.as_rng(seed)
    worst = 0.0
    d = w.dim
    for _ in range(n_points):
        l, r = w.random_point(rng)[0], w.random_point(rng)[0]
        t = mm.random_tangent(rng, (l, r), 2 * n_pairs)
        pushed = np.concatenate([push_reverse(w.slot, l, t[:d]), t[d:]])
        a = mm.form((l, r), t[:, :n_pairs], t[:, n_pairs:])
        b = pm.form((loop_reverse(l), r), pushed[:, :n_pairs], pushed[:, n_pairs:])
        worst = max(worst, float(np.max(np.abs(a - b))))
        worst = max(worst, float(np.max(np.abs(mm.moment((l, r))[0] - pm.moment((loop_reverse(l), r))[0]))))
    return worst


def check_partial_fusion_double(group: GroupSpec = lie.SU2, grid=32, seed=0, n_points=2, tol=1e-6):
    """Partial fusion of the first factor of D(G) with W^-, reduced at the unit level."""
    w = ChiralWZNW(group, grid)
    wm = invert(w)
    space = fuse(double(group), wm, 0, 0)
    rng = lie.as_rng(seed)
    extra = {}
    worst_angle, ok = 0.0, True
    for _ in range(n_points):
        sample = sample_constraint(space, 1, rng, factor=0)
        rep = gauge_degeneracy_check(space, sample, seed=rng)
        # rank of Omega on W^- modulo its degenerate directions
        lp = sample.point[2:]
        q = wm.degenerate_directions(lp)
        comp = np.linalg.svd(np.eye(wm.dim) - q @ q.T)[0][:, : wm.dim - q.shape[1]]
        s = np.linalg.svd(wm.form(lp, comp, comp), compute_uv=False)
        w_rank = int(np.sum(s > 1e-8 * max(1.0, s[0])))
        quotient_dim = rep.constraint_dim - rep.orbit_dim
        extra = {
            "constraint_dim": rep.constraint_dim,
            "orbit_dim": rep.orbit_dim,
            "quotient_dim": quotient_dim,
            "reduced_rank": rep.rank,
            "w_minus_dim": int(comp.shape[1]),
            "w_minus_rank": w_rank,
        }
        worst_angle = max(worst_angle, rep.kernel_angle)
        ok = ok and quotient_dim == comp.shape[1] and rep.rank == w_rank
        ok = ok and rep.gauge_contraction < 1e-9 and rep.gauge_tangency < 1e-9
    eq = check_axioms(space, 2, seed, kernel=False)
    extra["residual_equivariance"] = eq.axioms["qh1"].max_residual
    ok = ok and worst_angle < tol and eq.axioms["qh1"].passed
    extra["kernel_angle"] = worst_angle
    return CaseResult(
        "partial_fusion_double", worst_angle, tol, bool(ok), {"points": n_points},
        "(D(G) * W^-)_e has the dimension and rank of W^-", extra,
    )
