"""Verification suites: finite axioms, loop-space checks, defects and moduli."""
from __future__ import annotations

from dataclasses import dataclass, field, fields

import numpy as np

from . import defects, lie
from .catalog import ConjugacyClass, double, fused_double, invert
from .defects import CaseResult, SuiteReport
from .loops import (
    ChiralWZNW,
    FourierLoop,
    LoopPoint,
    evolution_field,
    factorize_wznw,
    loop_reverse,
    push_reverse,
    random_alcove_interior,
)
from .qham import check_axioms, cubic_term, directional_derivative, exterior_derivative3, moment_pairing_term

SUITES = ("axioms", "defects", "moduli", "loop", "all")


@dataclass
class SuiteConfig:
    group: str = "su2"
    pairing_scale: float = 1.0
    grid: int = 64
    seed: int = 0
    tol: float = 1e-8
    fd_step: float = 1e-4
    suite: str = "all"
    case: str | None = None
    classes: list | None = None
    handles: int = 2
    boundaries: int = 0
    points: int = 30
    pairs: int = 20
    axiom_samples: int = 50
    report: str | None = None

    def __post_init__(self):
        if self.suite not in SUITES:
            raise ValueError(f"unknown suite {self.suite!r}")
        if self.case is not None and self.case not in defects.CASES:
            raise ValueError(f"unknown case {self.case!r}")
        lie.group_from_name(self.group, self.pairing_scale)
        if self.grid < 8 or self.grid % 2:
            raise ValueError("grid must be even and >= 8")
        if min(self.points, self.pairs, self.axiom_samples) < 1 or self.handles < 0 or self.boundaries < 0:
            raise ValueError("sample counts must be positive")

    @classmethod
    def keys(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    @property
    def group_spec(self):
        return lie.group_from_name(self.group, self.pairing_scale)


# ---------------------------------------------------------------------------
# finite axioms
# ---------------------------------------------------------------------------


def catalog_spaces(group) -> list:
    spaces = [ConjugacyClass(group, lam) for lam in defects.DEFAULT_CLASSES[group.n]]
    spaces += [double(group), fused_double(group)]
    return spaces + [invert(s) for s in spaces]


def axiom_suite(group, n_samples=50, seed=0, fd_step=1e-4) -> list[CaseResult]:
    out = []
    for i, space in enumerate(catalog_spaces(group)):
        rep = check_axioms(space, n_samples, seed + i, fd_step=fd_step)
        worst = {k: v.max_residual for k, v in rep.axioms.items()}
        out.append(
            CaseResult(
                f"axioms_{space.name}",
                max(worst.values()),
                max(v.tolerance for v in rep.axioms.values()),
                rep.passed,
                {"points": n_samples},
                "equivariance, d Omega identity, moment pairing, kernel",
                {"axioms": rep.to_dict()["axioms"]},
            )
        )
    return out


# ---------------------------------------------------------------------------
# loop space
# ---------------------------------------------------------------------------


@dataclass
class ContinuumSample:
    """Grid-independent loop data: a point and three tangents."""

    h_gen: FourierLoop
    h_const: np.ndarray
    tau: np.ndarray
    g0: np.ndarray
    eta: FourierLoop
    dtau: np.ndarray
    zeta: np.ndarray
    zetas: tuple

    @classmethod
    def random(cls, group, rng, modes=3, amplitude=0.6):
        return cls(
            FourierLoop.random(group, rng, 1, modes, amplitude),
            group.random_group(rng),
            random_alcove_interior(group.n, rng),
            group.random_group(rng),
            FourierLoop.random(group, rng, 3, modes, 1.0),
            rng.standard_normal((3, group.n - 1)),
            rng.standard_normal((3, group.dim)),
            (group.random_algebra(rng),),
        )

    def on_grid(self, space: ChiralWZNW):
        sig = space.grid.sigma
        h = lie.group_exp(self.h_gen(sig)[:, 0]) @ self.h_const
        point = (LoopPoint(h, self.tau, self.g0),)
        eta = self.eta(sig)
        slot = space.slot
        tans = [
            slot.pack(eta[:, i], slot.cartan @ self.dtau[i], space.group.to_algebra(self.zeta[i]))
            for i in range(3)
        ]
        return point, np.array(tans).T


def loop_residuals(space: ChiralWZNW, sample: ContinuumSample, fd_step=1e-4) -> dict:
    p, t = sample.on_grid(space)
    u, v, w = t.T
    d_omega = exterior_derivative3(space, p, u, v, w, h=fd_step, richardson=True)
    qh2 = abs(d_omega + cubic_term(space, p, u, v, w))
    zm = space.infinitesimal_action(sample.zetas, p)
    lhs = float(space.form(p, zm[:, None], v[:, None])[0, 0])
    qh3 = abs(lhs - moment_pairing_term(space, p, sample.zetas, v))
    return {"qh2": float(qh2), "qh3": float(qh3)}


def observed_orders(grids, residuals) -> list:
    """log-log slopes between consecutive grids; ``None`` where a residual is exactly zero."""
    r = np.asarray(residuals, dtype=float)
    g = np.asarray(grids, dtype=float)
    out = []
    for i in range(len(r) - 1):
        ok = r[i] > 0 and r[i + 1] > 0
        out.append(float(np.log(r[i] / r[i + 1]) / np.log(g[i + 1] / g[i])) if ok else None)
    return out


def loop_convergence(group, grids=(32, 64, 128, 256), n_samples=3, seed=0, fd_step=1e-4, scheme="spectral") -> dict:
    rng = lie.as_rng(seed)
    samples = [ContinuumSample.random(group, rng) for _ in range(n_samples)]
    table = {"qh2": [], "qh3": []}
    for n in grids:
        space = ChiralWZNW(group, n, scheme=scheme)
        res = [loop_residuals(space, s, fd_step) for s in samples]
        for k in table:
            table[k].append(max(r[k] for r in res))
    return {"grids": list(grids), **table, "orders": {k: observed_orders(grids, v) for k, v in table.items()}}


# residuals below this are finite-difference/roundoff noise, not discretization error
CONVERGENCE_FLOOR = 1e-9


def convergence_ok(residuals, floor=CONVERGENCE_FLOOR, factor=4.0) -> bool:
    """Each grid doubling shrinks the residual by ``factor`` unless already at the floor."""
    return all(b <= max(a / factor, floor) for a, b in zip(residuals, residuals[1:]))


def convergence_case(group, seed=0, fd_step=1e-4, n_samples=3) -> CaseResult:
    spectral = loop_convergence(group, n_samples=n_samples, seed=seed, fd_step=fd_step)
    cen = loop_convergence(group, n_samples=n_samples, seed=seed, fd_step=fd_step, scheme="central")
    i128 = spectral["grids"].index(128)
    ok = convergence_ok(spectral["qh2"]) and convergence_ok(spectral["qh3"]) and spectral["qh2"][i128] < 1e-5
    return CaseResult(
        "loop_convergence",
        spectral["qh2"][i128],
        1e-5,
        bool(ok),
        {"points": n_samples, "grids": spectral["grids"]},
        "d Omega + cubic term and moment pairing on W, grid refinement",
        {"spectral": spectral, "central": cen, "floor": CONVERGENCE_FLOOR},
    )


def reversal_case(group, grid=64, n_loops=50, seed=0, tol=1e-8) -> CaseResult:
    w = ChiralWZNW(group, grid)
    rng = lie.as_rng(seed)
    worst_form = worst_mu = 0.0
    for _ in range(n_loops):
        p = w.random_point(rng)
        l = p[0]
        lr = loop_reverse(l)
        worst_mu = max(worst_mu, float(np.max(np.abs(lr.moment() @ l.moment() - np.eye(group.n)))))
        t = w.random_tangent(rng, p, 2)
        pt = push_reverse(w.slot, l, t)
        a = w.form((lr,), pt[:, :1], pt[:, 1:])
        b = w.form(p, t[:, :1], t[:, 1:])
        worst_form = max(worst_form, float(np.max(np.abs(a + b))))
    worst = max(worst_form, worst_mu)
    return CaseResult(
        "loop_reversal", worst, tol, bool(worst <= tol), {"points": n_loops},
        "I^* Omega = -Omega and mu(I l) = mu(l)^-1",
        {"form_residual": worst_form, "moment_residual": worst_mu},
    )


def factorization_data(group, n_nodes, rng_seed=0):
    rng = lie.as_rng(rng_seed)
    jl = FourierLoop.random(group, rng, 1, 3, 0.8)
    gx = FourierLoop.random(group, rng, 1, 3, 0.6)
    gc = group.random_group(rng)
    sig = 2 * np.pi * np.arange(n_nodes) / n_nodes
    return jl(sig)[:, 0], lie.group_exp(gx(sig)[:, 0]) @ gc


def factorization_case(group, grids=(64, 128), seed=0, ratio=3.5) -> CaseResult:
    rows = []
    for n in grids:
        jl, g = factorization_data(group, n, seed)
        f = factorize_wznw(jl, g, group.pairing_scale)
        rows.append({"b": f.b_spread, "monodromy": f.monodromy_defect, "hamiltonian": abs(f.h_wz - f.h_split)})
    ratios = {k: rows[0][k] / rows[1][k] for k in rows[0]}
    # worst fine/coarse residual quotient; second order means about 1/4
    worst = max(rows[1][k] / rows[0][k] for k in rows[0])
    ok = worst <= 1.0 / ratio
    return CaseResult(
        "factorization", worst, 1.0 / ratio, bool(ok), {"grids": list(grids)},
        "b constant, mu(l) = g_R(2 pi), H_WZ = H(l) + H(g_R^-1), second order",
        {"residuals": rows, "ratios": ratios},
    )


def evolution_case(group, grid=64, n_points=3, seed=0, tol=1e-6) -> CaseResult:
    w = ChiralWZNW(group, grid)
    rng = lie.as_rng(seed)
    worst = {"omega": 0.0, "moment": 0.0, "dH": 0.0, "dmu": 0.0}
    for _ in range(n_points):
        p = w.random_point(rng)
        ev = evolution_field(w, p)
        worst["omega"] = max(worst["omega"], ev.omega_residual)
        worst["moment"] = max(worst["moment"], ev.moment_residual)
        dh = directional_derivative(w.hamiltonian, w, p, ev.v, richardson=True)
        dmu = directional_derivative(lambda q: w.moment(q)[0], w, p, ev.v, richardson=True)
        worst["dH"] = max(worst["dH"], abs(float(dh)))
        worst["dmu"] = max(worst["dmu"], float(np.max(np.abs(dmu))))
    ok = worst["omega"] <= tol * grid and worst["moment"] <= tol * grid
    ok = ok and worst["dH"] <= tol and worst["dmu"] <= tol
    return CaseResult(
        "evolution_field", max(worst.values()), tol, bool(ok), {"points": n_points},
        "iota(v) Omega = dH, iota(v) mu^* theta = 0, v preserves H and mu",
        {"residuals": worst},
    )


def loop_axiom_case(group, grid=64, n_samples=10, seed=0, fd_step=1e-4) -> CaseResult:
    w = ChiralWZNW(group, grid)
    rep = check_axioms(w, n_samples, seed, fd_step=fd_step)
    worst = max(v.max_residual for v in rep.axioms.values())
    return CaseResult(
        "axioms_W", worst, max(v.tolerance for v in rep.axioms.values()), rep.passed, {"points": n_samples},
        "equivariance, d Omega identity, moment pairing, kernel",
        {"axioms": rep.to_dict()["axioms"]},
    )


def loop_suite(cfg: SuiteConfig) -> list[CaseResult]:
    g = cfg.group_spec
    return [
        loop_axiom_case(g, cfg.grid, 10, cfg.seed, cfg.fd_step),
        convergence_case(g, cfg.seed, cfg.fd_step),
        reversal_case(g, cfg.grid, 50, cfg.seed, cfg.tol),
        factorization_case(g, (cfg.grid, 2 * cfg.grid), cfg.seed),
        evolution_case(g, cfg.grid, 3, cfg.seed),
    ]


# ---------------------------------------------------------------------------
# defects and moduli
# ---------------------------------------------------------------------------


def _class_args(cfg: SuiteConfig, count: int) -> dict:
    if not cfg.classes:
        return {}
    if len(cfg.classes) < count:
        raise ValueError(f"need {count} classes, got {len(cfg.classes)}")
    names = ["lam1", "lam2", "lam3"] if count > 1 else ["lam"]
    return dict(zip(names, cfg.classes[:count]))


def defect_suite(cfg: SuiteConfig) -> list[CaseResult]:
    g = cfg.group_spec
    counts = {"bulk": 0, "one_defect": 1, "two_defects": 2, "boundary": 2, "boundary_one_defect": 3}
    names = [cfg.case] if cfg.case else list(defects.CASES)
    out = []
    for i, name in enumerate(names):
        kw = _class_args(cfg, counts[name]) if counts[name] else {}
        out.append(
            defects.CASES[name](
                g, grid=cfg.grid, n_points=cfg.points, n_pairs=cfg.pairs, seed=cfg.seed + i, tol=cfg.tol, **kw
            )
        )
    return out


def moduli_suite(cfg: SuiteConfig) -> list[CaseResult]:
    g = cfg.group_spec
    res = defects.case_moduli(g, cfg.boundaries, cfg.classes or (), cfg.handles, cfg.grid, cfg.seed)
    pfd = defects.check_partial_fusion_double(g, min(cfg.grid, 32), cfg.seed)
    return [res, pfd]


def run_suite(cfg: SuiteConfig) -> SuiteReport:
    report = SuiteReport(cfg.group, cfg.grid, cfg.seed)
    g = cfg.group_spec
    if cfg.suite in ("axioms", "all"):
        report.cases += axiom_suite(g, cfg.axiom_samples, cfg.seed, cfg.fd_step)
    if cfg.suite in ("defects", "all"):
        report.cases += defect_suite(cfg)
    if cfg.suite in ("moduli", "all"):
        report.cases += moduli_suite(cfg)
    if cfg.suite in ("loop", "all"):
        report.cases += loop_suite(cfg)
    return report
