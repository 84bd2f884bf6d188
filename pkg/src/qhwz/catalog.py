"""Finite-dimensional quasi-Hamiltonian spaces: conjugacy classes, doubles, inverses."""
from __future__ import annotations

import numpy as np
import scipy.linalg

from . import lie
from .lie import GroupSpec, adjoint, dagger, rmc_inverse, rmc_product
from .qham import GroupSlot, InfeasibleConstraint, QHamSpace, half_wedge, newton_solve

EIGENPHASE_TOL = 1e-9


class ConjugacyClass(QHamSpace):
    """The class of ``alcove_embed(lam)``, charted by ``k -> k exp(2 pi i lam) k^-1``."""

    def __init__(self, group: GroupSpec, lam, name: str | None = None):
        self.group = group
        self.lam = lie.check_alcove(lam)
        self.center = lie.alcove_embed(self.lam)
        self.slots = (GroupSlot(group),)
        self.n_factors = 1
        self.name = name or "C(" + ",".join(f"{x:.6g}" for x in self.lam) + ")"

    @property
    def class_dim(self) -> int:
        g = self.group
        ad = g.adjoint_matrix(self.center)
        return g.dim - int(np.sum(np.linalg.svd(ad - np.eye(g.dim), compute_uv=False) < 1e-9))

    def element(self, point) -> np.ndarray:
        k = point[0]
        return k @ self.center @ dagger(k)

    def moment(self, point):
        return (self.element(point),)

    def moment_rmc(self, point, u):
        eta = self.group.to_algebra(self.split(u)[0])
        f = self.element(point)
        return (eta - adjoint(f, eta),)

    def form(self, point, u, v):
        g = self.group
        f = self.element(point)
        eu = g.to_algebra(self.split(u)[0])
        ev = g.to_algebra(self.split(v)[0])
        pm = g.pairing_matrix
        return 0.5 * (pm(adjoint(f, eu), ev) - pm(eu, adjoint(f, ev)))

    def form_alt(self, point, u, v):
        """The same form through ``1/2 (k^-1 dk, e^{-2 pi i lam} k^-1 dk e^{2 pi i lam})``."""
        g = self.group
        k = point[0]
        xu = adjoint(dagger(k), g.to_algebra(self.split(u)[0]))
        xv = adjoint(dagger(k), g.to_algebra(self.split(v)[0]))
        e_inv = dagger(self.center)
        return half_wedge(g, xu, adjoint(e_inv, xu), xv, adjoint(e_inv, xv))

    def act(self, gs, point):
        return (gs[0] @ point[0],)

    def infinitesimal_action(self, zetas, point):
        return self.group.to_coords(zetas[0])

    def chart_diff(self, point, u):
        return self.group.to_coords(self.moment_rmc(point, u)[0])

    def contains(self, f, tol=EIGENPHASE_TOL) -> bool:
        lam, _ = lie.alcove_decompose(f)
        return bool(np.max(np.abs(lam - self.lam)) < tol)

    def solve_moment(self, point, target, rng):
        lam, k = lie.alcove_decompose(target)
        if np.max(np.abs(lam - self.lam)) > EIGENPHASE_TOL:
            raise InfeasibleConstraint(
                f"target eigenphases {np.round(lam, 12)} not in class {self.name}"
            )
        return (k,)


def conjugacy_class(group: GroupSpec, lam) -> ConjugacyClass:
    return ConjugacyClass(group, lam)


class Double(QHamSpace):
    """D(G): pairs (a, b) with the G x G action (g1 a g2^-1, g2 b g1^-1)."""

    def __init__(self, group: GroupSpec):
        self.group = group
        self.slots = (GroupSlot(group), GroupSlot(group))
        self.n_factors = 2
        self.name = "D"

    def _etas(self, u):
        ua, ub = self.split(u)
        return self.group.to_algebra(ua), self.group.to_algebra(ub)

    def moment(self, point):
        a, b = point
        return (a @ b, dagger(a) @ dagger(b))

    def moment_rmc(self, point, u):
        a, b = point
        ea, eb = self._etas(u)
        mu1 = rmc_product(a, ea, eb)
        mu2 = rmc_product(dagger(a), rmc_inverse(a, ea), rmc_inverse(b, eb))
        return (mu1, mu2)

    def form(self, point, u, v):
        a, b = point
        g = self.group
        ea_u, eb_u = self._etas(u)
        ea_v, eb_v = self._etas(v)
        la = lambda e: adjoint(dagger(a), e)
        lb = lambda e: adjoint(dagger(b), e)
        return half_wedge(g, la(ea_u), eb_u, la(ea_v), eb_v) + half_wedge(
            g, ea_u, lb(eb_u), ea_v, lb(eb_v)
        )

    def act(self, gs, point):
        g1, g2 = gs
        a, b = point
        return (g1 @ a @ dagger(g2), g2 @ b @ dagger(g1))

    def infinitesimal_action(self, zetas, point):
        z1, z2 = zetas
        a, b = point
        g = self.group
        return np.concatenate([g.to_coords(z1 - adjoint(a, z2)), g.to_coords(z2 - adjoint(b, z1))])


def double(group: GroupSpec) -> Double:
    return Double(group)


class FusedDouble(QHamSpace):
    """The internally fused double: diagonal conjugation, moment aba^-1b^-1."""

    def __init__(self, group: GroupSpec):
        self.group = group
        self.slots = (GroupSlot(group), GroupSlot(group))
        self.n_factors = 1
        self.name = "DD"

    def _etas(self, u):
        ua, ub = self.split(u)
        return self.group.to_algebra(ua), self.group.to_algebra(ub)

    def moment(self, point):
        a, b = point
        return (a @ b @ dagger(a) @ dagger(b),)

    def _pieces(self, point, u):
        a, b = point
        ea, eb = self._etas(u)
        r_ab = rmc_product(a, ea, eb)
        r_inv = rmc_product(dagger(a), rmc_inverse(a, ea), rmc_inverse(b, eb))
        return ea, eb, r_ab, r_inv

    def moment_rmc(self, point, u):
        a, b = point
        _, _, r_ab, r_inv = self._pieces(point, u)
        return (rmc_product(a @ b, r_ab, r_inv),)

    def form(self, point, u, v):
        a, b = point
        g = self.group
        ea_u, eb_u, rab_u, rinv_u = self._pieces(point, u)
        ea_v, eb_v, rab_v, rinv_v = self._pieces(point, v)
        la = lambda e: adjoint(dagger(a), e)
        lb = lambda e: adjoint(dagger(b), e)
        ab_inv = dagger(a @ b)
        lab = lambda e: adjoint(ab_inv, e)
        return (
            half_wedge(g, la(ea_u), eb_u, la(ea_v), eb_v)
            + half_wedge(g, ea_u, lb(eb_u), ea_v, lb(eb_v))
            + half_wedge(g, lab(rab_u), rinv_u, lab(rab_v), rinv_v)
        )

    def act(self, gs, point):
        (x,) = gs
        a, b = point
        return (x @ a @ dagger(x), x @ b @ dagger(x))

    def infinitesimal_action(self, zetas, point):
        (z,) = zetas
        a, b = point
        g = self.group
        return np.concatenate([g.to_coords(z - adjoint(a, z)), g.to_coords(z - adjoint(b, z))])

    def solve_moment(self, point, target, rng, restarts=5, walk=3):
        g = self.group
        rng = lie.as_rng(rng)
        if np.max(np.abs(target - np.eye(g.n))) < 1e-14:
            # commuting pair in a random maximal torus
            k = g.random_group(rng)
            t1 = lie.alcove_embed(_random_lam(g.n, rng))
            t2 = lie.alcove_embed(_random_lam(g.n, rng))
            return (k @ t1 @ dagger(k), k @ t2 @ dagger(k))
        start = point
        for _ in range(restarts):
            try:
                return newton_solve(self, start, target)
            except (InfeasibleConstraint, np.linalg.LinAlgError):
                start = self.random_point(rng)
        # explicit commutator, then a short random walk along the fibre
        p = commutator_preimage(g, target)
        for _ in range(walk):
            jac = g.to_coords(self.moment_rmc(p, np.eye(self.dim))[0])
            null = scipy.linalg.null_space(jac)
            step = null @ rng.standard_normal(null.shape[1])
            p = newton_solve(self, self.retract(p, 0.3 * step), target)
        return p


def commutator_preimage(group: GroupSpec, x) -> tuple:
    """A pair ``(a, b)`` with ``a b a^-1 b^-1 = x``.

    With ``x = k exp(2 pi i lam) k^-1``, ``b = k t k^-1`` for a diagonal ``t``
    with ``t_{i+1} = t_i exp(2 pi i lam_i)`` and ``a = k w k^-1`` for the cyclic
    shift ``w``.
    """
    n = group.n
    lam, k = lie.alcove_decompose(x)
    phases = np.concatenate([[0.0], np.cumsum(lam[:-1])])
    phases -= phases.mean()
    t = np.diag(np.exp(2j * np.pi * phases))
    w = np.roll(np.eye(n), 1, axis=0).astype(complex)
    # a w t w^-1 t^-1 must be diag(exp(2 pi i lam)); pick the shift direction accordingly
    for cand in (w, w.T):
        c = cand * np.exp(-1j * np.angle(np.linalg.det(cand)) / n)
        if np.max(np.abs(c @ t @ dagger(c) @ dagger(t) - lie.alcove_embed(lam))) < 1e-10:
            return (k @ c @ dagger(k), k @ t @ dagger(k))
    raise InfeasibleConstraint("commutator construction failed")


def fused_double(group: GroupSpec) -> FusedDouble:
    return FusedDouble(group)


def _random_lam(n, rng):
    lam = np.sort(rng.uniform(-0.5, 0.5, n))[::-1]
    return lam - lam.mean()


class Inverse(QHamSpace):
    """M^-: same action, negated form, inverted moments."""

    def __init__(self, base: QHamSpace):
        self.base = base
        self.group = base.group
        self.slots = base.slots
        self.n_factors = base.n_factors
        self.name = base.name + "-" if not base.name.endswith("-") else base.name[:-1]

    def moment(self, point):
        return tuple(dagger(m) for m in self.base.moment(point))

    def moment_rmc(self, point, u):
        return tuple(
            rmc_inverse(m, r) for m, r in zip(self.base.moment(point), self.base.moment_rmc(point, u))
        )

    def form(self, point, u, v):
        return -self.base.form(point, u, v)

    def act(self, gs, point):
        return self.base.act(gs, point)

    def infinitesimal_action(self, zetas, point):
        return self.base.infinitesimal_action(zetas, point)

    def chart_diff(self, point, u):
        return self.base.chart_diff(point, u)

    def chart_null(self, point, tol: float = 1e-9):
        return self.base.chart_null(point, tol)

    def degenerate_directions(self, point):
        return self.base.degenerate_directions(point)

    def random_point(self, seed=None):
        return self.base.random_point(seed)

    def random_tangent(self, seed, point, k=1):
        return self.base.random_tangent(seed, point, k)

    def solve_moment(self, point, target, rng):
        return self.base.solve_moment(point, dagger(target), rng)

    def __getattr__(self, item):
        # expose base-specific helpers (e.g. ConjugacyClass.element)
        if item == "base":
            raise AttributeError(item)
        return getattr(self.base, item)


def invert(space: QHamSpace) -> QHamSpace:
    if isinstance(space, Inverse):
        return space.base
    return Inverse(space)
