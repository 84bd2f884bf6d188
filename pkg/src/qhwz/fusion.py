"""Fusion products, constraint-surface sampling and unit-level reduction checks.

A fused space stores its leaves' slots side by side, so a point is the flat
concatenation of the leaf points and a tangent the concatenation of leaf
tangents. Each structure factor of a fused space remembers the ordered chain
of leaf factors whose moments multiply to it.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import lie
from .lie import dagger, rmc_product
from .qham import InfeasibleConstraint, QHamSpace, _batch, half_wedge


class Fusion(QHamSpace):
    """``m1 (*) m2`` merging factor ``i`` of ``m1`` with factor ``j`` of ``m2``.

    Factors of the result: those of ``m1`` (the merged one in place ``i``),
    followed by the remaining factors of ``m2``.
    """

    def __init__(self, m1: QHamSpace, m2: QHamSpace, i: int = 0, j: int = 0):
        if m1.group != m2.group:
            raise ValueError(f"structure group mismatch: {m1.group.name} vs {m2.group.name}")
        if not (0 <= i < m1.n_factors and 0 <= j < m2.n_factors):
            raise ValueError("fused factor index out of range")
        self.m1, self.m2, self.i, self.j = m1, m2, i, j
        self.group = m1.group
        self.slots = tuple(m1.slots) + tuple(m2.slots)
        self.n_factors = m1.n_factors + m2.n_factors - 1
        self.name = f"({m1.name}*{m2.name})"
        self._k1 = len(m1.slots)
        self._d1 = m1.dim
        self._rest2 = [f for f in range(m2.n_factors) if f != j]

    # ---- bookkeeping -------------------------------------------------
    def _pts(self, point):
        return tuple(point[: self._k1]), tuple(point[self._k1 :])

    def _tans(self, u):
        u = _batch(u)
        return u[: self._d1], u[self._d1 :]

    def _combine(self, first, second, merged):
        out = list(first)
        out[self.i] = merged
        out.extend(second[f] for f in self._rest2)
        return tuple(out)

    def _split_action(self, gs):
        n1 = self.m1.n_factors
        g1 = tuple(gs[:n1])
        rest = iter(gs[n1:])
        g2 = tuple(gs[self.i] if f == self.j else next(rest) for f in range(self.m2.n_factors))
        return g1, g2

    @property
    def leaves(self) -> list:
        return _leaves(self.m1) + _leaves(self.m2)

    @property
    def chains(self) -> list:
        """Per factor, ordered ``(leaf index, leaf factor)`` pairs whose moments multiply to it."""
        c1 = _chains(self.m1)
        off = len(_leaves(self.m1))
        c2 = [[(a + off, b) for a, b in ch] for ch in _chains(self.m2)]
        out = [list(ch) for ch in c1]
        out[self.i] = c1[self.i] + c2[self.j]
        out.extend(c2[f] for f in self._rest2)
        return out

    # ---- structure ---------------------------------------------------
    def moment(self, point):
        p1, p2 = self._pts(point)
        a, b = self.m1.moment(p1), self.m2.moment(p2)
        return self._combine(a, b, a[self.i] @ b[self.j])

    def moment_rmc(self, point, u):
        p1, p2 = self._pts(point)
        u1, u2 = self._tans(u)
        a = self.m1.moment(p1)
        r1, r2 = self.m1.moment_rmc(p1, u1), self.m2.moment_rmc(p2, u2)
        return self._combine(r1, r2, rmc_product(a[self.i], r1[self.i], r2[self.j]))

    def form(self, point, u, v):
        p1, p2 = self._pts(point)
        u1, u2 = self._tans(u)
        v1, v2 = self._tans(v)
        mu1 = self.m1.moment(p1)[self.i]
        th_u = lie.left_mc(mu1, self.m1.moment_rmc(p1, u1)[self.i])
        th_v = lie.left_mc(mu1, self.m1.moment_rmc(p1, v1)[self.i])
        tb_u = self.m2.moment_rmc(p2, u2)[self.j]
        tb_v = self.m2.moment_rmc(p2, v2)[self.j]
        return (
            self.m1.form(p1, u1, v1)
            + self.m2.form(p2, u2, v2)
            + half_wedge(self.group, th_u, tb_u, th_v, tb_v)
        )

    def act(self, gs, point):
        p1, p2 = self._pts(point)
        g1, g2 = self._split_action(gs)
        return tuple(self.m1.act(g1, p1)) + tuple(self.m2.act(g2, p2))

    def infinitesimal_action(self, zetas, point):
        p1, p2 = self._pts(point)
        z1, z2 = self._split_action(zetas)
        return np.concatenate(
            [self.m1.infinitesimal_action(z1, p1), self.m2.infinitesimal_action(z2, p2)]
        )

    # ---- delegated geometry ------------------------------------------
    def retract(self, point, u, s=1.0):
        p1, p2 = self._pts(point)
        u1, u2 = self._tans(u)
        return tuple(self.m1.retract(p1, u1, s)) + tuple(self.m2.retract(p2, u2, s))

    def difference(self, new, old):
        n1, n2 = self._pts(new)
        o1, o2 = self._pts(old)
        return np.concatenate([self.m1.difference(n1, o1), self.m2.difference(n2, o2)])

    def bracket(self, u, v):
        u1, u2 = self._tans(u)
        v1, v2 = self._tans(v)
        return np.concatenate([self.m1.bracket(u1, v1), self.m2.bracket(u2, v2)])

    def chart_diff(self, point, u):
        p1, p2 = self._pts(point)
        u1, u2 = self._tans(u)
        return np.concatenate([self.m1.chart_diff(p1, u1), self.m2.chart_diff(p2, u2)], axis=0)

    def chart_null(self, point, tol: float = 1e-9):
        p1, p2 = self._pts(point)
        return scipy.linalg.block_diag(self.m1.chart_null(p1, tol), self.m2.chart_null(p2, tol))

    def degenerate_directions(self, point):
        p1, p2 = self._pts(point)
        return scipy.linalg.block_diag(
            self.m1.degenerate_directions(p1), self.m2.degenerate_directions(p2)
        )

    def random_point(self, seed=None):
        rng = lie.as_rng(seed)
        return tuple(self.m1.random_point(rng)) + tuple(self.m2.random_point(rng))

    def random_tangent(self, seed, point, k=1):
        rng = lie.as_rng(seed)
        p1, p2 = self._pts(point)
        return np.concatenate(
            [self.m1.random_tangent(rng, p1, k), self.m2.random_tangent(rng, p2, k)], axis=0
        )

    def leaf_points(self, point) -> list:
        out, k = [], 0
        for leaf in self.leaves:
            out.append(tuple(point[k : k + len(leaf.slots)]))
            k += len(leaf.slots)
        return out

    def leaf_tangent_slices(self) -> list[slice]:
        out, k = [], 0
        for leaf in self.leaves:
            out.append(slice(k, k + leaf.dim))
            k += leaf.dim
        return out


def _leaves(space) -> list:
    return space.leaves if isinstance(space, Fusion) else [space]


def _chains(space) -> list:
    if isinstance(space, Fusion):
        return space.chains
    return [[(0, f)] for f in range(space.n_factors)]


def fuse(m1: QHamSpace, m2: QHamSpace, i: int = 0, j: int = 0) -> Fusion:
    return Fusion(m1, m2, i, j)


@dataclass(frozen=True)
class FusionRecipe:
    """Ordered factors; ``fused_pairs[k] = (i, j)`` merges factor ``i`` of the
    running product with factor ``j`` of ``factors[k + 1]`` (default ``(0, 0)``)."""

    factors: tuple
    fused_pairs: tuple | None = None

    def __post_init__(self):
        if not self.factors:
            raise ValueError("empty recipe")
        object.__setattr__(self, "factors", tuple(self.factors))
        pairs = self.fused_pairs
        if pairs is None:
            pairs = tuple((0, 0) for _ in self.factors[1:])
        if len(pairs) != len(self.factors) - 1:
            raise ValueError("need one fused pair per fusion step")
        object.__setattr__(self, "fused_pairs", tuple(tuple(p) for p in pairs))


def fuse_many(recipe) -> QHamSpace:
    if not isinstance(recipe, FusionRecipe):
        recipe = FusionRecipe(tuple(recipe))
    out = recipe.factors[0]
    for m, (i, j) in zip(recipe.factors[1:], recipe.fused_pairs):
        out = Fusion(out, m, i, j)
    return out


def associativity_residual(m1, m2, m3, n_samples: int = 100, seed=0) -> float:
    """Worst |Omega_(12)3 - Omega_1(23)| and moment mismatch over random samples.

    Both bracketings share the leaf layout, so points and tangents coincide.
    """
    left = fuse(fuse(m1, m2), m3)
    right = fuse(m1, fuse(m2, m3))
    rng = lie.as_rng(seed)
    worst = 0.0
    for _ in range(n_samples):
        p = left.random_point(rng)
        t = left.random_tangent(rng, p, 2)
        a = left.form(p, t[:, :1], t[:, 1:])
        b = right.form(p, t[:, :1], t[:, 1:])
        worst = max(worst, float(np.max(np.abs(a - b))))
        ma, mb = left.moment(p), right.moment(p)
        worst = max(worst, max(float(np.max(np.abs(x - y))) for x, y in zip(ma, mb)))
    return worst


# ---------------------------------------------------------------------------
# unit-level reduction
# ---------------------------------------------------------------------------


@dataclass
class ConstraintSurfaceSample:
    point: tuple
    solve_slot: int
    factor: int
    basis: np.ndarray
    moment_residual: float
    annihilation: float = 0.0

    @property
    def dim(self) -> int:
        return int(self.basis.shape[1])


def _as_fusion_view(space):
    leaves = _leaves(space)
    chains = _chains(space)
    return leaves, chains


def _leaf_points(space, point):
    if isinstance(space, Fusion):
        return space.leaf_points(point)
    return [tuple(point)]


def moment_jacobian(space, point, factor=0) -> np.ndarray:
    """``(dim G, dim M)`` matrix of ``d mu_factor mu_factor^-1`` in basis coordinates."""
    g = space.group
    return g.to_coords(space.moment_rmc(point, np.eye(space.dim))[factor])


def constraint_basis(space, point, factor=0, tol=1e-9) -> np.ndarray:
    """Orthonormal tangents annihilating d mu_factor, with degenerate directions removed."""
    jac = moment_jacobian(space, point, factor)
    null = space.degenerate_directions(point)
    rows = np.vstack([jac, null.T]) if null.shape[1] else jac
    return scipy.linalg.null_space(rows, rcond=tol)


def sample_constraint(space, solve_slot=None, seed=None, factor=None):
    """Sample a point with ``mu_factor = e`` by solving one leaf for its moment.

    ``solve_slot`` indexes the leaves (default: the last leaf in the chain of
    the constrained factor). The solved leaf must carry a single factor.
    """
    rng = lie.as_rng(seed)
    leaves, chains = _as_fusion_view(space)
    if factor is None:
        factor = 0
        if solve_slot is not None:
            factor = next(f for f, ch in enumerate(chains) if any(a == solve_slot for a, _ in ch))
    chain = chains[factor]
    if solve_slot is None:
        solve_slot = chain[-1][0]
    pos = [k for k, (a, _) in enumerate(chain) if a == solve_slot]
    if len(pos) != 1 or leaves[solve_slot].n_factors != 1:
        raise ValueError("solve_slot must be a single-factor leaf in the constrained chain")
    pos = pos[0]
    n = space.group.n

    pts = _leaf_points(space, space.random_point(rng))
    mus = [leaves[a].moment(pts[a])[b] for a, b in chain]
    before = np.eye(n, dtype=complex)
    for m in mus[:pos]:
        before = before @ m
    after = np.eye(n, dtype=complex)
    for m in mus[pos + 1 :]:
        after = after @ m
    target = dagger(before) @ dagger(after)
    pts[solve_slot] = tuple(leaves[solve_slot].solve_moment(pts[solve_slot], target, rng))
    point = tuple(c for p in pts for c in p)
    res = float(np.max(np.abs(space.moment(point)[factor] - np.eye(n))))
    basis = constraint_basis(space, point, factor)
    ann = float(np.max(np.abs(moment_jacobian(space, point, factor) @ basis), initial=0.0))
    return ConstraintSurfaceSample(point, solve_slot, factor, basis, res, ann)


def restricted_form(space, sample: ConstraintSurfaceSample, u, v, tol=1e-8) -> np.ndarray:
    """Omega on constraint tangents. Raises if ``u`` or ``v`` leaves the surface."""
    b = sample.basis
    for w in (_batch(u), _batch(v)):
        off = w - b @ (b.T @ w)
        if np.max(np.abs(off), initial=0.0) > tol * max(1.0, np.max(np.abs(w))):
            raise ValueError("tangent is not in the constraint surface")
    out = space.form(sample.point, _batch(u), _batch(v))
    return out


def restricted_gram(space, sample: ConstraintSurfaceSample) -> np.ndarray:
    return space.form(sample.point, sample.basis, sample.basis)


def numerical_rank(mat, rel_tol=1e-8) -> int:
    if mat.size == 0:
        return 0
    s = np.linalg.svd(mat, compute_uv=False)
    return int(np.sum(s > rel_tol * max(1.0, s[0])))


@dataclass
class DegeneracyReport:
    constraint_dim: int
    orbit_dim: int
    rank: int
    expected_rank_formula: int
    expected_rank_orbit: int
    gauge_tangency: float
    gauge_contraction: float
    kernel_angle: float
    singular_values: list = field(default_factory=list)

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["singular_values"] = [float(x) for x in self.singular_values]
        return d


def gauge_vectors(space, sample: ConstraintSurfaceSample, zetas) -> np.ndarray:
    cols = []
    zero = np.zeros((space.group.n, space.group.n), complex)
    for z in zetas:
        zs = [zero] * space.n_factors
        zs[sample.factor] = z
        cols.append(space.infinitesimal_action(tuple(zs), sample.point))
    return np.array(cols).T


def gauge_degeneracy_check(space, sample: ConstraintSurfaceSample, n_zeta=20, seed=0):
    """Gauge directions are tangent, lie in ker Omega, and span the whole kernel."""
    g = space.group
    rng = lie.as_rng(seed)
    b = sample.basis
    null = scipy.linalg.orth(space.degenerate_directions(sample.point))

    def strip(x):
        if null.shape[1]:
            return x - null @ (null.T @ x)
        return x

    rand = [g.random_algebra(rng) for _ in range(n_zeta)]
    zm = strip(gauge_vectors(space, sample, rand))
    jac = moment_jacobian(space, sample.point, sample.factor)
    tangency = float(np.max(np.abs(jac @ zm), initial=0.0))
    contraction = float(np.max(np.abs(space.form(sample.point, zm, b)), initial=0.0))

    full = strip(gauge_vectors(space, sample, list(g.algebra_basis)))
    orbit = scipy.linalg.orth(full, rcond=1e-9) if full.size else np.zeros((space.dim, 0))
    gram = space.form(sample.point, b, b)
    _, s, vh = np.linalg.svd(gram)
    scale = max(1.0, s[0]) if s.size else 1.0
    small = s < 1e-8 * scale
    kernel = b @ vh[small].T
    angle = 0.0
    if kernel.shape[1] != orbit.shape[1]:
        angle = float(np.pi / 2)
    elif kernel.shape[1]:
        angle = float(np.max(scipy.linalg.subspace_angles(kernel, orbit)))
    rank = int(b.shape[1] - kernel.shape[1])
    return DegeneracyReport(
        constraint_dim=int(b.shape[1]),
        orbit_dim=int(orbit.shape[1]),
        rank=rank,
        expected_rank_formula=int(b.shape[1] - g.dim),
        expected_rank_orbit=int(b.shape[1] - orbit.shape[1]),
        gauge_tangency=tangency,
        gauge_contraction=contraction,
        kernel_angle=angle,
        singular_values=list(s),
    )
