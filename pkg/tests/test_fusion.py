import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qhwz import lie
from qhwz.catalog import conjugacy_class, double, fused_double, invert
from qhwz.fusion import (
    FusionRecipe,
    InfeasibleConstraint,
    associativity_residual,
    fuse,
    fuse_many,
    gauge_degeneracy_check,
    numerical_rank,
    restricted_form,
    restricted_gram,
    sample_constraint,
)
from qhwz.qham import check_axioms

G = lie.SU2
C1 = conjugacy_class(G, (0.2, -0.2))
C2 = conjugacy_class(G, (0.3, -0.3))
SET = settings(max_examples=15, deadline=None)


def test_fused_moment_is_product():
    m = fuse(C1, double(G))
    rng = np.random.default_rng(0)
    p = m.random_point(rng)
    c, (a, b) = C1.moment(p[:1])[0], double(G).moment(p[1:])
    mu = m.moment(p)
    assert m.n_factors == 2
    assert np.allclose(mu[0], c @ a)
    assert np.allclose(mu[1], b)


def test_fused_form_cross_term():
    m = fuse(C1, C2)
    rng = np.random.default_rng(1)
    p = m.random_point(rng)
    u, v = m.random_tangent(rng, p, 2).T
    d = G.dim
    f1, f2 = C1.element(p[:1]), C2.element(p[1:])
    # lmc of the first moment and rmc of the second, built from the class charts
    eta = lambda w, sl: G.to_algebra(w[sl])
    l1 = lambda w: lie.adjoint(lie.dagger(f1), eta(w, slice(0, d)) - lie.adjoint(f1, eta(w, slice(0, d))))
    r2 = lambda w: eta(w, slice(d, 2 * d)) - lie.adjoint(f2, eta(w, slice(d, 2 * d)))
    cross = 0.5 * (G.pairing(l1(u), r2(v)) - G.pairing(l1(v), r2(u)))
    expected = C1.form(p[:1], u[:d], v[:d]).item() + C2.form(p[1:], u[d:], v[d:]).item() + cross
    assert m.form(p, u[:, None], v[:, None])[0, 0] == pytest.approx(float(expected), abs=1e-13)


@SET
@given(st.integers(0, 10**6))
def test_associativity(seed):
    assert associativity_residual(C1, fused_double(G), invert(C2), n_samples=3, seed=seed) < 1e-12


@pytest.mark.parametrize("factors", [(C1, C2), (C1, double(G)), (fused_double(G), invert(C1), C2)])
def test_fusions_satisfy_axioms(factors):
    assert check_axioms(fuse_many(factors), n_samples=5, seed=2).passed


def test_recipe_validation():
    with pytest.raises(ValueError):
        FusionRecipe(())
    with pytest.raises(ValueError):
        FusionRecipe((C1, C2), ((0, 0), (0, 0)))
    m = fuse_many(FusionRecipe((double(G), C1), ((1, 0),)))
    p = m.random_point(0)
    a, b = double(G).moment(p[:2])
    assert np.allclose(m.moment(p)[1], b @ C1.element(p[2:]))


def test_constraint_sample_on_unit_level():
    m = fuse_many((C1, invert(C1)))
    s = sample_constraint(m, seed=3)
    assert s.moment_residual < 1e-12
    assert s.annihilation < 1e-10
    assert np.allclose(s.basis.T @ s.basis, np.eye(s.dim), atol=1e-12)


def test_infeasible_class_target_raises():
    with pytest.raises(InfeasibleConstraint):
        sample_constraint(fuse_many((C1, C2)), seed=0)


def test_restricted_form_refuses_off_surface_tangents():
    m = fuse_many((C1, fused_double(G)))
    s = sample_constraint(m, solve_slot=1, seed=4)
    on = s.basis[:, :2]
    assert restricted_form(m, s, on[:, 0], on[:, 1]).shape == (1, 1)
    off = np.linalg.svd(s.basis, full_matrices=True)[0][:, -1]
    with pytest.raises(ValueError):
        restricted_form(m, s, off, on[:, 0])


def test_numerical_rank_relative_threshold():
    # threshold scales with the largest singular value (floored at 1)
    assert numerical_rank(np.diag([1e6, 1.0, 1e-1])) == 3
    assert numerical_rank(np.diag([1e6, 1.0, 1e-3])) == 2
    assert numerical_rank(np.diag([1.0, 1e-7, 1e-9])) == 2
    assert numerical_rank(np.zeros((3, 3))) == 0


def test_sphere_reduction():
    # C1 * C1^- * DD at the unit level: gauge is the kernel, the quotient is symplectic
    m = fuse_many((C1, fused_double(G), invert(C1)))
    s = sample_constraint(m, solve_slot=1, seed=5)
    rep = gauge_degeneracy_check(m, s, seed=5)
    assert rep.gauge_tangency < 1e-10 and rep.gauge_contraction < 1e-10
    assert rep.rank == rep.expected_rank_orbit
    assert numerical_rank(restricted_gram(m, s)) == rep.rank
