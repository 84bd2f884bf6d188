import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qhwz import lie
from qhwz.catalog import (
    InfeasibleConstraint,
    commutator_preimage,
    conjugacy_class,
    double,
    fused_double,
    invert,
)
from qhwz.qham import check_axioms

SET = settings(max_examples=25, deadline=None)
seeds = st.integers(0, 10**6)


@SET
@given(seeds)
def test_class_form_two_expressions_agree(seed):
    for lam in [(0.2, -0.2), (0.4, 0.1, -0.5)]:
        c = conjugacy_class(lie.GroupSpec(len(lam)), lam)
        rng = np.random.default_rng(seed)
        p = c.random_point(rng)
        t = c.random_tangent(rng, p, 6)
        assert np.allclose(c.form(p, t[:, :3], t[:, 3:]), c.form_alt(p, t[:, :3], t[:, 3:]), atol=1e-13)


def test_class_dimension():
    assert conjugacy_class(lie.SU2, (0.2, -0.2)).class_dim == 2
    assert conjugacy_class(lie.SU3, (0.4, 0.1, -0.5)).class_dim == 6
    assert conjugacy_class(lie.SU3, (0.2, 0.2, -0.4)).class_dim == 4


def test_class_membership_and_solve():
    c = conjugacy_class(lie.SU3, (0.3, 0.0, -0.3))
    rng = np.random.default_rng(0)
    p = c.random_point(rng)
    assert c.contains(c.element(p))
    with pytest.raises(InfeasibleConstraint):
        c.solve_moment(p, lie.alcove_embed([0.25, 0.05, -0.3]), rng)


@SET
@given(seeds)
def test_fused_double_moment_is_commutator(seed):
    dd = fused_double(lie.SU3)
    a, b = dd.random_point(seed)
    assert np.allclose(dd.moment((a, b))[0], a @ b @ lie.dagger(a) @ lie.dagger(b))


@SET
@given(st.sampled_from([lie.SU2, lie.SU3]), seeds)
def test_commutator_preimage(g, seed):
    x = g.random_group(seed)
    a, b = commutator_preimage(g, x)
    assert lie.is_group_element(a, 1e-10) and lie.is_group_element(b, 1e-10)
    assert np.allclose(a @ b @ lie.dagger(a) @ lie.dagger(b), x, atol=1e-10)


def test_inverse_negates_form_and_inverts_moment():
    d = double(lie.SU2)
    di = invert(d)
    rng = np.random.default_rng(2)
    p = d.random_point(rng)
    t = d.random_tangent(rng, p, 4)
    assert np.allclose(di.form(p, t[:, :2], t[:, 2:]), -d.form(p, t[:, :2], t[:, 2:]))
    for m, mi in zip(d.moment(p), di.moment(p)):
        assert np.allclose(m @ mi, np.eye(2))
    assert invert(di) is d


@pytest.mark.parametrize("make", [double, fused_double])
def test_doubles_satisfy_axioms_on_su3(make):
    assert check_axioms(make(lie.SU3), n_samples=5, seed=1).passed
