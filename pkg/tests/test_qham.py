import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qhwz import lie
from qhwz.catalog import conjugacy_class, double
from qhwz.qham import (
    BRACKET_SIGN,
    DEFAULT_TOLERANCES,
    InfeasibleConstraint,
    calibrate_bracket_sign,
    check_axioms,
    cubic_term,
    exterior_derivative3,
    half_wedge,
    newton_solve,
)

SET = settings(max_examples=20, deadline=None)


@pytest.mark.parametrize("group", [lie.SU2, lie.SU3])
def test_bracket_sign_matches_stokes_oracle(group):
    sign, diag = calibrate_bracket_sign(group, seed=3)
    assert sign == BRACKET_SIGN
    # quadrature limits the oracle to ~1e-4; the wrong sign is off by O(1)
    assert diag["err_minus"] < 1e-3 < diag["err_plus"]


@SET
@given(st.integers(0, 10**6))
def test_half_wedge_is_antisymmetric(seed):
    g = lie.SU2
    rng = np.random.default_rng(seed)
    a_u, b_u, a_v, b_v = (g.to_algebra(rng.standard_normal((g.dim, 3))) for _ in range(4))
    w_uv = half_wedge(g, a_u, b_u, a_v, b_v)
    w_vu = half_wedge(g, a_v, b_v, a_u, b_u)
    assert np.allclose(w_uv, -w_vu.T)


def test_cubic_term_is_alternating():
    space = double(lie.SU2)
    rng = np.random.default_rng(0)
    p = space.random_point(rng)
    u, v, w = space.random_tangent(rng, p, 3).T
    c = cubic_term(space, p, u, v, w)
    assert cubic_term(space, p, v, u, w) == pytest.approx(-c)
    assert cubic_term(space, p, v, w, u) == pytest.approx(c)


def test_richardson_beats_plain_central_difference():
    space = double(lie.SU2)
    rng = np.random.default_rng(1)
    p = space.random_point(rng)
    u, v, w = space.random_tangent(rng, p, 3).T
    ref = -cubic_term(space, p, u, v, w)
    plain = abs(exterior_derivative3(space, p, u, v, w, h=1e-3) - ref)
    rich = abs(exterior_derivative3(space, p, u, v, w, h=1e-3, richardson=True) - ref)
    assert rich < plain / 10


def test_axiom_report_structure():
    rep = check_axioms(conjugacy_class(lie.SU2, (0.2, -0.2)), n_samples=3, seed=0)
    d = rep.to_dict()
    assert set(d["axioms"]) == set(DEFAULT_TOLERANCES)
    assert d["pass"] is True


def test_newton_reaches_class_element():
    c = conjugacy_class(lie.SU2, (0.2, -0.2))
    rng = np.random.default_rng(4)
    p = c.random_point(rng)
    k = lie.SU2.random_group(rng)
    target = k @ c.center @ lie.dagger(k)
    q = newton_solve(c, p, (target,))
    assert np.allclose(c.moment(q)[0], target, atol=1e-12)


def test_newton_rejects_target_outside_class():
    c = conjugacy_class(lie.SU2, (0.2, -0.2))
    p = c.random_point(0)
    with pytest.raises(InfeasibleConstraint):
        newton_solve(c, p, (lie.alcove_embed([0.3, -0.3]),))
