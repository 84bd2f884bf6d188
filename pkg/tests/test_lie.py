import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qhwz import lie

seeds = st.integers(0, 2**32 - 1)
groups = st.sampled_from([lie.SU2, lie.SU3])
SET = settings(max_examples=40, deadline=None)


def test_basis_is_traceless_antihermitian_and_orthogonal():
    for g in (lie.SU2, lie.SU3, lie.GroupSpec(4)):
        b = g.algebra_basis
        assert b.shape == (g.dim, g.n, g.n)
        assert np.allclose(np.trace(b, axis1=1, axis2=2), 0)
        assert np.allclose(b + np.conj(np.transpose(b, (0, 2, 1))), 0)
        gram = g.gram()
        assert np.allclose(gram, np.diag(np.diag(gram)))
        assert np.all(np.diag(gram) > 0)


def test_pairing_is_minus_real_trace():
    x, y = lie.SU2.random_algebra(0), lie.SU2.random_algebra(1)
    assert lie.SU2.pairing(x, y) == pytest.approx(-np.trace(x @ y).real)
    scaled = lie.GroupSpec(2, pairing_scale=2.5)
    assert scaled.pairing(x, y) == pytest.approx(-2.5 * np.trace(x @ y).real)


@SET
@given(groups, seeds)
def test_coordinates_round_trip(g, seed):
    c = np.random.default_rng(seed).standard_normal(g.dim)
    assert np.allclose(g.to_coords(g.to_algebra(c)), c)
    cs = np.random.default_rng(seed + 1).standard_normal((g.dim, 3))
    assert np.allclose(g.to_coords(g.to_algebra(cs)), cs)


@SET
@given(groups, seeds)
def test_exp_log_round_trip(g, seed):
    x = g.random_algebra(seed, scale=0.5)
    e = lie.group_exp(x)
    assert lie.is_group_element(e)
    assert np.allclose(lie.group_log(e), x, atol=1e-10)


@SET
@given(groups, seeds)
def test_pairing_is_ad_invariant(g, seed):
    rng = np.random.default_rng(seed)
    k = g.random_group(rng)
    ad = g.adjoint_matrix(k)
    gram = g.gram()
    assert np.allclose(ad.T @ gram @ ad, gram, atol=1e-10)


@SET
@given(groups, seeds)
def test_alcove_decomposition_reconstructs(g, seed):
    x = g.random_group(seed)
    lam, k = lie.alcove_decompose(x)
    assert lie.in_alcove(lam, 1e-10)
    assert abs(np.linalg.det(k) - 1) < 1e-10
    assert np.allclose(k @ lie.alcove_embed(lam) @ lie.dagger(k), x, atol=1e-10)


def test_alcove_decomposition_of_central_element():
    lam, k = lie.alcove_decompose(-np.eye(2, dtype=complex))
    assert np.allclose(lam, [0.5, -0.5])


def test_log_refuses_branch_cut():
    with pytest.raises(lie.BranchCutError):
        lie.group_log(-np.eye(2, dtype=complex))


def test_check_alcove_rejects_unsorted_and_nontraceless():
    with pytest.raises(ValueError):
        lie.check_alcove([-0.2, 0.2])
    with pytest.raises(ValueError):
        lie.check_alcove([0.3, 0.1])
    with pytest.raises(ValueError):
        lie.check_alcove([0.7, 0.0, -0.7])


@SET
@given(seeds)
def test_maurer_cartan_product_rule(seed):
    g = lie.SU3
    rng = np.random.default_rng(seed)
    x, y = g.random_group(rng), g.random_group(rng)
    rx, ry = g.random_algebra(rng), g.random_algebra(rng)
    h = 1e-5
    xs = [lie.group_exp(s * h * rx) @ x for s in (1, -1)]
    ys = [lie.group_exp(s * h * ry) @ y for s in (1, -1)]
    fd = (xs[0] @ ys[0] - xs[1] @ ys[1]) / (2 * h) @ lie.dagger(x @ y)
    assert np.allclose(fd, lie.rmc_product(x, rx, ry), atol=1e-8)
    fd_inv = (lie.dagger(xs[0]) - lie.dagger(xs[1])) / (2 * h) @ x
    assert np.allclose(fd_inv, lie.rmc_inverse(x, rx), atol=1e-8)


def test_group_spec_validation():
    with pytest.raises(ValueError):
        lie.GroupSpec(1)
    with pytest.raises(ValueError):
        lie.GroupSpec(2, pairing_scale=0.0)
    with pytest.raises(ValueError):
        lie.group_from_name("so3")
    assert lie.group_from_name("su3") == lie.SU3


def test_haar_sample_is_special_unitary():
    for seed in range(5):
        u = lie.random_group(3, seed)
        assert lie.is_group_element(u)
