import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qhwz import lie
from qhwz.loops import (
    ChiralWZNW,
    LoopGrid,
    LoopPoint,
    evolution_field,
    holonomy,
    loop_reverse,
    omega_chart_identity,
    push_reverse,
)
from qhwz.qham import check_axioms
from qhwz.suites import loop_convergence

G = lie.SU2
SET = settings(max_examples=15, deadline=None)


def constant_loop(n_nodes, tau, g0=None, h=None):
    h = np.eye(G.n) if h is None else h
    g0 = np.eye(G.n) if g0 is None else g0
    return LoopPoint(np.repeat(h[None], n_nodes, axis=0), np.asarray(tau, float), g0)


def test_grid_validation():
    with pytest.raises(ValueError):
        LoopGrid(7)
    with pytest.raises(ValueError):
        LoopGrid(4)


@pytest.mark.parametrize("k", [1, 3, 7])
def test_spectral_derivative_exact_on_trig_polynomials(k):
    grid = LoopGrid(32)
    s = grid.sigma
    f = np.sin(k * s) + 0.5 * np.cos(2 * k * s)
    df = k * np.cos(k * s) - k * np.sin(2 * k * s)
    assert np.allclose(grid.diff(f).real, df, atol=1e-11)


@SET
@given(st.floats(-3.3, 3.3), st.integers(0, 1), st.integers(-5, 5))
def test_weights_integrate_trig_polynomials_exactly(omega, power, k):
    grid = LoopGrid(16)
    w = grid.weights(np.array(omega), power)
    f = np.exp(1j * k * grid.sigma)
    got = w @ f
    kap = omega + k
    from scipy.integrate import quad

    re = quad(lambda x: x**power * np.cos(kap * x), 0, 2 * np.pi, limit=200)[0]
    im = quad(lambda x: x**power * np.sin(kap * x), 0, 2 * np.pi, limit=200)[0]
    assert got == pytest.approx(re + 1j * im, abs=1e-9)


def test_weights_reject_unsupported_power():
    with pytest.raises(ValueError):
        LoopGrid(16).weights(0.0, 2)


def test_json_round_trip():
    w = ChiralWZNW(G, 16)
    l = w.random_point(3)[0]
    back = LoopPoint.from_json(l.to_json())
    assert np.array_equal(back.h, l.h) and np.array_equal(back.tau, l.tau) and np.array_equal(back.g0, l.g0)
    assert set(json.loads(l.to_json())) == {"h", "tau", "g0"}


def test_quasi_periodicity():
    w = ChiralWZNW(G, 16)
    l = w.random_point(0)[0]
    sig = w.grid.sigma
    assert np.allclose(l.values(sig + 2 * np.pi), l.values(sig) @ l.monodromy())
    assert np.allclose(l.end(), l.values(sig[:1] + 2 * np.pi)[0])
    assert np.allclose(l.moment() @ l.monodromy(), np.eye(2))


def test_hamiltonian_of_torus_loop():
    # l = exp(i tau sigma): rho = i tau, H = -pi sum tau^2
    w = ChiralWZNW(G, 32)
    p = (constant_loop(32, [0.25, -0.25]),)
    assert w.hamiltonian(p) == pytest.approx(-np.pi / 8, abs=1e-14)


def test_hamiltonian_invariant_under_constant_left_action():
    w = ChiralWZNW(G, 32)
    p = w.random_point(1)
    k = G.random_group(2)
    moved = (LoopPoint(k @ p[0].h, p[0].tau, p[0].g0),)
    assert w.hamiltonian(moved) == pytest.approx(w.hamiltonian(p), abs=1e-12)


def test_hamiltonian_diff_matches_finite_difference():
    w = ChiralWZNW(G, 32)
    rng = np.random.default_rng(4)
    p = w.random_point(rng)
    u = w.random_tangent(rng, p, 1)[:, 0]
    h = 1e-5
    fd = (w.hamiltonian(w.retract(p, u, h)) - w.hamiltonian(w.retract(p, u, -h))) / (2 * h)
    assert w.hamiltonian_diff(p, u[:, None])[0] == pytest.approx(fd, abs=1e-7)


def test_holonomy_of_constant_connection_is_exact():
    a = G.random_algebra(0)
    path = holonomy(np.repeat(a[None], 24, axis=0))
    assert np.allclose(path[-1], lie.group_exp(2 * np.pi * a), atol=1e-12)
    left = holonomy(np.repeat(a[None], 24, axis=0), side="left")
    assert np.allclose(left[-1], path[-1], atol=1e-12)


def test_holonomy_of_current_gives_moment():
    # based loop: holonomy of Phi = -dl l^-1 reproduces mu(l) up to O(step^2)
    errs = []
    for n in (64, 128):
        w = ChiralWZNW(G, n)
        l = w.random_point(5)[0]
        l = LoopPoint(l.g0 @ lie.dagger(l.h[0]) @ l.h, l.tau, l.g0)
        assert np.allclose(l.values()[0], np.eye(2))
        phi = -w.current((l,))
        errs.append(np.max(np.abs(holonomy(phi)[-1] - l.moment())))
    assert errs[1] < errs[0] / 3.5


def test_reversal_is_involutive_and_pushes_correctly():
    w = ChiralWZNW(G, 32)
    rng = np.random.default_rng(6)
    p = w.random_point(rng)
    l = p[0]
    back = loop_reverse(loop_reverse(l))
    assert np.allclose(back.values(), l.values())
    u = w.random_tangent(rng, p, 1)[:, 0]
    h = 1e-6
    fd = w.difference((loop_reverse(w.retract(p, u, h)[0]),), (loop_reverse(w.retract(p, u, -h)[0]),)) / (2 * h)
    assert np.allclose(push_reverse(w.slot, l, u[:, None])[:, 0], fd, atol=1e-6)


def test_chart_identity_matches_form():
    w = ChiralWZNW(lie.SU3, 32)
    rng = np.random.default_rng(7)
    p = w.random_point(rng)
    t = w.random_tangent(rng, p, 4)
    assert np.allclose(w.form(p, t[:, :2], t[:, 2:]), omega_chart_identity(w, p[0], t[:, :2], t[:, 2:]), atol=1e-12)


def test_loop_axioms_su3():
    assert check_axioms(ChiralWZNW(lie.SU3, 32), n_samples=2, seed=1).axioms["qh1"].passed


def test_central_scheme_is_second_order():
    table = loop_convergence(G, grids=(32, 64), n_samples=1, scheme="central")
    assert table["orders"]["qh2"][0] > 1.7


def test_evolution_on_torus_loop():
    w = ChiralWZNW(G, 16)
    p = (constant_loop(16, [0.3, -0.3], g0=G.random_group(1)),)
    ev = evolution_field(w, p)
    assert ev.omega_residual < 1e-10 and ev.moment_residual < 1e-12
    assert np.isfinite(ev.condition)


def test_solve_moment_hits_target():
    w = ChiralWZNW(G, 16)
    p = w.random_point(0)
    target = G.random_group(1)
    q = w.solve_moment(p, target)
    assert np.allclose(w.moment(q)[0], target, atol=1e-12)
    assert np.array_equal(q[0].h, p[0].h)
