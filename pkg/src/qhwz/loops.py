"""The discretized chiral WZNW space W of quasi-periodic loops.

A loop is stored in the chart ``l(sigma) = h(sigma) exp(i tau sigma) g0^-1`` with
``h`` periodic (N nodes), ``tau = diag(lam)`` for an alcove vector ``lam`` and
``g0`` in G. Then ``l(sigma + 2 pi) = l(sigma) M`` with
``M = g0 exp(2 pi i tau) g0^-1`` and the moment is ``mu = M^-1``.

Tangent coordinates: ``eta_j = dh_j h_j^-1`` (N * dim G numbers), ``dtau`` in an
orthonormal basis of sum-zero vectors (n - 1 numbers) and ``zeta0 = dg0 g0^-1``
(dim G numbers). Torus gauge ``h -> h t, g0 -> g0 t`` leaves l fixed and shows
up as chart-null directions.

Two discretizations of the form are available. ``"spectral"`` (default)
differentiates periodic quantities by FFT and integrates the sigma-weighted and
oscillatory terms exactly against the trigonometric interpolant, so identities
hold to near machine precision on smooth data. ``"central"`` evaluates
``xi = l^-1 dl`` at nodes, differentiates by central differences with ghost
nodes from the chart and integrates by the trapezoid rule; it is O(dsigma^2).
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg

from . import lie
from .lie import GroupSpec, adjoint, dagger
from .qham import QHamSpace, _batch, half_wedge

SCHEMES = ("spectral", "central")


@dataclass(frozen=True)
class LoopGrid:
    n_nodes: int = 64

    def __post_init__(self):
        if self.n_nodes < 8 or self.n_nodes % 2:
            raise ValueError("n_nodes must be even and >= 8")

    @property
    def step(self) -> float:
        return 2 * np.pi / self.n_nodes

    @cached_property
    def sigma(self) -> np.ndarray:
        return self.step * np.arange(self.n_nodes)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        k = np.fft.fftfreq(self.n_nodes, 1.0 / self.n_nodes)
        k[self.n_nodes // 2] = 0.0  # drop Nyquist: keeps derivatives of real data real
        return k

    def diff(self, f: np.ndarray) -> np.ndarray:
        """Spectral derivative along axis 0 of periodic node data."""
        shape = (-1,) + (1,) * (f.ndim - 1)
        return np.fft.ifft(1j * self.wavenumbers.reshape(shape) * np.fft.fft(f, axis=0), axis=0)

    def diff_central(self, f: np.ndarray) -> np.ndarray:
        return (np.roll(f, -1, axis=0) - np.roll(f, 1, axis=0)) / (2 * self.step)

    def weights(self, omega, power: int) -> np.ndarray:
        """Node weights ``w`` with ``sum_j w_j f_j = int_0^2pi sigma^power e^{i omega sigma} f``
        exactly for trigonometric interpolants ``f`` of the node values."""
        n = self.n_nodes
        omega = np.asarray(omega, dtype=float)
        k = np.arange(-n // 2, n // 2 + 1)
        c = np.ones(k.size)
        c[0] = c[-1] = 0.5
        kappa = omega[..., None] + k
        ints = _moment_integral(kappa, power) * c
        phase = np.exp(-1j * np.outer(k, self.sigma))
        return ints @ phase / n


def _moment_integral(kappa: np.ndarray, power: int) -> np.ndarray:
    """int_0^{2 pi} sigma^power exp(i kappa sigma) d sigma for power in {0, 1}."""
    if power not in (0, 1):
        raise ValueError("only powers 0 and 1 are supported")
    two_pi = 2 * np.pi
    out = np.empty(kappa.shape, complex)
    small = np.abs(kappa) < 0.25
    ks = kappa[~small]
    e = np.exp(1j * two_pi * ks)
    if power == 0:
        out[~small] = (e - 1) / (1j * ks)
    else:
        out[~small] = two_pi * e / (1j * ks) - (e - 1) / (1j * ks) ** 2
    # power series around kappa = 0
    z = 1j * two_pi * kappa[small]
    acc = np.zeros(z.shape, complex)
    term = np.ones(z.shape, complex)
    for m in range(30):
        acc += term / (m + 1 + power)
        term = term * z / (m + 1)
    out[small] = two_pi ** (1 + power) * acc
    return out


@dataclass(frozen=True, eq=False)
class LoopPoint:
    """Immutable chart data ``(h, tau, g0)``; ``tau`` holds the alcove vector."""

    h: np.ndarray
    tau: np.ndarray
    g0: np.ndarray

    def __post_init__(self):
        for name in ("h", "tau", "g0"):
            arr = np.array(getattr(self, name), dtype=float if name == "tau" else complex)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.h.ndim != 3 or self.h.shape[1:] != self.g0.shape:
            raise ValueError("h must be an (N, n, n) stack matching g0")

    @property
    def n_nodes(self) -> int:
        return self.h.shape[0]

    @property
    def grid(self) -> LoopGrid:
        return LoopGrid(self.n_nodes)

    def torus(self, sigma) -> np.ndarray:
        sigma = np.asarray(sigma, dtype=float)
        return np.exp(1j * sigma[..., None] * self.tau)[..., None, :] * np.eye(len(self.tau))

    def values(self, sigma=None) -> np.ndarray:
        """``l`` at the grid nodes, or at ``sigma`` given as node indices offset by periods."""
        if sigma is None:
            sigma = self.grid.sigma
            h = self.h
        else:
            idx = np.rint(np.asarray(sigma) / self.grid.step).astype(int)
            h = self.h[idx % self.n_nodes]
        return h @ self.torus(sigma) @ dagger(self.g0)

    def end(self) -> np.ndarray:
        """``l(2 pi)``."""
        return self.h[0] @ lie.alcove_embed(self.tau) @ dagger(self.g0)

    def monodromy(self) -> np.ndarray:
        return self.g0 @ lie.alcove_embed(self.tau) @ dagger(self.g0)

    def moment(self) -> np.ndarray:
        return self.g0 @ lie.alcove_embed(-self.tau) @ dagger(self.g0)

    def to_json(self) -> str:
        return json.dumps(
            {
                "h": [_mat_json(m) for m in self.h],
                "tau": [float(x) for x in self.tau],
                "g0": _mat_json(self.g0),
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "LoopPoint":
        d = json.loads(text)
        return cls(np.array([_mat_unjson(m) for m in d["h"]]), np.array(d["tau"]), _mat_unjson(d["g0"]))


def _mat_json(m) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def _mat_unjson(rows) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows])


def random_alcove_interior(n: int, rng, margin: float = 0.05) -> np.ndarray:
    """Alcove vector with all gaps and the wrap gap at least ``margin``."""
    for _ in range(1000):
        f = np.sort(rng.uniform(0.0, 1.0, n))[::-1]
        gaps = np.append(-np.diff(f), 1.0 - (f[0] - f[-1]))
        if np.all(gaps > margin):
            return f - f.mean()
    raise RuntimeError("could not sample an interior alcove point")


@dataclass(frozen=True, eq=False)
class FourierLoop:
    """Smooth algebra-valued loops ``sum_m A_m cos(m s) + B_m sin(m s)``, k at a time.

    The same coefficients can be sampled on any grid, which is what grid
    refinement studies need.
    """

    group: GroupSpec
    cos: np.ndarray  # (modes + 1, dim, k)
    sin: np.ndarray

    @classmethod
    def random(cls, group: GroupSpec, rng, k=1, modes=3, amplitude=1.0) -> "FourierLoop":
        rng = lie.as_rng(rng)
        scale = amplitude / (1.0 + np.arange(modes + 1)) ** 2
        c = rng.standard_normal((modes + 1, group.dim, k)) * scale[:, None, None]
        s = rng.standard_normal((modes + 1, group.dim, k)) * scale[:, None, None]
        s[0] = 0.0
        return cls(group, c, s)

    def __call__(self, sigma) -> np.ndarray:
        """Values ``(len(sigma), k, n, n)``."""
        m = np.arange(self.cos.shape[0])
        ang = np.outer(np.asarray(sigma, dtype=float), m)
        coef = np.einsum("sm,mdk->sdk", np.cos(ang), self.cos) + np.einsum("sm,mdk->sdk", np.sin(ang), self.sin)
        return np.einsum("sdk,dab->skab", coef, self.group.algebra_basis)


class LoopSlot:
    """Slot holding one :class:`LoopPoint`."""

    kind = "loop"

    def __init__(self, group: GroupSpec, grid: LoopGrid, modes: int = 3, amplitude: float = 0.6):
        self.group = group
        self.grid = grid
        self.modes = modes
        self.amplitude = amplitude
        self.cartan = lie.cartan_basis(group.n)
        n_nodes, d = grid.n_nodes, group.dim
        self.size = n_nodes * d + (group.n - 1) + d
        self._sl_eta = slice(0, n_nodes * d)
        self._sl_tau = slice(n_nodes * d, n_nodes * d + group.n - 1)
        self._sl_zeta = slice(n_nodes * d + group.n - 1, self.size)

    # ---- coordinates --------------------------------------------------
    def unpack(self, coords):
        """Coordinates ``(size, k)`` to ``eta (N, k, n, n)``, ``dtau (k, n)``, ``zeta0 (k, n, n)``."""
        c = _batch(coords)
        n_nodes, d, k = self.grid.n_nodes, self.group.dim, c.shape[1]
        eta = np.einsum("jdk,dab->jkab", c[self._sl_eta].reshape(n_nodes, d, k), self.group.algebra_basis)
        dtau = (self.cartan @ c[self._sl_tau]).T
        zeta = self.group.to_algebra(c[self._sl_zeta])
        return eta, dtau, zeta

    def pack(self, eta, dtau, zeta) -> np.ndarray:
        """Inverse of :meth:`unpack` for a single tangent (``eta (N, n, n)``)."""
        g = self.group
        return np.concatenate(
            [g.to_coords(eta).T.reshape(-1), self.cartan.T @ np.asarray(dtau, float), g.to_coords(zeta)]
        )

    def retract(self, comp: LoopPoint, coords, s=1.0) -> LoopPoint:
        eta, dtau, zeta = self.unpack(np.asarray(coords)[:, None] * s)
        h = lie.group_exp(eta[:, 0]) @ comp.h
        return LoopPoint(h, comp.tau + dtau[0], lie.group_exp(zeta[0]) @ comp.g0)

    def difference(self, new: LoopPoint, old: LoopPoint) -> np.ndarray:
        eta = lie.group_log(new.h @ dagger(old.h))
        zeta = lie.group_log(new.g0 @ dagger(old.g0))
        return self.pack(eta, new.tau - old.tau, zeta)

    def bracket(self, c1, c2) -> np.ndarray:
        e1, _, z1 = self.unpack(c1)
        e2, _, z2 = self.unpack(c2)
        return self.pack(lie.commutator(e1[:, 0], e2[:, 0]), np.zeros(self.group.n), lie.commutator(z1[0], z2[0]))

    # ---- sampling -----------------------------------------------------
    def _smooth_algebra(self, rng, k, amplitude):
        return FourierLoop.random(self.group, rng, k, self.modes, amplitude)(self.grid.sigma)

    def random(self, rng) -> LoopPoint:
        g = self.group
        x = self._smooth_algebra(rng, 1, self.amplitude)[:, 0]
        h = lie.group_exp(x) @ g.random_group(rng)
        return LoopPoint(h, random_alcove_interior(g.n, rng), g.random_group(rng))

    def random_tangent(self, rng, comp, k) -> np.ndarray:
        g = self.group
        eta = self._smooth_algebra(rng, k, 1.0)
        c_eta = np.stack([g.to_coords(eta[:, i]).T.reshape(-1) for i in range(k)], axis=1)
        return np.concatenate(
            [c_eta, rng.standard_normal((g.n - 1, k)), rng.standard_normal((g.dim, k))], axis=0
        )

    def check(self, comp: LoopPoint):
        if comp.n_nodes != self.grid.n_nodes:
            raise ValueError("loop has the wrong number of nodes")
        if not (lie.is_group_element(comp.h, 1e-10) and lie.is_group_element(comp.g0, 1e-10)):
            raise ValueError("chart components are not in SU(n)")
        lie.check_alcove(comp.tau)

    # ---- chart differential -------------------------------------------
    def embed(self, comp: LoopPoint, coords) -> np.ndarray:
        """``dl l^-1`` at the nodes and ``dM M^-1``, in basis coordinates."""
        g = self.group
        eta, dtau, zeta = self.unpack(coords)
        itau = 1j * _diag(dtau)
        ls = comp.values()
        sig = self.grid.sigma[:, None, None, None]
        nodes = eta + sig * adjoint(comp.h[:, None], itau[None]) - adjoint(ls[:, None], zeta[None])
        m = comp.monodromy()
        dm = zeta + adjoint(comp.g0, 2 * np.pi * itau) - adjoint(m, zeta)
        n_nodes, k = self.grid.n_nodes, nodes.shape[1]
        cn = g.to_coords(nodes.reshape(-1, g.n, g.n)).reshape(g.dim, n_nodes, k).transpose(1, 0, 2)
        return np.concatenate([cn.reshape(n_nodes * g.dim, k), g.to_coords(dm)], axis=0)

    def act_tangent(self, g, coords):
        return coords


def _diag(vecs) -> np.ndarray:
    vecs = np.asarray(vecs)
    return vecs[..., None] * np.eye(vecs.shape[-1])


class ChiralWZNW(QHamSpace):
    """(W, Omega, mu, H) on a loop grid; the action is ``l -> l g^-1`` (``g0 -> g g0``)."""

    def __init__(self, group: GroupSpec, grid: LoopGrid | int = 64, scheme: str = "spectral", **slot_kw):
        if scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {scheme!r}")
        self.group = group
        self.grid = grid if isinstance(grid, LoopGrid) else LoopGrid(int(grid))
        self.scheme = scheme
        self.slot = LoopSlot(group, self.grid, **slot_kw)
        self.slots = (self.slot,)
        self.n_factors = 1
        self.name = "W"

    # ---- moment -------------------------------------------------------
    def moment(self, point):
        return (point[0].moment(),)

    def moment_from_values(self, point) -> np.ndarray:
        l = point[0]
        return dagger(l.end()) @ l.values()[0]

    def moment_rmc(self, point, u):
        l = point[0]
        _, dtau, zeta = self.slot.unpack(self.split(u)[0])
        mu = l.moment()
        return (zeta + adjoint(l.g0, -2j * np.pi * _diag(dtau)) - adjoint(mu, zeta),)

    # ---- form ---------------------------------------------------------
    def _pieces(self, l: LoopPoint, coords):
        eta, dtau, zeta = self.slot.unpack(coords)
        x = adjoint(dagger(l.h)[:, None], eta)
        itau = 1j * _diag(dtau)
        z = adjoint(dagger(l.g0), zeta)
        return eta, x, itau, z

    def _boundary(self, l: LoopPoint, eta, itau, zeta):
        start = eta[0] - adjoint(l.h[0] @ dagger(l.g0), zeta)
        end = eta[0] + 2 * np.pi * adjoint(l.h[0], itau) - adjoint(l.end(), zeta)
        return start, end

    def form(self, point, u, v):
        l = point[0]
        cu, cv = self.split(u)[0], self.split(v)[0]
        if self.scheme == "spectral":
            s_uv = self._s_spectral(l, cu, cv)
            s_vu = self._s_spectral(l, cv, cu)
        else:
            s_uv = self._s_central(l, cu, cv)
            s_vu = self._s_central(l, cv, cu)
        eta_u, _, it_u, _ = self._pieces(l, cu)
        eta_v, _, it_v, _ = self._pieces(l, cv)
        zu = self.group.to_algebra(cu[self.slot._sl_zeta])
        zv = self.group.to_algebra(cv[self.slot._sl_zeta])
        a_u, b_u = self._boundary(l, eta_u, it_u, zu)
        a_v, b_v = self._boundary(l, eta_v, it_v, zv)
        return 0.5 * (s_uv - s_vu.T) + half_wedge(self.group, a_u, b_u, a_v, b_v)

    def _pair_nodes(self, a, b, w) -> np.ndarray:
        """``sum_j w_j (a_j, b_j)`` for node stacks ``a (N, k, n, n)``, ``b (N, m, n, n)``."""
        nn, k = a.shape[0], a.shape[1]
        m = b.shape[1]
        aw = (np.asarray(w)[:, None, None, None] * a).transpose(1, 0, 2, 3).reshape(k, -1)
        bt = np.swapaxes(b, -1, -2).transpose(1, 0, 2, 3).reshape(m, -1)
        return -self.group.pairing_scale * (aw @ bt.T).real

    def _s_spectral(self, l: LoopPoint, cu, cv) -> np.ndarray:
        """``S(u, v) = int (xi_u, d xi_v)`` up to terms symmetric in (u, v)."""
        g, grid = self.group, self.grid
        pm = g.pairing_matrix
        _, xu, itu, zu = self._pieces(l, cu)
        _, xv, itv, zv = self._pieces(l, cv)
        tau = 1j * np.diag(l.tau)
        vv = grid.diff(xv) - lie.commutator(tau, xv)
        flat = np.full(grid.n_nodes, grid.step)
        s = self._pair_nodes(xu, vv, flat)
        s += self._pair_nodes(xu, np.broadcast_to(itv, xu.shape[:1] + itv.shape), flat)
        w1 = grid.weights(0.0, 1)
        diag_v = np.einsum("jmaa->jma", vv)
        s += -g.pairing_scale * np.einsum("ka,ma->km", np.einsum("kaa->ka", itu), np.einsum("j,jma->ma", w1, diag_v)).real
        omega = l.tau[:, None] - l.tau[None, :]
        w0 = grid.weights(omega, 0)
        q = np.einsum("abj,jmba->mab", w0, vv)
        s += g.pairing_scale * np.einsum("kab,mab->km", zu, q).real
        s -= 2 * np.pi * pm(zu, itv)
        return s

    def _s_central(self, l: LoopPoint, cu, cv) -> np.ndarray:
        grid = self.grid
        n_nodes, step = grid.n_nodes, grid.step
        idx = np.arange(-1, n_nodes + 2)
        sig = step * idx
        e = l.torus(sig)

        def xi(coords):
            _, x, it, z = self._pieces(l, coords)
            xe = x[idx % n_nodes]
            return adjoint(dagger(e)[:, None], xe) + sig[:, None, None, None] * it[None] - z[None]

        xu, xv = xi(cu), xi(cv)
        dv = (xv[2:] - xv[:-2]) / (2 * step)
        w = np.full(n_nodes + 1, step)
        w[0] = w[-1] = 0.5 * step
        return self._pair_nodes(xu[1:-1], dv, w)

    # ---- action -------------------------------------------------------
    def act(self, gs, point):
        l = point[0]
        return (LoopPoint(l.h, l.tau, gs[0] @ l.g0),)

    def infinitesimal_action(self, zetas, point):
        out = np.zeros(self.dim)
        out[self.slot._sl_zeta] = self.group.to_coords(zetas[0])
        return out

    def chart_diff(self, point, u):
        return self.slot.embed(point[0], self.split(u)[0])

    def torus_gauge(self, point) -> np.ndarray:
        """Chart-null tangents from ``h -> h t, g0 -> g0 t``."""
        l = point[0]
        cols = []
        for a in self.slot.cartan.T:
            it = 1j * np.diag(a)
            cols.append(self.slot.pack(adjoint(l.h, it), np.zeros(self.group.n), adjoint(l.g0, it)))
        return np.array(cols).T

    def chart_null(self, point, tol: float = 1e-9) -> np.ndarray:
        return scipy.linalg.orth(self.torus_gauge(point))

    def nyquist_modes(self, point) -> np.ndarray:
        """Tangents with ``h^-1 eta h`` alternating in sign node to node.

        The discrete derivative discards this frequency, so these directions
        are not resolved by the grid.
        """
        l = point[0]
        alt = (-1.0) ** np.arange(self.grid.n_nodes)
        zero = np.zeros((self.group.n, self.group.n))
        cols = [
            self.slot.pack(adjoint(l.h, alt[:, None, None] * c), np.zeros(self.group.n), zero)
            for c in self.group.algebra_basis
        ]
        return np.array(cols).T

    def degenerate_directions(self, point) -> np.ndarray:
        return scipy.linalg.orth(np.hstack([self.torus_gauge(point), self.nyquist_modes(point)]))

    # ---- Hamiltonian --------------------------------------------------
    def current(self, point) -> np.ndarray:
        """``dl/dsigma l^-1`` at the nodes (periodic)."""
        l = point[0]
        dh = self.grid.diff(l.h) if self.scheme == "spectral" else self.grid.diff_central(l.h)
        rho = dh @ dagger(l.h) + adjoint(l.h, 1j * np.diag(l.tau))
        return lie.project_algebra(rho)

    def hamiltonian(self, point) -> float:
        rho = self.current(point)
        # -1/2 int (rho, rho) with (x, y) = -scale Re tr(xy)
        return float(0.5 * self.group.pairing_scale * self.grid.step * np.einsum("jab,jba->", rho, rho).real)

    def hamiltonian_diff(self, point, u) -> np.ndarray:
        """``dH`` along each column of ``u``: ``-int (rho, d eta + Ad_h(i dtau))``."""
        l = point[0]
        rho = self.current(point)
        eta, dtau, _ = self.slot.unpack(self.split(u)[0])
        deta = self.grid.diff(eta) if self.scheme == "spectral" else self.grid.diff_central(eta)
        var = deta + adjoint(l.h[:, None], 1j * _diag(dtau)[None])
        w = np.full(self.grid.n_nodes, self.grid.step)
        return -self._pair_nodes(rho[:, None], var, w)[0]

    def random_point(self, seed=None):
        return (self.slot.random(lie.as_rng(seed)),)

    def solve_moment(self, point, target, rng=None):
        """Keep ``h`` and choose ``(tau, g0)`` so that ``mu = target``."""
        lam, k = lie.alcove_decompose(dagger(target))
        return (LoopPoint(point[0].h, lam, k),)

    def __repr__(self):
        return f"<ChiralWZNW {self.group.name} N={self.grid.n_nodes} {self.scheme}>"


def omega_W(space: ChiralWZNW, l: LoopPoint, u, v) -> float:
    return float(space.form((l,), _batch(u), _batch(v))[0, 0])


def moment_W(l: LoopPoint) -> np.ndarray:
    return l.moment()


def hamiltonian_W(space: ChiralWZNW, l: LoopPoint) -> float:
    return space.hamiltonian((l,))


def omega_chart_identity(space: ChiralWZNW, l: LoopPoint, u, v) -> np.ndarray:
    """Independent evaluation of Omega through ``Y = h^-1 dh``, ``dtau`` and ``Z = g0^-1 dg0``.

    Every integrand is periodic, so only the periodic spectral derivative and
    the trapezoid rule are used.
    """
    g, grid = space.group, space.grid
    pm = g.pairing_matrix
    cu, cv = space.split(u)[0], space.split(v)[0]
    _, yu, itu, zu = space._pieces(l, cu)
    _, yv, itv, zv = space._pieces(l, cv)
    tau = 1j * np.diag(l.tau)
    w = np.full(grid.n_nodes, grid.step)
    pn = space._pair_nodes
    dyv, dyu = grid.diff(yv), grid.diff(yu)
    kin = 0.5 * (pn(yu, dyv, w) - pn(yv, dyu, w).T)
    bu = np.broadcast_to(itu, yv.shape[:1] + itu.shape)
    bv = np.broadcast_to(itv, yu.shape[:1] + itv.shape)
    mixed = -(pn(bu, yv, w) - pn(bv, yu, w).T)
    rot = -pn(yu, lie.commutator(tau, yv), w)
    zt = 2 * np.pi * (pm(itu, zv) - pm(itv, zu).T)
    e = lie.alcove_embed(l.tau)
    bnd = half_wedge(g, zu, adjoint(e, zu), zv, adjoint(e, zv))
    return kin + mixed + rot + zt + bnd


# ---------------------------------------------------------------------------
# loop reversal
# ---------------------------------------------------------------------------


def _reversal_matrix(n: int) -> np.ndarray:
    p = np.eye(n)[::-1].astype(complex)
    det = np.linalg.det(p).real
    return p * (np.exp(1j * np.pi / n) if det < 0 else 1.0)


def loop_reverse(l: LoopPoint) -> LoopPoint:
    """Chart data of ``sigma -> l(2 pi - sigma)``.

    With ``P`` the (determinant-corrected) order-reversing permutation,
    ``tau' = P^-1 (-tau) P`` is again in the alcove and
    ``h'(sigma) = h(-sigma) e^{2 pi i tau} P``, ``g0' = g0 P``.
    """
    n = len(l.tau)
    p = _reversal_matrix(n)
    idx = (-np.arange(l.n_nodes)) % l.n_nodes
    h = l.h[idx] @ lie.alcove_embed(l.tau) @ p
    return LoopPoint(h, -l.tau[::-1], l.g0 @ p)


def push_reverse(slot: LoopSlot, l: LoopPoint, coords) -> np.ndarray:
    """Pushforward of chart tangents under :func:`loop_reverse`."""
    c = _batch(coords)
    eta, dtau, zeta = slot.unpack(c)
    idx = (-np.arange(l.n_nodes)) % l.n_nodes
    eta2 = eta[idx] + 2 * np.pi * adjoint(l.h[idx][:, None], 1j * _diag(dtau)[None])
    out = [slot.pack(eta2[:, i], -dtau[i][::-1], zeta[i]) for i in range(c.shape[1])]
    return np.array(out).T


# ---------------------------------------------------------------------------
# currents, holonomy, factorization
# ---------------------------------------------------------------------------


def holonomy(a: np.ndarray, side: str = "right") -> np.ndarray:
    """Solve ``w^-1 dw/dsigma = A`` (``side="right"``) or ``dw/dsigma w^-1 = A``
    with ``w(0) = e`` on the uniform grid. ``a`` holds N periodic node values;
    returns the N + 1 values ``w(sigma_0) .. w(2 pi)``."""
    a = np.asarray(a)
    n_nodes, n = a.shape[0], a.shape[-1]
    step = 2 * np.pi / n_nodes
    mids = 0.5 * (a + np.roll(a, -1, axis=0))
    steps = lie.group_exp(step * mids)
    out = np.empty((n_nodes + 1, n, n), complex)
    out[0] = np.eye(n)
    for j in range(n_nodes):
        out[j + 1] = out[j] @ steps[j] if side == "right" else steps[j] @ out[j]
    return out


def gauge_transform(a: np.ndarray, g: np.ndarray) -> np.ndarray:
    """``g |> A = Ad_g A - dg/dsigma g^-1`` (central differences, periodic g)."""
    step = 2 * np.pi / a.shape[0]
    dg = (np.roll(g, -1, axis=0) - np.roll(g, 1, axis=0)) / (2 * step)
    return lie.project_algebra(adjoint(g, a) - dg @ dagger(g))


def chiral_moment_density(space: ChiralWZNW, l: LoopPoint) -> np.ndarray:
    """``Phi = -dl/dsigma l^-1`` at the nodes."""
    return -space.current((l,))


def node_current(values: np.ndarray) -> np.ndarray:
    """``dl/dsigma l^-1`` from N + 1 quasi-periodic node values by central differences."""
    n_nodes = values.shape[0] - 1
    step = 2 * np.pi / n_nodes
    m = dagger(values[0]) @ values[-1]
    ext = np.concatenate([values[-2:-1] @ dagger(m), values, values[1:2] @ m])
    d = (ext[2:] - ext[:-2]) / (2 * step)
    return lie.project_algebra(d[:-1] @ dagger(values[:-1]))


def node_hamiltonian(values: np.ndarray, pairing_scale: float = 1.0) -> float:
    rho = node_current(values)
    step = 2 * np.pi / rho.shape[0]
    return float(0.5 * pairing_scale * step * np.einsum("jab,jba->", rho, rho).real)


@dataclass
class Factorization:
    l: np.ndarray
    g_right: np.ndarray
    g_left: np.ndarray
    b: np.ndarray
    b_spread: float
    monodromy_defect: float
    h_wz: float
    h_split: float


def factorize_wznw(j_left: np.ndarray, g: np.ndarray, pairing_scale: float = 1.0) -> Factorization:
    """Write a periodic field ``g`` with left current ``J_L`` as ``g = l(sigma) g_R(sigma)``.

    ``g_L`` solves ``dg_L g_L^-1 = J_L``; ``J_R = -g^-1 J_L g + g^-1 dg``;
    ``g_R`` solves ``g_R^-1 dg_R = J_R``; ``l = g_L g(0)``.
    """
    g = np.asarray(g)
    n_nodes = g.shape[0]
    if n_nodes < 8:
        raise ValueError("need at least 8 nodes")
    step = 2 * np.pi / n_nodes
    dg = (np.roll(g, -1, axis=0) - np.roll(g, 1, axis=0)) / (2 * step)
    j_right = lie.project_algebra(-adjoint(dagger(g), j_left) + dagger(g) @ dg)
    g_left = holonomy(j_left, side="left")
    g_right = holonomy(j_right, side="right")
    l = g_left @ g[0]
    gg = np.concatenate([g, g[:1]])
    b = dagger(g_left) @ gg @ dagger(g_right)
    spread = float(np.max(np.abs(b - b[0])))
    mu = dagger(l[-1]) @ l[0]
    defect = float(np.max(np.abs(mu - g_right[-1])))
    pm = lambda x: float(-pairing_scale * step * np.einsum("jab,jba->", x, x).real)
    h_wz = -0.5 * pm(j_left) - 0.5 * pm(j_right)
    h_split = node_hamiltonian(l, pairing_scale) + node_hamiltonian(dagger(g_right), pairing_scale)
    return Factorization(l, g_right, g_left, b, spread, defect, h_wz, h_split)


# ---------------------------------------------------------------------------
# evolution field
# ---------------------------------------------------------------------------


@dataclass
class EvolutionField:
    v: np.ndarray
    omega_residual: float
    moment_residual: float
    condition: float


def evolution_field(space: ChiralWZNW, point, cond_warn: float = 1e10) -> EvolutionField:
    """Least-squares solution of ``iota(v) Omega = dH`` and ``iota(v) mu^* theta = 0``."""
    eye = np.eye(space.dim)
    a = space.form(point, eye, eye)
    dh = space.hamiltonian_diff(point, eye)
    mth = space.group.to_coords(space.moment_lmc(point, eye)[0])
    lhs = np.vstack([a.T, mth])
    rhs = np.concatenate([dh, np.zeros(mth.shape[0])])
    # solve on the complement of chart-null and unresolved directions
    q = scipy.linalg.null_space(space.degenerate_directions(point).T)
    red = lhs @ q
    y, *_ = np.linalg.lstsq(red, rhs, rcond=1e-12)
    v = q @ y
    s = np.linalg.svd(red, compute_uv=False)
    cond = float(s[0] / s[-1]) if s[-1] > 0 else np.inf
    if cond > cond_warn:
        warnings.warn(f"evolution field system is ill-conditioned (cond={cond:.2e})", RuntimeWarning)
    return EvolutionField(
        v=v,
        omega_residual=float(np.max(np.abs(a.T @ v - dh))),
        moment_residual=float(np.max(np.abs(mth @ v))),
        condition=cond,
    )
