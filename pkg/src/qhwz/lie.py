"""Numerics for SU(N): algebra basis, invariant pairing, exp/log, Weyl alcove.

Group elements and algebra elements are plain complex ``(n, n)`` arrays.
Functions that accept stacks operate on the trailing two axes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg

TOL = 1e-12
BRANCH_MARGIN = 1e-6


class BranchCutError(ValueError):
    """Raised when a logarithm is requested at an eigenvalue -1."""


def as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def su_basis(n: int) -> np.ndarray:
    """Generalized Gell-Mann matrices times i; orthogonal under -tr(xy)."""
    mats = []
    for a in range(n):
        for b in range(a + 1, n):
            s = np.zeros((n, n), complex)
            s[a, b] = s[b, a] = 1.0
            mats.append(1j * s)
            t = np.zeros((n, n), complex)
            t[a, b] = -1j
            t[b, a] = 1j
            mats.append(1j * t)
    for m in range(1, n):
        d = np.zeros(n)
        d[:m] = 1.0
        d[m] = -m
        d *= np.sqrt(2.0 / (m * (m + 1)))
        mats.append(1j * np.diag(d).astype(complex))
    return np.array(mats)


@dataclass(frozen=True)
class GroupSpec:
    """SU(n) with the pairing ``pairing_scale * (-Re tr(xy))``."""

    n: int
    pairing_scale: float = 1.0
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("SU(n) needs n >= 2")
        if not self.pairing_scale > 0:
            raise ValueError("pairing_scale must be positive")
        if not self.name:
            object.__setattr__(self, "name", f"su{self.n}")

    @property
    def dim(self) -> int:
        return self.n * self.n - 1

    @cached_property
    def algebra_basis(self) -> np.ndarray:
        return su_basis(self.n)

    @cached_property
    def _norms(self) -> np.ndarray:
        return np.diag(self.gram())

    def gram(self) -> np.ndarray:
        return self.pairing_matrix(self.algebra_basis, self.algebra_basis)

    @cached_property
    def identity(self) -> np.ndarray:
        return np.eye(self.n, dtype=complex)

    def pairing(self, x, y) -> float:
        return pairing(x, y, self.pairing_scale)

    def pairing_matrix(self, xs, ys) -> np.ndarray:
        """``out[i, j] = pairing(xs[i], ys[j])`` for stacks of matrices."""
        return -self.pairing_scale * np.einsum("iab,jba->ij", xs, ys).real

    def to_algebra(self, coords) -> np.ndarray:
        """Basis coordinates ``(dim,)`` or ``(dim, k)`` to matrices."""
        c = np.asarray(coords, dtype=float)
        if c.ndim == 1:
            return np.tensordot(c, self.algebra_basis, axes=(0, 0))
        return np.einsum("dk,dab->kab", c, self.algebra_basis)

    def to_coords(self, x) -> np.ndarray:
        """Matrix (or stack ``(k, n, n)``) to coordinates ``(dim,)`` or ``(dim, k)``."""
        x = np.asarray(x)
        if x.ndim == 2:
            return self.pairing_matrix(self.algebra_basis, x[None])[:, 0] / self._norms
        return self.pairing_matrix(self.algebra_basis, x) / self._norms[:, None]

    def adjoint_matrix(self, g) -> np.ndarray:
        """Matrix of Ad_g in basis coordinates."""
        return self.to_coords(adjoint(g, self.algebra_basis))

    def random_group(self, seed=None) -> np.ndarray:
        return random_group(self.n, seed)

    def random_algebra(self, seed=None, scale: float = 1.0) -> np.ndarray:
        rng = as_rng(seed)
        return self.to_algebra(scale * rng.standard_normal(self.dim))


SU2 = GroupSpec(2)
SU3 = GroupSpec(3)


def group_from_name(name: str, pairing_scale: float = 1.0) -> GroupSpec:
    name = name.lower()
    if not name.startswith("su") or not name[2:].isdigit():
        raise ValueError(f"unknown group {name!r}")
    return GroupSpec(int(name[2:]), pairing_scale)


def pairing(x, y, scale: float = 1.0) -> float:
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch {x.shape} vs {y.shape}")
    return float(-scale * np.einsum("ab,ba->", x, y).real)


def project_algebra(m: np.ndarray) -> np.ndarray:
    """Anti-Hermitian traceless part."""
    a = 0.5 * (m - dagger(m))
    n = a.shape[-1]
    tr = np.trace(a, axis1=-2, axis2=-1)
    return a - tr[..., None, None] * np.eye(n) / n


def is_group_element(g, tol: float = TOL) -> bool:
    g = np.asarray(g)
    n = g.shape[-1]
    unit = np.max(np.abs(dagger(g) @ g - np.eye(n))) < tol
    return bool(unit and np.all(np.abs(np.linalg.det(g) - 1.0) < tol))


def is_algebra_element(x, tol: float = TOL) -> bool:
    x = np.asarray(x)
    herm = np.max(np.abs(dagger(x) + x)) < tol
    return bool(herm and np.all(np.abs(np.trace(x, axis1=-2, axis2=-1)) < tol))


def group_exp(x: np.ndarray) -> np.ndarray:
    """Exponential of anti-Hermitian input via eigendecomposition of -ix."""
    x = np.asarray(x)
    w, v = np.linalg.eigh(-1j * x)
    return (v * np.exp(1j * w)[..., None, :]) @ dagger(v)


def _unitary_eig(g: np.ndarray):
    t, z = scipy.linalg.schur(g, output="complex")
    return np.angle(np.diag(t)), z


def group_log(g: np.ndarray) -> np.ndarray:
    """Principal logarithm, made traceless by shifting angles across the cut."""
    g = np.asarray(g)
    if g.ndim > 2:
        return np.array([group_log(m) for m in g])
    phi, z = _unitary_eig(g)
    if np.any(np.abs(phi) > np.pi - BRANCH_MARGIN):
        raise BranchCutError("eigenvalue at or near -1")
    m = int(np.rint(phi.sum() / (2 * np.pi)))
    order = np.argsort(phi)
    for i in range(abs(m)):
        if m > 0:
            phi[order[-1 - i]] -= 2 * np.pi
        else:
            phi[order[i]] += 2 * np.pi
    return (z * (1j * phi)[None, :]) @ dagger(z)


def adjoint(g: np.ndarray, x: np.ndarray) -> np.ndarray:
    return g @ x @ dagger(g)


def commutator(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return x @ y - y @ x


def alcove_embed(lam) -> np.ndarray:
    return np.diag(np.exp(2j * np.pi * np.asarray(lam, dtype=float)))


def in_alcove(lam, tol: float = 1e-12) -> bool:
    lam = np.asarray(lam, dtype=float)
    return bool(
        abs(lam.sum()) < tol
        and np.all(np.diff(lam) <= tol)
        and lam[0] - lam[-1] <= 1 + tol
    )


def check_alcove(lam) -> np.ndarray:
    lam = np.asarray(lam, dtype=float)
    if not in_alcove(lam, 1e-9):
        raise ValueError(f"{lam} is not in the Weyl alcove")
    return lam


def alcove_decompose(g: np.ndarray):
    """Return ``(lam, k)`` with ``g = k alcove_embed(lam) k^-1`` and lam in the alcove."""
    phi, z = _unitary_eig(np.asarray(g))
    frac = np.mod(phi / (2 * np.pi), 1.0)
    frac[frac > 1 - 1e-15] = 0.0
    order = np.argsort(-frac, kind="stable")
    frac = frac[order]
    z = z[:, order]
    m = int(np.rint(frac.sum()))
    lam = frac.copy()
    lam[:m] -= 1.0
    order = np.argsort(-lam, kind="stable")
    lam = lam[order]
    lam -= lam.mean()  # strip roundoff
    k = z[:, order].copy()
    k[:, 0] *= np.conj(np.linalg.det(k))
    return lam, k


def random_group(n: int, seed=None) -> np.ndarray:
    """Haar-distributed SU(n) element (QR with phase fix, then det fix)."""
    rng = as_rng(seed)
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    q = q * (d / np.abs(d))[None, :]
    det = np.linalg.det(q)
    return q * np.exp(-1j * np.angle(det) / n)


def random_algebra(group: GroupSpec, seed=None) -> np.ndarray:
    return group.random_algebra(seed)


def rmc_product(x: np.ndarray, rx: np.ndarray, ry: np.ndarray) -> np.ndarray:
    """Right Maurer-Cartan value of a product: d(xy)(xy)^-1 = dx x^-1 + Ad_x(dy y^-1)."""
    return rx + adjoint(x, ry)


def rmc_inverse(x: np.ndarray, rx: np.ndarray) -> np.ndarray:
    """d(x^-1) x = -Ad_{x^-1}(dx x^-1)."""
    return -adjoint(dagger(x), rx)


def left_mc(x: np.ndarray, rx: np.ndarray) -> np.ndarray:
    """x^-1 dx from dx x^-1."""
    return adjoint(dagger(x), rx)


def cartan_basis(n: int) -> np.ndarray:
    """Orthonormal basis (columns) of real sum-zero vectors of length n."""
    return scipy.linalg.null_space(np.ones((1, n)))
