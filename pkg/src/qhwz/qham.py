"""Quasi-Hamiltonian spaces and a numerical verifier for their four axioms.

Points are tuples of slot components. Tangents are real coordinate vectors
(or ``(dim, k)`` batches): each finite slot contributes the basis
coordinates of ``eta = dg g^-1`` (right translation), loop slots use the
chart coordinates defined in :mod:`qhwz.loops`.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.linalg

from . import lie
from .lie import GroupSpec, adjoint, dagger

# Sign of the bracket of constant-coordinate (right-invariant) fields:
# [X_a, X_b] = BRACKET_SIGN * X_[a,b]. Frozen from calibrate_bracket_sign().
BRACKET_SIGN = -1.0


class InfeasibleConstraint(ValueError):
    pass


class GroupSlot:
    """A component living in G, coordinatized by right translation."""

    kind = "group"

    def __init__(self, group: GroupSpec):
        self.group = group
        self.size = group.dim

    def retract(self, comp, coords, s=1.0):
        return lie.group_exp(s * self.group.to_algebra(coords)) @ comp

    def difference(self, new, old):
        return self.group.to_coords(lie.group_log(new @ dagger(old)))

    def bracket(self, c1, c2):
        g = self.group
        return g.to_coords(lie.commutator(g.to_algebra(c1), g.to_algebra(c2)))

    def random(self, rng):
        return self.group.random_group(rng)

    def random_tangent(self, rng, comp, k):
        return rng.standard_normal((self.size, k))

    def embed(self, comp, coords):
        return coords

    def check(self, comp):
        if not lie.is_group_element(comp, 1e-10):
            raise ValueError("component is not in SU(n)")

    def act_tangent(self, g, coords):
        # left multiplication comp -> g comp
        return self.group.to_coords(adjoint(g, self.group.to_algebra(coords)))


def half_wedge(group: GroupSpec, a_u, b_u, a_v, b_v) -> np.ndarray:
    """Matrix of 1/2 (a wedge b)(u, v) = 1/2[(a(u), b(v)) - (a(v), b(u))]."""
    pm = group.pairing_matrix
    return 0.5 * (pm(a_u, b_v) - pm(b_u, a_v))


def _batch(u):
    u = np.asarray(u, dtype=float)
    return u[:, None] if u.ndim == 1 else u


class QHamSpace:
    """Base class. Subclasses set ``group``, ``slots``, ``n_factors``, ``name``."""

    group: GroupSpec
    slots: tuple
    n_factors: int
    name: str = "M"

    # ---- layout -------------------------------------------------------
    @property
    def dim(self) -> int:
        return sum(s.size for s in self.slots)

    @property
    def offsets(self) -> list[int]:
        out = [0]
        for s in self.slots:
            out.append(out[-1] + s.size)
        return out

    def split(self, u) -> list[np.ndarray]:
        u = _batch(u)
        o = self.offsets
        return [u[o[i] : o[i + 1]] for i in range(len(self.slots))]

    def join(self, parts) -> np.ndarray:
        return np.concatenate([_batch(p) for p in parts], axis=0)

    # ---- structure (subclasses) --------------------------------------
    def moment(self, point) -> tuple:
        raise NotImplementedError

    def moment_rmc(self, point, u) -> tuple:
        """Per factor, the stack ``(k, n, n)`` of ``dmu mu^-1`` along the tangents."""
        raise NotImplementedError

    def form(self, point, u, v) -> np.ndarray:
        raise NotImplementedError

    def act(self, gs, point):
        raise NotImplementedError

    def infinitesimal_action(self, zetas, point) -> np.ndarray:
        raise NotImplementedError

    # ---- generic geometry --------------------------------------------
    def moment_lmc(self, point, u) -> tuple:
        return tuple(
            lie.left_mc(m, r) for m, r in zip(self.moment(point), self.moment_rmc(point, u))
        )

    def retract(self, point, u, s=1.0):
        parts = self.split(u)
        return tuple(sl.retract(c, p[:, 0], s) for sl, c, p in zip(self.slots, point, parts))

    def difference(self, new, old) -> np.ndarray:
        return np.concatenate([sl.difference(a, b) for sl, a, b in zip(self.slots, new, old)])

    def bracket(self, u, v) -> np.ndarray:
        pu, pv = self.split(u), self.split(v)
        return np.concatenate(
            [sl.bracket(a[:, 0], b[:, 0]) for sl, a, b in zip(self.slots, pu, pv)]
        )

    def chart_diff(self, point, u) -> np.ndarray:
        """Differential of the chart into embedded coordinates, ``(m, k)``."""
        parts = self.split(u)
        return np.concatenate(
            [sl.embed(c, p) for sl, c, p in zip(self.slots, point, parts)], axis=0
        )

    def chart_null(self, point, tol: float = 1e-9) -> np.ndarray:
        jac = self.chart_diff(point, np.eye(self.dim))
        return scipy.linalg.null_space(jac, rcond=tol)

    def degenerate_directions(self, point) -> np.ndarray:
        """Directions quotiented before rank and kernel tests (chart-null by default)."""
        return self.chart_null(point)

    def random_point(self, seed=None):
        rng = lie.as_rng(seed)
        return tuple(s.random(rng) for s in self.slots)

    def random_tangent(self, seed, point, k=1) -> np.ndarray:
        rng = lie.as_rng(seed)
        return np.concatenate(
            [s.random_tangent(rng, c, k) for s, c in zip(self.slots, point)], axis=0
        )

    def random_action(self, seed=None) -> tuple:
        rng = lie.as_rng(seed)
        return tuple(self.group.random_group(rng) for _ in range(self.n_factors))

    def push_tangent(self, gs, point, u, h=1e-6) -> np.ndarray:
        """Pushforward of ``u`` under ``act(gs, .)`` by central differences."""
        base = self.act(gs, point)
        plus = self.act(gs, self.retract(point, u, h))
        minus = self.act(gs, self.retract(point, u, -h))
        return (self.difference(plus, base) - self.difference(minus, base)) / (2 * h)

    def solve_moment(self, point, target, rng):
        """Replace the point so that its (single) moment equals ``target``."""
        return newton_solve(self, point, target)

    def __repr__(self):
        return f"<{type(self).__name__} {self.name} dim={self.dim} factors={self.n_factors}>"


def moment(space, point):
    return space.moment(point)


def act(space, gs, point):
    return space.act(gs, point)


def infinitesimal_action(space, zetas, point):
    return space.infinitesimal_action(zetas, point)


def eval_form(space: QHamSpace, point, u, v) -> float:
    return float(space.form(point, _batch(u), _batch(v))[0, 0])


def newton_solve(space: QHamSpace, point, target, tol=1e-14, max_iter=100):
    """Damped Gauss-Newton projection onto {mu = target} for single-factor spaces."""
    g = space.group

    def residual(p):
        (mu,) = space.moment(p)
        try:
            return g.to_coords(lie.group_log(mu @ dagger(target)))
        except lie.BranchCutError:
            return None

    p = point
    err = residual(p)
    if err is None:
        raise InfeasibleConstraint("Newton start at the branch cut")
    for _ in range(max_iter):
        (mu,) = space.moment(p)
        if np.max(np.abs(mu - target)) < tol:
            return p
        jac = g.to_coords(space.moment_rmc(p, np.eye(space.dim))[0])
        step = -np.linalg.lstsq(jac, err, rcond=1e-10)[0]
        t = 1.0
        while t > 1e-4:
            trial = space.retract(p, step, t)
            e2 = residual(trial)
            if e2 is not None and np.linalg.norm(e2) < np.linalg.norm(err):
                p, err = trial, e2
                break
            t *= 0.5
        else:
            break
    (mu,) = space.moment(p)
    if np.max(np.abs(mu - target)) > 1e-12:
        raise InfeasibleConstraint("Newton projection did not converge")
    return p


# ---------------------------------------------------------------------------
# exterior derivative
# ---------------------------------------------------------------------------


def directional_derivative(f, space, point, u, h=1e-4, richardson=False):
    def d(step):
        return (f(space.retract(point, u, step)) - f(space.retract(point, u, -step))) / (2 * step)

    if not richardson:
        return d(h)
    return (4 * d(h / 2) - d(h)) / 3


def exterior_derivative3(space, point, u, v, w, h=1e-4, sign=None, richardson=False) -> float:
    """dOmega(X, Y, Z) for the constant-coordinate extensions of u, v, w."""
    eps = BRACKET_SIGN if sign is None else sign

    def om(a, b):
        return lambda p: eval_form(space, p, a, b)

    dd = lambda a, b, c: directional_derivative(om(b, c), space, point, a, h, richardson)
    total = dd(u, v, w) + dd(v, w, u) + dd(w, u, v)
    for a, b, c in ((u, v, w), (v, w, u), (w, u, v)):
        total -= eval_form(space, point, eps * space.bracket(a, b), c)
    return float(total)


def exterior_derivative1(beta, space, point, u, v, h=1e-4, sign=None) -> float:
    """d(beta)(X, Y) for a 1-form ``beta(point, tangent)``."""
    eps = BRACKET_SIGN if sign is None else sign
    xu = directional_derivative(lambda p: beta(p, v), space, point, u, h)
    yv = directional_derivative(lambda p: beta(p, u), space, point, v, h)
    return float(xu - yv - beta(point, eps * space.bracket(u, v)))


def stokes_oracle(beta, space, point, u, v, side=2e-3, n_quad=8) -> float:
    """d(beta)(u, v) from the circulation around a small square in exponential coordinates.

    Only finite-slot spaces. The square has corners at s*u + t*v,
    s, t in {-side/2, side/2}, and the chart is x -> retract(point, x).
    """
    xs, ws = np.polynomial.legendre.leggauss(n_quad)
    a = side / 2

    def line(x0, x1):
        total = 0.0
        for x, w in zip(xs, ws):
            t = 0.5 * (x + 1)
            pos = (1 - t) * x0 + t * x1
            tang = x1 - x0
            hh = 1e-6
            plus = space.retract(point, pos + hh * tang)
            minus = space.retract(point, pos - hh * tang)
            here = space.retract(point, pos)
            vel = (space.difference(plus, here) - space.difference(minus, here)) / (2 * hh)
            total += 0.5 * w * beta(here, vel)
        return total

    c = [-a * u - a * v, a * u - a * v, a * u + a * v, -a * u + a * v]
    circ = sum(line(c[i], c[(i + 1) % 4]) for i in range(4))
    return circ / side**2


def calibrate_bracket_sign(group: GroupSpec | None = None, seed=0) -> tuple[float, dict]:
    """Fix the constant-field bracket sign against the Stokes oracle.

    Uses beta(v) = (dmu mu^-1 (v), c) on M = G with mu = id. Returns the sign
    whose exterior derivative matches the circulation, with diagnostics.
    """
    group = group or lie.SU2
    rng = lie.as_rng(seed)
    space = _IdentityGroup(group)
    c = group.random_algebra(rng)
    p = space.random_point(rng)
    u, v = rng.standard_normal(group.dim), rng.standard_normal(group.dim)

    def beta(pt, t):
        return group.pairing(group.to_algebra(t), c)

    oracle = stokes_oracle(beta, space, p, u, v)
    errs = {s: abs(exterior_derivative1(beta, space, p, u, v, sign=s) - oracle) for s in (1.0, -1.0)}
    best = min(errs, key=errs.get)
    return best, {"oracle": oracle, "err_plus": errs[1.0], "err_minus": errs[-1.0]}


class _IdentityGroup(QHamSpace):
    def __init__(self, group):
        self.group = group
        self.slots = (GroupSlot(group),)
        self.n_factors = 1
        self.name = "G"

    def moment(self, point):
        return (point[0],)

    def moment_rmc(self, point, u):
        return (self.group.to_algebra(_batch(u)),)


# ---------------------------------------------------------------------------
# axiom verification
# ---------------------------------------------------------------------------


def cubic_term(space, point, u, v, w) -> float:
    """(1/12) sum_factors mu^*(theta, [theta, theta])(u, v, w) = 1/2 sum (th_u, [th_v, th_w])."""
    g = space.group
    tu, tv, tw = (space.moment_lmc(point, _batch(x)) for x in (u, v, w))
    total = 0.0
    for a, b, c in zip(tu, tv, tw):
        total += g.pairing(a[0], lie.commutator(b[0], c[0]))
    return 0.5 * total


def moment_pairing_term(space, point, zetas, v) -> float:
    """1/2 sum_factors (mu^*theta(v) + mu^*thetabar(v), zeta)."""
    g = space.group
    r = space.moment_rmc(point, _batch(v))
    l = space.moment_lmc(point, _batch(v))
    return 0.5 * sum(g.pairing(a[0] + b[0], z) for a, b, z in zip(l, r, zetas))


def predicted_kernel(space, point, tol=1e-8) -> np.ndarray:
    """Columns spanning {zeta_M : zeta in Ker(Ad_mu + Id)} (factorwise direct sum)."""
    g = space.group
    cols = []
    mus = space.moment(point)
    for f, mu in enumerate(mus):
        adm = g.adjoint_matrix(mu)
        ker = scipy.linalg.null_space(adm + np.eye(g.dim), rcond=tol)
        for z in ker.T:
            zetas = [np.zeros((g.n, g.n), complex) for _ in mus]
            zetas[f] = g.to_algebra(z)
            cols.append(space.infinitesimal_action(tuple(zetas), point))
    if not cols:
        return np.zeros((space.dim, 0))
    return np.array(cols).T


def kernel_comparison(space, point, tangent_basis=None, predicted=None, sv_tol=1e-8, quotient=None):
    """Compare the kernel of Omega on a tangent subspace with predicted directions.

    Directions in ``quotient`` (default: ``space.degenerate_directions``) are removed
    first. Returns dict with dims and the largest principal angle.
    """
    dim = space.dim
    t = np.eye(dim) if tangent_basis is None else tangent_basis
    q = space.degenerate_directions(point) if quotient is None else quotient
    if q.shape[1]:
        t = t - q @ np.linalg.lstsq(q, t, rcond=None)[0]
    b = scipy.linalg.orth(t, rcond=1e-9)
    gram = space.form(point, b, b)
    _, s, vh = np.linalg.svd(gram)
    scale = max(1.0, s[0]) if s.size else 1.0
    small = s < sv_tol * scale
    kernel = b @ vh[small].T
    pred = predicted_kernel(space, point) if predicted is None else predicted
    if pred.shape[1]:
        pred = b @ (b.T @ pred)
        pred = scipy.linalg.orth(pred, rcond=1e-9)
    angle = 0.0
    if kernel.shape[1] and pred.shape[1] and kernel.shape[1] == pred.shape[1]:
        angle = float(np.max(scipy.linalg.subspace_angles(kernel, pred)))
    elif kernel.shape[1] != pred.shape[1]:
        angle = float(np.pi / 2)
    return {
        "kernel_dim": int(kernel.shape[1]),
        "predicted_dim": int(pred.shape[1]),
        "max_angle": angle,
        "rank": int(b.shape[1] - kernel.shape[1]),
        "singular_values": s,
    }


@dataclass
class AxiomResult:
    max_residual: float
    tolerance: float
    passed: bool


@dataclass
class AxiomReport:
    space: str
    n_samples: int
    seed: int
    axioms: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.axioms.values())

    def to_dict(self) -> dict:
        return {
            "space": self.space,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "pass": self.passed,
            "axioms": {k: asdict(v) for k, v in self.axioms.items()},
        }


DEFAULT_TOLERANCES = {"qh1": 1e-10, "qh2": 1e-6, "qh3": 1e-8, "qh4": 1e-6}


def check_axioms(
    space: QHamSpace,
    n_samples: int = 10,
    seed: int = 0,
    tolerances: dict | None = None,
    fd_step: float = 1e-4,
    points=None,
    kernel: bool = True,
    richardson: bool = True,
) -> AxiomReport:
    """Sample points and record the worst residual of each axiom."""
    tol = {**DEFAULT_TOLERANCES, **(tolerances or {})}
    rng = lie.as_rng(seed)
    g = space.group
    res = {k: 0.0 for k in tol}
    if not kernel:
        res.pop("qh4")
    pts = points if points is not None else [space.random_point(rng) for _ in range(n_samples)]
    for p in pts:
        gs = space.random_action(rng)
        lhs = space.moment(space.act(gs, p))
        rhs = [x @ m @ dagger(x) for x, m in zip(gs, space.moment(p))]
        res["qh1"] = max(res["qh1"], max(np.max(np.abs(a - b)) for a, b in zip(lhs, rhs)))

        u, v, w = space.random_tangent(rng, p, 3).T
        d_omega = exterior_derivative3(space, p, u, v, w, h=fd_step, richardson=richardson)
        res["qh2"] = max(res["qh2"], abs(d_omega + cubic_term(space, p, u, v, w)))

        zetas = tuple(g.random_algebra(rng) for _ in range(space.n_factors))
        zm = space.infinitesimal_action(zetas, p)
        lhs3 = eval_form(space, p, zm, v)
        res["qh3"] = max(res["qh3"], abs(lhs3 - moment_pairing_term(space, p, zetas, v)))

        if kernel:
            kc = kernel_comparison(space, p)
            bad = kc["max_angle"] if kc["kernel_dim"] == kc["predicted_dim"] else np.inf
            res["qh4"] = max(res["qh4"], bad)
    report = AxiomReport(space.name, len(pts), int(seed) if np.isscalar(seed) else -1)
    for k, r in res.items():
        report.axioms[k] = AxiomResult(float(r), tol[k], bool(r <= tol[k]))
    return report
