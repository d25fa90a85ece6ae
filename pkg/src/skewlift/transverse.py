"""Parametrized transverse problems on deleted-node coupled bases.

Given quadrature points mu = (mu_1, ..., mu_Qbar) in distinct elements of the
dominant-direction partition, the 2D weak form is collapsed onto 1D unknowns
P_i(y) by (i) deleting all partition nodes strictly inside
(ceil(mu_l/H)H, floor(mu_{l+1}/H)H) so the surviving "long" hat functions
couple the quadrature points, (ii) inserting the midpoint of two consecutive
points whenever they are at least two elements apart, and (iii) integrating
in x with a point rule whose weights tile Omega_1D.

Weight convention (the single most consequential reading in this package):
each quadrature point owns the subinterval between handover boundaries; the
boundary between consecutive points is their midpoint when they share an
element and the midpoint of the empty node range
[ceil(x_l/H)H, floor(x_{l+1}/H)H] otherwise (which is the shared element edge
when the elements are adjacent, recovering the isolated-point weight H). The
first/last points extend to the domain ends. All weights are positive and sum
to |Omega_1D|, so the rule is exact for constants; placing one point per
element midpoint reproduces the midpoint-quadrature FE system exactly.

Per quadrature point x_l the trial combination sum_i xi_i(x_l) P_i enters the
diffusion-in-y and b2-advection rows while the derivative-weighted combination
sum_i xi_i'(x_l) P_i enters the diffusion-in-x/b1 row; the right-hand side
collects F (plus k*Lap(h) in delta_h mode) against xi_k(x_l) and, in weak
mode, the lifting terms k h_y against v' and k h_x xi_k' + (b.grad h) xi_k
against v.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .mesh import Partition1D
from .problem import GridField  # noqa: F401  (re-exported for source shifts)

_GP = np.array([0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0)])


class QuadPointsInSameElement(ValueError):
    """Two transverse parameters fell into one dominant-direction element."""


@dataclass(frozen=True)
class QuadratureRule:
    """Augmented point rule in the dominant direction."""

    points: np.ndarray
    weights: np.ndarray
    qbar: int  # number of original (parameter) points
    qhat: int  # number of inserted midpoints


@dataclass(frozen=True)
class CoupledBasis:
    """Modified (long-support) hat basis after node deletion.

    kept_nodes are original node indices (always including both endpoints);
    active are the original node ids of interior hats whose support contains
    at least one parameter point.
    """

    base: Partition1D
    mu: tuple
    kept_nodes: np.ndarray
    active: np.ndarray
    _pos: dict = field(repr=False, compare=False, default_factory=dict)

    @property
    def kept_x(self):
        return self.base.nodes[self.kept_nodes]

    def _neighbors(self, node_id):
        pos = np.searchsorted(self.kept_nodes, node_id)
        if pos >= self.kept_nodes.size or self.kept_nodes[pos] != node_id:
            raise KeyError(f"node {node_id} was deleted")
        kx = self.kept_x
        left = kx[pos - 1] if pos > 0 else None
        right = kx[pos + 1] if pos + 1 < kx.size else None
        return left, kx[pos], right

    def value(self, node_id, x):
        """Modified hat value at x (scalar)."""
        left, center, right = self._neighbors(node_id)
        if x == center:
            return 1.0
        if left is not None and left < x < center:
            return (x - left) / (center - left)
        if right is not None and center < x < right:
            return (right - x) / (right - center)
        return 0.0

    def deriv(self, node_id, x):
        """Modified hat derivative at x; right-continuous at breakpoints."""
        left, center, right = self._neighbors(node_id)
        if left is not None and left <= x < center:
            return 1.0 / (center - left)
        if right is not None and center <= x < right:
            return -1.0 / (right - center)
        return 0.0


def _rel(part, x):
    """(x - a)/H snapped to integers within 1e-10 relative tolerance."""
    r = (x - part.a) / part.h
    rr = round(r)
    return float(rr) if abs(r - rr) <= 1e-10 * max(1.0, abs(r)) else r


def _sorted_mu(th, mu):
    mu = np.sort(np.asarray(mu, dtype=float))
    if mu.size < 1:
        raise ValueError("need at least one quadrature point")
    if mu[0] <= th.a or mu[-1] >= th.b:
        raise ValueError(f"parameters must lie strictly inside ({th.a}, {th.b})")
    return mu


def build_coupled_basis(th, mu):
    """Delete nodes between parameter points and collect the active hats."""
    mu = _sorted_mu(th, mu)
    els = np.floor([_rel(th, m) for m in mu]).astype(int)
    els = np.clip(els, 0, th.n - 1)
    if np.any(np.diff(els) == 0):
        dup = mu[np.argmin(np.diff(els))]
        raise QuadPointsInSameElement(
            f"parameters {mu} share element {els} (near x={dup:g})"
        )
    keep = np.ones(th.n + 1, dtype=bool)
    for l in range(mu.size - 1):
        lo = int(np.ceil(_rel(th, mu[l])))
        hi = int(np.floor(_rel(th, mu[l + 1])))
        if hi - lo >= 2:
            keep[lo + 1:hi] = False
    kept = np.nonzero(keep)[0]
    kx = th.nodes[kept]
    active = set()
    for m in mu:
        pos = np.searchsorted(kx, m)
        if pos < kx.size and np.isclose(kx[pos], m, rtol=0, atol=1e-12 * max(1, abs(m))):
            cand = (kept[pos],)
        else:
            cand = (kept[pos - 1], kept[pos])
        for node in cand:
            if 0 < node < th.n:
                active.add(int(node))
    return CoupledBasis(th, tuple(mu), kept, np.array(sorted(active), dtype=int))


def augment_quadrature(th, mu):
    """Insert gap midpoints and compute tiling weights (see module docstring)."""
    mu = _sorted_mu(th, mu)
    inserted = []
    for l in range(mu.size - 1):
        if np.floor(_rel(th, mu[l + 1])) - np.floor(_rel(th, mu[l])) >= 2:
            inserted.append(0.5 * (mu[l] + mu[l + 1]))
    pts = np.sort(np.concatenate([mu, np.array(inserted)]))
    bounds = np.empty(pts.size + 1)
    bounds[0] = th.a
    bounds[-1] = th.b
    for l in range(pts.size - 1):
        p, q = pts[l], pts[l + 1]
        fp, fq = np.floor(_rel(th, p)), np.floor(_rel(th, q))
        if fp == fq:
            bounds[l + 1] = 0.5 * (p + q)
        else:
            edge_r = th.a + np.ceil(_rel(th, p)) * th.h
            edge_l = th.a + fq * th.h
            bounds[l + 1] = 0.5 * (edge_r + edge_l)
    weights = np.diff(bounds)
    if np.any(weights <= 0):
        raise RuntimeError(f"non-positive quadrature weight for mu={mu}")
    return QuadratureRule(pts, weights, qbar=mu.size, qhat=len(inserted))


# ---------------------------------------------------------------------------
# 1D P1 assembly helpers (coefficient values given at the 2 Gauss points of
# every element, shape (n_elements, 2))


def _p1_matrix(part, cvals, kind):
    n = part.n
    h = part.h
    w = h / 2.0
    if kind == "stiff":
        t_tab = np.array([[-1.0 / h, 1.0 / h]] * 2)  # (q, local)
        s_tab = t_tab
    elif kind == "grad":  # int c u' v : trial derivative, test value
        t_tab = np.array([[1.0 - g, g] for g in _GP])
        s_tab = np.array([[-1.0 / h, 1.0 / h]] * 2)
    elif kind == "mass":
        t_tab = np.array([[1.0 - g, g] for g in _GP])
        s_tab = t_tab
    else:
        raise ValueError(kind)
    loc = w * np.einsum("eq,qt,qs->ets", cvals, t_tab, s_tab)
    out = np.zeros((n + 1, n + 1))
    e = np.arange(n)
    for a in range(2):
        for b in range(2):
            np.add.at(out, (e + a, e + b), loc[:, a, b])
    return out


def _p1_vector(part, cvals, against_deriv=False):
    n = part.n
    h = part.h
    w = h / 2.0
    if against_deriv:
        t_tab = np.array([[-1.0 / h, 1.0 / h]] * 2)
    else:
        t_tab = np.array([[1.0 - g, g] for g in _GP])
    loc = w * np.einsum("eq,qt->et", cvals, t_tab)
    out = np.zeros(n + 1)
    e = np.arange(n)
    for a in range(2):
        np.add.at(out, e + a, loc[:, a])
    return out


def _y_gauss(part):
    return (part.nodes[:-1, None] + _GP[None, :] * part.h)  # (ne, 2)


@dataclass
class TransverseSystem:
    matrix: np.ndarray
    rhs: np.ndarray
    cb: CoupledBasis
    rule: QuadratureRule
    yh: Partition1D
    mode: str


def assemble_transverse(pd, lift, cb, rule, yh, recon="weak_lifting",
                        source_shift: Optional[Callable] = None):
    """Assemble the coupled transverse system for one parameter vector.

    recon selects the lifting treatment of the snapshot right-hand side:
    "weak_lifting" keeps the k h_y / k h_x / b.grad(h) terms, "delta_h" folds
    k*Lap(h) into the source and drops them. source_shift, when given, is an
    extra vectorized (x, y) term added to F (used for reconstructed sources).
    Unknown ordering is active-hat major, interior y-node minor.
    """
    if recon not in ("weak_lifting", "delta_h"):
        raise ValueError(f"unsupported transverse recon mode {recon!r}")
    if recon == "delta_h" and lift.laplacian is None:
        raise ValueError("delta_h recon needs lift.laplacian")
    act = cb.active
    n_a = act.size
    if n_a == 0:
        raise ValueError("no active interior hats for the given parameters")
    n_i = yh.n - 1
    yg = _y_gauss(yh)
    pts, wts = rule.points, rule.weights

    Xi = np.array([[cb.value(a, x) for x in pts] for a in act])
    dXi = np.array([[cb.deriv(a, x) for x in pts] for a in act])

    A = np.zeros((n_a * n_i, n_a * n_i))
    rhs = np.zeros(n_a * n_i)
    sl = lambda a: slice(a * n_i, (a + 1) * n_i)
    inner = slice(1, yh.n)

    for l in range(pts.size):
        x = pts[l]
        al = wts[l]
        kv = pd.k(x, yg)
        kv = np.broadcast_to(np.asarray(kv, dtype=float), yg.shape)
        b1v = np.broadcast_to(np.asarray(pd.b1(x, yg), dtype=float), yg.shape)
        b2v = np.broadcast_to(np.asarray(pd.b2(x, yg), dtype=float), yg.shape)
        K_l = _p1_matrix(yh, kv, "stiff")[inner, inner]
        D_l = _p1_matrix(yh, b2v, "grad")[inner, inner]
        Mk_l = _p1_matrix(yh, kv, "mass")[inner, inner]
        Mb_l = _p1_matrix(yh, b1v, "mass")[inner, inner]
        for a_t in range(n_a):       # test hat
            for a_s in range(n_a):   # trial hat
                c_val = al * Xi[a_s, l] * Xi[a_t, l]
                block = c_val * (K_l + D_l)
                block += al * dXi[a_s, l] * dXi[a_t, l] * Mk_l
                block += al * dXi[a_s, l] * Xi[a_t, l] * Mb_l
                A[sl(a_t), sl(a_s)] += block

        Fv = np.broadcast_to(np.asarray(pd.F(x, yg), dtype=float), yg.shape).copy()
        if source_shift is not None:
            Fv += np.broadcast_to(np.asarray(source_shift(x, yg), dtype=float), yg.shape)
        if recon == "delta_h":
            Fv = Fv + kv * np.broadcast_to(
                np.asarray(lift.laplacian(x, yg), dtype=float), yg.shape)
            load_F = _p1_vector(yh, Fv)[inner]
            for a_t in range(n_a):
                rhs[sl(a_t)] += al * Xi[a_t, l] * load_F
        else:
            hx = np.broadcast_to(np.asarray(lift.dx(x, yg), dtype=float), yg.shape)
            hy = np.broadcast_to(np.asarray(lift.dy(x, yg), dtype=float), yg.shape)
            load_F = _p1_vector(yh, Fv)[inner]
            h1 = _p1_vector(yh, kv * hy, against_deriv=True)[inner]
            h2_common = _p1_vector(yh, b1v * hx + b2v * hy)[inner]
            h2_grad = _p1_vector(yh, kv * hx)[inner]
            for a_t in range(n_a):
                rhs[sl(a_t)] += al * Xi[a_t, l] * (load_F - h1 - h2_common)
                rhs[sl(a_t)] -= al * dXi[a_t, l] * h2_grad

    return TransverseSystem(A, rhs, cb, rule, yh, recon)


@dataclass
class TransverseSnapshot:
    """One transverse solution component P_i(y) at parameter mu."""

    mu: tuple
    component: int  # original node id of the active hat
    values: np.ndarray  # nodal over yh, boundary entries zero


def snapshot_solve(system, cb=None):
    """Solve the coupled system; one snapshot per active hat."""
    cb = cb if cb is not None else system.cb
    try:
        sol = np.linalg.solve(system.matrix, system.rhs)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"transverse system singular for mu={cb.mu}") from exc
    if not np.all(np.isfinite(sol)):
        raise RuntimeError(f"transverse solve diverged for mu={cb.mu}")
    n_i = system.yh.n - 1
    out = []
    for a, node in enumerate(cb.active):
        vals = np.zeros(system.yh.n + 1)
        vals[1:-1] = sol[a * n_i:(a + 1) * n_i]
        out.append(TransverseSnapshot(cb.mu, int(node), vals))
    return out


class TransverseSolver:
    """Snapshot factory with caching, keyed by the exact parameter tuple.

    Snapshot solves are independent and could run in parallel; the output
    ordering (sorted parameter tuple, then active component id) is what makes
    runs deterministic, so the cache preserves it.
    """

    def __init__(self, pd, lift, th, yh, recon="weak_lifting", source_shift=None):
        self.pd = pd
        self.lift = lift
        self.th = th
        self.yh = yh
        self.recon = recon
        self.source_shift = source_shift
        self._cache = {}

    def solve(self, mu):
        key = tuple(np.sort(np.asarray(mu, dtype=float)))
        if key not in self._cache:
            cb = build_coupled_basis(self.th, key)
            rule = augment_quadrature(self.th, key)
            system = assemble_transverse(
                self.pd, self.lift, cb, rule, self.yh,
                recon=self.recon, source_shift=self.source_shift,
            )
            self._cache[key] = snapshot_solve(system, cb)
        return self._cache[key]
