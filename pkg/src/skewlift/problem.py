"""Reference advection-diffusion problem on a tensor-product Q1 grid.

Weak form on V = H^1_0(Omega):

    a(p, v) = int k grad(p).grad(v) + int (b.grad(p)) v = f(v) - a(h, v)

where h is a Dirichlet lifting carrying the boundary data (and, when it comes
from an interface band, the sharp transition). The full field is p~ = p + h.
Four right-hand-side treatments of the lifting are supported:

* ``weak_lifting`` -- subtract a(h, .) assembled from the partial derivatives
  of h (no second derivatives needed).
* ``delta_h``      -- fold the strong-form source int k*Lap(h) v into F and
  drop a(h, .); requires ``lift.laplacian``; equivalent to weak_lifting up to
  O(h^2) for smooth h with constant k and b = 0.
* ``riesz_recon``  -- replace the lifting functional by its L2 Riesz
  representative R, (R, v)_L2 = a(h, v), and subtract int R v; no second
  derivatives of h required.
* ``plain_gD``     -- ignore the interface geometry: lift only the boundary
  data through an affine blend of the two vertical-side traces.

The system matrix is identical in all modes; only the right-hand side differs.
The V-inner product is the symmetric part of a: (u, v)_V = int k grad(u).grad(v)
- 1/2 int div(b) u v, so the coercivity constant is 1 by construction (the
skew advection part drops out of a(v, v)).
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .mesh import TensorGrid

MODES = ("weak_lifting", "delta_h", "riesz_recon", "plain_gD")

_GP = np.array([0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0)])


@dataclass(frozen=True)
class ProblemData:
    """Coefficients and data of the advection-diffusion problem.

    All callbacks must be numpy-vectorized: they receive coordinate arrays of
    a common shape and return an array broadcastable to it (scalar returns are
    broadcast automatically).

    Parameters
    ----------
    k, b1, b2 : callable(x, y)
        Diffusivity (must be positive on the domain) and advective field.
    F : callable(x, y)
        Volume source of the full problem.
    dirichlet : callable(x, y)
        Boundary data g_D; only its restriction to the boundary is used.
    omega_x, omega_y : (float, float)
        Domain extents.
    div_b : callable(x, y), optional
        Divergence of b, used by the -1/2 div(b) u v term of the V-inner
        product. None means divergence-free (all built-in cases).
    f_smooth : bool
        Declares whether F is smooth; piecewise-constant sources are
        integrated with the same 2x2 Gauss rule (accepted low-order error).
    """

    k: Callable
    b1: Callable
    b2: Callable
    F: Callable
    dirichlet: Callable
    omega_x: tuple
    omega_y: tuple
    div_b: Optional[Callable] = None
    f_smooth: bool = True


@dataclass(frozen=True)
class LiftingFunction:
    """Dirichlet lifting h with first derivatives and optional Laplacian."""

    value: Callable
    dx: Callable
    dy: Callable
    laplacian: Optional[Callable] = None

    @classmethod
    def zero(cls):
        z = lambda x, y: np.zeros(np.broadcast(x, y).shape)
        return cls(value=z, dx=z, dy=z, laplacian=z)


@dataclass
class FullSolution:
    """Homogenized nodal solution p on the full grid (boundary entries 0)."""

    grid: TensorGrid
    coeffs: np.ndarray  # (nx+1, ny+1)
    mode: str

    def total_field(self, lift):
        """Nodal values of p~ = p + h."""
        X, Y = self.grid.node_coords()
        return self.coeffs + lift.value(X, Y)

    def interior_vector(self):
        return self.coeffs.ravel()[self.grid.interior_ids()]


class GridField:
    """Bilinear interpolant of nodal values on a TensorGrid (vectorized)."""

    def __init__(self, grid, values):
        values = np.asarray(values, dtype=float)
        if values.shape != grid.shape:
            raise ValueError(f"nodal array shape {values.shape} != {grid.shape}")
        self.grid = grid
        self.values = values

    def __call__(self, x, y):
        g = self.grid
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        cx = g.tx.element_of(x)
        cy = g.ty.element_of(y)
        sx = (x - g.tx.nodes[cx]) / g.tx.h
        sy = (y - g.ty.nodes[cy]) / g.ty.h
        v = self.values
        return (
            v[cx, cy] * (1 - sx) * (1 - sy)
            + v[cx + 1, cy] * sx * (1 - sy)
            + v[cx + 1, cy + 1] * sx * sy
            + v[cx, cy + 1] * (1 - sx) * sy
        )


def _shape_tables():
    """Q1 shape values/derivatives at the 4 tensor Gauss points of the unit
    square. Node order (0,0),(1,0),(1,1),(0,1); qpoint order u-major."""
    N = np.empty((4, 4))
    dNu = np.empty((4, 4))
    dNv = np.empty((4, 4))
    q = 0
    for u in _GP:
        for v in _GP:
            N[q] = [(1 - u) * (1 - v), u * (1 - v), u * v, (1 - u) * v]
            dNu[q] = [-(1 - v), (1 - v), v, -v]
            dNv[q] = [-(1 - u), -u, u, (1 - u)]
            q += 1
    return N, dNu, dNv


_N_TAB, _DNU_TAB, _DNV_TAB = _shape_tables()


class _Quadrature:
    """All 2x2 Gauss points of a grid, plus cell->global node indexing."""

    def __init__(self, grid):
        tx, ty = grid.tx, grid.ty
        hx, hy = tx.h, ty.h
        xq1 = tx.nodes[:-1, None] + _GP[None, :] * hx  # (ncx, 2)
        yq1 = ty.nodes[:-1, None] + _GP[None, :] * hy  # (ncy, 2)
        # qpoint order matches _shape_tables (u-major): q = 2*iu + iv
        self.X = np.repeat(xq1[:, None, :], ty.n, axis=1)[:, :, [0, 0, 1, 1]]
        self.Y = np.repeat(yq1[None, :, :], tx.n, axis=0)[:, :, [0, 1, 0, 1]]
        self.w = hx * hy / 4.0
        self.N = _N_TAB
        self.dNx = _DNU_TAB / hx
        self.dNy = _DNV_TAB / hy
        cx = np.arange(tx.n)
        cy = np.arange(ty.n)
        n_y = ty.n + 1
        base = cx[:, None] * n_y + cy[None, :]
        self.cell_nodes = np.stack(
            [base, base + n_y, base + n_y + 1, base + 1], axis=-1
        ).reshape(-1, 4)
        self.grid = grid

    def evaluate(self, f):
        vals = np.asarray(f(self.X, self.Y), dtype=float)
        return np.broadcast_to(vals, self.X.shape).reshape(-1, 4)


def _assemble_matrix(quad, diff=None, b1=None, b2=None, react=None):
    """Assemble int diff grad(u).grad(v) + (b1 u_x + b2 u_y) v + react u v
    over all nodes of the grid (trial index s, test index t)."""
    ncells = quad.cell_nodes.shape[0]
    loc = np.zeros((ncells, 4, 4))
    w = quad.w
    if diff is not None:
        c = quad.evaluate(diff) * w
        loc += np.einsum("cq,qt,qs->cts", c, quad.dNx, quad.dNx)
        loc += np.einsum("cq,qt,qs->cts", c, quad.dNy, quad.dNy)
    if b1 is not None:
        c = quad.evaluate(b1) * w
        loc += np.einsum("cq,qt,qs->cts", c, quad.N, quad.dNx)
    if b2 is not None:
        c = quad.evaluate(b2) * w
        loc += np.einsum("cq,qt,qs->cts", c, quad.N, quad.dNy)
    if react is not None:
        c = quad.evaluate(react) * w
        loc += np.einsum("cq,qt,qs->cts", c, quad.N, quad.N)
    rows = np.repeat(quad.cell_nodes, 4, axis=1).ravel()
    cols = np.tile(quad.cell_nodes, (1, 4)).ravel()
    n = quad.grid.node_count
    return sp.coo_matrix((loc.ravel(), (rows, cols)), shape=(n, n)).tocsr()


def _assemble_load(quad, fvals):
    """Load vector int f v from qpoint values fvals (ncells, 4)."""
    loc = quad.w * fvals @ quad.N  # (ncells, 4): sum_q w f[q] N[q, t]
    out = np.zeros(quad.grid.node_count)
    np.add.at(out, quad.cell_nodes.ravel(), loc.ravel())
    return out


def _lifting_vector(quad, pd, lift):
    """Vector of a(h, v_t) for every nodal hat v_t."""
    kv = quad.evaluate(pd.k)
    hx = quad.evaluate(lift.dx)
    hy = quad.evaluate(lift.dy)
    b1v = quad.evaluate(pd.b1)
    b2v = quad.evaluate(pd.b2)
    grad_part = quad.w * (
        (kv * hx) @ quad.dNx + (kv * hy) @ quad.dNy
    )  # (ncells, 4): sum_q w (k h_x dN_t/dx + k h_y dN_t/dy)
    adv_part = quad.w * ((b1v * hx + b2v * hy) @ quad.N)
    out = np.zeros(quad.grid.node_count)
    np.add.at(out, quad.cell_nodes.ravel(), (grad_part + adv_part).ravel())
    return out


class TensorOperators:
    """Assembled operators of one (problem, lifting, grid, mode) combination.

    Holds the full-grid bilinear-form matrix A, the V-Gram matrix G
    (symmetric part of A), the mass matrix M and the mode-consistent
    right-hand side; interior restrictions and LU factors are cached lazily
    so estimator sweeps stay cheap.
    """

    def __init__(self, pd, lift, grid, mode="weak_lifting"):
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
        gx, gy = grid.tx, grid.ty
        if not (
            np.isclose(gx.a, pd.omega_x[0]) and np.isclose(gx.b, pd.omega_x[1])
            and np.isclose(gy.a, pd.omega_y[0]) and np.isclose(gy.b, pd.omega_y[1])
        ):
            raise ValueError("grid extents do not match the problem domain")
        self.pd = pd
        self.grid = grid
        self.mode = mode
        quad = _Quadrature(grid)
        kv = quad.evaluate(pd.k)
        if kv.min() <= 0.0:
            raise ValueError(f"diffusivity not positive (min {kv.min():g})")
        self.A = _assemble_matrix(quad, diff=pd.k, b1=pd.b1, b2=pd.b2)
        react = None
        if pd.div_b is not None:
            react = lambda x, y: -0.5 * pd.div_b(x, y)
        self.G = _assemble_matrix(quad, diff=pd.k, react=react)
        self.M = _assemble_matrix(quad, react=lambda x, y: 1.0)
        self.interior = grid.interior_ids()
        self.riesz_field = None

        if mode == "plain_gD":
            lift = affine_boundary_blend(lift, pd.omega_x)
        self.lift = lift

        load_f = _assemble_load(quad, quad.evaluate(pd.F))
        if mode == "delta_h":
            if lift.laplacian is None:
                raise ValueError("delta_h mode needs lift.laplacian")
            extra = kv * quad.evaluate(lift.laplacian)
            self.rhs_full = load_f + _assemble_load(quad, extra)
        elif mode == "riesz_recon":
            lv = _lifting_vector(quad, pd, lift)
            rec = np.zeros(grid.node_count)
            rec[self.interior] = spla.spsolve(
                self.M[np.ix_(self.interior, self.interior)].tocsc(),
                lv[self.interior],
            )
            self.riesz_field = rec.reshape(grid.shape)
            self.rhs_full = load_f - self.M @ rec
        else:  # weak_lifting (plain_gD reduces to it with the blended lift)
            self.rhs_full = load_f - _lifting_vector(quad, pd, lift)

    # -- lazy interior restrictions / factorizations ------------------------

    def _restrict(self, name):
        key = "_" + name + "_int"
        if not hasattr(self, key):
            mat = getattr(self, name)[np.ix_(self.interior, self.interior)]
            setattr(self, key, mat.tocsr())
        return getattr(self, key)

    @property
    def A_int(self):
        return self._restrict("A")

    @property
    def G_int(self):
        return self._restrict("G")

    @property
    def M_int(self):
        return self._restrict("M")

    @property
    def rhs_int(self):
        return self.rhs_full[self.interior]

    def gram_solve(self, r):
        if not hasattr(self, "_lu_G"):
            self._lu_G = spla.splu(self.G_int.tocsc())
        return self._lu_G.solve(r)

    def v_norm(self, u_int):
        return float(np.sqrt(max(u_int @ (self.G_int @ u_int), 0.0)))

    def l2_norm(self, u_int):
        return float(np.sqrt(max(u_int @ (self.M_int @ u_int), 0.0)))


def reference_operators(pd, lift, grid, mode="weak_lifting"):
    return TensorOperators(pd, lift, grid, mode)


@dataclass
class ReferenceSystem:
    """Interior Q1 linear system of the homogenized reference problem."""

    matrix: sp.csr_matrix
    rhs: np.ndarray
    grid: TensorGrid
    mode: str
    ops: TensorOperators


def assemble_reference_system(pd, lift, grid, mode="weak_lifting"):
    """Assemble the interior Q1 system for one lifting mode.

    Dirichlet rows/columns are eliminated (the homogenized solution vanishes
    on the boundary), so the unknowns are the (nx-1)(ny-1) interior nodes in
    x-major ordering.
    """
    ops = reference_operators(pd, lift, grid, mode)
    return ReferenceSystem(ops.A_int, ops.rhs_int, grid, mode, ops)


def solve_reference(system):
    """Direct sparse solve of the reference system -> FullSolution."""
    x = spla.spsolve(system.matrix.tocsc(), system.rhs)
    if not np.all(np.isfinite(x)):
        raise RuntimeError("reference solve produced non-finite values (singular system?)")
    res = np.linalg.norm(system.matrix @ x - system.rhs)
    scale = max(np.linalg.norm(system.rhs), 1.0)
    if res > 1e-10 * scale:
        raise RuntimeError(f"reference solve residual {res:.3e} exceeds tolerance")
    grid = system.grid
    coeffs = np.zeros(grid.node_count)
    coeffs[grid.interior_ids()] = x
    return FullSolution(grid, coeffs.reshape(grid.shape), system.mode)


def v_inner(grid, pd, u, v):
    """V-inner product (symmetric part of a) of two nodal fields.

    u, v are nodal arrays over all grid nodes (any shape that flattens to the
    node count). Symmetric positive definite on interior nodes; the
    -1/2 div(b) term vanishes for the constant-b experiments.
    """
    react = None
    if pd.div_b is not None:
        react = lambda x, y: -0.5 * pd.div_b(x, y)
    quad = _Quadrature(grid)
    G = _assemble_matrix(quad, diff=pd.k, react=react)
    uu = np.asarray(u, dtype=float).ravel()
    vv = np.asarray(v, dtype=float).ravel()
    if uu.size != grid.node_count or vv.size != grid.node_count:
        raise ValueError("nodal array size does not match the grid")
    return float(uu @ (G @ vv))


def affine_boundary_blend(lift, omega_x):
    """Lifting that carries only the boundary data: the affine-in-x blend of
    the two vertical-side traces, g(x, y) = (1-s) h(x0, y) + s h(x1, y)."""
    x0, x1 = omega_x
    L = x1 - x0

    def value(x, y):
        s = (np.asarray(x) - x0) / L
        return (1 - s) * lift.value(x0, y) + s * lift.value(x1, y)

    def dx(x, y):
        out = (lift.value(x1, y) - lift.value(x0, y)) / L
        return np.broadcast_to(out, np.broadcast(x, y).shape)

    def dy(x, y):
        s = (np.asarray(x) - x0) / L
        return (1 - s) * lift.dy(x0, y) + s * lift.dy(x1, y)

    return LiftingFunction(value=value, dx=dx, dy=dy, laplacian=None)
