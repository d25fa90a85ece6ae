"""Reduced tensor-product systems p_m(x,y) = sum_k pbar_k(x) phi_k(y).

The reduced block system is the Galerkin projection of the assembled
reference operator onto span{xi_i(x) phi_k(y)}: with P = kron(I, Phi) holding
the modes' interior nodal values, the matrix is P^T A P and the right-hand
side P^T rhs. Because fine and reduced quadratures then coincide by
construction, discrete Galerkin orthogonality holds exactly: modes spanning
the full transverse space reproduce the reference solution, and with b = 0
the error estimator equals the V-norm error to round-off. Assembled once at
the largest m, smaller systems are leading sub-blocks (mode index fastest),
so m-sweeps cost one projection plus cheap solves.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .mesh import TensorGrid
from .problem import reference_operators


def prolongation(space, grid):
    """Sparse map from reduced dofs (x-node major, mode minor) to interior
    tensor-grid dofs."""
    phi_int = space.modes[1:-1, :]
    if phi_int.shape[0] != grid.ny - 1:
        raise ValueError("mode resolution does not match the grid")
    return sp.kron(sp.identity(grid.nx - 1, format="csr"),
                   sp.csr_matrix(phi_int), format="csr")


@dataclass
class ReducedSystem:
    matrix: sp.csr_matrix  # (m*(NH-1))^2, x-node major / mode minor
    rhs: np.ndarray
    space: object
    grid: TensorGrid
    mode: str
    ops: object


def assemble_reduced(pd, lift, space, th, mode="weak_lifting", ops=None):
    """Assemble the reduced block system on dominant partition th.

    ops may carry pre-assembled reference operators on the (th x space.part)
    grid to avoid re-assembly during sweeps.
    """
    grid = TensorGrid(th, space.part)
    if ops is None:
        ops = reference_operators(pd, lift, grid, mode)
    P = prolongation(space, grid)
    A_r = (P.T @ (ops.A_int @ P)).tocsr()
    rhs_r = P.T @ ops.rhs_int
    return ReducedSystem(A_r, rhs_r, space, grid, mode, ops)


@dataclass
class ReducedSolution:
    """Coefficient functions pbar_k on the dominant partition."""

    space: object
    coeffs: np.ndarray  # (m, NH-1), interior x-nodes
    grid: TensorGrid
    mode: str

    @property
    def m(self):
        return self.space.m

    def interior_vector(self):
        """Nodal values of p_m on the interior tensor-grid dofs."""
        phi_int = self.space.modes[1:-1, :]
        # (NH-1, m) @ (m, ny-1) -> x-major, y-minor flattening
        return (self.coeffs.T @ phi_int.T).ravel()

    def nodal_array(self):
        full = np.zeros(self.grid.shape)
        full[1:-1, 1:-1] = self.interior_vector().reshape(
            self.grid.nx - 1, self.grid.ny - 1)
        return full

    def total_field(self, lift):
        X, Y = self.grid.node_coords()
        return self.nodal_array() + lift.value(X, Y)

    def pbar(self, k):
        """k-th coefficient function (0-based), nodal on the x-partition."""
        out = np.zeros(self.grid.nx + 1)
        out[1:-1] = self.coeffs[k]
        return out


def solve_reduced(system):
    m = system.space.m
    if m == 0:
        raise ValueError("cannot solve with an empty reduction space")
    sol = spla.spsolve(system.matrix.tocsc(), system.rhs)
    if not np.all(np.isfinite(sol)):
        raise RuntimeError(f"reduced system singular at m={m}")
    res = np.linalg.norm(system.matrix @ sol - system.rhs)
    if res > 1e-9 * max(np.linalg.norm(system.rhs), 1.0):
        raise RuntimeError(f"reduced solve residual {res:.3e} too large")
    coeffs = sol.reshape(system.grid.nx - 1, m).T
    return ReducedSolution(system.space, coeffs, system.grid, system.mode)


def riesz_lifting_reconstruction(pd, lift, grid, ops=None):
    """L2 Riesz representative of the lifting functional.

    Solves (R, v)_L2 = a(h, v) for all interior hats; for smooth h with k=1
    and b=0 this approximates -Lap(h). Returns the nodal field (boundary
    zero) of shape grid.shape.
    """
    full_ops = reference_operators(pd, lift, grid, "riesz_recon")
    return full_ops.riesz_field


def local_reconstruction(pd, lift, mu, R, grid):
    """Oversampled lifting reconstruction on the strip (mu-R, mu+R) x omega_hat.

    The L2 projection of the lifting functional is solved on the cell columns
    intersecting the strip only, then restricted to the fiber x = mu. Cheaper
    than the global reconstruction and intended as an optional source term of
    the parametrized transverse problem (off by default everywhere).
    Returns nodal values over grid.ty.
    """
    tx = grid.tx
    if R < tx.h:
        raise ValueError(f"strip half-width {R} below one element width {tx.h}")
    if not (tx.a < mu < tx.b):
        raise ValueError(f"fiber x={mu} outside the domain")
    c_lo = int(np.clip(np.floor((mu - R - tx.a) / tx.h), 0, tx.n - 1))
    c_hi = int(np.clip(np.ceil((mu + R - tx.a) / tx.h), 1, tx.n))
    # strip operators: assemble on the sub-grid spanned by columns c_lo..c_hi
    from .mesh import Partition1D

    sub_tx = Partition1D(tx.nodes[c_lo], tx.nodes[c_hi], c_hi - c_lo)
    sub_grid = TensorGrid(sub_tx, grid.ty)
    from .problem import _Quadrature, _assemble_matrix, _lifting_vector

    quad = _Quadrature(sub_grid)
    M = _assemble_matrix(quad, react=lambda x, y: 1.0)
    lv = _lifting_vector(quad, pd, lift)
    # outer Dirichlet nodes stay zero (as in the global reconstruction); the
    # artificial strip edges are free, so a full-width strip reproduces the
    # global operator exactly
    free = np.ones(sub_grid.shape, dtype=bool)
    free[:, 0] = free[:, -1] = False
    if c_lo == 0:
        free[0, :] = False
    if c_hi == tx.n:
        free[-1, :] = False
    free = free.ravel()
    idx = np.nonzero(free)[0]
    rec = np.zeros(sub_grid.node_count)
    rec[idx] = spla.spsolve(M[np.ix_(idx, idx)].tocsc(), lv[idx])
    rec = rec.reshape(sub_grid.shape)
    # evaluate on the fiber x = mu (linear interpolation between columns)
    s = (mu - sub_tx.a) / sub_tx.h
    c = int(np.clip(np.floor(s), 0, sub_tx.n - 1))
    t = s - c
    return (1 - t) * rec[c] + t * rec[c + 1]
