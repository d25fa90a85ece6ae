"""A posteriori model-error estimation for reduced tensor solutions.

The Riesz representative R_m of the reduced solution's residual solves
(R_m, v)_V = f(v) - a(p_m, v) on the full tensor grid; the estimator is
Delta_m = ||R_m||_V (the coercivity constant of the V-inner product is 1 by
construction). It bounds the V-norm error from above and, scaled by the
continuity constant, from below; without advection the symmetric identity
Delta_m = ||e_m||_V holds to round-off because the residual equation is then
the error equation.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .problem import reference_operators


@dataclass
class ErrorReport:
    """One row of a model-reduction convergence study."""

    m: int
    err_V_rel: float
    err_L2_rel: float
    delta_m: float
    e_pod: float
    lambda_m: float
    pbar_norm: float

    FIELDS = ("m", "err_V_rel", "err_L2_rel", "delta_m", "e_pod",
              "lambda_m", "pbar_norm")

    def row(self):
        return [str(self.m)] + [
            f"{getattr(self, f):.17g}" for f in self.FIELDS[1:]
        ]


def reports_to_csv(reports, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(ErrorReport.FIELDS)
        for r in reports:
            w.writerow(r.row())


def _get_ops(pd, lift, grid, mode, ops):
    if ops is None:
        ops = reference_operators(pd, lift, grid, mode)
    return ops


def riesz_residual(pd, lift, grid, rsol, mode=None, ops=None):
    """Riesz representative of the reduced solution's residual (nodal field,
    boundary zero). The right-hand side follows the solution's lifting mode
    so weak, folded-Laplacian and reconstructed sources are compared
    consistently."""
    mode = mode or rsol.mode
    ops = _get_ops(pd, lift, grid, mode, ops)
    r = ops.rhs_int - ops.A_int @ rsol.interior_vector()
    R = np.zeros(grid.node_count)
    R[grid.interior_ids()] = ops.gram_solve(r)
    return R.reshape(grid.shape)


def delta_m(R, pd, grid, lift=None, mode="weak_lifting", ops=None):
    """V-norm of a Riesz representative field."""
    from .problem import LiftingFunction

    ops = _get_ops(pd, lift or LiftingFunction.zero(), grid, mode, ops)
    r_int = np.asarray(R, dtype=float).ravel()[grid.interior_ids()]
    return ops.v_norm(r_int)


def error_report(reference, rsol, space, pd, lift=None, ops=None):
    """Compare a reduced solution against the reference on the same grid.

    Relative errors are taken against the reference's norms; delta_m is the
    residual-based estimator, e_pod the POD truncation tail at this m,
    lambda_m the m-th POD energy and pbar_norm the L2(Omega_1D) norm of the
    m-th coefficient function.
    """
    grid = reference.grid
    if grid.shape != rsol.grid.shape:
        raise ValueError("reference and reduced solutions live on different grids")
    if reference.mode != rsol.mode:
        raise ValueError(
            f"mode mismatch: reference {reference.mode!r} vs reduced {rsol.mode!r}")
    from .problem import LiftingFunction

    ops = _get_ops(pd, lift or LiftingFunction.zero(), grid, reference.mode, ops)
    p_ref = reference.interior_vector()
    p_red = rsol.interior_vector()
    e = p_ref - p_red
    ref_V = ops.v_norm(p_ref)
    ref_L2 = ops.l2_norm(p_ref)
    err_V = ops.v_norm(e) / ref_V if ref_V > 0 else ops.v_norm(e)
    err_L2 = ops.l2_norm(e) / ref_L2 if ref_L2 > 0 else ops.l2_norm(e)
    r = ops.rhs_int - ops.A_int @ p_red
    R = ops.gram_solve(r)
    delta = float(np.sqrt(max(r @ R, 0.0)))
    m = rsol.m
    lam = float(space.eigenvalues[m - 1]) if m <= space.eigenvalues.size else 0.0
    pbar = rsol.pbar(m - 1)
    tx = grid.tx
    # L2(Omega_1D) norm of the P1 coefficient function (Simpson on elements)
    vals = pbar
    mid = 0.5 * (vals[:-1] + vals[1:])
    pbar_norm = float(np.sqrt(tx.h * np.sum(
        (vals[:-1] ** 2 + 4 * mid ** 2 + vals[1:] ** 2) / 6.0)))
    return ErrorReport(
        m=m,
        err_V_rel=float(err_V),
        err_L2_rel=float(err_L2),
        delta_m=delta,
        e_pod=space.tail(m),
        lambda_m=lam,
        pbar_norm=pbar_norm,
    )
