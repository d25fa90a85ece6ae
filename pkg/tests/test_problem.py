"""Reference Q1 assembly: quadrature, modes, norms and convergence order."""

import numpy as np
import pytest

from skewlift.cases import case1, get_case
from skewlift.mesh import build_grid
from skewlift.problem import (
    GridField,
    LiftingFunction,
    MODES,
    ProblemData,
    assemble_reference_system,
    reference_operators,
    solve_reference,
    v_inner,
)

V_ENERGY_EXACT = 5.0 * np.pi**2 / 8.0  # int |grad(sin(pi x/2) sin(pi y))|^2


def _laplace_data(F=None):
    zero = lambda x, y: np.zeros(np.broadcast(x, y).shape)
    return ProblemData(
        k=lambda x, y: np.ones(np.broadcast(x, y).shape),
        b1=zero, b2=zero,
        F=F if F is not None else zero,
        dirichlet=zero,
        omega_x=(0.0, 2.0), omega_y=(0.0, 1.0),
    )


def _sine(x, y):
    return np.sin(0.5 * np.pi * np.asarray(x)) * np.sin(np.pi * np.asarray(y))


def test_v_inner_energy_of_sine_interpolant():
    pd = _laplace_data()
    vals = []
    for nx, ny in ((32, 16), (64, 32)):
        grid = build_grid(pd.omega_x, pd.omega_y, nx, ny)
        X, Y = grid.node_coords()
        u = _sine(X, Y)
        vals.append(v_inner(grid, pd, u, u))
    err = [abs(v - V_ENERGY_EXACT) for v in vals]
    assert vals[1] == pytest.approx(V_ENERGY_EXACT, rel=1e-2)
    # one uniform refinement cuts the energy error by ~4 (second order)
    assert 3.0 < err[0] / err[1] < 5.0


def test_v_inner_rejects_wrong_size():
    pd = _laplace_data()
    grid = build_grid(pd.omega_x, pd.omega_y, 4, 4)
    with pytest.raises(ValueError):
        v_inner(grid, pd, np.ones(7), np.ones(grid.node_count))


def test_reference_second_order_in_L2():
    # manufactured smooth solution with homogeneous boundary data
    F = lambda x, y: (1.25 * np.pi**2) * _sine(x, y)
    pd = _laplace_data(F)
    lift = LiftingFunction.zero()
    errs = []
    for nx, ny in ((20, 10), (40, 20)):
        grid = build_grid(pd.omega_x, pd.omega_y, nx, ny)
        sol = solve_reference(assemble_reference_system(pd, lift, grid))
        ops = reference_operators(pd, lift, grid)
        X, Y = grid.node_coords()
        diff = (sol.coeffs - _sine(X, Y))[1:-1, 1:-1].ravel()
        errs.append(ops.l2_norm(diff))
    assert 3.6 < errs[0] / errs[1] < 4.4


def test_system_matrix_is_mode_independent():
    cs = case1()
    grid = build_grid(cs.problem.omega_x, cs.problem.omega_y, 24, 12)
    mats = [reference_operators(cs.problem, cs.lift, grid, m).A_int
            for m in MODES]
    ref = mats[0].toarray()
    for other in mats[1:]:
        np.testing.assert_array_equal(other.toarray(), ref)


def test_riesz_rhs_equals_weak_rhs_on_matching_grid():
    # (R, v) = a(h, v) holds exactly on V^h, so the two references coincide
    cs = case1()
    grid = build_grid(cs.problem.omega_x, cs.problem.omega_y, 48, 24)
    weak = solve_reference(
        assemble_reference_system(cs.problem, cs.lift, grid, "weak_lifting"))
    riesz = solve_reference(
        assemble_reference_system(cs.problem, cs.lift, grid, "riesz_recon"))
    scale = np.abs(weak.coeffs).max()
    assert np.abs(weak.coeffs - riesz.coeffs).max() <= 1e-10 * scale


def test_weak_and_delta_h_references_converge_together():
    cs = case1()
    grid = build_grid(cs.problem.omega_x, cs.problem.omega_y, 120, 60)
    ops = reference_operators(cs.problem, cs.lift, grid, "weak_lifting")
    weak = solve_reference(
        assemble_reference_system(cs.problem, cs.lift, grid, "weak_lifting"))
    dh = solve_reference(
        assemble_reference_system(cs.problem, cs.lift, grid, "delta_h"))
    X, Y = grid.node_coords()
    exact = cs.exact_homogenized(X, Y)
    nrm = ops.l2_norm(exact[1:-1, 1:-1].ravel())
    for sol in (weak, dh):
        err = ops.l2_norm((sol.coeffs - exact)[1:-1, 1:-1].ravel())
        assert err / nrm < 1e-2
    gap = ops.l2_norm((weak.coeffs - dh.coeffs)[1:-1, 1:-1].ravel())
    assert gap / nrm < 1e-2


def test_advection_is_discretely_skew_symmetric():
    # for constant b and zero-boundary fields, v' A v == v' G v exactly
    cs = case1(b=(100.0, 7.0))
    grid = build_grid(cs.problem.omega_x, cs.problem.omega_y, 20, 12)
    ops = reference_operators(cs.problem, cs.lift, grid)
    rng = np.random.default_rng(2)
    for _ in range(5):
        v = rng.standard_normal(ops.A_int.shape[0])
        qa = float(v @ (ops.A_int @ v))
        qg = float(v @ (ops.G_int @ v))
        assert qa == pytest.approx(qg, rel=1e-12)
        assert qg > 0.0


def test_gram_matrix_is_symmetric():
    cs = case1(b=(10.0, 0.0))
    grid = build_grid(cs.problem.omega_x, cs.problem.omega_y, 16, 10)
    G = reference_operators(cs.problem, cs.lift, grid).G_int
    asym = np.abs((G - G.T).toarray()).max()
    assert asym <= 1e-13 * np.abs(G.toarray()).max()


def test_plain_gd_blend_carries_boundary_traces():
    cs = case1()
    ops = reference_operators(
        cs.problem, cs.lift,
        build_grid(cs.problem.omega_x, cs.problem.omega_y, 16, 10),
        "plain_gD")
    blend = ops.lift
    y = np.linspace(0.0, 1.0, 21)
    np.testing.assert_allclose(blend.value(0.0, y), cs.lift.value(0.0, y),
                               atol=1e-14)
    np.testing.assert_allclose(blend.value(2.0, y), cs.lift.value(2.0, y),
                               atol=1e-14)
    mid = 0.5 * (cs.lift.value(0.0, y) + cs.lift.value(2.0, y))
    np.testing.assert_allclose(blend.value(1.0, y), mid, atol=1e-14)
    # an x-independent lifting is reproduced identically
    flat = LiftingFunction(
        value=lambda x, y: np.sin(np.pi * np.asarray(y)) * np.ones(np.broadcast(x, y).shape),
        dx=lambda x, y: np.zeros(np.broadcast(x, y).shape),
        dy=lambda x, y: np.pi * np.cos(np.pi * np.asarray(y)) * np.ones(np.broadcast(x, y).shape),
    )
    from skewlift.problem import affine_boundary_blend
    blend2 = affine_boundary_blend(flat, (0.0, 2.0))
    x = np.linspace(0.0, 2.0, 9)[:, None]
    np.testing.assert_allclose(blend2.value(x, y[None, :]),
                               flat.value(x, y[None, :]), atol=1e-14)


def test_nonpositive_diffusivity_is_rejected():
    pd = _laplace_data()
    bad = ProblemData(
        k=lambda x, y: np.asarray(x) - 1.0,  # negative for x < 1
        b1=pd.b1, b2=pd.b2, F=pd.F, dirichlet=pd.dirichlet,
        omega_x=pd.omega_x, omega_y=pd.omega_y,
    )
    grid = build_grid(pd.omega_x, pd.omega_y, 8, 4)
    with pytest.raises(ValueError):
        reference_operators(bad, LiftingFunction.zero(), grid)


def test_grid_domain_mismatch_is_rejected():
    cs = case1()
    grid = build_grid((0.0, 1.0), (0.0, 1.0), 8, 4)  # wrong x-extent
    with pytest.raises(ValueError):
        reference_operators(cs.problem, cs.lift, grid)


def test_delta_h_requires_laplacian():
    cs = case1()
    nolap = LiftingFunction(value=cs.lift.value, dx=cs.lift.dx, dy=cs.lift.dy)
    grid = build_grid(cs.problem.omega_x, cs.problem.omega_y, 8, 4)
    with pytest.raises(ValueError):
        reference_operators(cs.problem, nolap, grid, "delta_h")


def test_unknown_mode_is_rejected():
    cs = case1()
    grid = build_grid(cs.problem.omega_x, cs.problem.omega_y, 8, 4)
    with pytest.raises(ValueError):
        reference_operators(cs.problem, cs.lift, grid, "strong_lifting")


def test_grid_field_interpolates_bilinearly():
    grid = build_grid((0.0, 2.0), (0.0, 1.0), 4, 4)
    X, Y = grid.node_coords()
    vals = 2.0 * X + 3.0 * Y  # bilinear data is reproduced exactly
    f = GridField(grid, vals)
    rng = np.random.default_rng(0)
    x = rng.uniform(0.0, 2.0, 30)
    y = rng.uniform(0.0, 1.0, 30)
    np.testing.assert_allclose(f(x, y), 2.0 * x + 3.0 * y, atol=1e-13)
    with pytest.raises(ValueError):
        GridField(grid, np.ones((3, 3)))


def test_total_field_adds_lifting_back():
    cs = get_case(1)
    grid = build_grid(cs.problem.omega_x, cs.problem.omega_y, 60, 30)
    sol = solve_reference(
        assemble_reference_system(cs.problem, cs.lift, grid))
    X, Y = grid.node_coords()
    total = sol.total_field(cs.lift)
    exact = cs.exact_total(X, Y)
    # interior nodal accuracy of the full field
    assert np.abs(total - exact)[1:-1, 1:-1].max() < 2e-2
