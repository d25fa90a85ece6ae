"""POD compression and the adaptive training-set loop."""

import math

import numpy as np
import pytest

from skewlift.mesh import build_uniform_partition
from skewlift.problem import LiftingFunction, ProblemData
from skewlift.training import (
    ParamCell,
    _draw_samples,
    _orthonormalize,
    adaptive_train_extension,
    initial_cells,
    mark,
    pod,
    refine,
    transverse_mass,
)


def _exact_mass(part):
    """Closed-form P1 mass matrix (independent of the assembly helpers)."""
    n = part.n
    h = part.h
    M = np.zeros((n + 1, n + 1))
    for e in range(n):
        M[e, e] += h / 3.0
        M[e + 1, e + 1] += h / 3.0
        M[e, e + 1] += h / 6.0
        M[e + 1, e] += h / 6.0
    return M


def _brute_force_pod(S, M):
    """Gram eigendecomposition with the same energy/sign conventions."""
    K = S.T @ (M @ S)
    K = 0.5 * (K + K.T)
    lam, V = np.linalg.eigh(K)
    lam = np.clip(lam[::-1], 0.0, None)
    V = V[:, ::-1]
    modes = S @ (V / np.sqrt(np.where(lam > 0, lam, 1.0)))
    flip = modes[np.abs(modes).argmax(axis=0), np.arange(modes.shape[1])] < 0
    modes[:, flip] *= -1.0
    return lam, modes


def _random_snapshots(rng, part, n_s):
    x = part.nodes
    S = np.zeros((part.n + 1, n_s))
    for j in range(n_s):
        freq = rng.integers(1, 6)
        S[:, j] = (rng.normal() * np.sin(freq * np.pi * x)
                   + rng.normal(scale=0.3, size=x.size))
    return S


# ---------------------------------------------------------------------------
# POD against the brute-force Gram eigendecomposition


def test_pod_matches_brute_force_gram():
    rng = np.random.default_rng(7)
    for n_h, n_s in ((17, 6), (50, 20), (31, 12)):
        part = build_uniform_partition(0.0, 1.0, n_h)
        S = _random_snapshots(rng, part, n_s)
        M = _exact_mass(part)
        lam_bf, modes_bf = _brute_force_pod(S, M)
        space = pod([S[:, j] for j in range(n_s)], part)
        m = space.m
        assert np.allclose(space.eigenvalues, lam_bf[:m], rtol=1e-8, atol=1e-12)
        scale = np.max(np.abs(modes_bf[:, :m]))
        assert np.max(np.abs(space.modes - modes_bf[:, :m])) <= 1e-8 * scale


def test_pod_energy_identity_and_tail():
    rng = np.random.default_rng(11)
    part = build_uniform_partition(0.0, 1.0, 24)
    n_s = 9
    S = _random_snapshots(rng, part, n_s)
    lam_bf, _ = _brute_force_pod(S, _exact_mass(part))
    total = lam_bf.sum()
    space = pod([S[:, j] for j in range(n_s)], part)
    assert space.pod_tail.size == n_s + 1
    assert space.pod_tail[0] == pytest.approx(1.0, abs=1e-12)
    assert space.pod_tail[-1] == 0.0
    for m in range(n_s + 1):
        tail_sq = lam_bf[m:].sum() / total
        assert space.pod_tail[m] ** 2 == pytest.approx(tail_sq, abs=1e-8)
    # tail() clamps beyond the stored range
    assert space.tail(n_s + 5) == 0.0


def test_pod_modes_are_mass_orthonormal():
    rng = np.random.default_rng(3)
    part = build_uniform_partition(0.0, 1.0, 40)
    S = _random_snapshots(rng, part, 14)
    space = pod([S[:, j] for j in range(14)], part)
    M = transverse_mass(part)
    gram = space.modes.T @ (M @ space.modes)
    assert np.allclose(gram, np.eye(space.m), atol=1e-10)
    # sign convention: the largest-magnitude entry of each mode is positive
    peaks = space.modes[np.abs(space.modes).argmax(axis=0),
                        np.arange(space.m)]
    assert np.all(peaks > 0)


def test_pod_is_order_invariant():
    rng = np.random.default_rng(19)
    part = build_uniform_partition(0.0, 1.0, 20)
    S = _random_snapshots(rng, part, 8)
    snaps = [S[:, j] for j in range(8)]
    space_a = pod(snaps, part)
    space_b = pod([snaps[j] for j in (5, 2, 7, 0, 4, 1, 6, 3)], part)
    assert np.allclose(space_a.eigenvalues, space_b.eigenvalues, rtol=1e-10)
    assert np.allclose(space_a.modes, space_b.modes, atol=1e-9)


def test_pod_truncation_controls():
    rng = np.random.default_rng(23)
    part = build_uniform_partition(0.0, 1.0, 16)
    S = _random_snapshots(rng, part, 7)
    snaps = [S[:, j] for j in range(7)]
    assert pod(snaps, part, count=3).m == 3
    space = pod(snaps, part, tol=1.0)
    assert space.m == 1  # tol is met before the first mode, floor at one
    full = pod(snaps, part)
    tol = 0.9 * full.pod_tail[2]
    space = pod(snaps, part, tol=tol)
    assert space.tail(space.m) <= tol < space.tail(space.m - 1)
    # rank-deficient set: duplicates add no modes
    dup = [snaps[0], snaps[1]] * 4
    assert pod(dup, part, count=5).m == 2


def test_pod_input_validation():
    part = build_uniform_partition(0.0, 1.0, 10)
    with pytest.raises(ValueError):
        pod([], part)
    with pytest.raises(ValueError):
        pod([np.ones(4)], part)
    with pytest.raises(ValueError):
        pod([np.zeros(11), np.zeros(11)], part)


def test_orthonormalize_drops_dependent_columns():
    part = build_uniform_partition(0.0, 1.0, 12)
    M = transverse_mass(part)[1:-1, 1:-1]
    x = part.nodes[1:-1]
    base = np.sin(np.pi * x)[:, None]
    base /= math.sqrt(base[:, 0] @ (M @ base[:, 0]))
    extra = np.column_stack([2.0 * base[:, 0], np.sin(2.0 * np.pi * x)])
    out = _orthonormalize(base, extra, M)
    assert out.shape[1] == 2  # base + one new direction, duplicate dropped
    assert np.allclose(out.T @ (M @ out), np.eye(2), atol=1e-12)


# ---------------------------------------------------------------------------
# Training cells: sampling, marking, refinement


def test_draw_samples_land_in_distinct_elements():
    th = build_uniform_partition(0.0, 2.0, 8)
    rng = np.random.default_rng(1)
    lo, hi = np.array([0.1, 0.6]), np.array([0.5, 1.9])
    samples = _draw_samples(rng, lo, hi, 5, th)
    assert len(samples) == 5
    for mu in samples:
        assert mu == tuple(sorted(mu))
        assert lo[0] <= mu[0] and mu[1] <= hi[1]
        els = np.floor(np.asarray(mu) / th.h).astype(int)
        assert np.unique(els).size == 2
    # a cell inside one element can never satisfy the constraint
    with pytest.raises(RuntimeError):
        _draw_samples(rng, np.array([0.1, 0.15]), np.array([0.12, 0.18]), 1, th)


def test_initial_cells_tile_the_parameter_box():
    th = build_uniform_partition(0.0, 2.0, 10)
    rng = np.random.default_rng(5)
    cells = initial_cells((0.0, 2.0), 2, 3, 2, rng, th)
    assert len(cells) == 9
    assert [c.id for c in cells] == list(range(9))
    assert sum(c.volume() for c in cells) == pytest.approx(4.0)
    assert all(len(c.samples) == 2 for c in cells)


def _toy_cells(etas, widths=None, rhos=None):
    cells = []
    for i, eta in enumerate(etas):
        w = 1.0 if widths is None else widths[i]
        c = ParamCell(i, np.array([0.0, 0.0]), np.array([w, w]))
        c.eta = eta
        c.rho = 0 if rhos is None else rhos[i]
        cells.append(c)
    return cells


def test_mark_selects_smallest_eta_plus_stale_cells():
    cells = _toy_cells([0.5, 0.1, 0.9, 0.3])
    assert mark(cells, 0.34, sigma_thres=1e9) == [1, 3]  # ceil(.34*4) = 2
    assert mark(cells, 0.34, sigma_thres=1e9, invert=True) == [0, 2]
    # sigma = diam * rho: an old cell joins regardless of its eta
    cells = _toy_cells([0.5, 0.1, 0.9, 0.3], rhos=[0, 0, 3, 0])
    assert mark(cells, 0.25, sigma_thres=2.0) == [1, 2]
    # cells too narrow to hold distinct-element children are protected
    cells = _toy_cells([0.1, 0.5], widths=[0.05, 1.0])
    assert mark(cells, 0.5, sigma_thres=1e9, min_width=0.2) == [1]
    with pytest.raises(ValueError):
        mark(cells, 0.0, sigma_thres=1.0)


def test_refine_bisects_marked_cells():
    th = build_uniform_partition(0.0, 2.0, 10)
    rng = np.random.default_rng(9)
    cells = initial_cells((0.0, 2.0), 2, 2, 3, rng, th)
    n_samples = sum(len(c.samples) for c in cells)
    out = refine(cells, [1], 3, rng, th)
    assert len(out) == 4 + 3  # one parent replaced by 2^2 children
    kids = [c for c in out if c.id >= 4]
    assert [c.id for c in kids] == [4, 5, 6, 7]
    parent_volume = 1.0  # cells were 1x1
    assert sum(c.volume() for c in kids) == pytest.approx(parent_volume)
    assert all(c.rho == 0 for c in kids)
    assert all(c.rho == 1 for c in out if c.id < 4)
    assert sum(len(c.samples) for c in out) == n_samples + 3 * 3


# ---------------------------------------------------------------------------
# End-to-end training determinism


def _smooth_setup():
    pd = ProblemData(
        k=lambda x, y: 1.0 + 0.0 * x,
        b1=lambda x, y: 0.0 * x,
        b2=lambda x, y: 0.0 * x,
        F=lambda x, y: np.sin(np.pi * x / 2.0) * (1.0 + y),
        dirichlet=lambda x, y: 0.0 * x,
        omega_x=(0.0, 2.0),
        omega_y=(0.0, 1.0),
    )
    return pd, LiftingFunction.zero()


def test_training_is_seed_reproducible():
    pd, lift = _smooth_setup()
    th = build_uniform_partition(0.0, 2.0, 12)
    yh = build_uniform_partition(0.0, 1.0, 8)
    kw = dict(m_max=3, i_max=1, n_xi=2, theta=0.5, sigma_thres=30.0,
              coarse_nhp=4, th=th, yh=yh, mode="weak_lifting", qbar=2)
    run_a = adaptive_train_extension(2, pd, lift, seed=7, **kw)
    run_b = adaptive_train_extension(2, pd, lift, seed=7, **kw)
    mus_a = [(s.mu, s.component) for s in run_a.snapshots]
    mus_b = [(s.mu, s.component) for s in run_b.snapshots]
    assert mus_a == mus_b
    for sa, sb in zip(run_a.snapshots, run_b.snapshots):
        assert np.array_equal(sa.values, sb.values)
    # snapshots come back sorted by (mu, component)
    assert mus_a == sorted(mus_a)
    # the marked/refined loop actually grew the set
    assert len(run_a.cells) > 4
    run_c = adaptive_train_extension(2, pd, lift, seed=8, **kw)
    assert [(s.mu, s.component) for s in run_c.snapshots] != mus_a
