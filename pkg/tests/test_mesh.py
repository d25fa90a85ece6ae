"""Partition, tensor-grid indexing and P1 hat evaluation."""

import numpy as np
import pytest

from skewlift.mesh import (
    Partition1D,
    TensorGrid,
    build_grid,
    build_uniform_partition,
    eval_p1,
)


def test_partition_basic_geometry():
    part = build_uniform_partition(0.0, 2.0, 8)
    assert part.n == 8
    assert part.h == pytest.approx(0.25)
    assert part.length == pytest.approx(2.0)
    np.testing.assert_allclose(part.nodes, np.linspace(0.0, 2.0, 9))
    np.testing.assert_allclose(part.midpoints(), np.linspace(0.125, 1.875, 8))


def test_partition_rejects_bad_input():
    with pytest.raises(ValueError):
        Partition1D(1.0, 1.0, 4)
    with pytest.raises(ValueError):
        Partition1D(0.0, 1.0, 0)


def test_element_of_is_right_continuous():
    part = build_uniform_partition(0.0, 1.0, 4)
    # interior nodes belong to the element on their right
    assert part.element_of(0.25) == 1
    assert part.element_of(0.5) == 2
    # the last element is closed at b
    assert part.element_of(1.0) == 3
    assert part.element_of(0.0) == 0
    np.testing.assert_array_equal(
        part.element_of([0.1, 0.26, 0.99]), [0, 1, 3]
    )


def test_eval_p1_values_and_derivatives():
    part = build_uniform_partition(0.0, 1.0, 4)
    h = 0.25
    # mid-element point x = 0.3 lies between nodes 1 (0.25) and 2 (0.5)
    v1, d1 = eval_p1(part, 1, 0.3)
    assert v1 == pytest.approx((0.5 - 0.3) / h)
    assert d1 == pytest.approx(-1.0 / h)
    v2, d2 = eval_p1(part, 2, 0.3)
    assert v2 == pytest.approx((0.3 - 0.25) / h)
    assert d2 == pytest.approx(1.0 / h)
    # partition of unity away from nodes
    total = sum(eval_p1(part, i, 0.3)[0] for i in range(5))
    assert total == pytest.approx(1.0)
    # outside the hat support
    assert eval_p1(part, 0, 0.7) == (0.0, 0.0)


def test_eval_p1_node_convention():
    part = build_uniform_partition(0.0, 1.0, 4)
    # at its own node the hat reports value 1 and, by convention, slope 0
    assert eval_p1(part, 2, 0.5) == (1.0, 0.0)
    with pytest.raises(IndexError):
        eval_p1(part, 5, 0.5)
    with pytest.raises(ValueError):
        eval_p1(part, 1, 1.5)


def test_tensor_grid_node_numbering_is_x_major():
    grid = build_grid((0.0, 2.0), (0.0, 1.0), 4, 3)
    assert grid.shape == (5, 4)
    assert grid.node_count == 20
    assert grid.node_id(0, 0) == 0
    assert grid.node_id(0, 3) == 3
    assert grid.node_id(1, 0) == 4
    assert grid.node_id(2, 1) == 9


def test_interior_ids_order_and_count():
    grid = build_grid((0.0, 2.0), (0.0, 1.0), 4, 3)
    ids = grid.interior_ids()
    assert ids.size == (grid.nx - 1) * (grid.ny - 1)
    # x-major: all interior y of ix=1 first
    expected = [grid.node_id(ix, iy) for ix in (1, 2, 3) for iy in (1, 2)]
    np.testing.assert_array_equal(ids, expected)


def test_node_coords_match_ids():
    grid = build_grid((0.0, 1.0), (0.0, 1.0), 3, 2)
    X, Y = grid.node_coords()
    assert X.shape == grid.shape
    assert X[2, 1] == pytest.approx(grid.tx.nodes[2])
    assert Y[2, 1] == pytest.approx(grid.ty.nodes[1])
