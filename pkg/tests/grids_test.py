import math

import numpy as np
import pytest

from kinfront import InvalidParameterError, MinPlusField, SpatialGrid, VelocityGrid, remap, sample
from kinfront.grids import tail_fraction


def test_spatial_grid():
    grid = SpatialGrid(-1, 1, 21)
    assert grid.dx == pytest.approx(0.1)
    assert grid.index_of(0.26) == 13
    assert grid.index_of(5) == 20
    assert grid.window(-0.2, 0.2).sum() == 5
    assert SpatialGrid.from_spacing(0, 1, 0.25).n_x == 5

    with pytest.raises(InvalidParameterError):
        SpatialGrid(0, 1, 1)
    with pytest.raises(InvalidParameterError):
        SpatialGrid(1, 0, 10)


def test_velocity_grid_zero_node():
    grid = VelocityGrid.symmetric(2.0, 4)
    assert grid.n_v == 5
    assert grid.zero_index == 2
    assert grid.nodes[2] == 0.0
    assert grid.require_zero() is grid

    shifted = VelocityGrid(0.5, 2.0, 4)
    assert not shifted.contains_zero
    with pytest.raises(InvalidParameterError):
        shifted.require_zero()


def test_field_validation():
    grid = SpatialGrid(0, 1, 3)
    with pytest.raises(InvalidParameterError):
        MinPlusField([0.0, math.nan, 1.0], grid)
    with pytest.raises(InvalidParameterError):
        MinPlusField([0.0, 1.0], grid)

    field = MinPlusField([[1.0, 2.0], [np.inf, 0.5], [3.0, 4.0]], grid, VelocityGrid(-1, 1, 2))
    assert np.array_equal(field.column_min(), [1.0, 0.5, 3.0])
    assert field.shifted(1.0).at(0.5, 1.0) == 1.5
    with pytest.raises(ValueError):
        field.values[0, 0] = 7.0


def test_sample_interpolates_and_fills():
    grid = SpatialGrid(0, 2, 3)
    values = np.array([0.0, 1.0, np.inf])
    assert sample(values, grid, 0.5) == pytest.approx(0.5)
    # on a node the infinite neighbour does not leak in
    assert sample(values, grid, 1.0) == 1.0
    assert sample(values, grid, 1.0 + 1e-12) == 1.0
    assert math.isinf(sample(values, grid, 1.5))
    assert math.isinf(sample(values, grid, -0.5))
    assert sample(values, grid, 3.0, fill=-1.0) == -1.0


def test_sample_periodic():
    grid = SpatialGrid(0, 2, 3)
    values = np.array([0.0, 1.0, 2.0])
    # the period is three spacings, so x = 3 wraps onto x = 0
    assert sample(values, grid, 3.0, periodic=True) == pytest.approx(0.0)
    assert sample(values, grid, 2.5, periodic=True) == pytest.approx(1.0)
    assert sample(values, grid, -0.5, periodic=True) == pytest.approx(1.0)


def test_sample_columns():
    grid = SpatialGrid(0, 1, 2)
    values = np.array([[0.0, 10.0], [1.0, 20.0]])
    out = sample(values, grid, np.array([[0.5, 0.25]]))
    assert np.allclose(out, [[0.5, 12.5]])


def test_tail_fraction():
    lam = np.array([0.0, 0.3, 1.0])
    for q in (-40.0, -2.0, 0.0, 1e-9, 2.0, 40.0):
        out = tail_fraction(q, lam)
        assert out[0] == 0 and out[2] == pytest.approx(1.0)
        assert 0 < out[1] < 1
    # a rising profile keeps more of its mass on the right
    assert tail_fraction(2.0, 0.3) > 0.3 > tail_fraction(-2.0, 0.3)
    assert tail_fraction(1e-9, 0.3) == pytest.approx(0.3)


def test_remap_moves_exponentials_exactly():
    grid = SpatialGrid(0, 19, 20)
    values = np.exp(-0.7 * np.arange(20))
    shifts = np.array([0.3, 1.6, -0.4])
    out = remap(values, grid, shifts)
    for j, a in enumerate(shifts):
        assert np.allclose(out[3:17, j], values[3:17] * np.exp(0.7 * a), rtol=1e-12, atol=0)


def test_remap_conserves_mass_and_bounds():
    grid = SpatialGrid(0, 1, 50)
    values = np.random.default_rng(3).uniform(0.0, 1.0, (50, 4))
    values[10:20, 1] = 0.0
    out = remap(values, grid, np.array([0.013, -0.05, 0.5, 0.0]), periodic=True)
    assert np.allclose(out.sum(axis=0), values.sum(axis=0), rtol=1e-13, atol=0)
    assert (out >= 0).all()
    assert (out <= values.max(axis=0) * (1 + 1e-12)).all()
    assert np.array_equal(out[:, 3], values[:, 3])


def test_remap_flat_data():
    grid = SpatialGrid(-1, 1, 21)
    values = np.full(21, 2.0)
    shifts = np.array([0.03, -0.17])
    moved = remap(values, grid, shifts)
    sampled = sample(values, grid, grid.nodes[:, None] - shifts[None, :], fill=0.0)
    assert np.allclose(moved[3:-3], sampled[3:-3])
    # without wrapping, mass leaves through the ends
    assert (moved.sum(axis=0) < values.sum()).all()
