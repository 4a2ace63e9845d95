import numpy as np
import pytest

from su2topo import Grid, LatticeError, ScalarField, central_diff, integrate
from su2topo.lattice import derivative_stack, integrate_values, interpolate


def periodic_grid(n=64):
    return Grid((n, 8, 8), (0.0, 0.0, 0.0),
                (2 * np.pi / n, 0.1, 0.1), (True, False, False))


def test_grid_validation():
    with pytest.raises(LatticeError):
        Grid((3, 8, 8), (0, 0, 0), (0.1, 0.1, 0.1), (False,) * 3)
    with pytest.raises(LatticeError):
        Grid((8, 8, 8), (0, 0, 0), (0.1, -0.1, 0.1), (False,) * 3)
    with pytest.raises(LatticeError):
        Grid((8, 8), (0, 0), (0.1, 0.1), (False, False))


def test_coords_cell_centered():
    grid = Grid((8, 8, 8), (0.0, 0.0, 0.0), (0.5, 0.5, 0.5), (False,) * 3,
                cell_centered=True)
    assert grid.coords(0)[0] == pytest.approx(0.25)
    assert grid.coords(0)[-1] == pytest.approx(0.25 + 7 * 0.5)


def test_central_diff_constant_is_zero():
    grid = periodic_grid()
    values = np.ones(grid.shape)
    for axis in range(3):
        assert np.max(np.abs(central_diff(values, grid, axis))) == 0.0


def test_central_diff_linear_exact_on_open_axis():
    grid = Grid((21, 8, 8), (0.0, 0.0, 0.0), (0.1, 0.1, 0.1), (False,) * 3)
    x = grid.coords(0)[:, None, None]
    values = np.broadcast_to(x, grid.shape).copy()
    d = central_diff(values, grid, 0)
    assert np.max(np.abs(d - 1.0)) < 1e-13


def test_central_diff_quadratic_exact_including_boundary():
    grid = Grid((16, 8, 8), (-1.0, 0.0, 0.0), (0.13, 0.1, 0.1), (False,) * 3)
    x = grid.coords(0)[:, None, None]
    values = np.broadcast_to(x**2, grid.shape).copy()
    d = central_diff(values, grid, 0)
    assert np.max(np.abs(d - 2 * x)) < 1e-12


def test_central_diff_sin_periodic_error_bound():
    n = 64
    grid = periodic_grid(n)
    x = grid.coords(0)[:, None, None]
    values = np.broadcast_to(np.sin(x), grid.shape).copy()
    d = central_diff(values, grid, 0)
    assert np.max(np.abs(d - np.cos(x))) <= (2 * np.pi / n) ** 2


def test_fourth_order_exact_for_cubics():
    grid = Grid((16, 8, 8), (-1.0, 0.0, 0.0), (0.11, 0.1, 0.1), (False,) * 3)
    x = grid.coords(0)[:, None, None]
    values = np.broadcast_to(x**3, grid.shape).copy()
    d = central_diff(values, grid, 0, order=4)
    assert np.max(np.abs(d - 3 * x**2)) < 1e-11


def test_central_diff_axis_out_of_range():
    grid = periodic_grid(8)
    with pytest.raises(LatticeError):
        central_diff(np.ones(grid.shape), grid, 3)


def test_diff_commutes_across_axes():
    rng = np.random.default_rng(0)
    grid = Grid((9, 10, 11), (0.0, 0.0, 0.0), (0.1, 0.2, 0.3),
                (False, True, False))
    values = rng.normal(size=grid.shape)
    d01 = central_diff(central_diff(values, grid, 0), grid, 1)
    d10 = central_diff(central_diff(values, grid, 1), grid, 0)
    assert np.max(np.abs(d01 - d10)) < 1e-12


def test_integrate_constant_periodic_volume():
    n = 16
    grid = Grid((n, n, n), (0.0, 0.0, 0.0), (0.25, 0.5, 0.125), (True,) * 3)
    volume = n * 0.25 * n * 0.5 * n * 0.125
    assert integrate(ScalarField(grid, np.ones(grid.shape))) == pytest.approx(
        volume, abs=1e-12)


def test_integrate_sin_over_period_is_zero():
    grid = periodic_grid(32)
    x = grid.coords(0)[:, None, None]
    field = ScalarField(grid, np.broadcast_to(np.sin(x), grid.shape).copy())
    assert abs(integrate(field)) < 1e-12


def test_integrate_gaussian_4d():
    n = 40
    grid = Grid((n,) * 4, (-5.0,) * 4, (10.0 / (n - 1),) * 4, (False,) * 4)
    pts = grid.points()
    values = np.exp(-np.sum(pts**2, axis=-1))
    result = integrate(ScalarField(grid, values))
    assert abs(result - np.pi**2) / np.pi**2 < 1e-4


def test_integrate_is_linear():
    rng = np.random.default_rng(1)
    grid = periodic_grid(16)
    f = rng.normal(size=grid.shape)
    g = rng.normal(size=grid.shape)
    lhs = integrate_values(2.5 * f - 0.75 * g, grid)
    rhs = 2.5 * integrate_values(f, grid) - 0.75 * integrate_values(g, grid)
    assert abs(lhs - rhs) < 1e-12


def test_refinement_shrinks_errors():
    def quad_error(n):
        # exact value: integral of exp(sin x) over one period is 2 pi I0(1)
        grid = Grid((n, 4, 4), (0.0, 0.0, 0.0),
                    (2 * np.pi / n, 0.25, 0.25), (True,) * 3)
        x = grid.coords(0)[:, None, None]
        values = np.broadcast_to(np.exp(np.sin(x)), grid.shape).copy()
        exact = 2.0 * np.pi * np.i0(1.0) * (4 * 0.25) ** 2
        return abs(integrate_values(values, grid) - exact)

    def fd_error(n):
        grid = Grid((n, 8, 8), (0.0, 0.0, 0.0),
                    (2 * np.pi / n, 0.1, 0.1), (True, False, False))
        x = grid.coords(0)[:, None, None]
        values = np.broadcast_to(np.exp(np.sin(x)), grid.shape).copy()
        d = central_diff(values, grid, 0)
        exact = np.cos(x) * np.exp(np.sin(x))
        return np.max(np.abs(d - exact))

    assert fd_error(32) / fd_error(64) >= 3.0
    # periodic quadrature of an analytic integrand converges faster than
    # any power, so compare at low n, above the rounding floor
    assert quad_error(4) / quad_error(8) >= 3.0


def test_interpolation_reproduces_multilinear_data():
    grid = Grid((6, 7, 8), (0.0, 0.0, 0.0), (0.2, 0.3, 0.1),
                (False, False, True))
    pts = grid.points()
    values = 1.0 + 2.0 * pts[..., 0] - 0.7 * pts[..., 1]
    rng = np.random.default_rng(2)
    sample = np.stack([
        rng.uniform(0.0, 0.2 * 5, size=10),
        rng.uniform(0.0, 0.3 * 6, size=10),
        rng.uniform(0.0, 0.1 * 8, size=10),
    ], axis=1)
    got = interpolate(values, grid, sample)
    expected = 1.0 + 2.0 * sample[:, 0] - 0.7 * sample[:, 1]
    assert np.max(np.abs(got - expected)) < 1e-12


def test_interpolation_rejects_outside_open_axis():
    grid = Grid((6, 7, 8), (0.0, 0.0, 0.0), (0.2, 0.3, 0.1), (False,) * 3)
    with pytest.raises(LatticeError):
        interpolate(np.ones(grid.shape), grid, np.array([[-0.5, 0.1, 0.1]]))


def test_derivative_stack_shape():
    grid = periodic_grid(8)
    values = np.zeros(grid.shape + (2,))
    stack = derivative_stack(values, grid)
    assert stack.shape == grid.shape + (3, 2)
