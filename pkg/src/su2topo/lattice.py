"""Rectangular sampling grids in 3 and 4 dimensions.

Derivatives are second-order central stencils (optionally fourth-order),
with wraparound on periodic axes and one-sided stencils of matching order
on the boundary layers of open axes.  Quadrature is the midpoint rule on
periodic and cell-centered axes and the trapezoidal rule on vertex-centered
open axes; both are O(h^2) on smooth integrands.

All operations are pure: fields are immutable after construction and the
final reductions run in a fixed (numpy pairwise) summation order, so
results do not depend on any sweep or worker order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import FieldError, LatticeError

OPEN = "open"
PERIODIC = "periodic"


@dataclass(frozen=True)
class Grid:
    """A rectangular lattice of rank 3 or 4.

    Site ``k`` on axis ``i`` sits at ``origin[i] + k*spacing[i]`` for
    vertex-centered grids and at ``origin[i] + (k + 1/2)*spacing[i]`` for
    cell-centered ones.  Cell-centered placement keeps coordinate-singular
    chart boundaries (e.g. the poles of angular charts) off the sample set.
    """

    shape: tuple
    origin: tuple
    spacing: tuple
    periodic: tuple
    cell_centered: bool = False
    orientation: int = 1

    def __post_init__(self):
        shape = tuple(int(n) for n in self.shape)
        origin = tuple(float(o) for o in self.origin)
        spacing = tuple(float(h) for h in self.spacing)
        periodic = tuple(bool(p) for p in self.periodic)
        if len(shape) not in (3, 4):
            raise LatticeError(f"grid rank must be 3 or 4, got {len(shape)}")
        if not len(shape) == len(origin) == len(spacing) == len(periodic):
            raise LatticeError("shape/origin/spacing/periodic lengths differ")
        if any(n < 4 for n in shape):
            raise LatticeError(f"need at least 4 points per axis, got {shape}")
        if any(h <= 0 for h in spacing):
            raise LatticeError(f"spacings must be positive, got {spacing}")
        if self.orientation not in (-1, 1):
            raise LatticeError("orientation must be +1 or -1")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "periodic", periodic)

    @property
    def rank(self) -> int:
        return len(self.shape)

    @property
    def site_count(self) -> int:
        return int(np.prod(self.shape))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def coords(self, axis: int) -> np.ndarray:
        """Sample coordinates along one axis."""
        self._check_axis(axis)
        off = 0.5 if self.cell_centered else 0.0
        n = self.shape[axis]
        return self.origin[axis] + (np.arange(n) + off) * self.spacing[axis]

    def points(self) -> np.ndarray:
        """All site coordinates, shape ``(*shape, rank)``."""
        axes = np.meshgrid(*[self.coords(i) for i in range(self.rank)], indexing="ij")
        return np.stack(axes, axis=-1)

    def axis_extent(self, axis: int) -> float:
        """Length of the interval covered by quadrature along one axis."""
        n, h = self.shape[axis], self.spacing[axis]
        if self.periodic[axis] or self.cell_centered:
            return n * h
        return (n - 1) * h

    def quadrature_weights(self) -> np.ndarray:
        """Outer-product quadrature weights, shape ``(*shape,)``."""
        weights = []
        for i in range(self.rank):
            n, h = self.shape[i], self.spacing[i]
            w = np.full(n, h)
            if not (self.periodic[i] or self.cell_centered):
                w[0] = w[-1] = 0.5 * h
            weights.append(w)
        out = weights[0]
        for w in weights[1:]:
            out = np.multiply.outer(out, w)
        return out

    def drop_axis(self, axis: int) -> "Grid":
        """The rank-(r-1) grid of a boundary face orthogonal to ``axis``."""
        self._check_axis(axis)
        keep = [i for i in range(self.rank) if i != axis]
        return Grid(
            shape=tuple(self.shape[i] for i in keep),
            origin=tuple(self.origin[i] for i in keep),
            spacing=tuple(self.spacing[i] for i in keep),
            periodic=tuple(self.periodic[i] for i in keep),
            cell_centered=self.cell_centered,
            orientation=self.orientation,
        )

    def refine(self, factor: int = 2) -> "Grid":
        """A grid with ``factor`` times as many points per axis.

        Open vertex-centered axes keep their endpoints, so the covered
        interval is identical; periodic and cell-centered axes keep the
        covered interval by shrinking the spacing.
        """
        shape, spacing = [], []
        for i in range(self.rank):
            n, h = self.shape[i], self.spacing[i]
            if self.periodic[i] or self.cell_centered:
                shape.append(n * factor)
                spacing.append(h / factor)
            else:
                shape.append((n - 1) * factor + 1)
                spacing.append(h / factor)
        return Grid(tuple(shape), self.origin, tuple(spacing), self.periodic,
                    self.cell_centered, self.orientation)

    def _check_axis(self, axis: int):
        if not 0 <= axis < self.rank:
            raise LatticeError(f"axis {axis} out of range for rank {self.rank}")


@dataclass(frozen=True, eq=False)
class ScalarField:
    """One real sample per grid site."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != self.grid.shape:
            raise FieldError(
                f"scalar field shape {values.shape} != grid shape {self.grid.shape}")
        if not np.all(np.isfinite(values)):
            raise FieldError("scalar field contains non-finite samples")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)


def _moved(values: np.ndarray, axis: int):
    return np.moveaxis(values, axis, 0)


def central_diff(values: np.ndarray, grid: Grid, axis: int, order: int = 2) -> np.ndarray:
    """Differentiate grid samples along one axis.

    ``values`` may carry trailing component axes; the leading ``grid.rank``
    axes must match the grid shape.  The interior stencil is exact for
    polynomials of degree <= ``order`` along the axis, and the one-sided
    boundary stencils on open axes match that order.
    """
    grid._check_axis(axis)
    if order not in (2, 4):
        raise LatticeError(f"stencil order must be 2 or 4, got {order}")
    values = np.asarray(values)
    if values.shape[: grid.rank] != grid.shape:
        raise LatticeError("value array does not match grid shape")
    h = grid.spacing[axis]
    n = grid.shape[axis]

    if grid.periodic[axis]:
        up1 = np.roll(values, -1, axis)
        dn1 = np.roll(values, 1, axis)
        if order == 2:
            return (up1 - dn1) / (2.0 * h)
        up2 = np.roll(values, -2, axis)
        dn2 = np.roll(values, 2, axis)
        return (-up2 + 8.0 * up1 - 8.0 * dn1 + dn2) / (12.0 * h)

    if order == 4 and n < 5:
        raise LatticeError("fourth-order open stencil needs at least 5 points")

    out = np.empty_like(values, dtype=np.result_type(values, np.float64))
    f = _moved(values, axis)
    d = _moved(out, axis)
    if order == 2:
        d[1:-1] = (f[2:] - f[:-2]) / (2.0 * h)
        d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
        d[-1] = (3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * h)
    else:
        d[2:-2] = (-f[4:] + 8.0 * f[3:-1] - 8.0 * f[1:-3] + f[:-4]) / (12.0 * h)
        d[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * h)
        d[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / (12.0 * h)
        d[-2] = (3.0 * f[-1] + 10.0 * f[-2] - 18.0 * f[-3] + 6.0 * f[-4] - f[-5]) / (12.0 * h)
        d[-1] = (25.0 * f[-1] - 48.0 * f[-2] + 36.0 * f[-3] - 16.0 * f[-4] + 3.0 * f[-5]) / (12.0 * h)
    return out


def derivative_stack(values: np.ndarray, grid: Grid, order: int = 2) -> np.ndarray:
    """Stack of axis derivatives, shape ``(*shape, rank, *components)``."""
    return np.stack([central_diff(values, grid, ax, order) for ax in range(grid.rank)],
                    axis=grid.rank)


def integrate_values(values: np.ndarray, grid: Grid) -> float:
    """Quadrature of per-site samples over the grid volume."""
    values = np.asarray(values)
    if values.shape != grid.shape:
        raise LatticeError("value array does not match grid shape")
    return float(np.sum(values * grid.quadrature_weights()))


def integrate(density: ScalarField) -> float:
    """Quadrature of a scalar field over its grid volume."""
    return integrate_values(density.values, density.grid)


def _fractional_index(grid: Grid, points: np.ndarray) -> tuple:
    """Per-axis base indices and fractions for multilinear interpolation."""
    bases, fracs = [], []
    off = 0.5 if grid.cell_centered else 0.0
    for i in range(grid.rank):
        t = (points[:, i] - grid.origin[i]) / grid.spacing[i] - off
        n = grid.shape[i]
        if grid.periodic[i]:
            base = np.floor(t).astype(np.int64)
            frac = t - base
            base %= n
        else:
            if np.any(t < -1e-9) or np.any(t > n - 1 + 1e-9):
                raise LatticeError("interpolation point outside open-axis domain")
            t = np.clip(t, 0.0, n - 1.0)
            base = np.minimum(np.floor(t).astype(np.int64), n - 2)
            frac = t - base
        bases.append(base)
        fracs.append(frac)
    return bases, fracs


def interpolate(values: np.ndarray, grid: Grid, points: np.ndarray) -> np.ndarray:
    """Multilinear interpolation of grid samples at arbitrary points.

    ``points`` has shape ``(npts, rank)``; the result keeps any trailing
    component axes of ``values``.  Periodic axes wrap; open axes reject
    points outside the sampled interval.
    """
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    bases, fracs = _fractional_index(grid, points)
    comp_shape = values.shape[grid.rank:]
    out = np.zeros((points.shape[0],) + comp_shape, dtype=values.dtype)
    for corner in range(1 << grid.rank):
        weight = np.ones(points.shape[0])
        index = []
        for i in range(grid.rank):
            bit = (corner >> i) & 1
            idx = bases[i] + bit
            if grid.periodic[i]:
                idx %= grid.shape[i]
            weight = weight * (fracs[i] if bit else 1.0 - fracs[i])
            index.append(idx)
        out += weight.reshape((-1,) + (1,) * len(comp_shape)) * values[tuple(index)]
    return out


def interpolate_with_gradient(values: np.ndarray, grid: Grid, points: np.ndarray):
    """Multilinear interpolation plus its exact gradient.

    Returns ``(vals, grads)`` with ``grads`` of shape
    ``(npts, rank, *components)``; the gradient is the analytic derivative
    of the multilinear interpolant itself.
    """
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    bases, fracs = _fractional_index(grid, points)
    comp_shape = values.shape[grid.rank:]
    npts = points.shape[0]
    vals = np.zeros((npts,) + comp_shape, dtype=values.dtype)
    grads = np.zeros((npts, grid.rank) + comp_shape, dtype=values.dtype)
    pad = (1,) * len(comp_shape)
    for corner in range(1 << grid.rank):
        index = []
        w_axis = []
        dw_axis = []
        for i in range(grid.rank):
            bit = (corner >> i) & 1
            idx = bases[i] + bit
            if grid.periodic[i]:
                idx %= grid.shape[i]
            index.append(idx)
            w_axis.append(fracs[i] if bit else 1.0 - fracs[i])
            sign = 1.0 if bit else -1.0
            dw_axis.append(np.full(npts, sign / grid.spacing[i]))
        corner_vals = values[tuple(index)]
        weight = np.ones(npts)
        for w in w_axis:
            weight = weight * w
        vals += weight.reshape((-1,) + pad) * corner_vals
        for ax in range(grid.rank):
            w = dw_axis[ax]
            for j in range(grid.rank):
                if j != ax:
                    w = w * w_axis[j]
            grads[:, ax] += w.reshape((-1,) + pad) * corner_vals
    return vals, grads
