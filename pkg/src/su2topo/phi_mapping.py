"""Isolated zeros of the 4-vector field and the charge ledger.

The map x -> phi(x) in R^4 concentrates the whole second Chern number at
its isolated zeros.  Each zero x_j carries a Brouwer degree eta_j = +-1
(the orientation, sign of the Jacobian at regular zeros) and a Hopf index
beta_j >= 1 (the covering multiplicity); their product is the local degree
d_j measured as a surface integral over a small 3-sphere:

    d_j = 1/(2 pi^2) Int det[n, d_chi n, d_theta n, d_phi n] dchi dtheta dphi

with n = phi/|phi| sampled on the sphere.  The ledger then states
C_2 = sum_j beta_j eta_j and cross-checks it against the density-route
value; the sum doubles as the Euler characteristic through the top Chern
class.

Zero search: 4-cells where every component changes sign across the 16
corners seed damped Newton iterations (sign screening over-fires on coarse
grids, so Newton is the arbiter).  Analytic samplers attached by the
generators give machine-precision roots; lattice-only fields fall back on
the multilinear interpolant with O(h^2) positions.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .chern_density import chern_density, exclusion_mask, second_chern_number
from .errors import DegreeResolutionError, FieldError, LatticeError, ZeroLocationError
from .fields import PhiField, UnitField
from .lattice import (Grid, ScalarField, central_diff, integrate_values,
                      interpolate, interpolate_with_gradient)

DEGENERACY_TOL = 1e-8


def jacobian(phi: PhiField, order: int = 2) -> ScalarField:
    """det[d_mu phi^a] per site, positive where phi preserves orientation."""
    if phi.grid.rank != 4:
        raise FieldError("the Jacobian determinant needs a rank-4 grid")
    return ScalarField(phi.grid, np.linalg.det(phi.derivatives(order)))


@dataclass(frozen=True)
class ZeroPoint:
    """A located zero with its local topological data."""

    position: tuple
    cell_index: tuple
    refined: bool
    phi_norm: float
    jacobian: float
    degree: int | None = None
    beta: int | None = None
    eta: int | None = None
    degenerate: bool = False
    degree_deviation: float | None = None


@dataclass(frozen=True)
class ZeroSearch:
    """Zero-location result: accepted zeros plus suspicious cells.

    A suspicious cell passed the sign screen but its Newton iteration did
    not converge inside the cell neighborhood; it is reported, never
    silently dropped.
    """

    zeros: tuple
    suspicious_cells: tuple


def _evaluator(phi: PhiField):
    if phi.sampler is not None:
        return phi.sampler
    return lambda pts: interpolate(phi.values, phi.grid, pts)


def _jacobian_matrix(phi: PhiField, point: np.ndarray) -> np.ndarray:
    """4x4 matrix J[a, mu] = d phi^a / d x^mu at one point."""
    if phi.jacobian_sampler is not None:
        stack = np.asarray(phi.jacobian_sampler(point[None]))[0]  # (mu, a)
        return stack.T
    if phi.sampler is not None:
        step = 1e-6 * (1.0 + np.max(np.abs(point)))
        cols = []
        for mu in range(4):
            e = np.zeros(4)
            e[mu] = step
            cols.append((phi.sampler((point + e)[None])[0]
                         - phi.sampler((point - e)[None])[0]) / (2.0 * step))
        return np.stack(cols, axis=1)
    _, grads = interpolate_with_gradient(phi.values, phi.grid, point[None])
    return grads[0].T  # (a, mu)


def _jacobian_at(phi: PhiField, jac_field: ScalarField, point: np.ndarray) -> float:
    if phi.jacobian_sampler is not None or phi.sampler is not None:
        return float(np.linalg.det(_jacobian_matrix(phi, point)))
    return float(interpolate(jac_field.values, phi.grid, point[None])[0])


def _newton(evaluate, jac, x0: np.ndarray, bounds, tol: float, max_iter: int):
    """Damped Newton iteration toward phi(x) = 0 inside a cell neighborhood."""
    lo, hi = bounds
    x = x0.copy()
    fx = np.asarray(evaluate(x[None]))[0]
    best = float(np.linalg.norm(fx))
    for _ in range(max_iter):
        if best < tol:
            return x, best, True
        j = jac(x)
        try:
            step = np.linalg.solve(j, fx)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(j, fx, rcond=None)[0]
        lam = 1.0
        moved = False
        while lam > 2.0**-10:
            xn = x - lam * step
            if np.all(xn >= lo) and np.all(xn <= hi):
                try:
                    fn = np.asarray(evaluate(xn[None]))[0]
                except LatticeError:
                    fn = None
                if fn is not None:
                    nn = float(np.linalg.norm(fn))
                    if nn < best * (1.0 - 0.25 * lam) or nn < tol:
                        x, fx, best, moved = xn, fn, nn, True
                        break
            lam *= 0.5
        if not moved:
            return x, best, best < tol
    return x, best, best < tol


def locate_zeros(phi: PhiField, newton_tol: float = 1e-10,
                 max_iter: int = 40) -> ZeroSearch:
    """Find the isolated zeros of phi on a rank-4 grid.

    Candidate cells are 4-cells whose 16 corners show both signs in every
    component; lattice sites where phi itself (nearly) vanishes seed
    candidates directly.  Accepted zeros are deduplicated at half a cell
    width; two surviving zeros within one cell width mean the grid cannot
    separate them and raise :class:`ZeroLocationError`.
    """
    grid = phi.grid
    if grid.rank != 4:
        raise FieldError("zero location needs a rank-4 grid")
    values = phi.values
    hmax = max(grid.spacing)

    cells_shape = tuple(n if grid.periodic[i] else n - 1
                        for i, n in enumerate(grid.shape))
    mins = None
    maxs = None
    for corner in range(16):
        take = values
        for ax in range(4):
            n = cells_shape[ax]
            if (corner >> ax) & 1:
                idx = (np.arange(n) + 1) % grid.shape[ax]
            else:
                idx = np.arange(n)
            take = np.take(take, idx, axis=ax)
        mins = take if mins is None else np.minimum(mins, take)
        maxs = take if maxs is None else np.maximum(maxs, take)
    candidate = np.all((mins < 0.0) & (maxs > 0.0), axis=-1)

    norms = np.linalg.norm(values, axis=-1)
    site_tol = 1e-9 * max(1.0, float(np.max(norms)))
    seed_sites = np.argwhere(norms < site_tol)

    evaluate = _evaluator(phi)
    jac_field = None
    if phi.sampler is None and phi.jacobian_sampler is None:
        jac_field = jacobian(phi)

    def jac(x):
        return _jacobian_matrix(phi, x)

    starts = []
    offset = 0.5 if grid.cell_centered else 0.0
    for cell in np.argwhere(candidate):
        center = np.array([grid.origin[i] + (cell[i] + 0.5 + offset) * grid.spacing[i]
                           for i in range(4)])
        starts.append((tuple(int(c) for c in cell), center))
    for site in seed_sites:
        point = np.array([grid.origin[i] + (site[i] + offset) * grid.spacing[i]
                          for i in range(4)])
        starts.append((tuple(int(c) for c in site), point))

    accepted = []
    suspicious = []
    for cell, center in starts:
        half = np.array([1.5 * h for h in grid.spacing])
        bounds = (center - half, center + half)
        x, fnorm, ok = _newton(evaluate, jac, center, bounds, newton_tol, max_iter)
        if ok:
            accepted.append((cell, x, fnorm))
        else:
            suspicious.append(cell)

    accepted.sort(key=lambda item: item[0])
    unique = []
    for cell, x, fnorm in accepted:
        for _, ux, _ in unique:
            if np.linalg.norm(x - ux) < 0.5 * hmax:
                break
        else:
            unique.append((cell, x, fnorm))

    for i in range(len(unique)):
        for j in range(i + 1, len(unique)):
            dist = np.linalg.norm(unique[i][1] - unique[j][1])
            if dist < hmax:
                raise ZeroLocationError(
                    f"two zeros separated by {dist:.3e} < cell width {hmax:.3e}; "
                    "refine the grid to separate them")

    zeros = []
    for cell, x, fnorm in unique:
        det = _jacobian_at(phi, jac_field, x)
        zeros.append(ZeroPoint(position=tuple(float(v) for v in x),
                               cell_index=cell, refined=fnorm < newton_tol,
                               phi_norm=fnorm, jacobian=det))
    return ZeroSearch(tuple(zeros), tuple(suspicious))


def _sphere_chart(resolution) -> Grid:
    nchi, ntheta, nphi = resolution
    return Grid(shape=(nchi, ntheta, nphi), origin=(0.0, 0.0, 0.0),
                spacing=(np.pi / nchi, np.pi / ntheta, 2.0 * np.pi / nphi),
                periodic=(False, False, True), cell_centered=True)


def _chart_unit_vectors(grid: Grid) -> np.ndarray:
    chi = grid.coords(0)[:, None, None]
    theta = grid.coords(1)[None, :, None]
    phi = grid.coords(2)[None, None, :]
    u = np.empty(grid.shape + (4,))
    u[..., 0] = np.broadcast_to(np.cos(chi), grid.shape)
    u[..., 1] = np.sin(chi) * np.cos(theta)
    u[..., 2] = np.sin(chi) * np.sin(theta) * np.cos(phi)
    u[..., 3] = np.sin(chi) * np.sin(theta) * np.sin(phi)
    return u


def surface_degree(evaluate, center, radius: float,
                   resolution=(32, 32, 64), max_refinements: int = 2):
    """Degree of phi/|phi| over the 3-sphere of ``radius`` around ``center``.

    ``evaluate`` maps points ``(n, 4)`` to values ``(n, 4)``.  The sphere
    is sampled on a cell-centered hyperspherical chart; the angular
    resolution doubles automatically while the rounding deviation exceeds
    0.1, and a deviation that stays >= 0.2 raises
    :class:`DegreeResolutionError`.

    Returns ``(degree, raw_value, deviation)``.
    """
    center = np.asarray(center, dtype=np.float64)
    resolution = tuple(int(r) for r in resolution)
    for attempt in range(max_refinements + 1):
        agrid = _sphere_chart(resolution)
        u = _chart_unit_vectors(agrid)
        pts = (center + radius * u.reshape(-1, 4))
        try:
            samples = np.asarray(evaluate(pts)).reshape(agrid.shape + (4,))
        except LatticeError as exc:
            raise ZeroLocationError(
                f"sampling sphere of radius {radius:.3e} around {tuple(center)} "
                "leaves the domain; zeros this close to the boundary are "
                "rejected") from exc
        norms = np.linalg.norm(samples, axis=-1)
        if np.min(norms) <= 0.0 or not np.all(np.isfinite(norms)):
            raise ZeroLocationError(
                "phi vanishes on the sampling sphere; another zero within radius")
        n = samples / norms[..., None]
        rows = [n] + [central_diff(n, agrid, ax) for ax in range(3)]
        mats = np.stack(rows, axis=-2)
        dets = np.linalg.det(mats)
        value = integrate_values(dets, agrid) / (2.0 * np.pi**2)
        degree = int(np.rint(value))
        deviation = abs(value - degree)
        if deviation <= 0.1 or attempt == max_refinements:
            if deviation >= 0.2:
                raise DegreeResolutionError(
                    f"surface degree {value:.4f} not near an integer at "
                    f"resolution {resolution}")
            return degree, value, deviation
        resolution = tuple(2 * r for r in resolution)
    raise AssertionError("unreachable")


def local_degree(phi: PhiField, zero: ZeroPoint, radius: float | None = None,
                 resolution=(32, 32, 64)) -> ZeroPoint:
    """Classify one zero: local degree d, Hopf index beta, Brouwer degree eta.

    For regular zeros (|Jacobian| above 1e-8) eta is the Jacobian sign and
    beta = |d|; at degenerate zeros the Jacobian-sign definition does not
    apply, so eta falls back to sign(d) and the degeneracy flag is set.
    A degree of zero marks a non-topological sign-change artifact; it is
    returned (degree 0) and later excluded from the ledger with a warning.
    """
    grid = phi.grid
    if radius is None:
        radius = 3.0 * max(grid.spacing)
    evaluate = _evaluator(phi)
    degree, value, deviation = surface_degree(evaluate, zero.position, radius,
                                              resolution)
    if degree == 0:
        return replace(zero, degree=0, beta=None, eta=None,
                       degenerate=abs(zero.jacobian) <= DEGENERACY_TOL,
                       degree_deviation=deviation)
    beta = abs(degree)
    if abs(zero.jacobian) > DEGENERACY_TOL:
        eta = int(np.sign(zero.jacobian))
        degenerate = False
        if eta * beta != degree:
            warnings.warn(
                f"Jacobian sign {eta} conflicts with surface degree {degree} "
                f"at {zero.position}; treating the zero as degenerate")
            eta = int(np.sign(degree))
            degenerate = True
    else:
        eta = int(np.sign(degree))
        degenerate = True
    return replace(zero, degree=degree, beta=beta, eta=eta,
                   degenerate=degenerate, degree_deviation=deviation)


@dataclass(frozen=True)
class Ledger:
    """The zero ledger against the density-route second Chern number."""

    zeros: tuple
    index_sum: int
    density_c2: float
    discrepancy: float
    tolerance: float
    passed: bool

    @property
    def chi(self) -> int:
        """Euler characteristic alias: identical to the index sum."""
        return self.index_sum


def charge_ledger(zeros, density_c2: float, tolerance: float = 0.05) -> Ledger:
    """Assemble the ledger sum and compare with the density-route value.

    Zeros with degree 0 are excluded (with a warning); the FAIL state is
    carried in ``passed``, never swallowed.
    """
    kept = []
    for zero in zeros:
        if zero.degree is None:
            raise FieldError("ledger needs classified zeros (run local_degree)")
        if zero.degree == 0:
            warnings.warn(f"zero at {zero.position} has surface degree 0; "
                          "excluded from the ledger")
            continue
        kept.append(zero)
    kept.sort(key=lambda z: z.cell_index)
    index_sum = int(sum(z.beta * z.eta for z in kept))
    discrepancy = abs(density_c2 - index_sum)
    return Ledger(zeros=tuple(kept), index_sum=index_sum, density_c2=density_c2,
                  discrepancy=discrepancy, tolerance=tolerance,
                  passed=bool(discrepancy < tolerance))


def masked_unit_density(phi: PhiField, keep: np.ndarray) -> ScalarField:
    """Unit-route Chern density with masked sites zeroed.

    Sites excluded by ``keep`` (inside excision balls around zeros) take a
    safe placeholder direction before differentiation; their density
    samples are zeroed afterwards, and with an excision radius of three
    cell widths no finite-difference stencil of a kept site reaches the
    singular core.
    """
    norms = np.linalg.norm(phi.values, axis=-1)
    floor = max(1e-30, 1e-6 * float(np.max(norms)))
    safe = np.maximum(norms, floor)
    n_values = phi.values / safe[..., None]
    bad = norms < floor
    if np.any(bad):
        n_values = n_values.copy()
        n_values[bad] = np.array([1.0, 0.0, 0.0, 0.0])
    jet = None
    if phi.jet is not None:
        radial = np.einsum("...a,...ma->...m", phi.values, phi.jet)
        jet = (phi.jet / safe[..., None, None]
               - phi.values[..., None, :] * (radial / safe[..., None] ** 3)[..., None])
        jet = np.where(keep[..., None, None], jet, 0.0)
    unit = UnitField(phi.grid, n_values, jet=jet)
    rho = chern_density(unit, "unit")
    values = np.where(keep, rho.field.values, 0.0)
    return ScalarField(phi.grid, values)


@dataclass(frozen=True)
class LedgerAnalysis:
    """Full zero-ledger pipeline output."""

    ledger: Ledger
    c2: object
    search: ZeroSearch
    excision_radius: float


def analyze(phi: PhiField, newton_tol: float = 1e-10,
            ledger_tol: float = 0.05, radius: float | None = None,
            resolution=(32, 32, 64), threads: int = 1) -> LedgerAnalysis:
    """Locate zeros, classify them, and build the ledger.

    The density route excises balls of three cell widths around located
    zeros, integrates the unit-route density over the remainder, and adds
    the ledger-estimated charge of the excised balls; the residual
    quadrature is then a direct measure of how completely the charge
    concentrates at the zeros.
    """
    search = locate_zeros(phi, newton_tol=newton_tol)
    excision = 3.0 * max(phi.grid.spacing)
    if radius is None:
        radius = excision
        positions = [np.asarray(z.position) for z in search.zeros]
        if len(positions) > 1:
            gap = min(np.linalg.norm(a - b) for i, a in enumerate(positions)
                      for b in positions[i + 1:])
            radius = min(radius, 0.45 * gap)   # keep other zeros off the sphere

    zeros = list(search.zeros)
    if threads > 1 and len(zeros) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            classified = list(pool.map(
                lambda z: local_degree(phi, z, radius=radius, resolution=resolution),
                zeros))
    else:
        classified = [local_degree(phi, z, radius=radius, resolution=resolution)
                      for z in zeros]

    centers = [z.position for z in classified]
    keep = exclusion_mask(phi.grid, centers, excision)
    rho = masked_unit_density(phi, keep)
    excised = float(sum(z.beta * z.eta for z in classified if z.degree))
    c2 = second_chern_number(rho, mask=keep, excised_charge=excised)
    ledger = charge_ledger(classified, c2.value, tolerance=ledger_tol)
    return LedgerAnalysis(ledger=ledger, c2=c2, search=search,
                          excision_radius=excision)
