"""Analytic test configurations with exact jets.

Every generator emits exact first-derivative samples so that ground-truth
charges never depend on finite-difference error; discretization studies
and correctness tests stay decoupled.  Quaternion-valued maps double as
degree-n references: q^n has boundary degree n (negative powers go through
the conjugate, q^-1 = conj(q) on unit quaternions), and products
prod_j (q - c_j) plant zeros at chosen roots.

4-vector fields built here also carry analytic samplers for off-lattice
evaluation, which the zero search uses for machine-precision root
refinement.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import su2_algebra
from .errors import FieldError
from .fields import GaugeField, PhiField, SpinorField, SU2Field, phi_to_spinor
from .lattice import Grid


# --------------------------------------------------------------------------
# quaternion arithmetic on (..., 4) arrays
# --------------------------------------------------------------------------

def qmul(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Hamilton product of quaternion arrays."""
    p0, pv = p[..., 0], p[..., 1:]
    q0, qv = q[..., 0], q[..., 1:]
    out = np.empty(np.broadcast_shapes(p.shape, q.shape))
    out[..., 0] = p0 * q0 - np.sum(pv * qv, axis=-1)
    out[..., 1:] = (p0[..., None] * qv + q0[..., None] * pv
                    + np.cross(pv, qv))
    return out


def qconj(q: np.ndarray) -> np.ndarray:
    out = q.copy()
    out[..., 1:] *= -1.0
    return out


def _qpower_with_jet(q: np.ndarray, dq: np.ndarray, n: int):
    """q^n with product-rule jets; dq has the derivative axis at -2."""
    if n == 0:
        raise FieldError("quaternion power needs n != 0")
    if n < 0:
        q = qconj(q)
        dq = qconj_jet(dq)
        n = -n
    value = q
    jet = dq
    for _ in range(n - 1):
        jet = qmul(dq, value[..., None, :]) + qmul(q[..., None, :], jet)
        value = qmul(q, value)
    return value, jet


def qconj_jet(dq: np.ndarray) -> np.ndarray:
    out = dq.copy()
    out[..., 1:] *= -1.0
    return out


def _qpoly_with_jet(q: np.ndarray, dq: np.ndarray, roots: np.ndarray):
    """Left-ordered product prod_j (q - c_j) with product-rule jets."""
    value = q - roots[0]
    jet = dq
    for root in roots[1:]:
        factor = q - root
        jet = qmul(jet, factor[..., None, :]) + qmul(value[..., None, :], dq)
        value = qmul(value, factor)
    return value, jet


# --------------------------------------------------------------------------
# domains
# --------------------------------------------------------------------------

def s3_chart_grid(resolution) -> Grid:
    """Cell-centered hyperspherical chart of the unit 3-sphere.

    Axis order (chi, theta, phi) over (0,pi) x (0,pi) x (0,2pi), periodic
    in phi only; cell-centering keeps the poles off the sample set.
    """
    if np.isscalar(resolution):
        resolution = (int(resolution),) * 3
    nchi, ntheta, nphi = (int(r) for r in resolution)
    if min(nchi, ntheta, nphi) < 8:
        raise FieldError("chart resolution must be at least 8 per axis")
    return Grid(shape=(nchi, ntheta, nphi), origin=(0.0, 0.0, 0.0),
                spacing=(np.pi / nchi, np.pi / ntheta, 2.0 * np.pi / nphi),
                periodic=(False, False, True), cell_centered=True)


def box_grid(shape, lo, hi, cell_centered: bool = False) -> Grid:
    """Open rectangular box grid with uniform per-axis bounds lists."""
    shape = tuple(int(n) for n in shape)
    lo = np.broadcast_to(np.asarray(lo, dtype=np.float64), (len(shape),))
    hi = np.broadcast_to(np.asarray(hi, dtype=np.float64), (len(shape),))
    spacing = tuple(
        (hi[i] - lo[i]) / (shape[i] if cell_centered else shape[i] - 1)
        for i in range(len(shape)))
    return Grid(shape=shape, origin=tuple(lo), spacing=spacing,
                periodic=(False,) * len(shape), cell_centered=cell_centered)


def s3_unit_vectors(grid: Grid):
    """Chart points as unit 4-vectors with exact chart jets.

    Returns ``(n, dn)`` with shapes ``(*shape, 4)`` and ``(*shape, 3, 4)``.
    """
    chi = grid.coords(0)[:, None, None]
    theta = grid.coords(1)[None, :, None]
    phi = grid.coords(2)[None, None, :]
    shape = grid.shape
    sc, cc = np.sin(chi), np.cos(chi)
    st, ct = np.sin(theta), np.cos(theta)
    sp, cp = np.sin(phi), np.cos(phi)

    n = np.empty(shape + (4,))
    n[..., 0] = np.broadcast_to(cc, shape)
    n[..., 1] = sc * ct
    n[..., 2] = sc * st * cp
    n[..., 3] = sc * st * sp

    dn = np.zeros(shape + (3, 4))
    dn[..., 0, 0] = np.broadcast_to(-sc, shape)
    dn[..., 0, 1] = cc * ct
    dn[..., 0, 2] = cc * st * cp
    dn[..., 0, 3] = cc * st * sp
    dn[..., 1, 1] = -sc * st
    dn[..., 1, 2] = sc * ct * cp
    dn[..., 1, 3] = sc * ct * sp
    dn[..., 2, 2] = -sc * st * sp
    dn[..., 2, 3] = sc * st * cp
    return n, dn


# --------------------------------------------------------------------------
# generators
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class AnalyticConfig:
    """Parameters of a named analytic configuration.

    ``build(grid)`` instantiates the field; parameter validation (power in
    [-4, 4] and nonzero, root separation at least four cell widths) happens
    in the individual generators.
    """

    kind: str
    power: int = 1
    roots: tuple = ()
    matrix: tuple = ()
    shift: tuple = (0.0, 0.0, 0.0, 0.0)
    seed: int = 0

    def build(self, grid: Grid):
        if self.kind == "identity":
            return identity_map_s3(grid.shape)
        if self.kind == "qpower":
            return quaternion_power_field(self.power, grid)
        if self.kind == "qpoly":
            return quaternion_polynomial_field(np.asarray(self.roots), grid)
        if self.kind == "linear":
            matrix = np.asarray(self.matrix) if len(self.matrix) else np.eye(4)
            return linear_phi_field(matrix, self.shift, grid)
        if self.kind in ("spinor", "gauge", "su2"):
            return random_config(self.seed, self.kind, grid)
        raise FieldError(f"unknown configuration kind {self.kind!r}")


def identity_map_s3(resolution=32) -> SpinorField:
    """The canonical unit-norm spinor of the 3-sphere chart (degree +1)."""
    grid = s3_chart_grid(resolution)
    n, dn = s3_unit_vectors(grid)
    phi = PhiField(grid, n, jet=dn)
    return phi_to_spinor(phi)


def quaternion_power_field(n: int, grid: Grid) -> PhiField:
    """phi = q^n with exact jets.

    On a rank-3 chart, q runs over the unit quaternions of the 3-sphere
    (phi stays unit-norm).  On a rank-4 box, q = x0 + x1 i + x2 j + x3 k;
    negative powers use conjugate-quaternion products so the field stays
    polynomial with boundary degree n.
    """
    if n == 0:
        raise FieldError("quaternion power needs n != 0")
    if not -4 <= n <= 4:
        raise FieldError("quaternion power limited to |n| <= 4")
    if grid.rank == 3:
        q, dq = s3_unit_vectors(grid)
        value, jet = _qpower_with_jet(q, dq, n)
        return PhiField(grid, value, jet=jet)
    pts = grid.points()
    dq = np.broadcast_to(np.eye(4), grid.shape + (4, 4)).copy()
    value, jet = _qpower_with_jet(pts, dq, n)

    def sampler(points):
        points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        eye = np.broadcast_to(np.eye(4), points.shape[:-1] + (4, 4)).copy()
        return _qpower_with_jet(points, eye, n)[0]

    def jacobian_sampler(points):
        points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        eye = np.broadcast_to(np.eye(4), points.shape[:-1] + (4, 4)).copy()
        return _qpower_with_jet(points, eye, n)[1]

    return PhiField(grid, value, jet=jet, sampler=sampler,
                    jacobian_sampler=jacobian_sampler)


def quaternion_polynomial_field(roots, grid: Grid) -> PhiField:
    """phi(q) = prod_j (q - c_j), zeros planted at the given quaternions.

    Roots must lie inside the box and be pairwise separated by at least
    four cell widths so the zero search can resolve them.
    """
    if grid.rank != 4:
        raise FieldError("quaternion polynomials need a rank-4 box")
    roots = np.atleast_2d(np.asarray(roots, dtype=np.float64))
    if roots.shape[-1] != 4:
        raise FieldError("roots must be quaternions (4 components)")
    hmax = max(grid.spacing)
    for i in range(len(roots)):
        for ax in range(4):
            lo = grid.coords(ax)[0]
            hi = grid.coords(ax)[-1]
            if not lo < roots[i, ax] < hi:
                raise FieldError(f"root {roots[i]} outside the grid box")
        for j in range(i + 1, len(roots)):
            gap = np.linalg.norm(roots[i] - roots[j])
            if 0.0 < gap < 4.0 * hmax:
                raise FieldError(
                    f"roots {i} and {j} separated by {gap:.3e} < 4 h = {4*hmax:.3e}")

    pts = grid.points()
    dq = np.broadcast_to(np.eye(4), grid.shape + (4, 4)).copy()
    value, jet = _qpoly_with_jet(pts, dq, roots)

    def sampler(points):
        points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        eye = np.broadcast_to(np.eye(4), points.shape[:-1] + (4, 4)).copy()
        return _qpoly_with_jet(points, eye, roots)[0]

    def jacobian_sampler(points):
        points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        eye = np.broadcast_to(np.eye(4), points.shape[:-1] + (4, 4)).copy()
        return _qpoly_with_jet(points, eye, roots)[1]

    return PhiField(grid, value, jet=jet, sampler=sampler,
                    jacobian_sampler=jacobian_sampler)


def linear_phi_field(matrix, shift, grid: Grid) -> PhiField:
    """phi = M (x - c); the canonical regular-zero configuration."""
    if grid.rank != 4:
        raise FieldError("linear 4-vector fields need a rank-4 box")
    matrix = np.asarray(matrix, dtype=np.float64).reshape(4, 4)
    if abs(np.linalg.det(matrix)) < 1e-12:
        raise FieldError("matrix must be nonsingular")
    shift = np.asarray(shift, dtype=np.float64).reshape(4)
    pts = grid.points()
    value = np.einsum("ab,...b->...a", matrix, pts - shift)
    jet = np.broadcast_to(matrix.T[None, None, None, None, :, :],
                          grid.shape + (4, 4)).copy()

    def sampler(points):
        points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        return np.einsum("ab,...b->...a", matrix, points - shift)

    def jacobian_sampler(points):
        points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        return np.broadcast_to(matrix.T, points.shape[:-1] + (4, 4)).copy()

    return PhiField(grid, value, jet=jet, sampler=sampler,
                    jacobian_sampler=jacobian_sampler)


# --------------------------------------------------------------------------
# seeded random band-limited fields
# --------------------------------------------------------------------------

@dataclass
class _TrigChannel:
    """One band-limited trigonometric polynomial over a grid box."""

    freqs: np.ndarray      # (nmodes, rank) angular frequencies
    cos_amp: np.ndarray    # (nmodes,)
    sin_amp: np.ndarray
    const: float

    def evaluate(self, pts: np.ndarray):
        phase = np.einsum("ka,...a->...k", self.freqs, pts)
        c, s = np.cos(phase), np.sin(phase)
        value = self.const + c @ self.cos_amp + s @ self.sin_amp
        coeff = -s * self.cos_amp + c * self.sin_amp        # (..., k)
        jet = np.einsum("...k,ka->...a", coeff, self.freqs)
        return value, jet

    def second_derivatives(self, pts: np.ndarray):
        phase = np.einsum("ka,...a->...k", self.freqs, pts)
        c, s = np.cos(phase), np.sin(phase)
        coeff = -(c * self.cos_amp + s * self.sin_amp)      # (..., k)
        return np.einsum("...k,ka,kb->...ab", coeff, self.freqs, self.freqs)


_GOLDEN = 0.5 * (1.0 + np.sqrt(5.0))


def _random_channel(rng: np.random.Generator, grid: Grid, amplitude: float,
                    nmodes: int = 6, max_mode: int = 2) -> _TrigChannel:
    # Frequencies are deliberately incommensurate with the box (golden-ratio
    # stretch): exactly periodic maps have vanishing net Jacobian volume,
    # which would degenerate volume-vs-boundary comparisons.
    rank = grid.rank
    extent = np.array([grid.axis_extent(i) for i in range(rank)])
    modes = rng.integers(-max_mode, max_mode + 1, size=(nmodes, rank))
    freqs = 2.0 * np.pi * modes / (extent * _GOLDEN)
    cos_amp = rng.normal(size=nmodes)
    sin_amp = rng.normal(size=nmodes)
    scale = amplitude / max(1e-12, np.sum(np.abs(cos_amp)) + np.sum(np.abs(sin_amp)))
    return _TrigChannel(freqs=freqs, cos_amp=cos_amp * scale,
                        sin_amp=sin_amp * scale, const=0.0)


def random_config(seed: int, kind: str, grid: Grid):
    """Seeded smooth random field with exact jets.

    ``kind="spinor"`` keeps the norm at least 0.5 everywhere (the total
    trigonometric amplitude is bounded by construction), ``"gauge"`` emits
    per-axis color components with a jet, and ``"su2"`` builds unitary
    matrices from a normalized random quaternion field, including exact
    second derivatives for jet-carrying products.
    """
    rng = np.random.default_rng(seed)
    pts = grid.points()
    rank = grid.rank

    if kind == "spinor":
        values = np.zeros(grid.shape + (2,), dtype=np.complex128)
        jet = np.zeros(grid.shape + (rank, 2), dtype=np.complex128)
        base = np.array([1.0 + 0.0j, 0.0j])
        for comp in range(2):
            for part, unit in ((0, 1.0), (1, 1.0j)):
                chan = _random_channel(rng, grid, amplitude=0.3)
                v, dv = chan.evaluate(pts)
                values[..., comp] += unit * v
                jet[..., comp] += unit * dv
        values += base
        return SpinorField(grid, values, jet=jet)

    if kind == "gauge":
        values = np.zeros(grid.shape + (rank, 3))
        jet = np.zeros(grid.shape + (rank, rank, 3))
        for mu in range(rank):
            for a in range(3):
                chan = _random_channel(rng, grid, amplitude=0.8)
                v, dv = chan.evaluate(pts)
                values[..., mu, a] = v
                jet[..., mu, a] = dv
        return GaugeField(grid, values, jet=jet)

    if kind == "su2":
        p = np.zeros(grid.shape + (4,))
        dp = np.zeros(grid.shape + (rank, 4))
        d2p = np.zeros(grid.shape + (rank, rank, 4))
        channels = [_random_channel(rng, grid, amplitude=0.5) for _ in range(4)]
        for a, chan in enumerate(channels):
            v, dv = chan.evaluate(pts)
            p[..., a] = v
            dp[..., a] = dv
            d2p[..., a] = chan.second_derivatives(pts)
        p[..., 0] += 2.0

        r = np.linalg.norm(p, axis=-1)
        q = p / r[..., None]
        pdp = np.einsum("...a,...ma->...m", p, dp)
        dq = dp / r[..., None, None] - p[..., None, :] * (pdp / r[..., None] ** 3)[..., None]

        # second derivative of p/|p| by the quotient rule
        dpdp = np.einsum("...ma,...na->...mn", dp, dp)
        pd2p = np.einsum("...a,...mna->...mn", p, d2p)
        g = pdp / r[..., None] ** 3                     # (..., m)
        d2q = (d2p / r[..., None, None, None]
               - dp[..., :, None, :] * g[..., None, :, None]
               - dp[..., None, :, :] * g[..., :, None, None]
               - p[..., None, None, :] * ((dpdp + pd2p) / r[..., None, None] ** 3)[..., None]
               + 3.0 * p[..., None, None, :]
               * (pdp[..., :, None] * pdp[..., None, :] / r[..., None, None] ** 5)[..., None])

        basis = np.zeros((4, 2, 2), dtype=np.complex128)
        basis[0] = su2_algebra.IDENTITY2
        basis[1:] = 1.0j * su2_algebra.SIGMA
        values = np.einsum("...a,aij->...ij", q, basis)
        jet = np.einsum("...ma,aij->...mij", dq, basis)
        jet2 = np.einsum("...mna,aij->...mnij", d2q, basis)
        return SU2Field(grid, values, jet=jet, jet2=jet2)

    raise FieldError(f"unknown random field kind {kind!r}")
