"""Field containers and representation conversions.

A spinor sample Psi = (Psi1, Psi2) is equivalent to four real components
(phi0, phi1, phi2, phi3) via Psi1 = phi0 + i phi1, Psi2 = phi2 + i phi3.
Normalizing phi gives the unit 4-vector n, and a normalized spinor projects
onto the unit 3-vector m_a = Psi^dag sigma_a Psi.

Every container optionally carries a "jet": exact first-derivative samples,
one per grid axis per site.  Identities that are algebraic in a field and
its first derivatives are then testable at machine epsilon instead of
hiding behind O(h^2) discretization error.  Fields are immutable after
construction and safe to share across workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import su2_algebra
from .errors import FieldError, NormalizationError
from .lattice import Grid, derivative_stack

NORM_TOL = 1e-10


def _frozen(values: np.ndarray, dtype) -> np.ndarray:
    out = np.asarray(values, dtype=dtype).copy()
    out.setflags(write=False)
    return out


def _check_samples(name: str, values: np.ndarray, grid: Grid, comp_shape: tuple):
    expected = grid.shape + comp_shape
    if values.shape != expected:
        raise FieldError(f"{name} shape {values.shape} != {expected}")
    if not np.all(np.isfinite(values.view(np.float64))):
        raise FieldError(f"{name} contains non-finite samples")


def _check_jet(name: str, jet, grid: Grid, comp_shape: tuple):
    if jet is None:
        return
    expected = grid.shape + (grid.rank,) + comp_shape
    if jet.shape != expected:
        raise FieldError(f"{name} jet shape {jet.shape} != {expected}")


@dataclass(frozen=True, eq=False)
class SpinorField:
    """Two complex components per site, optionally with exact jets."""

    grid: Grid
    values: np.ndarray
    jet: np.ndarray | None = None
    normalized: bool = False

    def __post_init__(self):
        values = _frozen(self.values, np.complex128)
        _check_samples("spinor", values, self.grid, (2,))
        object.__setattr__(self, "values", values)
        if self.jet is not None:
            jet = _frozen(self.jet, np.complex128)
            _check_jet("spinor", jet, self.grid, (2,))
            object.__setattr__(self, "jet", jet)
        if self.normalized:
            dev = np.max(np.abs(norm_squared(self) - 1.0))
            if dev > NORM_TOL:
                raise FieldError(
                    f"spinor flagged normalized but |Psi|^2 deviates by {dev:.3e}")

    def derivatives(self, order: int = 2) -> np.ndarray:
        """Jet if present, else finite differences; shape (*shape, rank, 2)."""
        if self.jet is not None:
            return self.jet
        return derivative_stack(self.values, self.grid, order)

    @property
    def has_jet(self) -> bool:
        return self.jet is not None


@dataclass(frozen=True, eq=False)
class PhiField:
    """Four real components per site; the raw (unnormalized) 4-vector field.

    Generator-built fields may attach analytic samplers: ``sampler`` maps
    points ``(n, rank)`` to values ``(n, 4)``, ``jacobian_sampler`` to
    derivative stacks ``(n, rank, 4)``.  Samplers never affect lattice
    data; they only sharpen off-lattice evaluation (zero refinement and
    sphere sampling).
    """

    grid: Grid
    values: np.ndarray
    jet: np.ndarray | None = None
    sampler: object = field(default=None, repr=False, compare=False)
    jacobian_sampler: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        values = _frozen(self.values, np.float64)
        _check_samples("phi", values, self.grid, (4,))
        object.__setattr__(self, "values", values)
        if self.jet is not None:
            jet = _frozen(self.jet, np.float64)
            _check_jet("phi", jet, self.grid, (4,))
            object.__setattr__(self, "jet", jet)

    def derivatives(self, order: int = 2) -> np.ndarray:
        if self.jet is not None:
            return self.jet
        return derivative_stack(self.values, self.grid, order)

    @property
    def has_jet(self) -> bool:
        return self.jet is not None


@dataclass(frozen=True, eq=False)
class UnitField:
    """Unit 4-vector per site (normalized phi)."""

    grid: Grid
    values: np.ndarray
    jet: np.ndarray | None = None

    def __post_init__(self):
        values = _frozen(self.values, np.float64)
        _check_samples("unit vector", values, self.grid, (4,))
        dev = np.max(np.abs(np.sum(values * values, axis=-1) - 1.0))
        if dev > NORM_TOL:
            raise FieldError(f"unit field norm deviates by {dev:.3e}")
        object.__setattr__(self, "values", values)
        if self.jet is not None:
            jet = _frozen(self.jet, np.float64)
            _check_jet("unit vector", jet, self.grid, (4,))
            object.__setattr__(self, "jet", jet)

    def derivatives(self, order: int = 2) -> np.ndarray:
        if self.jet is not None:
            return self.jet
        return derivative_stack(self.values, self.grid, order)

    @property
    def has_jet(self) -> bool:
        return self.jet is not None


@dataclass(frozen=True, eq=False)
class MField:
    """Unit 3-vector per site (sigma-model projection of a unit spinor)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = _frozen(self.values, np.float64)
        _check_samples("m field", values, self.grid, (3,))
        dev = np.max(np.abs(np.sum(values * values, axis=-1) - 1.0))
        if dev > 1e-10:
            raise FieldError(f"m field norm deviates by {dev:.3e}")
        object.__setattr__(self, "values", values)


@dataclass(frozen=True, eq=False)
class GaugeField:
    """Real components A[mu][a] per site; matrix form A_mu^a sigma_a/(2i).

    The optional jet stores exact derivative samples d_nu A_mu^a with
    shape ``(*shape, rank, rank, 3)`` (derivative axis first).
    """

    grid: Grid
    values: np.ndarray
    jet: np.ndarray | None = None

    def __post_init__(self):
        values = _frozen(self.values, np.float64)
        _check_samples("gauge field", values, self.grid, (self.grid.rank, 3))
        object.__setattr__(self, "values", values)
        if self.jet is not None:
            jet = _frozen(self.jet, np.float64)
            _check_jet("gauge field", jet, self.grid, (self.grid.rank, 3))
            object.__setattr__(self, "jet", jet)

    def matrices(self) -> np.ndarray:
        """Anti-Hermitian traceless matrices, shape (*shape, rank, 2, 2)."""
        return su2_algebra.matrix_from_components(self.values)

    def derivatives(self, order: int = 2) -> np.ndarray:
        if self.jet is not None:
            return self.jet
        return derivative_stack(self.values, self.grid, order)

    @property
    def has_jet(self) -> bool:
        return self.jet is not None


@dataclass(frozen=True, eq=False)
class SU2Field:
    """One SU(2) matrix per site.

    ``jet2`` optionally stores exact symmetric second derivatives
    ``(*shape, rank, rank, 2, 2)``; it is needed only where a product of
    transformed fields must itself carry an exact jet.
    """

    grid: Grid
    values: np.ndarray
    jet: np.ndarray | None = None
    jet2: np.ndarray | None = None

    def __post_init__(self):
        values = _frozen(self.values, np.complex128)
        _check_samples("su2 field", values, self.grid, (2, 2))
        if not su2_algebra.is_su2(values):
            raise FieldError("su2 field entries violate S^dag S = I, det S = 1")
        object.__setattr__(self, "values", values)
        if self.jet is not None:
            jet = _frozen(self.jet, np.complex128)
            _check_jet("su2 field", jet, self.grid, (2, 2))
            object.__setattr__(self, "jet", jet)
        if self.jet2 is not None:
            jet2 = _frozen(self.jet2, np.complex128)
            expected = self.grid.shape + (self.grid.rank, self.grid.rank, 2, 2)
            if jet2.shape != expected:
                raise FieldError(f"su2 jet2 shape {jet2.shape} != {expected}")
            object.__setattr__(self, "jet2", jet2)

    def derivatives(self, order: int = 2) -> np.ndarray:
        if self.jet is not None:
            return self.jet
        return derivative_stack(self.values, self.grid, order)

    @property
    def has_jet(self) -> bool:
        return self.jet is not None


def norm_squared(psi: SpinorField) -> np.ndarray:
    """Pointwise Psi^dag Psi (real, equals phi_a phi_a)."""
    return np.sum(np.abs(psi.values) ** 2, axis=-1)


def _worst_site(norms: np.ndarray, eps_zero: float):
    site = np.unravel_index(int(np.argmin(norms)), norms.shape)
    return site, float(norms[site])


def normalize(psi: SpinorField, eps_zero: float = 1e-12) -> SpinorField:
    """Rescale to unit norm, transporting the jet by the quotient rule.

    Raises :class:`NormalizationError` with the offending site when the
    norm drops below ``eps_zero``: a vanishing spinor marks a zero of the
    4-vector field, which carries topological charge and must be excluded
    or re-gridded by the caller, never clamped.
    """
    norms = np.sqrt(norm_squared(psi))
    if np.min(norms) < eps_zero:
        site, val = _worst_site(norms, eps_zero)
        raise NormalizationError(
            f"spinor norm {val:.3e} < {eps_zero:.1e} at site {site}", site=site)
    values = psi.values / norms[..., None]
    jet = None
    if psi.jet is not None:
        dnorm = np.einsum("...c,...mc->...m", np.conj(psi.values), psi.jet).real / norms[..., None]
        jet = (psi.jet / norms[..., None, None]
               - psi.values[..., None, :] * (dnorm / norms[..., None] ** 2)[..., None])
    return SpinorField(psi.grid, values, jet=jet, normalized=True)


def spinor_to_phi(psi: SpinorField) -> PhiField:
    """Real 4-vector components (Re Psi1, Im Psi1, Re Psi2, Im Psi2)."""
    values = np.empty(psi.grid.shape + (4,))
    values[..., 0] = psi.values[..., 0].real
    values[..., 1] = psi.values[..., 0].imag
    values[..., 2] = psi.values[..., 1].real
    values[..., 3] = psi.values[..., 1].imag
    jet = None
    if psi.jet is not None:
        jet = np.empty(psi.grid.shape + (psi.grid.rank, 4))
        jet[..., 0] = psi.jet[..., 0].real
        jet[..., 1] = psi.jet[..., 0].imag
        jet[..., 2] = psi.jet[..., 1].real
        jet[..., 3] = psi.jet[..., 1].imag
    return PhiField(psi.grid, values, jet=jet)


def phi_to_spinor(phi: PhiField) -> SpinorField:
    """Exact inverse of :func:`spinor_to_phi`."""
    values = np.empty(phi.grid.shape + (2,), dtype=np.complex128)
    values[..., 0] = phi.values[..., 0] + 1j * phi.values[..., 1]
    values[..., 1] = phi.values[..., 2] + 1j * phi.values[..., 3]
    jet = None
    if phi.jet is not None:
        jet = np.empty(phi.grid.shape + (phi.grid.rank, 2), dtype=np.complex128)
        jet[..., 0] = phi.jet[..., 0] + 1j * phi.jet[..., 1]
        jet[..., 1] = phi.jet[..., 2] + 1j * phi.jet[..., 3]
    norms = np.sum(values.real**2 + values.imag**2, axis=-1)
    normalized = bool(np.max(np.abs(norms - 1.0)) <= NORM_TOL)
    return SpinorField(phi.grid, values, jet=jet, normalized=normalized)


def unit_vector(phi: PhiField, eps_zero: float = 1e-12) -> UnitField:
    """n = phi / |phi| with quotient-rule jets.

    Zero points of phi are the singular points of n; sites below
    ``eps_zero`` raise :class:`NormalizationError`.
    """
    norms = np.linalg.norm(phi.values, axis=-1)
    if np.min(norms) < eps_zero:
        site, val = _worst_site(norms, eps_zero)
        raise NormalizationError(
            f"phi norm {val:.3e} < {eps_zero:.1e} at site {site}", site=site)
    values = phi.values / norms[..., None]
    jet = None
    if phi.jet is not None:
        radial = np.einsum("...a,...ma->...m", phi.values, phi.jet)
        jet = (phi.jet / norms[..., None, None]
               - phi.values[..., None, :] * (radial / norms[..., None] ** 3)[..., None])
    return UnitField(phi.grid, values, jet=jet)


def sigma_model_field(psi: SpinorField, imag_tol: float = 1e-12) -> MField:
    """m_a = Psi^dag sigma_a Psi for a normalized spinor.

    The imaginary residue of the bilinear is a data-corruption indicator
    and raises above ``imag_tol``.
    """
    if not psi.normalized:
        raise FieldError("sigma-model projection requires a normalized spinor")
    m = np.einsum("...i,aij,...j->...a", np.conj(psi.values), su2_algebra.SIGMA,
                  psi.values)
    residue = float(np.max(np.abs(m.imag)))
    if residue > imag_tol:
        raise FieldError(f"m field imaginary residue {residue:.3e} > {imag_tol:.1e}")
    return MField(psi.grid, m.real)


def gauge_components(matrices: np.ndarray, grid: Grid, jet=None) -> GaugeField:
    """Project matrices to anti-Hermitian traceless form and componentize."""
    projected, _ = su2_algebra.project_anti_hermitian_traceless(matrices)
    comps, _ = su2_algebra.components_from_matrix(projected)
    return GaugeField(grid, comps, jet=jet)


def su2_product(s2: SU2Field, s1: SU2Field) -> SU2Field:
    """Pointwise product S2 S1 with product-rule jets."""
    values = s2.values @ s1.values
    jet = None
    if s2.jet is not None and s1.jet is not None:
        jet = s2.jet @ s1.values[..., None, :, :] + s2.values[..., None, :, :] @ s1.jet
    return SU2Field(s2.grid, values, jet=jet)


def su2_dagger(s: SU2Field) -> SU2Field:
    """Pointwise Hermitian conjugate with conjugated jets."""
    dag = np.conj(np.swapaxes(s.values, -1, -2))
    jet = None if s.jet is None else np.conj(np.swapaxes(s.jet, -1, -2))
    jet2 = None if s.jet2 is None else np.conj(np.swapaxes(s.jet2, -1, -2))
    return SU2Field(s.grid, dag, jet=jet, jet2=jet2)


def gauge_transform(psi: SpinorField, gauge: GaugeField, s: SU2Field):
    """Apply Psi -> S Psi, A -> S A S^dag + (dS) S^dag.

    The transformed matrices are re-projected to exact anti-Hermitian
    traceless form; the projection residual is returned and stays below
    1e-10 when S carries an exact jet.  When both the gauge field jet and
    the second-derivative samples of S are available, the transformed
    gauge field carries an exact jet as well.

    Returns ``(psi', gauge', projection_residual)``.
    """
    if psi.grid is not s.grid and psi.grid != s.grid:
        raise FieldError("spinor and transformation grids differ")
    ds = s.derivatives()
    sdag = np.conj(np.swapaxes(s.values, -1, -2))

    new_values = np.einsum("...ij,...j->...i", s.values, psi.values)
    new_jet = None
    if psi.jet is not None:
        new_jet = (np.einsum("...mij,...j->...mi", ds, psi.values)
                   + np.einsum("...ij,...mj->...mi", s.values, psi.jet))
    psi_out = SpinorField(psi.grid, new_values, jet=new_jet, normalized=psi.normalized)

    amat = gauge.matrices()
    transformed = (s.values[..., None, :, :] @ amat @ sdag[..., None, :, :]
                   + ds @ sdag[..., None, :, :])
    projected, residual = su2_algebra.project_anti_hermitian_traceless(transformed)
    comps, _ = su2_algebra.components_from_matrix(projected)

    new_gjet = None
    if gauge.jet is not None and s.jet is not None and s.jet2 is not None:
        da = su2_algebra.matrix_from_components(gauge.jet)  # (*s, n, m, 2, 2)
        dsdag = np.conj(np.swapaxes(s.jet, -1, -2))
        s_b = s.values[..., None, None, :, :]
        sd_b = sdag[..., None, None, :, :]
        ds_n = ds[..., :, None, :, :]        # derivative axis n
        ds_m = ds[..., None, :, :, :]        # gauge axis m
        dsd_n = dsdag[..., :, None, :, :]
        a_b = amat[..., None, :, :, :]
        dmat = (ds_n @ a_b @ sd_b + s_b @ da @ sd_b + s_b @ a_b @ dsd_n
                + s.jet2 @ sd_b + ds_m @ dsd_n)
        dproj, _ = su2_algebra.project_anti_hermitian_traceless(dmat)
        new_gjet, _ = su2_algebra.components_from_matrix(dproj)

    gauge_out = GaugeField(gauge.grid, comps, jet=new_gjet)
    return psi_out, gauge_out, residual


def pure_gauge_potential(s: SU2Field) -> GaugeField:
    """The flat potential (dS) S^dag of a transformation field."""
    ds = s.derivatives()
    sdag = np.conj(np.swapaxes(s.values, -1, -2))
    matrices = ds @ sdag[..., None, :, :]
    projected, _ = su2_algebra.project_anti_hermitian_traceless(matrices)
    comps, _ = su2_algebra.components_from_matrix(projected)
    return GaugeField(s.grid, comps)


def face_restrict(psi: SpinorField, axis: int, side: int) -> SpinorField:
    """Restrict a rank-4 spinor to one boundary face of an open axis.

    ``side`` is 0 for the low face, 1 for the high face.  Jets keep only
    the in-face derivative components.  Faces of vertex-centered grids lie
    exactly on the domain boundary, as boundary-flux sums require.
    """
    grid = psi.grid
    if grid.periodic[axis]:
        raise FieldError("boundary faces exist only on open axes")
    index = 0 if side == 0 else grid.shape[axis] - 1
    face_grid = grid.drop_axis(axis)
    values = np.take(psi.values, index, axis=axis)
    jet = None
    if psi.jet is not None:
        keep = [i for i in range(grid.rank) if i != axis]
        jet = np.take(psi.jet, index, axis=axis)[..., keep, :]
    return SpinorField(face_grid, values, jet=jet, normalized=psi.normalized)
