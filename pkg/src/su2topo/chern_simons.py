"""Chern-Simons 3-form densities and the knot (Hopf) charge.

Two routes to the same density on a rank-3 chart:

  trace:   w = -1/(16 pi^2) eps^{ijk} [A_i^a d_j A_k^a
                                       - (1/3) eps^{abc} A_i^a A_j^b A_k^c]
  spinor:  w = -1/(4 pi^2)  eps^{ijk} (Psi^dag d_i Psi)(d_j Psi^dag d_k Psi)

and the Abelian (sigma-model) route through m_a = Psi^dag sigma_a Psi:

  H_ij = -m . (d_i m x d_j m),   C_i = i(Psi^dag d_i Psi - d_i Psi^dag Psi)
  Q_fn = 1/(32 pi^2) Integral eps_{ijk} C_i H_jk d^3x

All three integrate to the same integer winding on closed charts; the
pointwise identity (1/4) eps C H = eps Tr(A dA - 2/3 AAA) ties the Abelian
and non-Abelian integrands together.  The spinor and Abelian integrands
are algebraic in first derivatives and therefore exact with jets; the
trace route needs dA by finite differences and carries O(h^2) error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import su2_algebra
from .conventions import ORIENTATION_SIGN
from .decomposition import parallel_gauge_potential
from .errors import FieldError, ReconstructionError
from .fields import GaugeField, SpinorField, sigma_model_field
from .lattice import ScalarField, central_diff, integrate

_CYCLIC3 = ((0, 1, 2), (1, 2, 0), (2, 0, 1))   # even permutations of (0,1,2)


def _eps3_contract(s1: np.ndarray, s2: np.ndarray) -> np.ndarray:
    """eps^{ijk} s1_i s2_{jk} for (*shape, 3) and (*shape, 3, 3) arrays."""
    out = np.zeros(s1.shape[:-1], dtype=np.result_type(s1, s2))
    for i, j, k in _CYCLIC3:
        out += s1[..., i] * (s2[..., j, k] - s2[..., k, j])
    return out


def spinor_cs_values(values: np.ndarray, dvalues: np.ndarray) -> np.ndarray:
    """Raw (complex) spinor Chern-Simons integrand from value/jet arrays."""
    s1 = np.einsum("...c,...ic->...i", np.conj(values), dvalues)
    s2 = np.einsum("...jc,...kc->...jk", np.conj(dvalues), dvalues)
    return -_eps3_contract(s1, s2) / (4.0 * np.pi**2)


def trace_cs_values(a: np.ndarray, da: np.ndarray) -> np.ndarray:
    """Trace-route Chern-Simons integrand from components and derivatives.

    ``a`` has shape (*shape, 3, 3) (axis, color); ``da`` has shape
    (*shape, 3, 3, 3) (derivative axis, axis, color).
    """
    term1 = np.zeros(a.shape[:-2])
    for i, j, k in _CYCLIC3:
        term1 += np.einsum("...a,...a->...", a[..., i, :],
                           da[..., j, k, :] - da[..., k, j, :])
    # eps^{ijk} eps^{abc} A_i^a A_j^b A_k^c = 3! det(A)
    term2 = 6.0 * np.linalg.det(a)
    return -(term1 - term2 / 3.0) / (16.0 * np.pi**2)


@dataclass(frozen=True, eq=False)
class CSDensity:
    """Chern-Simons density samples with their method tag."""

    field: ScalarField
    method: str
    imag_residue: float


def cs_density(psi: SpinorField, gauge: GaugeField | None = None,
               method: str = "spinor") -> CSDensity:
    """Chern-Simons density on a rank-3 chart.

    ``method="spinor"`` uses Psi and its jets only (exact); ``"trace"``
    uses the gauge potential (built from Psi by the parallel condition if
    not supplied) and finite differences for dA.
    """
    grid = psi.grid
    if grid.rank != 3:
        raise FieldError("Chern-Simons densities live on rank-3 charts")
    sign = ORIENTATION_SIGN * grid.orientation
    if method == "spinor":
        if not psi.normalized:
            raise FieldError("spinor-route density requires a normalized spinor")
        raw = sign * spinor_cs_values(psi.values, psi.derivatives())
        residue = float(np.max(np.abs(raw.imag)))
        return CSDensity(ScalarField(grid, raw.real), "spinor", residue)
    if method == "trace":
        if gauge is None:
            gauge = parallel_gauge_potential(psi)
        if gauge.grid != grid:
            raise FieldError("gauge grid differs from spinor grid")
        da = gauge.derivatives()
        raw = sign * trace_cs_values(gauge.values, da)
        return CSDensity(ScalarField(grid, raw), "trace", 0.0)
    raise FieldError(f"unknown Chern-Simons method {method!r}")


def knot_charge(psi: SpinorField, method: str = "spinor",
                gauge: GaugeField | None = None) -> float:
    """Integrated knot charge Q over the chart (integer on closed charts)."""
    return integrate(cs_density(psi, gauge=gauge, method=method).field)


@dataclass(frozen=True, eq=False)
class AbelianData:
    """Abelian potential C_i, curvature pairs H_{ij} (i<j), and diagnostics.

    ``exactness_residual`` is max |d_i C_j - d_j C_i - H_ij| with finite
    differences on C; it must shrink as O(h^2) or the potential choice is
    inconsistent with the curvature.
    """

    c: np.ndarray
    h_pairs: np.ndarray
    exactness_residual: float

    H_PAIRS = ((0, 1), (0, 2), (1, 2))

    def h_matrix(self) -> np.ndarray:
        """Full antisymmetric H_{ij}, shape (*shape, 3, 3)."""
        shape = self.h_pairs.shape[:-1]
        h = np.zeros(shape + (3, 3))
        for idx, (i, j) in enumerate(self.H_PAIRS):
            h[..., i, j] = self.h_pairs[..., idx]
            h[..., j, i] = -self.h_pairs[..., idx]
        return h


def _m_and_derivatives(psi: SpinorField):
    m = sigma_model_field(psi)
    dpsi = psi.derivatives()
    dm = 2.0 * np.einsum("...i,aij,...mj->...ma", np.conj(psi.values),
                         su2_algebra.SIGMA, dpsi).real
    return m.values, dm


def fn_data(psi: SpinorField, residual_factor: float = 50.0):
    """Abelian data and the Faddeev-Niemi charge Q_fn of a normalized spinor.

    Raises when the exactness residual exceeds ``residual_factor * h^2``
    times the curvature scale, which would mean the chosen potential does
    not actually generate H.
    """
    grid = psi.grid
    if grid.rank != 3:
        raise FieldError("the Abelian route lives on rank-3 charts")
    if not psi.normalized:
        raise FieldError("the Abelian route requires a normalized spinor")
    m, dm = _m_and_derivatives(psi)
    dpsi = psi.derivatives()

    berry = np.einsum("...c,...ic->...i", np.conj(psi.values), dpsi)
    c = -2.0 * berry.imag

    cross = np.cross(dm[..., :, None, :], dm[..., None, :, :])
    h_full = -np.einsum("...a,...ija->...ij", m, cross)
    h_pairs = np.stack([h_full[..., i, j] for i, j in AbelianData.H_PAIRS], axis=-1)

    dc = np.stack([central_diff(c, grid, ax) for ax in range(3)], axis=-2)
    curl_res = 0.0
    for idx, (i, j) in enumerate(AbelianData.H_PAIRS):
        curl_res = max(curl_res, float(np.max(np.abs(
            dc[..., i, j] - dc[..., j, i] - h_pairs[..., idx]))))
    h_scale = 1.0 + float(np.max(np.abs(h_pairs)))
    h2 = max(h * h for h in grid.spacing)
    if curl_res > residual_factor * h2 * h_scale:
        raise ReconstructionError(
            f"Abelian potential is not a potential for H: residual {curl_res:.3e}")

    data = AbelianData(c, h_pairs, curl_res)
    integrand = fn_pointwise(data) * (ORIENTATION_SIGN * grid.orientation)
    q_fn = integrate(ScalarField(grid, integrand / (8.0 * np.pi**2)))
    return data, q_fn


def fn_pointwise(data: AbelianData) -> np.ndarray:
    """(1/4) eps_{ijk} C_i H_jk, the Abelian side of the integrand identity."""
    h = data.h_matrix()
    return 0.25 * _eps3_contract(data.c, h)


def trace_pointwise(gauge: GaugeField) -> np.ndarray:
    """eps_{ijk} Tr(A_i d_j A_k - 2/3 A_i A_j A_k), the non-Abelian side."""
    da = gauge.derivatives()
    return 8.0 * np.pi**2 * trace_cs_values(gauge.values, da)
