"""Pauli-matrix constants and exact SU(2) algebra.

Generators follow the anti-Hermitian convention ``T_a = sigma_a / (2i)``;
every other module must take its constants from here so sign conventions
cannot drift.  ``self_check`` replays the algebraic identities the rest of
the package relies on and is executed once per process by the CLI.
"""

from __future__ import annotations

import numpy as np

from .conventions import EPS3
from .errors import FieldError, ReconstructionError

IDENTITY2 = np.eye(2, dtype=np.complex128)

SIGMA = np.array(
    [
        [[0.0, 1.0], [1.0, 0.0]],
        [[0.0, -1.0j], [1.0j, 0.0]],
        [[1.0, 0.0], [0.0, -1.0]],
    ],
    dtype=np.complex128,
)

#: Anti-Hermitian generators T_a = sigma_a / (2i).
GENERATORS = SIGMA / 2.0j

IDENTITY2.setflags(write=False)
SIGMA.setflags(write=False)
GENERATORS.setflags(write=False)


def _maxabs(x) -> float:
    return float(np.max(np.abs(x))) if np.size(x) else 0.0


def is_hermitian(x: np.ndarray, tol: float = 1e-12) -> bool:
    return _maxabs(x - np.conj(np.swapaxes(x, -1, -2))) <= tol


def is_anti_hermitian(x: np.ndarray, tol: float = 1e-12) -> bool:
    return _maxabs(x + np.conj(np.swapaxes(x, -1, -2))) <= tol


def is_traceless(x: np.ndarray, tol: float = 1e-12) -> bool:
    return _maxabs(np.trace(x, axis1=-2, axis2=-1)) <= tol


def is_unitary(x: np.ndarray, tol: float = 1e-12) -> bool:
    prod = np.swapaxes(np.conj(x), -1, -2) @ x
    return _maxabs(prod - IDENTITY2) <= tol


def is_su2(x: np.ndarray, tol: float = 1e-12) -> bool:
    return is_unitary(x, tol) and _maxabs(np.linalg.det(x) - 1.0) <= tol


def clifford_decompose(x: np.ndarray, require_hermitian: bool = False):
    """Split 2x2 matrices over the Clifford basis (I, sigma_a).

    Returns ``(s, v)`` with ``s = Tr(X)/2`` and ``v_a = Tr(X sigma_a)/2``,
    so that ``s*I + v_a*sigma_a`` reassembles ``X``.  Works on any batch of
    matrices with shape ``(..., 2, 2)``.
    """
    x = np.asarray(x, dtype=np.complex128)
    if x.shape[-2:] != (2, 2):
        raise FieldError(f"expected (..., 2, 2) matrices, got {x.shape}")
    if require_hermitian and not is_hermitian(x):
        raise FieldError("matrix is not Hermitian within 1e-12")
    s = 0.5 * np.trace(x, axis1=-2, axis2=-1)
    v = 0.5 * np.einsum("...ij,aji->...a", x, SIGMA)
    return s, v


def clifford_reconstruct(s: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Inverse of :func:`clifford_decompose`."""
    s = np.asarray(s, dtype=np.complex128)
    v = np.asarray(v, dtype=np.complex128)
    return s[..., None, None] * IDENTITY2 + np.einsum("...a,aij->...ij", v, SIGMA)


def matrix_from_components(v: np.ndarray) -> np.ndarray:
    """Anti-Hermitian traceless matrix ``v_a sigma_a / (2i)``."""
    return np.einsum("...a,aij->...ij", np.asarray(v, dtype=np.complex128), GENERATORS)


def components_from_matrix(x: np.ndarray, tol: float = 1e-10):
    """Real components ``v_a`` of an anti-Hermitian traceless matrix.

    Inverse of :func:`matrix_from_components`; returns ``(v, residue)``
    where ``residue`` is the largest imaginary part discarded.
    """
    v = 1.0j * np.einsum("...ij,aji->...a", np.asarray(x, dtype=np.complex128), SIGMA)
    residue = _maxabs(v.imag)
    if residue > tol:
        raise FieldError(f"matrix components have imaginary residue {residue:.3e}")
    return v.real.copy(), residue


def project_anti_hermitian_traceless(x: np.ndarray):
    """Nearest anti-Hermitian traceless matrix and the projection residual."""
    y = 0.5 * (x - np.conj(np.swapaxes(x, -1, -2)))
    tr = np.trace(y, axis1=-2, axis2=-1)
    y = y - 0.5 * tr[..., None, None] * IDENTITY2
    return y, _maxabs(x - y)


def anticommutator_residual() -> float:
    """Largest violation of sigma_a sigma_b + sigma_b sigma_a = 2 delta_ab I."""
    res = 0.0
    for a in range(3):
        for b in range(3):
            anti = SIGMA[a] @ SIGMA[b] + SIGMA[b] @ SIGMA[a]
            res = max(res, _maxabs(anti - 2.0 * (a == b) * IDENTITY2))
    return res


def element_identity_residuals():
    """Violations of the two Pauli element identities.

    First: sigma_a^{ab} sigma_a^{cd} = 2 d_{ad} d_{cb} - d_{ab} d_{cd},
    checked over all 16 index tuples.  Second: the epsilon-weighted triple
    product
    eps_{abc} s_a^{ab} s_b^{cd} s_c^{ef}
      = -2i (d_{af} d_{cb'}... ) over all 64 tuples.
    """
    delta = np.eye(2)
    lhs1 = np.einsum("aij,akl->ijkl", SIGMA, SIGMA)
    rhs1 = 2.0 * np.einsum("il,kj->ijkl", delta, delta) - np.einsum(
        "ij,kl->ijkl", delta, delta)
    res1 = _maxabs(lhs1 - rhs1)

    lhs2 = np.einsum("abc,aij,bkl,cmn->ijklmn", EPS3, SIGMA, SIGMA, SIGMA)
    rhs2 = -2.0j * (
        np.einsum("il,kn,mj->ijklmn", delta, delta, delta)
        - np.einsum("in,ml,kj->ijklmn", delta, delta, delta)
    )
    res2 = _maxabs(lhs2 - rhs2)
    return res1, res2


_CHECKED = False


def self_check(force: bool = False) -> None:
    """Replay the Pauli identities once per process; raises on drift."""
    global _CHECKED
    if _CHECKED and not force:
        return
    res = anticommutator_residual()
    if res > 1e-15:
        raise ReconstructionError(f"anticommutator identity residual {res:.3e}")
    res1, res2 = element_identity_residuals()
    if res1 > 1e-15 or res2 > 1e-15:
        raise ReconstructionError(
            f"Pauli element identity residuals {res1:.3e}, {res2:.3e}")
    _CHECKED = True
