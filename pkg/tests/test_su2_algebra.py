import numpy as np
import pytest

from su2topo import su2_algebra as alg
from su2topo.errors import FieldError


def random_hermitian(rng):
    x = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    return 0.5 * (x + x.conj().T)


def random_su2(rng):
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    return (q[0] * alg.IDENTITY2 + 1j * np.einsum("a,aij->ij", q[1:], alg.SIGMA))


def test_generators_are_anti_hermitian_traceless():
    assert alg.is_anti_hermitian(alg.GENERATORS)
    assert alg.is_traceless(alg.GENERATORS)


def test_anticommutator_identity():
    assert alg.anticommutator_residual() <= 1e-15


def test_element_identities_all_tuples():
    res1, res2 = alg.element_identity_residuals()
    assert res1 <= 1e-15
    assert res2 <= 1e-15


def test_self_check_runs():
    alg.self_check(force=True)


def test_clifford_identity_matrix():
    s, v = alg.clifford_decompose(alg.IDENTITY2)
    assert s == pytest.approx(1.0)
    assert np.max(np.abs(v)) < 1e-15


def test_clifford_sigma3():
    s, v = alg.clifford_decompose(alg.SIGMA[2])
    assert abs(s) < 1e-15
    assert np.max(np.abs(v - np.array([0, 0, 1.0]))) < 1e-15


@pytest.mark.parametrize("seed", range(5))
def test_clifford_reconstruction_random_hermitian(seed):
    rng = np.random.default_rng(seed)
    x = random_hermitian(rng)
    s, v = alg.clifford_decompose(x, require_hermitian=True)
    back = alg.clifford_reconstruct(s, v)
    assert np.max(np.abs(back - x)) < 1e-14


def test_clifford_hermitian_flag_rejects():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    with pytest.raises(FieldError):
        alg.clifford_decompose(x, require_hermitian=True)


def test_clifford_batched():
    rng = np.random.default_rng(4)
    x = rng.normal(size=(5, 2, 2)) + 1j * rng.normal(size=(5, 2, 2))
    s, v = alg.clifford_decompose(x)
    back = alg.clifford_reconstruct(s, v)
    assert np.max(np.abs(back - x)) < 1e-14


@pytest.mark.parametrize("seed", range(4))
def test_su2_closure_under_product(seed):
    rng = np.random.default_rng(seed)
    a, b = random_su2(rng), random_su2(rng)
    assert alg.is_su2(a) and alg.is_su2(b)
    assert alg.is_su2(a @ b)


def test_component_matrix_round_trip():
    rng = np.random.default_rng(9)
    v = rng.normal(size=(7, 3))
    mat = alg.matrix_from_components(v)
    assert alg.is_anti_hermitian(mat) and alg.is_traceless(mat)
    back, residue = alg.components_from_matrix(mat)
    assert residue < 1e-14
    assert np.max(np.abs(back - v)) < 1e-14


def test_projection_residual():
    rng = np.random.default_rng(10)
    x = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    y, residual = alg.project_anti_hermitian_traceless(x)
    assert alg.is_anti_hermitian(y) and alg.is_traceless(y)
    assert residual > 0.0
    y2, residual2 = alg.project_anti_hermitian_traceless(y)
    assert residual2 < 1e-15
