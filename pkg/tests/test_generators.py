import numpy as np
import pytest

import su2topo as st
from su2topo import FieldError
from su2topo.lattice import derivative_stack


def test_identity_map_unit_norm_and_jets():
    psi = st.identity_map_s3(12)
    assert psi.normalized
    norms = st.norm_squared(psi)
    assert np.max(np.abs(norms - 1.0)) < 1e-14
    assert psi.jet is not None


def test_identity_map_is_calibration_configuration():
    psi = st.identity_map_s3(24)
    q = st.knot_charge(psi, method="spinor")
    assert abs(q - 1.0) < 5e-3
    assert q > 0.0   # the calibration fixes the sign, not just the modulus


def test_identity_map_hopf_projection():
    psi = st.identity_map_s3(12)
    m = st.sigma_model_field(psi)
    assert np.max(np.abs(np.sum(m.values**2, axis=-1) - 1.0)) < 1e-12


def test_quaternion_power_one_equals_linear():
    grid = st.box_grid((8, 8, 8, 8), -1.0, 1.0)
    power = st.quaternion_power_field(1, grid)
    linear = st.linear_phi_field(np.eye(4), np.zeros(4), grid)
    assert np.array_equal(power.values, linear.values)
    assert np.array_equal(power.jet, linear.jet)


def test_quaternion_square_fixed_point():
    grid = st.box_grid((9, 8, 8, 8), -1.5, 1.5)
    phi = st.quaternion_power_field(2, grid)
    probe = phi.sampler(np.array([[1.0, 0.0, 0.0, 0.0]]))[0]
    assert np.allclose(probe, [1.0, 0.0, 0.0, 0.0])


def test_quaternion_power_unit_norm_on_chart():
    grid = st.s3_chart_grid(12)
    for n in (-2, 3):
        phi = st.quaternion_power_field(n, grid)
        norms = np.sum(phi.values**2, axis=-1)
        assert np.max(np.abs(norms - 1.0)) < 1e-12


def test_quaternion_power_boundary_degree():
    grid = st.box_grid((12, 12, 12, 12), -1.0, 1.0)
    for n in (2, -2):
        phi = st.quaternion_power_field(n, grid)
        degree, _, dev = st.surface_degree(phi.sampler, np.zeros(4), 0.5)
        assert degree == n
        assert dev < 0.1


def test_quaternion_power_rejects_zero():
    grid = st.box_grid((8, 8, 8, 8), -1.0, 1.0)
    with pytest.raises(FieldError):
        st.quaternion_power_field(0, grid)


def test_quaternion_polynomial_single_root():
    grid = st.box_grid((12, 12, 12, 12), -1.0, 1.0)
    root = np.array([[0.21, -0.17, 0.09, 0.03]])
    phi = st.quaternion_polynomial_field(root, grid)
    search = st.locate_zeros(phi)
    assert len(search.zeros) == 1
    zero = st.local_degree(phi, search.zeros[0])
    assert (zero.degree, zero.beta, zero.eta) == (1, 1, 1)


def test_quaternion_polynomial_repeated_root_degree_two():
    grid = st.box_grid((14, 14, 14, 14), -1.0, 1.0)
    c = np.array([0.05, -0.03, 0.01, 0.02])
    phi = st.quaternion_polynomial_field(np.array([c, c]), grid)
    search = st.locate_zeros(phi)
    assert len(search.zeros) == 1
    zero = st.local_degree(phi, search.zeros[0])
    assert zero.degree == 2
    assert zero.degenerate


def test_quaternion_polynomial_separation_guard():
    grid = st.box_grid((12, 12, 12, 12), -1.0, 1.0)
    h = max(grid.spacing)
    roots = np.array([[0.0, 0.0, 0.0, 0.0], [2.0 * h, 0.0, 0.0, 0.0]])
    with pytest.raises(FieldError):
        st.quaternion_polynomial_field(roots, grid)


def test_quaternion_polynomial_root_outside_box():
    grid = st.box_grid((12, 12, 12, 12), -1.0, 1.0)
    with pytest.raises(FieldError):
        st.quaternion_polynomial_field(np.array([[2.0, 0.0, 0.0, 0.0]]), grid)


def test_linear_field_negative_determinant():
    grid = st.box_grid((12, 12, 12, 12), -1.0, 1.0)
    m = np.diag([-1.0, 1.0, 1.0, 1.0])
    phi = st.linear_phi_field(m, np.zeros(4), grid)
    zero = st.local_degree(phi, st.locate_zeros(phi).zeros[0])
    assert zero.eta == -1


def test_linear_field_zero_and_jacobian():
    rng = np.random.default_rng(3)
    m = rng.normal(size=(4, 4)) + 2.0 * np.eye(4)
    c = np.array([0.11, -0.07, 0.02, 0.05])
    grid = st.box_grid((12, 12, 12, 12), -1.0, 1.0)
    phi = st.linear_phi_field(m, c, grid)
    zero = st.locate_zeros(phi).zeros[0]
    assert np.max(np.abs(np.array(zero.position) - c)) < 1e-10
    det = np.linalg.det(m)
    assert abs(zero.jacobian - det) < 1e-12 * abs(det)


def test_linear_field_rejects_singular_matrix():
    grid = st.box_grid((8, 8, 8, 8), -1.0, 1.0)
    m = np.eye(4)
    m[3, 3] = 0.0
    with pytest.raises(FieldError):
        st.linear_phi_field(m, np.zeros(4), grid)


def test_random_config_deterministic():
    grid = st.box_grid((6, 6, 6, 6), -1.0, 1.0)
    a = st.random_config(123, "spinor", grid)
    b = st.random_config(123, "spinor", grid)
    assert np.array_equal(a.values, b.values)
    assert np.array_equal(a.jet, b.jet)


def test_random_spinor_norm_bound():
    grid = st.box_grid((8, 8, 8, 8), -1.0, 1.0)
    for seed in range(5):
        psi = st.random_config(seed, "spinor", grid)
        assert np.min(np.sqrt(st.norm_squared(psi))) >= 0.5


def test_random_su2_satisfies_invariants():
    grid = st.box_grid((6, 6, 6, 6), -1.0, 1.0)
    s = st.random_config(7, "su2", grid)
    from su2topo.su2_algebra import is_su2
    assert is_su2(s.values)
    assert s.jet is not None and s.jet2 is not None


@pytest.mark.parametrize("kind", ["spinor", "gauge", "su2"])
def test_random_jets_match_finite_differences(kind):
    constants = {}
    for n in (8, 16):
        grid = st.box_grid((n, n, n, n), -1.0, 1.0)
        field = st.random_config(11, kind, grid)
        fd = derivative_stack(field.values, grid)
        interior = (slice(2, -2),) * 4
        err = np.max(np.abs((fd - field.jet)[interior]))
        constants[n] = err / max(grid.spacing) ** 2
    assert constants[8] / constants[16] < 2.0
    assert constants[16] / constants[8] < 2.0


def test_su2_jet2_matches_fd_of_jet():
    grid = st.box_grid((10, 10, 10, 10), -1.0, 1.0)
    s = st.random_config(13, "su2", grid)
    fd_of_jet = derivative_stack(s.jet, grid)   # (*s, n, m, 2, 2)
    interior = (slice(2, -2),) * 4
    err = np.max(np.abs((fd_of_jet - s.jet2)[interior]))
    assert err < 60.0 * max(grid.spacing) ** 2
