import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncfields.symplectic_core import (
    BLOCK_DIM,
    DeformationKind,
    DeformationParams,
    SymplecticMatrix,
    build_canonical_form,
    build_deformed_form,
    canonicalization_residual,
    commutator_kernel,
    complex_modes,
    coordinate_index,
    deformation_block,
    dressing_map,
    pulled_back_form,
    quantum_commutator_matrix,
    real_blocks,
)

thetas = st.floats(min_value=-20, max_value=20, allow_nan=False)
kinds = st.sampled_from([DeformationKind.E_DEFORMED, DeformationKind.B_DEFORMED])
n_modes = st.integers(min_value=1, max_value=6)


def idx(name, block=0):
    return coordinate_index(block, name)


def test_canonical_single_block():
    form = build_canonical_form(1)
    expected = np.block([[np.zeros((2, 2)), np.eye(2)], [-np.eye(2), np.zeros((2, 2))]])
    np.testing.assert_array_equal(form.omega, expected)
    assert form.bracket[idx("q1"), idx("q2")] == 0.0
    assert form.bracket[idx("q1"), idx("p1")] == 1.0


def test_canonical_three_blocks_is_block_diagonal():
    form = build_canonical_form(3)
    assert form.omega.shape == (12, 12)
    np.testing.assert_array_equal(form.omega, -form.omega.T)
    assert np.all(form.omega[:4, 4:] == 0)
    assert np.all(form.omega[4:8, 8:] == 0)


@pytest.mark.parametrize("bad", [0, -1, 1.5])
def test_n_modes_validation(bad):
    with pytest.raises(ValueError):
        build_canonical_form(bad)


def test_zero_theta_matches_canonical():
    for kind in ("E", "B"):
        form = build_deformed_form(DeformationParams(kind, 0.0), 2)
        np.testing.assert_array_equal(form.omega, build_canonical_form(2).omega)


def test_canonical_kind_ignores_theta():
    form = build_deformed_form(DeformationParams("canonical", 3.0), 1)
    np.testing.assert_array_equal(form.omega, build_canonical_form(1).omega)


def test_e_brackets():
    b = build_deformed_form(DeformationParams.e(0.7), 1).bracket
    assert b[idx("q1"), idx("q2")] == -0.7
    assert b[idx("q2"), idx("q1")] == 0.7
    assert b[idx("p1"), idx("p2")] == 0.0
    np.testing.assert_array_equal(b[:2, 2:], np.eye(2))


def test_b_brackets():
    b = build_deformed_form(DeformationParams.b(0.7), 1).bracket
    assert b[idx("p1"), idx("p2")] == 0.7
    assert b[idx("q1"), idx("q2")] == 0.0
    np.testing.assert_array_equal(b[:2, 2:], np.eye(2))


def test_nonfinite_theta_rejected():
    with pytest.raises(ValueError):
        DeformationParams("E", float("nan"))
    with pytest.raises(ValueError):
        DeformationParams("Z", 1.0)


@settings(max_examples=60, deadline=None)
@given(kind=kinds, theta=thetas, n=n_modes)
def test_form_invariants(kind, theta, n):
    form = build_deformed_form(DeformationParams(kind, theta), n)
    np.testing.assert_array_equal(form.omega, -form.omega.T)
    np.testing.assert_array_equal(form.bracket, -form.bracket.T)
    assert abs(np.linalg.det(form.omega[:4, :4])) > 0
    scale = 1.0 + theta * theta
    np.testing.assert_allclose(form.bracket @ form.omega.T, np.eye(4 * n), atol=1e-12 * scale)


@settings(max_examples=60, deadline=None)
@given(kind=kinds, theta=thetas, n=n_modes)
def test_dressing_round_trip_and_pullback(kind, theta, n):
    params = DeformationParams(kind, theta)
    dm = dressing_map(params, n)
    np.testing.assert_allclose(dm.forward @ dm.inverse, np.eye(4 * n), atol=1e-12)
    assert canonicalization_residual(params, n) < 1e-12


@settings(max_examples=40, deadline=None)
@given(kind=kinds, theta=thetas)
def test_dressed_coordinates_have_canonical_brackets(kind, theta):
    params = DeformationParams(kind, theta)
    f = dressing_map(params, 1).forward
    bracket = f @ build_deformed_form(params, 1).bracket @ f.T
    np.testing.assert_allclose(bracket, build_canonical_form(1).bracket, atol=1e-12)


def test_from_form_matches_exact_bracket():
    for params in (DeformationParams.e(1.3), DeformationParams.b(-0.4)):
        exact = build_deformed_form(params, 2)
        rebuilt = SymplecticMatrix.from_form(exact.omega)
        np.testing.assert_allclose(rebuilt.bracket, exact.bracket, atol=1e-14)


def test_from_form_rejects_bad_input():
    with pytest.raises(ValueError):
        SymplecticMatrix.from_form(np.eye(4))
    with pytest.raises(ValueError):
        SymplecticMatrix.from_form(np.zeros((4, 4)))


def test_dressing_identity_at_zero():
    np.testing.assert_array_equal(dressing_map(DeformationParams.e(0.0)).forward, np.eye(4))


def test_dressing_b_example():
    # P2 = p2 - (theta/2) eps_21 q1 with eps_21 = -1 gives P2 = +1 at theta = 2.
    out = dressing_map(DeformationParams.b(2.0)).apply([1.0, 0.0, 0.0, 0.0])
    np.testing.assert_array_equal(out, [1.0, 0.0, 0.0, 1.0])


def test_dressing_e_example():
    out = dressing_map(DeformationParams.e(2.0)).apply([0.0, 0.0, 1.0, 0.0])
    # Q = q - (E/2) p, E = 2 eps: Q2 = -eps_21 p1 = +1.
    np.testing.assert_array_equal(out, [0.0, 1.0, 1.0, 0.0])


def test_pullback_is_canonical_for_large_theta():
    np.testing.assert_array_equal(
        pulled_back_form(DeformationParams.b(10.0), 3), build_canonical_form(3).omega
    )


def test_deformation_block_positions():
    e = deformation_block(DeformationParams.e(1.0))
    b = deformation_block(DeformationParams.b(1.0))
    assert e.shape == b.shape == (4, 4)
    assert np.any(e[2:, 2:]) and not np.any(e[:2, :2])
    assert np.any(b[:2, :2]) and not np.any(b[2:, 2:])


def test_commutator_matrix_examples():
    c0 = quantum_commutator_matrix(DeformationParams.e(0.0), 1)
    np.testing.assert_array_equal(c0, build_canonical_form(1).bracket)
    ce = quantum_commutator_matrix(DeformationParams.e(0.5), 1)
    assert ce[idx("q1"), idx("q2")] == -0.5
    cb = quantum_commutator_matrix(DeformationParams.b(0.5), 1)
    assert cb[idx("p1"), idx("p2")] == 0.5


def test_real_blocks_round_trip():
    q = np.array([0.3 - 1.2j, 2.0 + 0.5j])
    p = np.array([-1.0j, 0.25])
    re, im = real_blocks(3, q, p)
    q2, p2 = complex_modes(re, im)
    np.testing.assert_allclose(q2, q, atol=1e-15)
    np.testing.assert_allclose(p2, p, atol=1e-15)
    assert len(re.coords) == BLOCK_DIM


def test_real_blocks_zero_mode_is_real():
    with pytest.raises(ValueError):
        real_blocks(0, [1j, 0], [0, 0])


def test_reality_condition_brackets():
    # q_n = (x + i y)/sqrt2 with x, y in identical real blocks: {q1_n, q2_-n} = -theta
    # and {q1_n, q2_n} = 0 for the E-deformation.
    theta = 0.8
    b = build_deformed_form(DeformationParams.e(theta), 1).bracket
    i1, i2 = idx("q1"), idx("q2")
    g_n1 = np.zeros(8, complex)
    g_n1[i1], g_n1[4 + i1] = 1 / math.sqrt(2), 1j / math.sqrt(2)
    g_n2 = np.zeros(8, complex)
    g_n2[i2], g_n2[4 + i2] = 1 / math.sqrt(2), 1j / math.sqrt(2)
    big = np.kron(np.eye(2), b)
    assert abs(g_n1 @ big @ g_n2.conj() - (-theta)) < 1e-15
    assert abs(g_n1 @ big @ g_n2) < 1e-15


def _smooth(y):
    return np.exp(np.sin(y)) + 0.3 * np.cos(2 * y)


def _integrate_kernel(params, which, x, n_max=200, n_grid=4096):
    y = 2 * np.pi * np.arange(n_grid) / n_grid
    k = commutator_kernel(params, x, y, n_max, which)
    return (k * _smooth(y)[:, None, None]).sum(axis=0) * (2 * np.pi / n_grid)


def test_phi_phi_kernel_vanishes_canonically():
    k = commutator_kernel(DeformationParams.e(0.0), 0.4, np.linspace(0, 6, 13), 50, "phi_phi")
    assert np.all(k == 0)


@pytest.mark.parametrize("x", [0.3, 2.0, 5.5])
def test_phi_pi_kernel_reproduces_delta(x):
    val = _integrate_kernel(DeformationParams.b(1.0), "phi_pi", x)
    np.testing.assert_allclose(val, 1j * _smooth(x) * np.eye(2), atol=1e-3)


def test_pi_pi_kernel_b_kind():
    theta = 0.6
    val = _integrate_kernel(DeformationParams.b(theta), "pi_pi", 1.1)
    expected = 1j * theta * _smooth(1.1) * np.array([[0, 1], [-1, 0]])
    np.testing.assert_allclose(val, expected, atol=1e-3)


def test_kernel_rejects_unknown_sector():
    with pytest.raises(ValueError):
        commutator_kernel(DeformationParams.e(1.0), 0.0, 0.0, 10, "pi_phi")
