import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ylesim.model import (
    DenseGuardError,
    ModelError,
    ModelParams,
    build_hamiltonian,
    global_spin_flip,
    magnetization_operator,
    product_state_vector,
    site_operator,
)


def test_single_spin_matrix():
    H = build_hamiltonian(ModelParams(1, J=1.0, h_x=1.5, gamma=0.5))
    expected = np.array([[0.5j, -1.5], [-1.5, -0.5j]])
    np.testing.assert_allclose(H, expected, atol=1e-15)


def test_two_site_pure_bond():
    H = build_hamiltonian(ModelParams(2, J=1.0, h_x=0.0, gamma=0.0))
    np.testing.assert_allclose(H, np.diag([-1.0, 1.0, 1.0, -1.0]), atol=1e-15)


def test_l8_trace_and_pt_conjugation():
    H = build_hamiltonian(ModelParams(8, J=1.0, h_x=1.5, gamma=0.1))
    assert H.shape == (256, 256)
    assert abs(np.trace(H)) <= 1e-12 * np.max(np.abs(H)) * 256
    X = global_spin_flip(8)
    assert np.max(np.abs(X @ H.conj() @ X - H)) == 0.0


def test_site_operator_basics():
    np.testing.assert_allclose(site_operator("x", 1, 1), [[0, 1], [1, 0]])
    np.testing.assert_allclose(site_operator("z", 2, 2), np.diag([1, -1, 1, -1]))
    sq = site_operator("x", 2, 2) @ site_operator("x", 2, 2)
    np.testing.assert_allclose(sq, np.eye(4), atol=1e-15)


def test_site_operator_range_errors():
    with pytest.raises(ModelError):
        site_operator("x", 0, 4)
    with pytest.raises(ModelError):
        site_operator("z", 5, 4)
    with pytest.raises(ModelError):
        site_operator("w", 1, 2)


def test_magnetization_operator():
    np.testing.assert_allclose(magnetization_operator("z", 1), np.diag([1.0, -1.0]))
    mx2 = magnetization_operator("x", 2)
    plus = np.full(4, 0.5)
    assert np.vdot(plus, mx2 @ plus) == pytest.approx(1.0)
    mz8 = magnetization_operator("z", 8)
    down = product_state_vector(8, "all-down")
    assert np.vdot(down, mz8 @ down).real == pytest.approx(-1.0)
    evals = np.linalg.eigvalsh(magnetization_operator("x", 4))
    assert evals.min() >= -1.0 - 1e-12 and evals.max() <= 1.0 + 1e-12


def test_param_validation():
    with pytest.raises(ModelError):
        ModelParams(0)
    with pytest.raises(ModelError):
        ModelParams(4, boundary="periodic")
    with pytest.raises(ModelError):
        ModelParams(4, h_x=float("nan"))
    with pytest.raises(ModelError):
        ModelParams(4, gamma=-0.1)
    with pytest.raises(DenseGuardError):
        build_hamiltonian(ModelParams(15))


def test_product_state_vectors():
    down = product_state_vector(8, "all-down")
    assert np.argmax(np.abs(down)) == 255 and down[255] == 1.0
    y = product_state_vector(1, "y-left")
    sigma_y = np.array([[0, -1j], [1j, 0]])
    assert np.vdot(y, sigma_y @ y).real == pytest.approx(-1.0)


@settings(max_examples=30, deadline=None)
@given(
    L=st.integers(min_value=1, max_value=6),
    J=st.floats(-2, 2, allow_nan=False),
    h_x=st.floats(-2, 2, allow_nan=False),
    gamma=st.floats(0, 1, allow_nan=False),
)
def test_structure_properties(L, J, h_x, gamma):
    p = ModelParams(L, J, h_x, gamma)
    H = build_hamiltonian(p)
    scale = max(np.max(np.abs(H)), 1.0)
    # traceless, PT-conjugation, and the Hermitian/anti-Hermitian split
    assert abs(np.trace(H)) <= 1e-14 * scale * 2**L
    X = global_spin_flip(L)
    assert np.max(np.abs(X @ H.conj() @ X - H)) <= 1e-14 * scale
    herm = (H + H.conj().T) / 2
    anti = (H - H.conj().T) / 2
    np.testing.assert_allclose(
        herm, build_hamiltonian(ModelParams(L, J, h_x, 0.0)), atol=1e-14 * scale
    )
    z_total = sum(site_operator("z", j, L) for j in range(1, L + 1))
    np.testing.assert_allclose(anti, 1j * gamma * z_total, atol=1e-14 * scale)
    if gamma == 0.0:
        assert np.max(np.abs(H - H.conj().T)) <= 1e-14 * scale
