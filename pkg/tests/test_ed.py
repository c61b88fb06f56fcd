import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ylesim import ed
from ylesim.model import ModelParams, build_hamiltonian

# Frozen outputs of the independent 4x4 oracle (characteristic polynomial by
# Faddeev-LeVerrier, roots, inverse iteration) for L=2, J=1, h_x=1.5, gamma=0.1.
ORACLE_L2_EG = -3.1500462692511415
ORACLE_L2_MX = 0.944196871595396
# Bisection on the 4x4 roots: smallest gamma where the two lowest-Re
# eigenvalues acquire |Im| > 1e-10 (L=2, J=1, h_x=1.5).
ORACLE_L2_PT_GAMMA = 0.7071067811865461


def test_eigendecompose_diagonal():
    spec = ed.eigendecompose(np.diag([1.0 + 2.0j, 3.0]))
    order = np.argsort(spec.eigenvalues.real)
    np.testing.assert_allclose(spec.eigenvalues[order], [1 + 2j, 3], atol=1e-14)
    np.testing.assert_allclose(np.abs(spec.right_eigenvectors), np.eye(2), atol=1e-14)


def test_single_spin_closed_forms():
    spec = ed.eigendecompose(build_hamiltonian(ModelParams(1, 1.0, 1.5, 0.5)))
    np.testing.assert_allclose(
        np.sort(spec.eigenvalues.real), [-np.sqrt(2), np.sqrt(2)], atol=1e-12
    )
    assert np.max(np.abs(spec.eigenvalues.imag)) < 1e-12
    spec = ed.eigendecompose(build_hamiltonian(ModelParams(1, 1.0, 1.0, 1.5)))
    np.testing.assert_allclose(
        np.sort(spec.eigenvalues.imag), [-np.sqrt(1.25), np.sqrt(1.25)], atol=1e-12
    )
    assert np.max(np.abs(spec.eigenvalues.real)) < 1e-12


def test_eigendecompose_validation():
    with pytest.raises(ed.EDError):
        ed.eigendecompose(np.ones((2, 3)))
    with pytest.raises(ed.EDError):
        ed.eigendecompose(np.array([[np.inf, 0], [0, 1.0]]))


def test_ground_state_product_limit():
    # J=0, gamma=0: independent spins polarized along +x, E = -L h_x
    p = ModelParams(4, J=0.0, h_x=1.5, gamma=0.0)
    spec = ed.eigendecompose(build_hamiltonian(p))
    info = ed.ground_state(spec, p)
    assert info.energy.real == pytest.approx(-6.0, abs=1e-12)
    assert info.magnetization_x == pytest.approx(1.0, abs=1e-10)


def test_ground_state_pt_broken_side():
    p = ModelParams(8, 1.0, 1.5, 0.25)
    info = ed.ground_state(ed.eigendecompose(build_hamiltonian(p)), p)
    assert info.energy.imag > 1e-3  # PT-broken: reported branch has Im E >= 0


def test_ground_state_against_4x4_oracle():
    p = ModelParams(2, 1.0, 1.5, 0.1)
    info = ed.ground_state(ed.eigendecompose(build_hamiltonian(p)), p)
    assert info.energy.real == pytest.approx(ORACLE_L2_EG, abs=1e-9)
    assert abs(info.energy.imag) < 1e-9
    assert info.magnetization_x == pytest.approx(ORACLE_L2_MX, abs=1e-9)


def test_ground_state_empty_spectrum():
    spec = ed.ComplexSpectrum(np.array([]), np.zeros((0, 0)), np.array([]))
    with pytest.raises(ed.EDError):
        ed.ground_state(spec, ModelParams(1))


def test_scan_kink_at_l8():
    grid = np.arange(0.0, 0.35 + 1e-12, 0.005)
    scan = ed.scan_gamma(ModelParams(8, 1.0, 1.5), grid)
    assert scan.kink_gamma == pytest.approx(0.1837, abs=0.003)
    assert scan.refined


def test_scan_no_kink_below_j():
    scan = ed.scan_gamma(
        ModelParams(8, 1.0, 0.5), np.arange(0.0, 0.35 + 1e-12, 0.005)
    )
    assert scan.kink_gamma is None


def test_scan_matches_l2_bisection_oracle():
    grid = np.arange(0.0, 1.0 + 1e-12, 0.005)
    scan = ed.scan_gamma(ModelParams(2, 1.0, 1.5), grid)
    assert scan.kink_gamma == pytest.approx(ORACLE_L2_PT_GAMMA, abs=0.005)


def test_scan_grid_validation():
    p = ModelParams(2, 1.0, 1.5)
    with pytest.raises(ValueError):
        ed.scan_gamma(p, np.array([0.0, 0.1, 0.2]))  # too short
    with pytest.raises(ValueError):
        ed.scan_gamma(p, np.array([0.0, 0.1, 0.05, 0.2, 0.3]))  # not ascending
    with pytest.raises(ValueError):
        ed.scan_gamma(p, np.array([0.0, 0.1, 0.25, 0.5, 1.0]))  # nonuniform


def test_scan_kink_stable_under_grid_halving():
    p = ModelParams(6, 1.0, 1.5)
    coarse = ed.scan_gamma(p, np.arange(0.1, 0.3 + 1e-12, 0.005))
    fine = ed.scan_gamma(p, np.arange(0.1, 0.3 + 1e-12, 0.0025))
    assert abs(coarse.kink_gamma - fine.kink_gamma) <= 2 * 0.005


def test_spectral_flow_hermitian_limit():
    flow = ed.spectral_flow(ModelParams(4, 1.0, 1.5), [0.0])
    assert np.max(np.abs(flow.spectra[0].imag)) < 1e-10


def test_spectral_flow_exceptional_point_single_spin():
    flow = ed.spectral_flow(ModelParams(1, 1.0, 1.5), [1.0, 1.5, 2.0])
    # gamma < h_x: real pair; gamma = h_x: double zero; gamma > h_x: imaginary
    assert np.max(np.abs(flow.spectra[0].imag)) < 1e-10
    np.testing.assert_allclose(flow.spectra[1], 0.0, atol=1e-7)
    np.testing.assert_allclose(
        np.sort(flow.spectra[2].imag), [-np.sqrt(2.0**2 - 1.5**2), np.sqrt(2.0**2 - 1.5**2)],
        atol=1e-12,
    )


def test_spectral_flow_ground_pair_across_kink():
    flow = ed.spectral_flow(ModelParams(8, 1.0, 1.5), [0.15, 0.1837, 0.22])
    def ground_pair_im(spectrum):
        order = np.argsort(spectrum.real)
        return np.max(np.abs(spectrum[order[:2]].imag))
    assert ground_pair_im(flow.spectra[0]) < 1e-8  # real below the kink
    assert ground_pair_im(flow.spectra[2]) > 1e-2  # complex above it


def test_spectral_flow_rejects_negative_gamma():
    with pytest.raises(ValueError):
        ed.spectral_flow(ModelParams(2, 1.0, 1.0), [-0.1])


def test_overlaps_at_time_zero():
    p = ModelParams(4, 1.0, 1.5, 0.2)
    table = ed.overlap_dynamics(p, "all-down", [0.0])
    spec = ed.eigendecompose(build_hamiltonian(p))
    psi0 = np.zeros(16)
    psi0[-1] = 1.0
    expected = np.abs(spec.right_eigenvectors.conj().T @ psi0)
    np.testing.assert_allclose(np.sort(table.overlaps[0]), np.sort(expected), atol=1e-10)
    assert np.all(table.overlaps <= 1.0 + 1e-9)


def test_ground_state_dominance_above_kink():
    table = ed.overlap_dynamics(ModelParams(8, 1.0, 1.5, 0.25), "all-down", [20.0])
    assert np.argmax(table.overlaps[0]) == table.ground_index


def test_no_dominance_below_kink():
    table = ed.overlap_dynamics(ModelParams(8, 1.0, 1.5, 0.10), "all-down", [20.0])
    assert np.argmax(table.overlaps[0]) != table.ground_index


def test_overlap_validation():
    p = ModelParams(2, 1.0, 1.5, 0.1)
    with pytest.raises(ValueError):
        ed.overlap_dynamics(p, "all-down", [1.0, 0.5])
    with pytest.raises(ValueError):
        ed.overlap_dynamics(p, "sideways", [0.0])


def test_norm_growth_matches_ground_state_im_energy():
    # beyond the kink the squared norm grows as exp(2 Im E_g t)
    p = ModelParams(8, 1.0, 1.5, 0.25)
    info = ed.ground_state(ed.eigendecompose(build_hamiltonian(p)), p)
    times = np.linspace(15.0, 25.0, 21)
    _, log_norms = ed.dense_evolution(p, "all-down", times)
    slope = np.polyfit(times, 2.0 * log_norms, 1)[0]
    assert slope == pytest.approx(2.0 * info.energy.imag, rel=0.05)


def test_hermitian_limit_matches_eigh_oracle():
    p = ModelParams(6, 1.0, 1.3, 0.0)
    H = build_hamiltonian(p)
    spec = ed.eigendecompose(H)
    assert np.max(np.abs(spec.eigenvalues.imag)) <= 1e-10
    info = ed.ground_state(spec, p)
    evals, evecs = np.linalg.eigh(H)
    v = evecs[:, 0]
    mx_oracle = abs(ed.expect_sum_x(v, 6)) / 6
    assert info.energy.real == pytest.approx(evals[0], abs=1e-9)
    assert info.magnetization_x == pytest.approx(mx_oracle, abs=1e-9)


@settings(max_examples=25, deadline=None)
@given(
    L=st.integers(min_value=2, max_value=6),
    h_x=st.floats(0.5, 2.0, allow_nan=False),
    gamma=st.floats(0.0, 0.5, allow_nan=False),
)
def test_conjugation_closure_property(L, h_x, gamma):
    spec = ed.eigendecompose(build_hamiltonian(ModelParams(L, 1.0, h_x, gamma)))
    assert ed.conjugation_defect(spec.eigenvalues) <= 1e-9
    if gamma == 0.0:
        assert np.max(np.abs(spec.eigenvalues.imag)) <= 1e-10


def test_csv_writers():
    scan = ed.scan_gamma(ModelParams(2, 1.0, 1.5), np.arange(0.0, 0.05, 0.01))
    text = ed.scan_to_csv(scan)
    assert text.splitlines()[0] == "gamma,im_eg,mx,dmx_dgamma"
    assert len(text.splitlines()) == 6
    flow = ed.spectral_flow(ModelParams(2, 1.0, 1.5), [0.0, 0.1])
    ftext = ed.flow_to_csv(flow)
    assert ftext.splitlines()[0] == "gamma,re_e,im_e"
    assert len(ftext.splitlines()) == 1 + 2 * 4
