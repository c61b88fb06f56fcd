"""Exact diagonalization of the chain: spectra, order parameters, scans.

The chain is non-Hermitian, so everything here works with the full complex
spectrum and right eigenvectors.  The "ground state" is the eigenstate whose
eigenvalue has the minimal real part; beyond the PT-breaking point it is one
member of a complex-conjugate pair and we report the Im E >= 0 branch.
Expectation values use the unit-norm right eigenvector with the standard
inner product.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .model import (
    ModelParams,
    build_hamiltonian,
    check_dense_size,
    product_state_vector,
)

RESIDUAL_BOUND = 1e-9  # times ||H||_max * dim, per eigenpair
KINK_ABSENT_IM_TOL = 1e-8  # max |Im E_g| below this => no PT breaking in range
TIE_TOL = 1e-9


class EDError(RuntimeError):
    """Eigendecomposition failed or produced out-of-tolerance residuals."""


@dataclass(frozen=True)
class ComplexSpectrum:
    """Full eigensystem of a dense non-Hermitian matrix.

    `right_eigenvectors[:, i]` is the unit-2-norm right eigenvector paired
    with `eigenvalues[i]`; `residuals[i]` is ||H v_i - E_i v_i||_2.
    """

    eigenvalues: np.ndarray
    right_eigenvectors: np.ndarray
    residuals: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)


@dataclass(frozen=True)
class GroundStateInfo:
    index: int
    energy: complex
    magnetization_x: float
    magnetization_z: float
    tied_indices: tuple = ()


@dataclass(frozen=True)
class GammaScan:
    """Observables of the minimal-Re-part eigenstate along a gamma grid."""

    gamma_grid: np.ndarray
    im_eg: np.ndarray
    mx: np.ndarray
    derivative: np.ndarray  # centered-difference d mx / d gamma
    kink_gamma: float | None
    kink_index: int | None
    refined: bool


@dataclass(frozen=True)
class OverlapTable:
    """|<psi(t)|v_i>| for all eigenstates at the requested times."""

    times: np.ndarray
    overlaps: np.ndarray  # shape (len(times), dim)
    ground_index: int
    eigenvalues: np.ndarray


@dataclass(frozen=True)
class SpectralFlow:
    gammas: np.ndarray
    spectra: list = field(default_factory=list)  # one complex array per gamma


def eigendecompose(H: np.ndarray) -> ComplexSpectrum:
    """All eigenpairs of a dense complex matrix, with residual checks."""
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise EDError(f"expected a square matrix, got shape {H.shape}")
    dim = H.shape[0]
    if dim > 2**14:
        raise EDError(f"dense eigendecomposition capped at dim 16384, got {dim}")
    if not np.all(np.isfinite(H.view(float))):
        raise EDError("matrix has non-finite entries")
    try:
        evals, evecs = scipy.linalg.eig(H)
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise EDError(f"eigendecomposition did not converge: {exc}") from exc
    norms = np.linalg.norm(evecs, axis=0)
    evecs = evecs / norms
    residuals = np.linalg.norm(H @ evecs - evecs * evals, axis=0)
    scale = max(np.max(np.abs(H)), 1e-300)
    worst = float(np.max(residuals))
    if worst > RESIDUAL_BOUND * scale * dim:
        raise EDError(
            f"eigenpair residual {worst:.3e} exceeds bound "
            f"{RESIDUAL_BOUND * scale * dim:.3e}"
        )
    return ComplexSpectrum(evals, evecs, residuals)


def conjugation_defect(eigenvalues: np.ndarray) -> float:
    """Distance between the eigenvalue multiset and its complex conjugate.

    Both multisets are sorted by (Re, Im) and compared elementwise; the
    spectrum of a PT-symmetric matrix gives a defect at rounding level.
    """
    ev = np.asarray(eigenvalues)
    order = np.lexsort((ev.imag, ev.real))
    conj = np.conj(ev)
    order_c = np.lexsort((conj.imag, conj.real))
    return float(np.max(np.abs(ev[order] - conj[order_c])))


def _ground_index(eigenvalues: np.ndarray) -> tuple[int, tuple]:
    """Index of the minimal-Re eigenvalue; Im >= 0 branch on a tie."""
    re = eigenvalues.real
    tied = np.flatnonzero(re <= re.min() + TIE_TOL)
    if len(tied) > 2:
        warnings.warn(
            f"accidental degeneracy: {len(tied)} eigenvalues tie in Re part "
            f"(indices {tied.tolist()}); selecting lexicographically smallest",
            RuntimeWarning,
        )
    nonneg = tied[eigenvalues[tied].imag >= 0]
    pick = nonneg if len(nonneg) else tied
    # prefer the largest Im among the tied Im>=0 branch (the conjugate pair
    # has exactly one), then the smallest index for reproducibility
    best_im = eigenvalues[pick].imag.max()
    pick = pick[eigenvalues[pick].imag >= best_im - TIE_TOL]
    return int(pick.min()), tuple(int(i) for i in tied)


def expect_sum_x(v: np.ndarray, L: int) -> complex:
    """<v| sum_j X_j |v> without building the dense operator."""
    idx = np.arange(len(v))
    total = 0.0 + 0.0j
    for j in range(L):
        total += np.vdot(v, v[idx ^ (1 << (L - 1 - j))])
    return total


def expect_sum_z(v: np.ndarray, L: int) -> complex:
    """<v| sum_j Z_j |v> without building the dense operator."""
    dim = len(v)
    bits = (np.arange(dim)[:, None] >> np.arange(L - 1, -1, -1)[None, :]) & 1
    z_sum = np.sum(1.0 - 2.0 * bits, axis=1)
    return complex(np.sum(z_sum * np.abs(v) ** 2))


def ground_state(spec: ComplexSpectrum, params: ModelParams) -> GroundStateInfo:
    """Minimal-Re-part eigenstate and its |M_x|, |M_z| order parameters."""
    if spec.dim == 0:
        raise EDError("empty spectrum")
    idx, tied = _ground_index(spec.eigenvalues)
    v = spec.right_eigenvectors[:, idx]
    mx = abs(expect_sum_x(v, params.L)) / params.L
    mz = abs(expect_sum_z(v, params.L)) / params.L
    return GroundStateInfo(idx, complex(spec.eigenvalues[idx]), float(mx), float(mz), tied)


def centered_derivative(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Centered finite differences on a uniform grid, one-sided at the ends."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 2:
        raise ValueError("need at least two points to differentiate")
    d = np.empty_like(y)
    d[1:-1] = (y[2:] - y[:-2]) / (x[2:] - x[:-2])
    d[0] = (y[1] - y[0]) / (x[1] - x[0])
    d[-1] = (y[-1] - y[-2]) / (x[-1] - x[-2])
    return d


def parabolic_refine(x: np.ndarray, y: np.ndarray, i: int) -> float:
    """Vertex abscissa of the parabola through (x,y) at i-1, i, i+1.

    Falls back to x[i] when the three points are collinear.
    """
    x0, x1, x2 = x[i - 1], x[i], x[i + 1]
    y0, y1, y2 = y[i - 1], y[i], y[i + 1]
    denom = (y0 - 2.0 * y1 + y2)
    if abs(denom) < 1e-300:
        return float(x1)
    # uniform-spacing vertex formula
    h = 0.5 * (x2 - x0)
    return float(x1 + 0.5 * h * (y0 - y2) / denom)


def _check_uniform_grid(grid: np.ndarray, min_points: int) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if len(grid) < min_points:
        raise ValueError(f"grid needs at least {min_points} points, got {len(grid)}")
    steps = np.diff(grid)
    if np.any(steps <= 0):
        raise ValueError("grid must be strictly ascending")
    if np.max(steps) - np.min(steps) > 1e-12 * max(abs(grid[-1]), abs(grid[0]), 1e-30):
        raise ValueError("grid must be uniformly spaced")
    return grid


def scan_gamma(params: ModelParams, grid: np.ndarray) -> GammaScan:
    """Sweep gamma, tracking |Im E_g| and M_x of the minimal-Re eigenstate.

    The kink is the grid point maximizing |d M_x / d gamma|, refined by a
    parabolic fit through the peak and its two neighbors.  The kink is
    reported absent when no PT breaking occurs in range (max |Im E_g| <
    1e-8) or when the derivative peak sits on a grid endpoint, i.e. the
    window does not bracket a kink (the h_x < J regime, where the ground
    pair is complex from gamma = 0 on).
    """
    grid = _check_uniform_grid(grid, 5)
    check_dense_size(params.L)
    im_eg = np.empty(len(grid))
    mx = np.empty(len(grid))
    for i, g in enumerate(grid):
        p = params.with_gamma(float(g))
        spec = eigendecompose(build_hamiltonian(p))
        info = ground_state(spec, p)
        im_eg[i] = abs(info.energy.imag)
        mx[i] = info.magnetization_x
    deriv = centered_derivative(grid, mx)
    if np.max(im_eg) < KINK_ABSENT_IM_TOL:
        return GammaScan(grid, im_eg, mx, deriv, None, None, False)
    mag = np.abs(deriv)
    peak = int(np.argmax(mag))
    if not 0 < peak < len(grid) - 1:
        return GammaScan(grid, im_eg, mx, deriv, None, None, False)
    return GammaScan(grid, im_eg, mx, deriv, parabolic_refine(grid, mag, peak), peak, True)


def spectral_flow(params: ModelParams, gamma_list) -> SpectralFlow:
    """Eigenvalue clouds for each requested gamma."""
    gammas = np.asarray(gamma_list, dtype=float)
    if np.any(gammas < 0):
        raise ValueError("gamma values must be >= 0")
    check_dense_size(params.L)
    spectra = []
    for g in gammas:
        spec = eigendecompose(build_hamiltonian(params.with_gamma(float(g))))
        ev = spec.eigenvalues
        spectra.append(ev[np.lexsort((ev.imag, ev.real))])
    return SpectralFlow(gammas, spectra)


def dense_evolution(params: ModelParams, psi0, times) -> tuple[np.ndarray, np.ndarray]:
    """Normalized exp(-i t H) psi0 by spectral expansion, at each time.

    Returns (states, log_norms): states[k] is the unit-norm evolved vector at
    times[k] and log_norms[k] = log ||exp(-i t H) psi0|| before normalization.
    Large Im E is handled with a log-shift so nothing overflows.
    """
    times = np.asarray(times, dtype=float)
    if not np.all(np.isfinite(times)):
        raise ValueError("times must be finite")
    if isinstance(psi0, str):
        psi0 = product_state_vector(params.L, psi0)
    spec = eigendecompose(build_hamiltonian(params))
    V = spec.right_eigenvectors
    coeff = np.linalg.solve(V, psi0)
    states = np.empty((len(times), len(psi0)), dtype=complex)
    log_norms = np.empty(len(times))
    for k, t in enumerate(times):
        shift = float(np.max(spec.eigenvalues.imag * t))
        phases = np.exp(-1j * spec.eigenvalues.real * t + spec.eigenvalues.imag * t - shift)
        psi = V @ (coeff * phases)
        nrm = np.linalg.norm(psi)
        states[k] = psi / nrm
        log_norms[k] = shift + np.log(nrm)
    return states, log_norms


def overlap_dynamics(params: ModelParams, psi0_kind: str, times) -> OverlapTable:
    """Overlap of the normalized evolved state with every eigenstate."""
    times = np.asarray(times, dtype=float)
    if np.any(times < 0) or np.any(np.diff(times) < 0):
        raise ValueError("times must be ascending and >= 0")
    if psi0_kind not in ("all-down", "y-left"):
        raise ValueError(f"unsupported initial state {psi0_kind!r}")
    check_dense_size(params.L)
    psi0 = product_state_vector(params.L, psi0_kind)
    spec = eigendecompose(build_hamiltonian(params))
    gidx, _ = _ground_index(spec.eigenvalues)
    states, _ = dense_evolution(params, psi0, times)
    overlaps = np.abs(states.conj() @ spec.right_eigenvectors)
    return OverlapTable(times, overlaps, gidx, spec.eigenvalues)


def scan_to_csv(scan: GammaScan) -> str:
    """CSV with header gamma,im_eg,mx,dmx_dgamma."""
    from .io import format_float

    lines = ["gamma,im_eg,mx,dmx_dgamma"]
    for g, im, m, d in zip(scan.gamma_grid, scan.im_eg, scan.mx, scan.derivative):
        lines.append(",".join(format_float(v) for v in (g, im, m, d)))
    return "\n".join(lines) + "\n"


def flow_to_csv(flow: SpectralFlow) -> str:
    """CSV with header gamma,re_e,im_e; one row per eigenvalue."""
    from .io import format_float

    lines = ["gamma,re_e,im_e"]
    for g, ev in zip(flow.gammas, flow.spectra):
        for e in ev:
            lines.append(",".join(format_float(v) for v in (g, e.real, e.imag)))
    return "\n".join(lines) + "\n"
