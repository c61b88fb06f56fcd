"""Dense operators for the lossy transverse-field Ising chain.

The chain Hamiltonian is

    H = -sum_j (h_x X_j + J Z_j Z_{j+1}) + i gamma sum_j Z_j

with open boundaries (bond sum j = 1..L-1, field sums j = 1..L).  The
imaginary longitudinal field i*gamma*Z makes H non-Hermitian; everything
downstream (spectra, quenches, scaling) keys off that term.

Basis convention, shared by every module: the 2^L tensor-product basis is
indexed with site 1 as the most significant bit, and per site |up> = bit 0,
|down> = bit 1.  So |down...down> is the last basis state, index 2^L - 1.
"""

from dataclasses import dataclass

import numpy as np

# Dense work is capped at 2^14 = 16384; larger chains go through the MPS
# backend only.
MAX_DENSE_L = 14

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
ID2 = np.eye(2, dtype=complex)

_PAULI = {"x": PAULI_X, "y": PAULI_Y, "z": PAULI_Z}


class ModelError(ValueError):
    """Invalid model parameters or an operator request out of range."""


class DenseGuardError(ModelError):
    """Requested dense-matrix work beyond the 2^14 dimension guard."""


@dataclass(frozen=True)
class ModelParams:
    """Couplings of the chain; the single source of truth for H.

    Attributes
    ----------
    L : int
        Number of sites, >= 1.
    J : float
        Ising coupling (ferromagnetic for J > 0).
    h_x : float
        Real transverse field.
    gamma : float
        Strength of the imaginary longitudinal field, >= 0.
    boundary : str
        Only "open" is supported.
    """

    L: int
    J: float = 1.0
    h_x: float = 0.0
    gamma: float = 0.0
    boundary: str = "open"

    def __post_init__(self):
        if not isinstance(self.L, (int, np.integer)) or self.L < 1:
            raise ModelError(f"L must be a positive integer, got {self.L!r}")
        if self.boundary != "open":
            raise ModelError(f"only open boundaries are supported, got {self.boundary!r}")
        for name in ("J", "h_x", "gamma"):
            val = getattr(self, name)
            if not np.isfinite(val):
                raise ModelError(f"{name} must be finite, got {val!r}")
        if self.gamma < 0:
            raise ModelError(f"gamma must be >= 0, got {self.gamma!r}")

    def with_gamma(self, gamma: float) -> "ModelParams":
        return ModelParams(self.L, self.J, self.h_x, gamma, self.boundary)

    @property
    def dim(self) -> int:
        return 2**self.L


def check_dense_size(L: int) -> None:
    if L > MAX_DENSE_L:
        raise DenseGuardError(
            f"dense operations are limited to L <= {MAX_DENSE_L}, got L = {L}"
        )


def site_operator(kind: str, site: int, L: int) -> np.ndarray:
    """Pauli `kind` acting on `site` (1-based), identity elsewhere."""
    if kind not in _PAULI:
        raise ModelError(f"kind must be one of {sorted(_PAULI)}, got {kind!r}")
    if not 1 <= site <= L:
        raise ModelError(f"site {site} out of range 1..{L}")
    check_dense_size(L)
    op = _PAULI[kind]
    left = np.eye(2 ** (site - 1), dtype=complex)
    right = np.eye(2 ** (L - site), dtype=complex)
    return np.kron(np.kron(left, op), right)


def magnetization_operator(axis: str, L: int) -> np.ndarray:
    """Site-averaged magnetization (1/L) sum_j sigma_j^axis."""
    check_dense_size(L)
    out = np.zeros((2**L, 2**L), dtype=complex)
    for site in range(1, L + 1):
        out += site_operator(axis, site, L)
    return out / L


def build_hamiltonian(params: ModelParams) -> np.ndarray:
    """Dense 2^L x 2^L matrix of the chain Hamiltonian.

    Equals (-h_x) sum_j X_j + (-J) sum_j Z_j Z_{j+1} + (i gamma) sum_j Z_j
    with the open-boundary bond sum.  Traceless by construction.
    """
    check_dense_size(params.L)
    L, dim = params.L, params.dim
    H = np.zeros((dim, dim), dtype=complex)
    # Diagonal part: -J ZZ + i gamma Z, evaluated per basis state from bits.
    bits = (np.arange(dim)[:, None] >> np.arange(L - 1, -1, -1)[None, :]) & 1
    z = 1.0 - 2.0 * bits  # site 1 in column 0; z = +1 for |up>
    diag = np.zeros(dim, dtype=complex)
    if L > 1:
        diag += -params.J * np.sum(z[:, :-1] * z[:, 1:], axis=1)
    diag += 1.0j * params.gamma * np.sum(z, axis=1)
    H[np.arange(dim), np.arange(dim)] = diag
    # Off-diagonal part: -h_x X_j flips the bit of site j.
    if params.h_x != 0.0:
        idx = np.arange(dim)
        for j in range(L):
            flipped = idx ^ (1 << (L - 1 - j))
            H[flipped, idx] += -params.h_x
    return H


def global_spin_flip(L: int) -> np.ndarray:
    """Product of X over all sites; conjugates H to its entrywise conjugate."""
    check_dense_size(L)
    dim = 2**L
    op = np.zeros((dim, dim), dtype=complex)
    idx = np.arange(dim)
    op[dim - 1 - idx, idx] = 1.0
    return op


def product_state_vector(L: int, kind: str) -> np.ndarray:
    """Dense vector of a product state, in the shared basis convention.

    Kinds: "all-down" is |down...down>; "y-left" puts every spin in
    (|up> - i |down>)/sqrt(2), the -1 eigenstate of sigma^y.
    """
    check_dense_size(L)
    if kind == "all-down":
        psi = np.zeros(2**L, dtype=complex)
        psi[-1] = 1.0
        return psi
    if kind == "y-left":
        local = np.array([1.0, -1.0j], dtype=complex) / np.sqrt(2.0)
        psi = local
        for _ in range(L - 1):
            psi = np.kron(psi, local)
        return psi
    raise ModelError(f"unknown product state kind {kind!r}")
