"""Nonunitary time evolution on matrix product states.

One evolution step applies the symmetric splitting

    U(dt) = U_odd(dt/2) U_even(dt) U_odd(dt/2)

where the odd/even layers are products of two-site gates exp(-i tau h_b)
over disjoint bonds and h_b carries the bond's ZZ coupling plus the single
site X and i*gamma*Z terms, weighted so the re-embedded bond terms sum to
the full chain Hamiltonian (edge sites carry their full field coefficient,
interior sites half on each adjacent bond).  The i*gamma*Z part makes the
gates nonunitary, so the state is renormalized once at the end of each
step and the divided factor is accumulated in `log_norm`.

Tensors are (left bond, physical 2, right bond).  Gates are applied at an
orthogonality center that sweeps up and down the chain, so every SVD
truncation is locally optimal; discarded relative weight per step is kept
in `truncation_log`.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .model import ID2, PAULI_X, PAULI_Z, ModelParams

NORM_TOL = 1e-10
MEASURE_NORM_TOL = 1e-6


class MPSError(RuntimeError):
    """Numerical failure inside the MPS engine."""


@dataclass
class MPSState:
    """Open-boundary MPS with running norm bookkeeping.

    `log_norm` accumulates the log of every normalization factor divided
    out of the state, so the raw evolved vector is exp(log_norm) times the
    stored unit-norm state.
    """

    tensors: list
    log_norm: float = 0.0
    center: int = 0
    truncation_log: list = field(default_factory=list)

    @property
    def L(self) -> int:
        return len(self.tensors)

    @property
    def bond_dims(self) -> list:
        return [self.tensors[i].shape[2] for i in range(self.L - 1)]

    def norm(self) -> float:
        """Global 2-norm from a full transfer contraction."""
        E = np.ones((1, 1), dtype=complex)
        for A in self.tensors:
            tmp = np.tensordot(E, A, axes=(1, 0))
            E = np.tensordot(np.conj(A), tmp, axes=([0, 1], [0, 1]))
        return float(np.sqrt(abs(E[0, 0])))

    def to_dense(self) -> np.ndarray:
        """Contract to a dense 2^L vector (unit norm; log_norm not applied)."""
        v = self.tensors[0]
        for A in self.tensors[1:]:
            v = np.tensordot(v, A, axes=(v.ndim - 1, 0))
        return v.reshape(-1)


@dataclass(frozen=True)
class TrotterGateSet:
    """Two-site gates of one second-order step, plus truncation policy."""

    L: int
    dt: float
    odd_half_gates: dict  # bond index (0-based, even) -> 4x4 exp(-i dt/2 h_b)
    even_gates: dict  # bond index (0-based, odd) -> 4x4 exp(-i dt h_b)
    cutoff: float
    chi_max: int


def init_product_state(L: int, kind: str) -> MPSState:
    """Bond-dimension-1 product state: "all-down" or "y-left"."""
    if L < 2:
        raise ValueError(f"need L >= 2 sites, got {L}")
    if kind == "all-down":
        local = np.array([0.0, 1.0], dtype=complex)
    elif kind == "y-left":
        local = np.array([1.0, -1.0j], dtype=complex) / np.sqrt(2.0)
    else:
        raise ValueError(f"unknown product state kind {kind!r}")
    tensors = [local.reshape(1, 2, 1).copy() for _ in range(L)]
    return MPSState(tensors)


def local_generators(params: ModelParams) -> dict:
    """4x4 bond generators h_b; their re-embedded sum equals H exactly."""
    L = params.L
    gens = {}
    for b in range(L - 1):
        w_left = 1.0 if b == 0 else 0.5
        w_right = 1.0 if b + 1 == L - 1 else 0.5
        h = -params.J * np.kron(PAULI_Z, PAULI_Z)
        h += -params.h_x * (w_left * np.kron(PAULI_X, ID2) + w_right * np.kron(ID2, PAULI_X))
        h += 1.0j * params.gamma * (
            w_left * np.kron(PAULI_Z, ID2) + w_right * np.kron(ID2, PAULI_Z)
        )
        gens[b] = h
    return gens


def build_trotter_gates(
    params: ModelParams, dt: float, cutoff: float = 1e-10, chi_max: int = 64
) -> TrotterGateSet:
    """Exponentiate the bond generators into odd-half and even-full gates."""
    if params.L % 2 != 0:
        raise ValueError(f"the odd/even bond splitting needs even L, got {params.L}")
    if not (dt > 0 and np.isfinite(dt)):
        raise ValueError(f"dt must be positive and finite, got {dt}")
    if not 0 < cutoff < 1:
        raise ValueError(f"cutoff must be in (0, 1), got {cutoff}")
    if chi_max < 2:
        raise ValueError(f"chi_max must be >= 2, got {chi_max}")
    gens = local_generators(params)
    odd = {b: scipy.linalg.expm(-0.5j * dt * gens[b]) for b in range(0, params.L - 1, 2)}
    even = {b: scipy.linalg.expm(-1.0j * dt * gens[b]) for b in range(1, params.L - 1, 2)}
    return TrotterGateSet(params.L, dt, odd, even, cutoff, chi_max)


def _svd_truncate(theta: np.ndarray, cutoff: float, chi_max: int):
    """SVD with relative-cutoff truncation; returns U, s, Vh, lost weight."""
    try:
        U, s, Vh = scipy.linalg.svd(theta, full_matrices=False, lapack_driver="gesdd")
    except np.linalg.LinAlgError:
        U, s, Vh = scipy.linalg.svd(theta, full_matrices=False, lapack_driver="gesvd")
    if not np.isfinite(s[0]) or s[0] <= 0.0:
        raise MPSError("SVD produced a non-positive leading singular value")
    keep = int(np.sum(s > cutoff * s[0]))
    keep = max(1, min(keep, chi_max))
    total = float(np.sum(s**2))
    lost = float(np.sum(s[keep:] ** 2)) / total if keep < len(s) else 0.0
    return U[:, :keep], s[:keep], Vh[:keep], lost


def _move_center_up(state: MPSState) -> None:
    c = state.center
    A = state.tensors[c]
    chi_l, _, chi_r = A.shape
    Q, R = np.linalg.qr(A.reshape(chi_l * 2, chi_r))
    state.tensors[c] = Q.reshape(chi_l, 2, -1)
    state.tensors[c + 1] = np.tensordot(R, state.tensors[c + 1], axes=(1, 0))
    state.center = c + 1


def _move_center_down(state: MPSState) -> None:
    c = state.center
    A = state.tensors[c]
    chi_l, _, chi_r = A.shape
    R, Q = scipy.linalg.rq(A.reshape(chi_l, 2 * chi_r), mode="economic")
    state.tensors[c] = Q.reshape(-1, 2, chi_r)
    state.tensors[c - 1] = np.tensordot(state.tensors[c - 1], R, axes=(2, 0))
    state.center = c - 1


def _set_center(state: MPSState, site: int) -> None:
    while state.center < site:
        _move_center_up(state)
    while state.center > site:
        _move_center_down(state)


def _apply_gate(state: MPSState, b: int, gate: np.ndarray, cutoff: float,
                chi_max: int, center_after: str) -> float:
    """Two-site gate on bond (b, b+1); center must sit on b or b+1."""
    A, B = state.tensors[b], state.tensors[b + 1]
    chi_l, _, k = A.shape
    chi_r = B.shape[2]
    theta = (A.reshape(chi_l * 2, k) @ B.reshape(k, 2 * chi_r)).reshape(chi_l, 2, 2, chi_r)
    theta = theta.transpose(1, 2, 0, 3).reshape(4, chi_l * chi_r)
    theta = (gate @ theta).reshape(2, 2, chi_l, chi_r).transpose(2, 0, 1, 3)
    try:
        U, s, Vh, lost = _svd_truncate(
            theta.reshape(chi_l * 2, 2 * chi_r), cutoff, chi_max
        )
    except MPSError as exc:
        raise MPSError(f"SVD failure at bond {b}: {exc}") from exc
    if center_after == "right":
        state.tensors[b] = U.reshape(chi_l, 2, -1)
        state.tensors[b + 1] = (s[:, None] * Vh).reshape(-1, 2, chi_r)
        state.center = b + 1
    else:
        state.tensors[b] = (U * s[None, :]).reshape(chi_l, 2, -1)
        state.tensors[b + 1] = Vh.reshape(-1, 2, chi_r)
        state.center = b
    return lost


def evolve_step(state: MPSState, gates: TrotterGateSet) -> MPSState:
    """One second-order step: odd half, even full, odd half, then normalize."""
    L = state.L
    if L != gates.L:
        raise ValueError(f"state has L={L} but gates were built for L={gates.L}")
    lost_total = 0.0
    # odd layer, ascending
    _set_center(state, 0)
    for b in range(0, L - 1, 2):
        _set_center(state, b)
        lost_total += _apply_gate(
            state, b, gates.odd_half_gates[b], gates.cutoff, gates.chi_max, "right"
        )
    # even layer, descending
    for b in range(L - 3, 0, -2):
        _set_center(state, b + 1)
        lost_total += _apply_gate(
            state, b, gates.even_gates[b], gates.cutoff, gates.chi_max, "left"
        )
    # odd layer, ascending again
    for b in range(0, L - 1, 2):
        _set_center(state, b)
        lost_total += _apply_gate(
            state, b, gates.odd_half_gates[b], gates.cutoff, gates.chi_max, "right"
        )
    # normalize once per step; the center tensor carries the global norm
    c = state.center
    nrm = float(np.linalg.norm(state.tensors[c]))
    if not np.isfinite(nrm) or nrm <= 0.0:
        raise MPSError("state norm collapsed during the step")
    state.tensors[c] = state.tensors[c] / nrm
    state.log_norm += float(np.log(nrm))
    state.truncation_log.append(lost_total)
    return state


def _environments(state: MPSState):
    """Left and right transfer environments (conj index first)."""
    L = state.L
    left = [np.ones((1, 1), dtype=complex)]
    for A in state.tensors:
        tmp = np.tensordot(left[-1], A, axes=(1, 0))
        left.append(np.tensordot(np.conj(A), tmp, axes=([0, 1], [0, 1])))
    right = [None] * (L + 1)
    right[L] = np.ones((1, 1), dtype=complex)
    for j in range(L - 1, -1, -1):
        A = state.tensors[j]
        tmp = np.tensordot(A, right[j + 1], axes=(2, 1))  # (ket_a, s, conj_b)
        right[j] = np.tensordot(tmp, np.conj(A), axes=([1, 2], [1, 2])).T
    return left, right


def _site_expectations(state: MPSState, op: np.ndarray) -> np.ndarray:
    left, right = _environments(state)
    norm2 = abs(left[-1][0, 0])
    if abs(np.sqrt(norm2) - 1.0) > MEASURE_NORM_TOL:
        raise MPSError(
            f"refusing to measure an unnormalized state (norm = {np.sqrt(norm2):.3e})"
        )
    vals = np.empty(state.L, dtype=complex)
    for j, A in enumerate(state.tensors):
        t1 = np.tensordot(left[j], A, axes=(1, 0))  # (conj_a, s, ket_b)
        t2 = np.tensordot(t1, op, axes=(1, 1))  # (conj_a, ket_b, s')
        t3 = np.tensordot(t2, np.conj(A), axes=([0, 2], [0, 1]))  # (ket_b, conj_b)
        vals[j] = np.tensordot(t3, right[j + 1], axes=([0, 1], [1, 0]))
    return vals / norm2


def measure_mx(state: MPSState) -> float:
    """|sum_j <X_j>| / L of the normalized state."""
    return float(abs(np.sum(_site_expectations(state, PAULI_X)))) / state.L


def measure_mz(state: MPSState) -> float:
    """|sum_j <Z_j>| / L of the normalized state."""
    return float(abs(np.sum(_site_expectations(state, PAULI_Z)))) / state.L


def run_quench(
    params: ModelParams,
    psi0_kind: str,
    T: float,
    dt: float = 0.05,
    cutoff: float = 1e-10,
    chi_max: int = 64,
    sample_stride: int = 1,
):
    """Evolve a product state to time T, sampling magnetizations on the way.

    Returns a QuenchSeries with one row per sampled step (t = 0 included).
    """
    from .quench import QuenchSeries

    if T < 0:
        raise ValueError(f"T must be >= 0, got {T}")
    if sample_stride < 1:
        raise ValueError(f"sample_stride must be >= 1, got {sample_stride}")
    n_steps = int(round(T / dt)) if T > 0 else 0
    if T > 0 and abs(n_steps * dt - T) > 1e-9 * max(T, 1.0):
        raise ValueError(f"dt={dt} does not divide T={T}")
    state = init_product_state(params.L, psi0_kind)
    gates = build_trotter_gates(params, dt, cutoff, chi_max) if n_steps else None
    times = [0.0]
    mx = [measure_mx(state)]
    mz = [measure_mz(state)]
    log_norm = [0.0]
    max_bond = [max(state.bond_dims)]
    for step in range(1, n_steps + 1):
        evolve_step(state, gates)
        if step % sample_stride == 0 or step == n_steps:
            times.append(step * dt)
            mx.append(measure_mx(state))
            mz.append(measure_mz(state))
            log_norm.append(state.log_norm)
            max_bond.append(max(state.bond_dims))
    return QuenchSeries(
        times=np.array(times),
        mx=np.array(mx),
        mz=np.array(mz),
        log_norm=np.array(log_norm),
        max_bond=np.array(max_bond),
        backend="mps",
        params={
            "L": params.L,
            "J": params.J,
            "h_x": params.h_x,
            "gamma": params.gamma,
            "psi0": psi0_kind,
            "T": T,
            "dt": dt,
            "cutoff": cutoff,
            "chi_max": chi_max,
        },
    )
