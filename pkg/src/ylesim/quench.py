"""Quench protocol driver: response curves over gamma and kink extraction.

The detection protocol is: prepare an ordered product state, evolve it
under the non-Hermitian chain with per-step normalization, and read off
M_x(T) at a fixed late time.  Sweeping gamma at fixed (J, h_x, T) gives a
response curve whose derivative peaks at the size-dependent critical
point.  Either backend can drive the evolution: dense spectral expansion
(exact, L <= 14) or the MPS circuit (any even L).
"""

from dataclasses import dataclass

import numpy as np

from .model import MAX_DENSE_L, ModelParams, product_state_vector
from . import ed as _ed
from . import tmps as _tmps

ED_AUTO_MAX_L = 10  # auto backend: dense below, MPS above
DEFAULT_T = 20.0
FLAT_CURVE_TOL = 1e-6


class KinkDetectionError(RuntimeError):
    """The scanned window does not bracket a kink, or the curve is flat."""


class BackendError(ValueError):
    """Requested backend cannot handle the given chain size."""


@dataclass(frozen=True)
class QuenchSeries:
    """Time series of one quench run; equal-length columns."""

    times: np.ndarray
    mx: np.ndarray
    mz: np.ndarray
    log_norm: np.ndarray
    max_bond: np.ndarray | None
    backend: str
    params: dict

    def to_csv(self) -> str:
        """CSV with header t,mx,mz,log_norm,max_bond."""
        from .io import format_float

        lines = ["t,mx,mz,log_norm,max_bond"]
        for i in range(len(self.times)):
            bond = "" if self.max_bond is None else str(int(self.max_bond[i]))
            lines.append(
                ",".join(
                    format_float(v)
                    for v in (self.times[i], self.mx[i], self.mz[i], self.log_norm[i])
                )
                + f",{bond}"
            )
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class KinkResult:
    """Location of the derivative peak of one response curve."""

    L: int
    gamma_yl: float
    peak_height: float
    grid_step: float
    refined: bool

    def to_json_dict(self) -> dict:
        return {
            "L": self.L,
            "gamma_yl": self.gamma_yl,
            "peak_height": self.peak_height,
            "grid_step": self.grid_step,
            "refined": self.refined,
        }


def _resolve_backend(backend: str, L: int) -> str:
    if backend == "auto":
        backend = "ed" if L <= ED_AUTO_MAX_L else "mps"
    if backend == "ed":
        if L > MAX_DENSE_L:
            raise BackendError(f"ED backend needs L <= {MAX_DENSE_L}, got {L}")
    elif backend == "mps":
        if L % 2 != 0:
            raise BackendError(f"MPS backend needs even L, got {L}")
    else:
        raise BackendError(f"unknown backend {backend!r}")
    return backend


def run_quench_ed(params: ModelParams, psi0_kind: str, T: float, sample_times=None) -> QuenchSeries:
    """Dense normalized propagation via spectral expansion."""
    if T < 0:
        raise ValueError(f"T must be >= 0, got {T}")
    times = np.array([0.0]) if T == 0 else np.asarray(
        sample_times if sample_times is not None else [0.0, T], dtype=float
    )
    psi0 = product_state_vector(params.L, psi0_kind)
    states, log_norms = _ed.dense_evolution(params, psi0, times)
    mx = np.array([abs(_ed.expect_sum_x(v, params.L)) / params.L for v in states])
    mz = np.array([abs(_ed.expect_sum_z(v, params.L)) / params.L for v in states])
    return QuenchSeries(
        times=times,
        mx=mx,
        mz=mz,
        log_norm=log_norms,
        max_bond=None,
        backend="ed",
        params={
            "L": params.L,
            "J": params.J,
            "h_x": params.h_x,
            "gamma": params.gamma,
            "psi0": psi0_kind,
            "T": T,
        },
    )


def dynamical_order_parameter(
    backend: str,
    params: ModelParams,
    psi0_kind: str,
    T: float,
    dt: float = 0.05,
    cutoff: float = 1e-10,
    chi_max: int = 64,
) -> float:
    """M_x(T) of the normalized evolved state, by the chosen backend."""
    if T <= 0:
        raise ValueError(f"T must be > 0, got {T}")
    backend = _resolve_backend(backend, params.L)
    if backend == "ed":
        series = run_quench_ed(params, psi0_kind, T)
    else:
        n_steps = int(round(T / dt))
        series = _tmps.run_quench(
            params, psi0_kind, T, dt=dt, cutoff=cutoff, chi_max=chi_max,
            sample_stride=max(n_steps, 1),
        )
    return float(series.mx[-1])


def response_curve(
    backend: str,
    params: ModelParams,
    psi0_kind: str,
    T: float,
    gamma_grid,
    dt: float = 0.05,
    cutoff: float = 1e-10,
    chi_max: int = 64,
) -> tuple[np.ndarray, np.ndarray]:
    """M_x(T) for each gamma on a uniform grid (>= 7 points)."""
    grid = _ed._check_uniform_grid(gamma_grid, 7)
    mx = np.empty(len(grid))
    for i, g in enumerate(grid):
        mx[i] = dynamical_order_parameter(
            backend, params.with_gamma(float(g)), psi0_kind, T,
            dt=dt, cutoff=cutoff, chi_max=chi_max,
        )
    return grid, mx


def detect_kink(grid, mx_values, L: int) -> KinkResult:
    """Interior peak of |d M_x / d gamma|, parabolically refined.

    Raises KinkDetectionError when the peak sits on a grid endpoint (the
    window does not bracket the kink) or the curve is flat.
    """
    grid = np.asarray(grid, dtype=float)
    mx_values = np.asarray(mx_values, dtype=float)
    if not np.all(np.isfinite(mx_values)):
        raise ValueError("response values must be finite")
    if np.max(mx_values) - np.min(mx_values) < FLAT_CURVE_TOL:
        raise KinkDetectionError("no kink detected: response curve is flat")
    deriv = np.abs(_ed.centered_derivative(grid, mx_values))
    peak = int(np.argmax(deriv))
    if not 0 < peak < len(grid) - 1:
        raise KinkDetectionError(
            f"grid window does not bracket the kink (derivative peak at "
            f"endpoint gamma = {grid[peak]:.6g})"
        )
    gamma_yl = _ed.parabolic_refine(grid, deriv, peak)
    step = float(grid[1] - grid[0])
    return KinkResult(L, float(gamma_yl), float(deriv[peak]), step, True)


def response_to_csv(grid: np.ndarray, mx: np.ndarray) -> str:
    """CSV with header gamma,mx_T."""
    from .io import format_float

    lines = ["gamma,mx_T"]
    for g, m in zip(grid, mx):
        lines.append(f"{format_float(g)},{format_float(m)}")
    return "\n".join(lines) + "\n"
