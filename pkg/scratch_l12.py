"""Scratch: L=12 kink cross-check with exact dense (expm) propagation."""
import time

import numpy as np
import scipy.linalg

from ylesim.model import ModelParams, build_hamiltonian, product_state_vector
from ylesim import ed

def exact_mx(params, T, n_sub=40):
    H = build_hamiltonian(params)
    U = scipy.linalg.expm(-1j * (T / n_sub) * H)
    del H
    psi = product_state_vector(params.L, "all-down")
    for _ in range(n_sub):
        psi = U @ psi
        psi /= np.linalg.norm(psi)
    return abs(ed.expect_sum_x(psi, params.L)) / params.L

grid = np.arange(0.1400, 0.1575 + 1e-12, 0.0025)
mx = []
for g in grid:
    t0 = time.time()
    val = exact_mx(ModelParams(12, 1.0, 1.5, float(g)), 20.0)
    mx.append(val)
    print(f"g={g:.4f} mx={val:.6f} ({time.time()-t0:.0f}s)", flush=True)
mx = np.array(mx)
deriv = np.abs(ed.centered_derivative(grid, mx))
peak = int(np.argmax(deriv))
print("deriv:", " ".join(f"{v:.1f}" for v in deriv))
if 0 < peak < len(grid) - 1:
    print("refined kink:", ed.parabolic_refine(grid, deriv, peak))
else:
    print("peak at endpoint idx", peak)
