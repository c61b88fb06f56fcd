"""Scratch: full MPS scaling pipeline over L = 8..16 (calibration run)."""
import json
import time

import numpy as np

from ylesim.model import ModelParams
from ylesim import quench

WINDOWS = {
    8: (0.165, 0.2125),
    10: (0.1425, 0.19),
    12: (0.13, 0.1775),
    14: (0.12, 0.1725),
    16: (0.1175, 0.165),
}

out = {}
for L, (lo, hi) in WINDOWS.items():
    t0 = time.time()
    grid = np.arange(lo, hi + 1e-12, 0.0025)
    g, mx = quench.response_curve(
        "mps", ModelParams(L, 1.0, 1.5), "all-down", 20.0, grid,
        dt=0.05, cutoff=1e-10, chi_max=64,
    )
    k = quench.detect_kink(g, mx, L)
    out[L] = {
        "kink": k.gamma_yl,
        "peak": k.peak_height,
        "grid": list(map(float, g)),
        "mx": list(map(float, mx)),
        "seconds": time.time() - t0,
    }
    print(f"L={L}: kink={k.gamma_yl:.5f}  ({out[L]['seconds']:.0f}s)", flush=True)

with open("/root/pkg/scratch_pipeline.json", "w") as f:
    json.dump(out, f)
print("DONE")
