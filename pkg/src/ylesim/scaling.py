"""Finite-size scaling of the critical points gamma_YL^L.

Two-stage fit: (1) extrapolate gamma_YL^L to L -> infinity with a least
squares polynomial in 1/L; (2) fit the anomalous exponent alpha as the
negated slope of log(gamma_YL^L - gamma_inf) against log L.  The reference
value from the governing nonunitary CFT is alpha = beta1*delta1/nu1 = 12/5
with beta1 = 1, delta1 = -6, nu1 = -5/2.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np


class ScalingError(ValueError):
    """Fit inputs are inconsistent or insufficient."""


@dataclass(frozen=True)
class CFTReference:
    beta1: float = 1.0
    delta1: float = -6.0
    nu1: float = -2.5

    @property
    def alpha(self) -> Fraction:
        return Fraction(12, 5)

    @property
    def alpha_float(self) -> float:
        return self.beta1 * self.delta1 / self.nu1


@dataclass(frozen=True)
class ScalingFit:
    points: tuple  # ((L, gamma_yl), ...)
    gamma_inf: float
    poly_degree: int
    alpha: float
    alpha_stderr: float | None
    r_squared: float
    cft_alpha: float
    extrapolation_consistent: bool  # gamma_inf below every finite-size value

    def to_json_dict(self) -> dict:
        return {
            "gamma_inf": self.gamma_inf,
            "poly_degree": self.poly_degree,
            "alpha": self.alpha,
            "alpha_stderr": self.alpha_stderr,
            "r_squared": self.r_squared,
            "cft_alpha": self.cft_alpha,
        }


def _check_points(points) -> tuple[np.ndarray, np.ndarray]:
    pts = sorted((int(L), float(g)) for L, g in points)
    Ls = np.array([p[0] for p in pts], dtype=float)
    gs = np.array([p[1] for p in pts], dtype=float)
    if len(np.unique(Ls)) != len(Ls):
        raise ScalingError("sizes L must be distinct")
    return Ls, gs


def extrapolate_inf(points, poly_degree: int = 2) -> float:
    """Value at 1/L = 0 of a least-squares polynomial in 1/L."""
    Ls, gs = _check_points(points)
    if poly_degree < 0:
        raise ScalingError(f"poly_degree must be >= 0, got {poly_degree}")
    if len(Ls) < poly_degree + 2:
        raise ScalingError(
            f"need at least {poly_degree + 2} points for degree {poly_degree}, "
            f"got {len(Ls)}"
        )
    x = 1.0 / Ls
    coeffs, (residuals, rank, *_ ) = np.polynomial.polynomial.polyfit(
        x, gs, poly_degree, full=True
    )
    if rank < poly_degree + 1:
        raise ScalingError("rank-deficient extrapolation (degenerate 1/L values)")
    return float(coeffs[0])


def fit_exponent(points, gamma_inf: float) -> tuple[float, float | None, float]:
    """OLS of log(gamma_YL^L - gamma_inf) on log L; alpha is -slope."""
    Ls, gs = _check_points(points)
    diffs = gs - gamma_inf
    bad = Ls[diffs <= 0]
    if len(bad):
        raise ScalingError(
            "extrapolation exceeds data: non-positive difference at L = "
            + ", ".join(str(int(b)) for b in bad)
        )
    if len(Ls) < 2:
        raise ScalingError("need at least two points to fit a slope")
    x = np.log(Ls)
    y = np.log(diffs)
    n = len(x)
    sxx = float(np.sum((x - x.mean()) ** 2))
    slope = float(np.sum((x - x.mean()) * (y - y.mean())) / sxx)
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (intercept + slope * x)
    rss = float(np.sum(resid**2))
    tss = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 if tss == 0.0 else 1.0 - rss / tss
    if n > 2:
        stderr = float(np.sqrt(rss / (n - 2) / sxx))
    else:
        stderr = None  # exact line through two points
        r_squared = 1.0
    return -slope, stderr, r_squared


def fit_scaling(points, poly_degree: int = 2) -> ScalingFit:
    """Run both stages and bundle the diagnostics."""
    Ls, gs = _check_points(points)
    if len(Ls) < 4:
        raise ScalingError(f"need at least 4 points for the scaling fit, got {len(Ls)}")
    gamma_inf = extrapolate_inf(points, poly_degree)
    alpha, stderr, r2 = fit_exponent(points, gamma_inf)
    cft = CFTReference()
    return ScalingFit(
        points=tuple((int(L), float(g)) for L, g in zip(Ls, gs)),
        gamma_inf=gamma_inf,
        poly_degree=poly_degree,
        alpha=alpha,
        alpha_stderr=stderr,
        r_squared=r2,
        cft_alpha=cft.alpha_float,
        extrapolation_consistent=bool(np.all(gs > gamma_inf)),
    )


def cft_reference() -> CFTReference:
    """Constants of the governing nonunitary CFT; alpha = 12/5 exactly."""
    return CFTReference()


def points_from_csv(text: str):
    """Parse the `L,gamma_yl` CSV format."""
    points = []
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    start = 1 if lines and lines[0].lower().replace(" ", "").startswith("l,") else 0
    for ln in lines[start:]:
        Lstr, gstr = ln.split(",")
        points.append((int(Lstr), float(gstr)))
    return points
