"""Self-contained SVG rendering for scans, flows, curves and fits.

Hand-rolled so the output is byte-deterministic: fixed canvas, fixed tick
logic, fixed coordinate formatting, no timestamps and no external plotting
runtime.
"""

import numpy as np

WIDTH = 720
HEIGHT = 480
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 20, 30, 50
PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


class PlotError(ValueError):
    """Series empty or too degenerate to plot."""


def _fmt(x: float) -> str:
    return format(float(x), ".2f")


def _label(x: float) -> str:
    return format(float(x), ".4g")


class _Axes:
    """Maps data coordinates into one rectangular viewport."""

    def __init__(self, x0, y0, w, h, xlim, ylim):
        self.x0, self.y0, self.w, self.h = x0, y0, w, h
        xpad = (xlim[1] - xlim[0]) * 0.04 or 1.0
        ypad = (ylim[1] - ylim[0]) * 0.06 or 1.0
        self.xlim = (xlim[0] - xpad, xlim[1] + xpad)
        self.ylim = (ylim[0] - ypad, ylim[1] + ypad)

    def sx(self, x: float) -> float:
        t = (x - self.xlim[0]) / (self.xlim[1] - self.xlim[0])
        return self.x0 + t * self.w

    def sy(self, y: float) -> float:
        t = (y - self.ylim[0]) / (self.ylim[1] - self.ylim[0])
        return self.y0 + self.h - t * self.h

    def frame(self, xlabel: str, ylabel: str, title: str = "") -> list:
        parts = [
            f'<rect x="{_fmt(self.x0)}" y="{_fmt(self.y0)}" width="{_fmt(self.w)}"'
            f' height="{_fmt(self.h)}" fill="none" stroke="black"/>'
        ]
        for tx in np.linspace(self.xlim[0], self.xlim[1], 6)[1:-1]:
            X = self.sx(tx)
            parts.append(
                f'<line x1="{_fmt(X)}" y1="{_fmt(self.y0 + self.h)}" x2="{_fmt(X)}"'
                f' y2="{_fmt(self.y0 + self.h + 5)}" stroke="black"/>'
            )
            parts.append(
                f'<text x="{_fmt(X)}" y="{_fmt(self.y0 + self.h + 18)}"'
                f' text-anchor="middle">{_label(tx)}</text>'
            )
        for ty in np.linspace(self.ylim[0], self.ylim[1], 6)[1:-1]:
            Y = self.sy(ty)
            parts.append(
                f'<line x1="{_fmt(self.x0 - 5)}" y1="{_fmt(Y)}" x2="{_fmt(self.x0)}"'
                f' y2="{_fmt(Y)}" stroke="black"/>'
            )
            parts.append(
                f'<text x="{_fmt(self.x0 - 8)}" y="{_fmt(Y + 4)}"'
                f' text-anchor="end">{_label(ty)}</text>'
            )
        parts.append(
            f'<text x="{_fmt(self.x0 + self.w / 2)}" y="{_fmt(self.y0 + self.h + 38)}"'
            f' text-anchor="middle">{xlabel}</text>'
        )
        parts.append(
            f'<text x="{_fmt(self.x0 - 52)}" y="{_fmt(self.y0 + self.h / 2)}"'
            f' text-anchor="middle" transform="rotate(-90 {_fmt(self.x0 - 52)}'
            f' {_fmt(self.y0 + self.h / 2)})">{ylabel}</text>'
        )
        if title:
            parts.append(
                f'<text x="{_fmt(self.x0 + self.w / 2)}" y="{_fmt(self.y0 - 10)}"'
                f' text-anchor="middle">{title}</text>'
            )
        return parts

    def polyline(self, xs, ys, color: str, dash: str | None = None) -> str:
        pts = " ".join(f"{_fmt(self.sx(x))},{_fmt(self.sy(y))}" for x, y in zip(xs, ys))
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        return f'<polyline points="{pts}" fill="none" stroke="{color}"{dash_attr}/>'

    def vline(self, x: float, color: str = "black") -> str:
        X = _fmt(self.sx(x))
        return (
            f'<line x1="{X}" y1="{_fmt(self.y0)}" x2="{X}"'
            f' y2="{_fmt(self.y0 + self.h)}" stroke="{color}"'
            f' stroke-dasharray="6,4" class="kink-marker"/>'
        )

    def dots(self, xs, ys, color: str, r: float = 2.5) -> list:
        return [
            f'<circle cx="{_fmt(self.sx(x))}" cy="{_fmt(self.sy(y))}" r="{_fmt(r)}"'
            f' fill="{color}"/>'
            for x, y in zip(xs, ys)
        ]


def _document(parts: list) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}"'
        f' viewBox="0 0 {WIDTH} {HEIGHT}" font-family="monospace" font-size="12">\n'
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>\n'
    )
    return head + "\n".join(parts) + "\n</svg>\n"


def _require_points(n: int) -> None:
    if n < 2:
        raise PlotError("empty or degenerate series (need at least 2 points)")


def render_scan_svg(scan) -> str:
    """Gamma scan: M_x and |Im E_g| (each scaled to max 1) + kink marker."""
    _require_points(len(scan.gamma_grid))
    g = np.asarray(scan.gamma_grid)
    mx = np.asarray(scan.mx)
    im = np.asarray(scan.im_eg)
    im_max = float(np.max(im))
    im_scaled = im / im_max if im_max > 0 else im
    ax = _Axes(
        MARGIN_L, MARGIN_T, WIDTH - MARGIN_L - MARGIN_R, HEIGHT - MARGIN_T - MARGIN_B,
        (float(g[0]), float(g[-1])),
        (0.0, float(max(np.max(mx), 1.0))),
    )
    parts = ax.frame("gamma", "M_x (blue), |Im E_g| scaled (red)", "static gamma scan")
    parts.append(ax.polyline(g, mx, PALETTE[0]))
    parts.append(ax.polyline(g, im_scaled, PALETTE[1]))
    parts.append(
        f'<text x="{_fmt(ax.x0 + 8)}" y="{_fmt(ax.y0 + 16)}">'
        f"|Im E_g| max = {_label(im_max)}</text>"
    )
    if scan.kink_gamma is not None:
        parts.append(ax.vline(scan.kink_gamma))
    return _document(parts)


def render_flow_svg(flow) -> str:
    """Complex-plane eigenvalue clouds, one color per gamma."""
    if len(flow.gammas) == 0 or sum(len(s) for s in flow.spectra) < 2:
        raise PlotError("empty or degenerate series (need at least 2 points)")
    re = np.concatenate([s.real for s in flow.spectra])
    im = np.concatenate([s.imag for s in flow.spectra])
    ax = _Axes(
        MARGIN_L, MARGIN_T, WIDTH - MARGIN_L - MARGIN_R, HEIGHT - MARGIN_T - MARGIN_B,
        (float(re.min()), float(re.max())),
        (float(im.min()), float(im.max())),
    )
    parts = ax.frame("Re E", "Im E", "spectral flow")
    for i, (g, spec) in enumerate(zip(flow.gammas, flow.spectra)):
        color = PALETTE[i % len(PALETTE)]
        parts.extend(ax.dots(spec.real, spec.imag, color))
        parts.append(
            f'<text x="{_fmt(ax.x0 + 8)}" y="{_fmt(ax.y0 + 16 + 14 * i)}"'
            f' fill="{color}">gamma = {_label(g)}</text>'
        )
    return _document(parts)


def render_curve_svg(curves) -> str:
    """Response curves M_x(T) vs gamma; curves = [(label, grid, mx, kink)]."""
    if not curves or any(len(c[1]) < 2 for c in curves):
        raise PlotError("empty or degenerate series (need at least 2 points)")
    all_g = np.concatenate([np.asarray(c[1], dtype=float) for c in curves])
    all_m = np.concatenate([np.asarray(c[2], dtype=float) for c in curves])
    ax = _Axes(
        MARGIN_L, MARGIN_T, WIDTH - MARGIN_L - MARGIN_R, HEIGHT - MARGIN_T - MARGIN_B,
        (float(all_g.min()), float(all_g.max())),
        (float(all_m.min()), float(all_m.max())),
    )
    parts = ax.frame("gamma", "M_x(T)", "dynamical response")
    for i, (label, grid, mx, kink) in enumerate(curves):
        color = PALETTE[i % len(PALETTE)]
        parts.append(ax.polyline(grid, mx, color))
        parts.append(
            f'<text x="{_fmt(ax.x0 + 8)}" y="{_fmt(ax.y0 + 16 + 14 * i)}"'
            f' fill="{color}">{label}</text>'
        )
        if kink is not None:
            parts.append(ax.vline(kink, color))
    return _document(parts)


def render_scaling_svg(fit) -> str:
    """Two panels: extrapolation in 1/L and the log-log exponent fit."""
    pts = list(fit.points)
    _require_points(len(pts))
    Ls = np.array([p[0] for p in pts], dtype=float)
    gs = np.array([p[1] for p in pts], dtype=float)
    x = 1.0 / Ls
    panel_w = (WIDTH - MARGIN_L - MARGIN_R - 60) / 2
    # left panel: gamma_YL^L against 1/L with the intercept marked
    ax1 = _Axes(
        MARGIN_L, MARGIN_T, panel_w, HEIGHT - MARGIN_T - MARGIN_B,
        (0.0, float(x.max())),
        (float(min(gs.min(), fit.gamma_inf)), float(gs.max())),
    )
    parts = ax1.frame("1/L", "gamma_YL^L", "extrapolation")
    coeffs = np.polynomial.polynomial.polyfit(x, gs, fit.poly_degree)
    xs_f = np.linspace(0.0, float(x.max()), 50)
    parts.append(ax1.polyline(xs_f, np.polynomial.polynomial.polyval(xs_f, coeffs), "#888888"))
    parts.extend(ax1.dots(x, gs, PALETTE[0], 3.0))
    parts.extend(ax1.dots([0.0], [fit.gamma_inf], PALETTE[1], 4.0))
    parts.append(
        f'<text x="{_fmt(ax1.x0 + 8)}" y="{_fmt(ax1.y0 + 16)}">'
        f"gamma_inf = {_label(fit.gamma_inf)}</text>"
    )
    # right panel: log-log fit whose negated slope is alpha
    lx = np.log(Ls)
    ly = np.log(gs - fit.gamma_inf)
    ax2 = _Axes(
        MARGIN_L + panel_w + 60, MARGIN_T, panel_w, HEIGHT - MARGIN_T - MARGIN_B,
        (float(lx.min()), float(lx.max())),
        (float(ly.min()), float(ly.max())),
    )
    parts += ax2.frame("log L", "log(gamma_YL^L - gamma_inf)", "exponent fit")
    slope = -fit.alpha
    intercept = float(ly.mean() - slope * lx.mean())
    parts.append(ax2.polyline(lx, intercept + slope * lx, "#888888"))
    parts.extend(ax2.dots(lx, ly, PALETTE[0], 3.0))
    parts.append(
        f'<text x="{_fmt(ax2.x0 + 8)}" y="{_fmt(ax2.y0 + 16)}">'
        f"alpha = {_label(fit.alpha)}</text>"
    )
    return _document(parts)


def render_svg(series, kind: str) -> str:
    """Dispatch on kind: scan | flow | curve | scaling."""
    renderers = {
        "scan": render_scan_svg,
        "flow": render_flow_svg,
        "curve": render_curve_svg,
        "scaling": render_scaling_svg,
    }
    if kind not in renderers:
        raise PlotError(f"unknown plot kind {kind!r}")
    return renderers[kind](series)
