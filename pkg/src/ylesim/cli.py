"""Command-line entry point: orchestration, persistent artifacts, manifests.

Every run resolves its configuration (config file overridden by flags),
executes one command, and writes the outputs plus a `manifest.json` that
echoes the full resolved configuration; re-running from identical inputs
reproduces the artifacts byte for byte.

Exit codes: 0 success, 2 validation error, 3 numerical failure, 4 kink not
bracketed by the scanned window.
"""

import argparse
import json
import re
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, ed, floquet, quench, scaling, svgplot, tmps
from .io import dump_json, format_float
from .model import DenseGuardError, ModelError, ModelParams

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_NO_KINK = 4

FIG3_SIZES = (8, 10, 12, 14, 16)
# scan windows bracketing the size-dependent kink of the T=20 response
FIG3_WINDOWS = {
    8: (0.165, 0.2125),
    10: (0.1425, 0.19),
    12: (0.13, 0.1775),
    14: (0.12, 0.1725),
    16: (0.1175, 0.165),
}


class CLIError(ValueError):
    """Bad flag/config value; maps to exit code 2."""


@dataclass(frozen=True)
class RunConfig:
    command: str
    parameters: dict
    output_dir: str
    seed: int


_FREQ_RE = re.compile(
    r"^\s*(?P<tp>2pi[*x]?)?\s*(?P<val>[-+0-9.eE]+)\s*(?P<unit>GHz|MHz|kHz|Hz)?\s*$"
)
_FREQ_SCALE = {"GHz": 1.0e3, "MHz": 1.0, "kHz": 1.0e-3, "Hz": 1.0e-9, None: 1.0}


def parse_frequency(text: str) -> float:
    """Parse '2pi*6.8MHz' style into angular rad/us; bare numbers pass through."""
    m = _FREQ_RE.match(str(text))
    if not m:
        raise CLIError(f"cannot parse frequency {text!r}")
    try:
        value = float(m.group("val"))
    except ValueError as exc:
        raise CLIError(f"cannot parse frequency {text!r}") from exc
    value *= _FREQ_SCALE[m.group("unit")]
    if m.group("tp"):
        value *= 2.0 * np.pi
    return value


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--output-dir", default=".", help="directory for artifacts")
    p.add_argument("--seed", type=int, default=0, help="reserved; runs are deterministic")
    p.add_argument("--config", default=None, help="JSON config file; flags override it")


def _add_chain(p: argparse.ArgumentParser, gamma: bool) -> None:
    p.add_argument("--L", type=int, required=False)
    p.add_argument("--J", type=float, default=1.0)
    p.add_argument("--hx", type=float, default=1.5)
    if gamma:
        p.add_argument("--gamma", type=float, default=0.0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ylesim",
        description="Yang-Lee edge criticality toolkit for a lossy Ising chain",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ed-scan", help="static gamma scan by exact diagonalization")
    _add_chain(p, gamma=False)
    p.add_argument("--gamma-min", type=float, default=0.0)
    p.add_argument("--gamma-max", type=float, default=0.35)
    p.add_argument("--gamma-step", type=float, default=0.0025)
    _add_common(p)

    p = sub.add_parser("spectral-flow", help="complex spectra along a gamma list")
    _add_chain(p, gamma=False)
    p.add_argument("--gamma-list", default="0.15,0.1837,0.22",
                   help="comma-separated gamma values")
    _add_common(p)

    p = sub.add_parser("quench", help="single quench time series")
    _add_chain(p, gamma=True)
    p.add_argument("--backend", choices=("auto", "ed", "mps"), default="auto")
    p.add_argument("--psi0", choices=("all-down", "y-left"), default="all-down")
    p.add_argument("--T", type=float, default=quench.DEFAULT_T)
    p.add_argument("--dt", type=float, default=0.05)
    p.add_argument("--cutoff", type=float, default=1e-10)
    p.add_argument("--chi-max", type=int, default=64)
    p.add_argument("--stride", type=int, default=1)
    _add_common(p)

    p = sub.add_parser("response", help="M_x(T) response curve over a gamma grid")
    _add_chain(p, gamma=False)
    p.add_argument("--backend", choices=("auto", "ed", "mps"), default="auto")
    p.add_argument("--psi0", choices=("all-down", "y-left"), default="all-down")
    p.add_argument("--T", type=float, default=quench.DEFAULT_T)
    p.add_argument("--dt", type=float, default=0.05)
    p.add_argument("--cutoff", type=float, default=1e-10)
    p.add_argument("--chi-max", type=int, default=64)
    p.add_argument("--gamma-min", type=float, default=0.0)
    p.add_argument("--gamma-max", type=float, default=0.35)
    p.add_argument("--gamma-step", type=float, default=0.005)
    _add_common(p)

    p = sub.add_parser("scaling", help="extrapolate kink positions and fit the exponent")
    p.add_argument("--points-csv", required=True, help="CSV with header L,gamma_yl")
    p.add_argument("--degree", type=int, default=2)
    _add_common(p)

    p = sub.add_parser("floquet", help="emulate the pulse protocol against direct evolution")
    _add_chain(p, gamma=True)
    p.add_argument("--psi0", choices=("all-down", "y-left"), default="y-left")
    p.add_argument("--T", type=float, default=10.0)
    p.add_argument("--cycles", type=int, default=50)
    p.add_argument("--j0", default="2pi*5.5kHz", help="coupling, e.g. 2pi*5.5kHz")
    p.add_argument("--tau-x", type=float, default=3.0, help="us")
    p.add_argument("--tau-gamma", type=float, default=1.5, help="us")
    _add_common(p)

    p = sub.add_parser("feasibility", help="hardware coherence and timing budget")
    p.add_argument("--omega", default="2pi*6.8MHz")
    p.add_argument("--delta", default="2pi*22MHz")
    p.add_argument("--gamma-ryd", default="2pi*1.1kHz")
    p.add_argument("--gamma-laser", default="2pi*7kHz")
    p.add_argument("--r", type=float, default=3.4, help="um")
    p.add_argument("--c6", default="2pi*360GHz", help="times um^6")
    p.add_argument("--tau-ryd", type=float, default=148.0, help="us")
    p.add_argument("--T", type=float, default=10.0)
    p.add_argument("--cycles", type=int, default=50)
    p.add_argument("--tau-x", type=float, default=3.0)
    p.add_argument("--tau-gamma", type=float, default=1.5)
    _add_common(p)

    p = sub.add_parser("reproduce-fig1", help="static scan with kink marker, L=8 defaults")
    _add_chain(p, gamma=False)
    p.add_argument("--gamma-min", type=float, default=0.0)
    p.add_argument("--gamma-max", type=float, default=0.35)
    p.add_argument("--gamma-step", type=float, default=0.0025)
    _add_common(p)

    p = sub.add_parser("reproduce-fig3", help="full scaling pipeline, L = 8..16")
    p.add_argument("--sizes", default=",".join(str(s) for s in FIG3_SIZES))
    p.add_argument("--T", type=float, default=quench.DEFAULT_T)
    p.add_argument("--dt", type=float, default=0.05)
    p.add_argument("--cutoff", type=float, default=1e-10)
    p.add_argument("--chi-max", type=int, default=64)
    p.add_argument("--gamma-step", type=float, default=0.0025)
    p.add_argument("--psi0", choices=("all-down", "y-left"), default="all-down")
    p.add_argument("--degree", type=int, default=3)
    _add_common(p)

    return parser


def parse_config(argv, config_file: str | None = None) -> RunConfig:
    """Resolve argv (and an optional JSON config file) into a RunConfig.

    File values fill in anything not given on the command line; flags win.
    Unknown keys in the file are rejected.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code not in (0, None):
            raise CLIError("invalid command line") from exc
        raise
    config_file = config_file or getattr(args, "config", None)
    if config_file:
        with open(config_file) as f:
            file_values = json.load(f)
        if not isinstance(file_values, dict):
            raise CLIError("config file must hold a JSON object")
        known = set(vars(args))
        unknown = sorted(set(file_values) - known)
        if unknown:
            raise CLIError(f"unknown config keys: {', '.join(unknown)}")
        # flags explicitly present on the command line win over the file
        given = {tok.split("=")[0].lstrip("-").replace("-", "_")
                 for tok in argv if tok.startswith("--")}
        for key, value in file_values.items():
            if key not in given:
                setattr(args, key, value)
    params = {k: v for k, v in vars(args).items()
              if k not in ("command", "output_dir", "seed", "config")}
    return RunConfig(args.command, params, args.output_dir, args.seed)


def _write(outdir: Path, name: str, text: str, written: list) -> Path:
    path = outdir / name
    path.write_text(text)
    written.append(path)
    return path


def _manifest(config: RunConfig, outdir: Path, written: list) -> None:
    body = {
        "tool": "ylesim",
        "version": __version__,
        "command": config.command,
        "parameters": config.parameters,
        "output_dir": str(config.output_dir),
        "seed": config.seed,
    }
    _write(outdir, "manifest.json", dump_json(body), written)


def _require(params: dict, key: str):
    if params.get(key) is None:
        raise CLIError(f"missing required parameter --{key.replace('_', '-')}")
    return params[key]


def _cmd_ed_scan(params: dict, outdir: Path, written: list, svg: bool = False) -> int:
    L = int(_require(params, "L"))
    p = ModelParams(L, params["J"], params["hx"])
    grid = np.arange(params["gamma_min"], params["gamma_max"] + 1e-12, params["gamma_step"])
    scan = ed.scan_gamma(p, grid)
    _write(outdir, "scan.csv", ed.scan_to_csv(scan), written)
    kink = {
        "L": L,
        "kink_gamma": scan.kink_gamma,
        "refined": scan.refined,
        "grid_step": float(params["gamma_step"]),
    }
    _write(outdir, "kink.json", dump_json(kink), written)
    if svg:
        _write(outdir, "scan.svg", svgplot.render_scan_svg(scan), written)
    return EXIT_OK


def _cmd_spectral_flow(params: dict, outdir: Path, written: list) -> int:
    L = int(_require(params, "L"))
    gammas = [float(tok) for tok in str(params["gamma_list"]).split(",") if tok.strip()]
    flow = ed.spectral_flow(ModelParams(L, params["J"], params["hx"]), gammas)
    _write(outdir, "flow.csv", ed.flow_to_csv(flow), written)
    _write(outdir, "flow.svg", svgplot.render_flow_svg(flow), written)
    return EXIT_OK


def _cmd_quench(params: dict, outdir: Path, written: list) -> int:
    L = int(_require(params, "L"))
    p = ModelParams(L, params["J"], params["hx"], params["gamma"])
    backend = quench._resolve_backend(params["backend"], L)
    if backend == "ed":
        n = int(round(params["T"] / params["dt"]))
        times = np.linspace(0.0, params["T"], n // params["stride"] + 1)
        series = quench.run_quench_ed(p, params["psi0"], params["T"], times)
    else:
        series = tmps.run_quench(
            p, params["psi0"], params["T"], dt=params["dt"],
            cutoff=params["cutoff"], chi_max=params["chi_max"],
            sample_stride=params["stride"],
        )
    _write(outdir, "quench.csv", series.to_csv(), written)
    return EXIT_OK


def _cmd_response(params: dict, outdir: Path, written: list) -> int:
    L = int(_require(params, "L"))
    p = ModelParams(L, params["J"], params["hx"])
    grid = np.arange(params["gamma_min"], params["gamma_max"] + 1e-12, params["gamma_step"])
    g, mx = quench.response_curve(
        params["backend"], p, params["psi0"], params["T"], grid,
        dt=params["dt"], cutoff=params["cutoff"], chi_max=params["chi_max"],
    )
    _write(outdir, "response.csv", quench.response_to_csv(g, mx), written)
    kink = quench.detect_kink(g, mx, L)
    _write(outdir, "kink.json", dump_json(kink.to_json_dict()), written)
    return EXIT_OK


def _cmd_scaling(params: dict, outdir: Path, written: list) -> int:
    text = Path(_require(params, "points_csv")).read_text()
    points = scaling.points_from_csv(text)
    fit = scaling.fit_scaling(points, int(params["degree"]))
    _write(outdir, "scaling.json", dump_json(fit.to_json_dict()), written)
    _write(outdir, "scaling.svg", svgplot.render_scaling_svg(fit), written)
    return EXIT_OK


def _cmd_floquet(params: dict, outdir: Path, written: list) -> int:
    L = int(_require(params, "L"))
    target = ModelParams(L, params["J"], params["hx"], params["gamma"])
    sched = floquet.make_schedule(
        target, params["T"], int(params["cycles"]), parse_frequency(params["j0"]),
        params["tau_x"], params["tau_gamma"],
    )
    _write(outdir, "schedule.json", dump_json(sched.to_json_dict()), written)
    run = floquet.run_floquet(sched, params["psi0"], L)
    direct = quench.run_quench_ed(target, params["psi0"], params["T"]).mx[-1]
    body = {
        "mx_floquet": run.mx,
        "mz_floquet": run.mz,
        "mx_direct": float(direct),
        "mx_error": abs(run.mx - float(direct)),
        "log_norms": [float(x) for x in run.log_norms],
    }
    _write(outdir, "floquet.json", dump_json(body), written)
    return EXIT_OK


def _cmd_feasibility(params: dict, outdir: Path, written: list) -> int:
    p = floquet.RydbergParams(
        omega=parse_frequency(params["omega"]),
        delta=parse_frequency(params["delta"]),
        gamma_ryd=parse_frequency(params["gamma_ryd"]),
        gamma_laser=parse_frequency(params["gamma_laser"]),
        r=float(params["r"]),
        c6=parse_frequency(params["c6"]),
        tau_ryd=float(params["tau_ryd"]),
    )
    couplings = floquet.derive_couplings(p)
    sched = floquet.make_schedule(
        ModelParams(2, 1.0, 1.5, 0.35), params["T"], int(params["cycles"]),
        couplings.j0, params["tau_x"], params["tau_gamma"],
    )
    report = floquet.feasibility_report(p, sched)
    body = report.to_json_dict()
    body["couplings"] = {
        "u0": couplings.u0,
        "r_c": couplings.r_c,
        "u_r": couplings.u_r,
        "j0": couplings.j0,
        "nnn_ratio": couplings.nnn_ratio,
    }
    body["schedule"] = sched.to_json_dict()
    _write(outdir, "feasibility.json", dump_json(body), written)
    _write(outdir, "feasibility.txt", report.to_text(), written)
    return EXIT_OK


def _cmd_reproduce_fig3(params: dict, outdir: Path, written: list) -> int:
    sizes = [int(tok) for tok in str(params["sizes"]).split(",") if tok.strip()]
    step = params["gamma_step"]
    curves = []
    points = []
    for L in sizes:
        lo, hi = FIG3_WINDOWS.get(L, (0.1, 0.25))
        grid = np.arange(lo, hi + 1e-12, step)
        g, mx = quench.response_curve(
            "mps", ModelParams(L, 1.0, 1.5), params["psi0"], params["T"], grid,
            dt=params["dt"], cutoff=params["cutoff"], chi_max=params["chi_max"],
        )
        _write(outdir, f"response_L{L}.csv", quench.response_to_csv(g, mx), written)
        kink = quench.detect_kink(g, mx, L)
        points.append((L, kink.gamma_yl))
        curves.append((f"L = {L}", g, mx, kink.gamma_yl))
    kink_csv = "L,gamma_yl\n" + "".join(
        f"{L},{format_float(g)}\n" for L, g in points
    )
    _write(outdir, "kinks.csv", kink_csv, written)
    fit = scaling.fit_scaling(points, int(params["degree"]))
    _write(outdir, "scaling.json", dump_json(fit.to_json_dict()), written)
    _write(outdir, "response.svg", svgplot.render_curve_svg(curves), written)
    _write(outdir, "scaling.svg", svgplot.render_scaling_svg(fit), written)
    return EXIT_OK


def run(config: RunConfig) -> int:
    """Execute one resolved configuration; artifacts land in output_dir."""
    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    written: list = []
    handlers = {
        "ed-scan": lambda: _cmd_ed_scan(config.parameters, outdir, written),
        "spectral-flow": lambda: _cmd_spectral_flow(config.parameters, outdir, written),
        "quench": lambda: _cmd_quench(config.parameters, outdir, written),
        "response": lambda: _cmd_response(config.parameters, outdir, written),
        "scaling": lambda: _cmd_scaling(config.parameters, outdir, written),
        "floquet": lambda: _cmd_floquet(config.parameters, outdir, written),
        "feasibility": lambda: _cmd_feasibility(config.parameters, outdir, written),
        "reproduce-fig1": lambda: _cmd_ed_scan(config.parameters, outdir, written, svg=True),
        "reproduce-fig3": lambda: _cmd_reproduce_fig3(config.parameters, outdir, written),
    }
    try:
        code = handlers[config.command]()
        _manifest(config, outdir, written)
        return code
    except quench.KinkDetectionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        _cleanup(written)
        return EXIT_NO_KINK
    except (CLIError, ModelError, DenseGuardError, quench.BackendError,
            floquet.FloquetError, scaling.ScalingError, svgplot.PlotError,
            ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        _cleanup(written)
        return EXIT_VALIDATION
    except (ed.EDError, tmps.MPSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        _cleanup(written)
        return EXIT_NUMERICAL


def _cleanup(written: list) -> None:
    for path in written:
        try:
            path.unlink()
        except OSError:
            pass


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        config = parse_config(argv)
    except CLIError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SystemExit:
        return EXIT_VALIDATION
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
