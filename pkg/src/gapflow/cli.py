"""``gapflow`` command line: trajectories, intervals, measure, tail laws, figure presets, sweeps."""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import backflow
from .asymptotics import short_time_coeffs, tail_laws_for
from .errors import DomainError, GapflowError, SpectralDensityError
from .phase import phase_limit
from .quadrature import (
    DEFAULT_CONFIG,
    QuadratureConfig,
    dephasing_factor_estimate,
    parallel_map,
    transform_sample,
)
from .sd_model import (
    GappedSpectralDensity,
    check_backflow_condition,
    lambda_expansion,
    make_figure_sd,
    make_lorentzian_gap_sd,
    make_power_law_gap_sd,
)
from .serialization import TrajectoryRow, fmt, load_sd, nan_if_none, write_trajectory

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_VIOLATION = 0, 2, 3, 4
FORMATS = ("csv", "json", "svg")
OUTPUTS = ("rate", "factor", "coherence", "phase", "intervals", "measure", "tails")

# (omega_g/omega_s, alpha) per curve, in caption order, and the omega_s t window
PRESETS = {
    "fig1": ((0.0, 4.0), ((0.1, 2), (1, 0), (0.1, 1), (1, 1), (1, 2), (10, 0), (20, 0), (10, 2))),
    "fig2": ((0.0, 0.6), ((1, 3), (0.1, 2), (1, 2), (0.1, 0), (1, 0), (0.1, 1), (1, 1), (10, 2),
                          (10, 0), (20, 1))),
    "fig3": ((12.5, 19.5), ((1, 1), (10, 0), (20, 0), (5, 0))),
}


class UsageError(GapflowError, ValueError):
    """Invalid scenario; the message starts with the offending field path."""


@dataclass(frozen=True)
class Scenario:
    sd: GappedSpectralDensity
    t_min: float = 0.0
    t_max: float = 4.0
    samples: int = 801
    outputs: frozenset = frozenset({"rate"})
    formats: frozenset = frozenset({"csv"})
    epsilon0: float = 0.1
    cfg: QuadratureConfig = DEFAULT_CONFIG
    name: str = "run"
    threads: int | None = None

    def __post_init__(self):
        if not self.t_min >= 0:
            raise UsageError(f"scenario.t_range.t_min: must be >= 0, got {self.t_min}")
        if not self.t_max > self.t_min:
            raise UsageError(f"scenario.t_range.t_max: must exceed t_min, got {self.t_max}")
        if not self.samples >= 2:
            raise UsageError(f"scenario.t_range.samples: must be >= 2, got {self.samples}")
        bad = set(self.outputs) - set(OUTPUTS)
        if bad:
            raise UsageError(f"scenario.outputs: unknown {sorted(bad)}")
        bad = set(self.formats) - set(FORMATS)
        if bad:
            raise UsageError(f"scenario.export: unknown formats {sorted(bad)}")
        if not 0 < self.epsilon0 < math.pi / 2:
            raise UsageError(f"scenario.epsilon0: must lie in (0, pi/2), got {self.epsilon0}")

    def times(self) -> np.ndarray:
        """Sample times; the range is given in units of ``1/omega_s``."""
        return np.linspace(self.t_min, self.t_max, self.samples) / self.sd.omega_s


def compute_trajectory(sd: GappedSpectralDensity, times, cfg: QuadratureConfig = DEFAULT_CONFIG,
                       threads: int | None = None) -> list[TrajectoryRow]:
    ws = sd.omega_s

    def row(t):
        sample = transform_sample(sd, t, cfg)
        xi = dephasing_factor_estimate(sd, t, cfg).value
        return TrajectoryRow(ws * t, sample.gamma0 / ws, xi, sample.phi_c / ws, sample.phi_s / ws,
                             nan_if_none(sample.phase))

    return parallel_map(row, [float(t) for t in times], threads)


def _svg(path: Path, curves: Sequence[tuple[str, Sequence[TrajectoryRow]]], title: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "gapflow", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(7, 4.5))
        for label, rows in curves:
            ax.plot([r.omega_s_t for r in rows], [r.gamma0_over_omega_s for r in rows], label=label, lw=1.2)
        ax.axhline(0.0, color="0.6", lw=0.6)
        ax.set_xlabel(r"$\omega_s t$")
        ax.set_ylabel(r"$\gamma_0(t)/\omega_s$")
        ax.set_title(title)
        ax.legend(fontsize=8)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)


def _write_json(path: Path, data) -> None:
    with open(path, "w") as fh:
        json.dump(_clean(data), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _clean(value):
    """JSON-safe copy: non-finite floats become strings, fractions become strings."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, float):
        return value if math.isfinite(value) else str(value)
    if isinstance(value, (int, str, bool)) or value is None:
        return value
    return str(value)


def tails_report(sd: GappedSpectralDensity, cfg: QuadratureConfig = DEFAULT_CONFIG) -> dict:
    report: dict = {"sd": sd.to_dict()}
    try:
        coeffs = short_time_coeffs(sd, cfg)
        report["short_time"] = {"l_c0": coeffs.l_c0, "l_s1": coeffs.l_s1, "l_c2": coeffs.l_c2, "l0": coeffs.l0}
    except GapflowError as exc:
        report["short_time"] = {"error": str(exc)}
    if not sd.gapless:
        lam = lambda_expansion(sd.edge_profile, sd.nu0)
        try:
            limit = phase_limit(sd.edge_profile, lam)
            report["phase_limit"] = {"value": limit.value, "regime": limit.regime, "inputs": limit.inputs_used}
        except GapflowError as exc:
            report["phase_limit"] = {"error": str(exc)}
        report["tail_laws"] = {
            target: (None if law is None else {
                "target": law.target, "exponent": law.exponent, "log_exponent": law.log_exponent,
                "coefficient": law.coefficient, "regime": law.regime,
                "subleading_coefficient": law.subleading_coefficient,
            })
            for target, law in tail_laws_for(sd).items()
        }
    return _clean(report)


def run(scenario: Scenario, out_dir) -> int:
    """Write the scenario's artifacts into ``out_dir``; returns an exit code."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sd, cfg, name = scenario.sd, scenario.cfg, scenario.name
    code = EXIT_OK
    traj_outputs = {"rate", "factor", "phase"} & scenario.outputs
    if traj_outputs:
        rows = compute_trajectory(sd, scenario.times(), cfg, scenario.threads)
        if "csv" in scenario.formats:
            write_trajectory(rows, out / f"{name}_trajectory.csv")
        if "svg" in scenario.formats:
            _svg(out / f"{name}_rate.svg", [(name, rows)], name)
    if "coherence" in scenario.outputs:
        times = scenario.times()
        xis = parallel_map(lambda t: dephasing_factor_estimate(sd, t, cfg).value, times, scenario.threads)
        with open(out / f"{name}_coherence.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["omega_s_t", "abs_rho01", "Xi0"])
            # |rho01(t)| for the maximally coherent initial state, |rho01(0)| = 1/2
            for t, xi in zip(times, xis):
                writer.writerow([fmt(sd.omega_s * t), fmt(0.5 * math.exp(-xi)), fmt(xi)])
    intervals = None
    if {"intervals", "measure"} & scenario.outputs:
        t_max = scenario.t_max / sd.omega_s
        intervals = backflow.find_negative_intervals(
            sd, t_max, cfg, t_min=scenario.t_min / sd.omega_s, threads=scenario.threads
        )
    if "intervals" in scenario.outputs:
        backflow.write_intervals_csv(intervals, sd.omega_s, out / f"{name}_intervals.csv")
        if not sd.gapless:
            report = backflow.verify_bounds(intervals)
            holds = bool(check_backflow_condition(sd))
            _write_json(out / f"{name}_bounds.json", _clean({
                "ok": report.ok, "backflow_condition": holds, "max_margin": report.max_margin,
                "tol": report.tol, "violations": [c.__dict__ for c in report.violations],
            }))
            if not report.ok and holds:
                print(f"{name}: bound violation: {report.describe()}", file=sys.stderr)
                code = EXIT_VIOLATION
    if "measure" in scenario.outputs:
        if scenario.t_min != 0:
            raise UsageError("scenario.t_range.t_min: the measure integrates from t = 0")
        result = backflow.non_markovianity(sd, scenario.t_max / sd.omega_s, cfg, intervals, scenario.threads)
        _write_json(out / f"{name}_measure.json", result.to_dict())
    if "tails" in scenario.outputs:
        _write_json(out / f"{name}_tails.json", tails_report(sd, cfg))
    return code


def run_preset(preset: str, out_dir, samples: int = 801, formats=frozenset({"csv", "svg"}),
               cfg: QuadratureConfig = DEFAULT_CONFIG, omega_s: float = 1.0,
               threads: int | None = None) -> dict[str, list[TrajectoryRow]]:
    """Compute and export every curve of a figure preset; returns rows by label."""
    if preset not in PRESETS:
        raise UsageError(f"scenario.preset: unknown preset {preset!r}; choose from {sorted(PRESETS)}")
    (lo, hi), params = PRESETS[preset]
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    times = np.linspace(lo, hi, samples) / omega_s
    labels = [f"({chr(ord('a') + i)})" for i in range(len(params))]

    def curve(args):
        ratio, alpha = args
        sd = make_figure_sd(alpha, ratio * omega_s, omega_s)
        return compute_trajectory(sd, times, cfg, threads=1)

    results = parallel_map(curve, params, threads)
    curves = {}
    for label, (ratio, alpha), rows in zip(labels, params, results):
        key = f"{preset}_{label.strip('()')}_wg{ratio:g}_alpha{alpha:g}"
        curves[key] = rows
        if "csv" in formats:
            write_trajectory(rows, out / f"{key}.csv")
    if "svg" in formats:
        legend = [
            (f"{label} $\\omega_g/\\omega_s$={ratio:g}, $\\alpha$={alpha:g}", rows)
            for label, (ratio, alpha), rows in zip(labels, params, results)
        ]
        _svg(out / f"{preset}.svg", legend, preset)
    return curves


SWEEP_COLUMNS = (
    "omega_g_over_omega_s", "alpha", "epsilon0", "l0", "phi_inf", "N", "intervals",
    "mean_length_omega_g_over_pi", "max_length_omega_g_over_pi", "max_bound_margin",
    "backflow_condition", "prediction_fraction", "errors",
)


def sweep_point(ratio: float, alpha: float, epsilon0: float, t_max: float, omega_s: float = 1.0,
                cfg: QuadratureConfig = DEFAULT_CONFIG) -> dict:
    """Summary of one figure-family grid point; failures go to the ``errors`` field."""
    row: dict = {"omega_g_over_omega_s": ratio, "alpha": alpha, "epsilon0": epsilon0}
    errors = []
    try:
        sd = make_figure_sd(alpha, ratio * omega_s, omega_s)
    except GapflowError as exc:
        row["errors"] = f"sd: {exc}"
        return row
    try:
        row["l0"] = short_time_coeffs(sd, cfg).l0
    except GapflowError as exc:
        errors.append(f"l0: {exc}")
    limit = None
    try:
        limit = phase_limit(sd.edge_profile, lambda_expansion(sd.edge_profile, sd.nu0))
        row["phi_inf"] = limit.value
    except GapflowError as exc:
        errors.append(f"phi_inf: {exc}")
    try:
        t = t_max / omega_s
        intervals = backflow.find_negative_intervals(sd, t, cfg, threads=1)
        row["intervals"] = len(intervals)
        row["N"] = backflow.non_markovianity(sd, t, cfg, intervals, threads=1).N
        complete = [iv for iv in intervals if not iv.truncated]
        if complete:
            last = complete[-1].n
            decade = 10 ** math.floor(math.log10(last))
            lengths = [iv.length * sd.omega_g / math.pi for iv in complete if iv.n >= decade]
            row["mean_length_omega_g_over_pi"] = float(np.mean(lengths))
            row["max_length_omega_g_over_pi"] = max(iv.length * sd.omega_g / math.pi for iv in complete)
        row["max_bound_margin"] = backflow.verify_bounds(intervals).max_margin * omega_s
        row["backflow_condition"] = bool(check_backflow_condition(sd))
        if limit is not None:
            nb = backflow.n_bar(sd.omega_g, sd.omega_s)
            # predictions from n_bar up to the last one ending before t_max
            n_last = math.floor((t * sd.omega_g - 2 * math.pi + limit.value + epsilon0) / (2 * math.pi))
            preds = backflow.predict_intervals(limit, sd.omega_g, epsilon0, range(nb, n_last + 1))
            if preds:
                row["prediction_fraction"] = backflow.match_predictions(intervals, preds).fraction
    except GapflowError as exc:
        errors.append(f"intervals: {exc}")
    row["errors"] = "; ".join(errors)
    return row


def sweep(ratios, alphas, epsilons, t_max: float, cfg: QuadratureConfig = DEFAULT_CONFIG,
          threads: int | None = None) -> list[dict]:
    grid = [(r, a, e) for r in ratios for a in alphas for e in epsilons]
    return parallel_map(lambda p: sweep_point(*p, t_max=t_max, cfg=cfg), grid, threads)


def write_sweep(rows: Sequence[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_COLUMNS)
        for row in rows:
            cells = []
            for col in SWEEP_COLUMNS:
                v = row.get(col, "")
                cells.append(fmt(v) if isinstance(v, float) else str(v))
            writer.writerow(cells)


# ---------------------------------------------------------------------------
# argument handling

def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _formats(text: str) -> frozenset:
    items = frozenset(v.strip() for v in text.split(",") if v.strip())
    bad = items - set(FORMATS)
    if bad:
        raise argparse.ArgumentTypeError(f"unknown format(s) {sorted(bad)}; choose from {FORMATS}")
    return items


def build_sd(args) -> GappedSpectralDensity:
    """SD from ``--sd``: a JSON file, or one of the presets figure, J1, J2."""
    spec = args.sd
    ws = args.omega_s
    if spec.endswith(".json") or Path(spec).is_file():
        return load_sd(spec)
    key = spec.lower()
    if key in ("figure", "figure_ohmic_gap"):
        return make_figure_sd(args.alpha, args.omega_g, ws)
    if key in ("j1", "power_law_exp"):
        return make_power_law_gap_sd(1.0, args.alpha, 1.0 / ws, args.omega_g, ws)
    if key in ("j2", "lorentzian_gap"):
        return make_lorentzian_gap_sd(1.0, ws, args.omega_g, ws)
    raise UsageError(f"--sd: unknown preset {spec!r} (use a .json file, figure, J1 or J2)")


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--sd", default="figure", help="SD JSON file or preset: figure, J1, J2")
    common.add_argument("--alpha", type=float, default=0.0, help="edge power of the preset SD")
    common.add_argument("--omega-g", type=float, default=1.0, help="gap frequency")
    common.add_argument("--omega-s", type=float, default=1.0, help="scale frequency")
    common.add_argument("--t-min", type=float, default=0.0, help="start, in units of 1/omega_s")
    common.add_argument("--t-max", type=float, default=4.0, help="end, in units of 1/omega_s")
    common.add_argument("--samples", type=int, default=801)
    common.add_argument("--epsilon0", type=float, default=0.1)
    common.add_argument("--tol", type=float, default=None, help="relative quadrature tolerance")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--format", type=_formats, default=None, help="comma list of csv,json,svg")
    common.add_argument("--threads", type=int, default=None, help="worker threads (default GAPFLOW_THREADS)")

    parser = argparse.ArgumentParser(prog="gapflow", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("rate", "dephasing rate, factor and phase trajectory"),
        ("coherence", "coherence |rho01(t)| trajectory"),
        ("intervals", "backflow intervals and bound checks"),
        ("measure", "non-Markovianity measure"),
        ("tails", "short-time coefficients, tail laws and phase limit"),
    ):
        sub.add_parser(name, parents=[common], help=text)
    fig = sub.add_parser("figure", parents=[common], help="figure presets")
    fig.add_argument("preset", choices=sorted(PRESETS))
    sw = sub.add_parser("sweep", parents=[common], help="grid sweep over the figure family")
    sw.add_argument("--omega-g-grid", type=_floats, default=[1.0, 5.0, 10.0, 20.0])
    sw.add_argument("--alpha-grid", type=_floats, default=[0.0, 1.0, 2.0])
    sw.add_argument("--epsilon0-grid", type=_floats, default=None)
    return parser


def _dispatch(args) -> int:
    cfg = DEFAULT_CONFIG if args.tol is None else DEFAULT_CONFIG.tightened(args.tol)
    out = Path(args.out)
    if args.command == "figure":
        run_preset(args.preset, out, args.samples, args.format or frozenset({"csv", "svg"}), cfg,
                   args.omega_s, args.threads)
        return EXIT_OK
    if args.command == "sweep":
        eps = args.epsilon0_grid or [args.epsilon0]
        t_max = args.t_max
        rows = sweep(args.omega_g_grid, args.alpha_grid, eps, t_max, cfg, args.threads)
        out.mkdir(parents=True, exist_ok=True)
        write_sweep(rows, out / "sweep.csv")
        if args.format and "json" in args.format:
            _write_json(out / "sweep.json", _clean(rows))
        return EXIT_NUMERICAL if any(r.get("errors") for r in rows) else EXIT_OK
    outputs = {
        "rate": {"rate", "factor", "phase"},
        "coherence": {"coherence"},
        "intervals": {"intervals"},
        "measure": {"measure"},
        "tails": {"tails"},
    }[args.command]
    default_formats = {"rate": {"csv", "svg"}}.get(args.command, {"csv", "json"})
    scenario = Scenario(
        sd=build_sd(args), t_min=args.t_min, t_max=args.t_max, samples=args.samples,
        outputs=frozenset(outputs), formats=args.format or frozenset(default_formats),
        epsilon0=args.epsilon0, cfg=cfg, name=args.command, threads=args.threads,
    )
    return run(scenario, out)


def main(argv: Sequence[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (UsageError, SpectralDensityError, DomainError) as exc:
        print(f"gapflow: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GapflowError as exc:
        print(f"gapflow: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"gapflow: I/O error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
