"""Command-line interface.

Subcommands: simulate, fit, geom, overlap, pulse, sweep.  All artifacts are
deterministic for a fixed seed: JSON is written with sorted keys, CSV floats
with repr-exact precision, and the optional SVG plots are composed by hand so
reruns are byte-identical.

Exit codes: 0 success, 2 configuration or input error, 3 I/O error,
4 numerical non-convergence (the result file is still written).
"""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path

import click
import numpy as np

from ._version import __version__
from .config import ConfigError, RunConfig, load_config
from .dist import mixture_bin_masses
from .fit import FixedParams, fit_histogram, mixture_from_params
from .geom import Estimator, WireGeometry, conventional_readout_delay, geom_histogram, geom_mc, geom_sigma_analytic
from .histogram import ArrivalHistogram
from .io import HIST_COLUMNS, TAG_COLUMNS, _fmt, read_histogram_csv, read_time_tags, write_histogram_csv
from .overlap import ElementGrid, overlap_approx, overlap_exact
from .pulse import (
    DetectorConfig,
    bandwidth,
    fall_and_reset,
    rise_time,
    slew_noise_jitter,
    threshold_crossing,
)
from .sim import SimPlan, simulate_tags, sweep_total_width, write_source_files

EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NUMERIC = 4


def _fail(code: int, message) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


class Quantity(click.ParamType):
    """Float parameter accepting an optional unit suffix, e.g. 500nH or 100 mV."""

    def __init__(self, unit: str):
        self.unit = unit
        self.name = f"value[{unit}]"

    def convert(self, value, param, ctx):
        if isinstance(value, (int, float)):
            return float(value)
        s = str(value).strip()
        if s.endswith(self.unit):
            s = s[: -len(self.unit)].strip()
        try:
            return float(s)
        except ValueError:
            self.fail(f"expected a number with optional {self.unit!r} suffix, got {value!r}", param, ctx)


def _read_config(path) -> RunConfig:
    try:
        return load_config(path)
    except ConfigError as exc:
        _fail(EXIT_CONFIG, exc)
    except OSError as exc:
        _fail(EXIT_IO, exc)


def _resolve_out(flag_value, cfg: RunConfig | None) -> Path:
    out = flag_value if flag_value is not None else (cfg.output_dir if cfg else None)
    if out is None:
        _fail(EXIT_CONFIG, "output directory required (--out or config.output_dir)")
    path = Path(out)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        _fail(EXIT_IO, exc)
    return path


def _write_json(path: Path, payload: dict) -> None:
    payload = {"version": __version__, **payload}
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        _fail(EXIT_IO, exc)
    click.echo(f"wrote {path}")


def _write_text(path: Path, text: str) -> None:
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        _fail(EXIT_IO, exc)
    click.echo(f"wrote {path}")


def _svg_plot(series, x_label: str, y_label: str, title: str) -> str:
    """Compose a fixed-size line plot; output depends only on the data."""
    width, height = 640.0, 400.0
    ml, mr, mt, mb = 62.0, 18.0, 32.0, 46.0
    xs_all = [x for _, _, xs, _ in series for x in xs]
    ys_all = [y for _, _, _, ys in series for y in ys]
    xmin, xmax = min(xs_all), max(xs_all)
    ymin, ymax = min(ys_all), max(ys_all)
    if xmax == xmin:
        xmin, xmax = xmin - 1.0, xmax + 1.0
    if ymax == ymin:
        ymin, ymax = ymin - 1.0, ymax + 1.0
    ypad = 0.05 * (ymax - ymin)
    ymin, ymax = ymin - ypad, ymax + ypad

    def sx(x: float) -> str:
        return f"{ml + (x - xmin) / (xmax - xmin) * (width - ml - mr):.2f}"

    def sy(y: float) -> str:
        return f"{height - mb - (y - ymin) / (ymax - ymin) * (height - mt - mb):.2f}"

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" height="{height:.0f}" '
        f'viewBox="0 0 {width:.0f} {height:.0f}" font-family="monospace" font-size="11">',
        f'<rect x="{ml}" y="{mt}" width="{width - ml - mr}" height="{height - mt - mb}" '
        'fill="none" stroke="black"/>',
        f'<text x="{width / 2:.0f}" y="18" text-anchor="middle" font-size="13">{title}</text>',
        f'<text x="{width / 2:.0f}" y="{height - 8:.0f}" text-anchor="middle">{x_label}</text>',
        f'<text x="14" y="{height / 2:.0f}" text-anchor="middle" '
        f'transform="rotate(-90 14 {height / 2:.0f})">{y_label}</text>',
    ]
    for i in range(5):
        fx = xmin + (xmax - xmin) * i / 4.0
        fy = ymin + (ymax - ymin) * i / 4.0
        px, py = sx(fx), sy(fy)
        parts.append(f'<line x1="{px}" y1="{height - mb:.2f}" x2="{px}" y2="{height - mb + 4:.2f}" stroke="black"/>')
        parts.append(f'<text x="{px}" y="{height - mb + 16:.2f}" text-anchor="middle">{fx:.6g}</text>')
        parts.append(f'<line x1="{ml - 4:.2f}" y1="{py}" x2="{ml:.2f}" y2="{py}" stroke="black"/>')
        parts.append(f'<text x="{ml - 7:.2f}" y="{py}" text-anchor="end" dominant-baseline="middle">{fy:.6g}</text>')
    for idx, (name, color, xs, ys) in enumerate(series):
        points = " ".join(f"{sx(float(x))},{sy(float(y))}" for x, y in zip(xs, ys))
        parts.append(f'<polyline points="{points}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        ly = mt + 14.0 + 14.0 * idx
        parts.append(
            f'<line x1="{width - mr - 130:.2f}" y1="{ly:.2f}" x2="{width - mr - 110:.2f}" '
            f'y2="{ly:.2f}" stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(f'<text x="{width - mr - 105:.2f}" y="{ly + 4:.2f}">{name}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _build_plan(cfg: RunConfig, seed: int | None) -> SimPlan:
    if cfg.sim is None:
        _fail(EXIT_CONFIG, "config.sim: required for this command")
    try:
        return SimPlan(
            detector=cfg.detector,
            budget=cfg.budget,
            n_bar_values=cfg.sim.n_bar_values,
            events_per_source=cfg.sim.events_per_source,
            merge_model=cfg.sim.merge_model,
            seed=cfg.seed if seed is None else seed,
        )
    except ValueError as exc:
        _fail(EXIT_CONFIG, exc)


@click.group()
@click.version_option(__version__, prog_name="snspd-pnr")
def main() -> None:
    """Photon-number-resolved arrival-time statistics for nanowire detectors."""


@main.command()
@click.option("-c", "--config", "config_path", required=True, help="Run configuration JSON.")
@click.option("-o", "--out", "out_dir", default=None, help="Output directory (overrides config).")
@click.option("--seed", type=int, default=None, help="Override the configured seed.")
def simulate(config_path, out_dir, seed):
    """Generate time-tag CSV files, one per configured mean photon number."""
    cfg = _read_config(config_path)
    plan = _build_plan(cfg, seed)
    out = _resolve_out(out_dir, cfg)
    tags = simulate_tags(plan)
    try:
        manifest = write_source_files(tags, out, plan)
    except OSError as exc:
        _fail(EXIT_IO, exc)
    for entry in manifest["sources"]:
        click.echo(f"wrote {out / entry['file']} (n_bar={entry['n_bar']:g}, events={entry['events']})")
    click.echo(f"wrote {out / 'manifest.json'}")


def _sniff_format(path) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                s = line.strip()
                if not s or s.startswith("#"):
                    continue
                if s == TAG_COLUMNS:
                    return "time_tags"
                if s == HIST_COLUMNS:
                    return "histogram"
                raise ValueError(
                    f"{path}: unrecognized header {s!r}; expected {TAG_COLUMNS!r} or {HIST_COLUMNS!r}"
                )
    except OSError as exc:
        _fail(EXIT_IO, exc)
    raise ValueError(f"{path}: no header line found")


@main.command()
@click.argument("input_file")
@click.option("-c", "--config", "config_path", required=True, help="Run configuration JSON.")
@click.option("-o", "--out", "out_dir", default=None, help="Output directory (overrides config).")
@click.option("--n-bar", type=float, default=None, help="Mean photon number (overrides config and tag header).")
@click.option("--bootstrap", "n_bootstrap", type=int, default=None, help="Bootstrap resamples for errors.")
@click.option("--fit-mu-infinity", is_flag=True, help="Also fit the many-photon delay asymptote.")
@click.option("--seed", type=int, default=None, help="Override the configured seed (bootstrap stream).")
@click.option("--svg", "want_svg", is_flag=True, help="Write a data/model overlay plot.")
def fit(input_file, config_path, out_dir, n_bar, n_bootstrap, fit_mu_infinity, seed, want_svg):
    """Fit the three-parameter mixture model to a time-tag or histogram CSV."""
    cfg = _read_config(config_path)
    out = _resolve_out(out_dir, cfg)
    try:
        fmt = _sniff_format(input_file)
        if fmt == "time_tags":
            table = read_time_tags(input_file)
            hist = ArrivalHistogram.from_events(table.delta_ps, cfg.fit.bin_width, table.n_bar)
            header_n_bar = table.n_bar
        else:
            hist = read_histogram_csv(input_file)
            header_n_bar = hist.mean_photon_number
    except ValueError as exc:
        _fail(EXIT_CONFIG, exc)
    except OSError as exc:
        _fail(EXIT_IO, exc)

    if n_bar is None:
        n_bar = cfg.fit.n_bar if cfg.fit.n_bar is not None else header_n_bar
    if n_bar is None:
        _fail(EXIT_CONFIG, "mean photon number required (--n-bar, config.fit.n_bar, or a '# n_bar=' header)")

    b = cfg.budget
    try:
        fp = FixedParams(
            sigma_inst=b.sigma_inst,
            sigma_opt=b.sigma_opt,
            sigma_elec=b.sigma_elec,
            slew_rate_1=b.slew_rate_1,
            sigma_geom_1=b.sigma_geom_1,
            mu_infinity=cfg.detector.mu_infinity,
            n_bar=float(n_bar),
            geom_exponent=b.geom_exponent,
            rise_scaling_exponent=b.rise_scaling_exponent,
        )
        result = fit_histogram(
            hist,
            fp,
            theta0=cfg.fit.theta0,
            fit_mu_infinity=fit_mu_infinity or cfg.fit.fit_mu_infinity,
            n_bootstrap=cfg.fit.n_bootstrap if n_bootstrap is None else n_bootstrap,
            bootstrap_seed=cfg.seed if seed is None else seed,
        )
    except ValueError as exc:
        _fail(EXIT_CONFIG, exc)

    theta_hat = (result.delta_mu, result.sigma_int, result.tau)
    mix = mixture_from_params(fp, theta_hat, mu_infinity=result.mu_infinity)
    expected = hist.total_events * mixture_bin_masses(mix, hist.bin_edges)
    components = [
        {
            "n": i + 1,
            "weight": float(w),
            "mu_ps": comp.mu,
            "sigma_ps": comp.sigma,
            "tau_ps": comp.tau,
        }
        for i, (w, comp) in enumerate(zip(mix.weights, mix.component_params))
    ]
    payload = {
        "input": {
            "path": str(input_file),
            "format": fmt,
            "events": int(hist.total_events),
            "bins": int(hist.counts.size),
            "bin_width_ps": hist.bin_width,
        },
        "n_bar": float(n_bar),
        "delta_mu_ps": result.delta_mu,
        "sigma_int_ps": result.sigma_int,
        "tau_ps": result.tau,
        "mu_infinity_ps": result.mu_infinity if result.mu_infinity is not None else fp.mu_infinity,
        "mu_infinity_fitted": result.mu_infinity is not None,
        "negative_log_likelihood": result.negative_log_likelihood,
        "converged": result.converged,
        "iterations": result.iterations,
        "bootstrap_errors_ps": (
            list(result.bootstrap_errors) if result.bootstrap_errors is not None else None
        ),
        "covariance_proxy": [[float(v) for v in row] for row in result.covariance_proxy],
        "components": components,
    }
    _write_json(out / "fit_result.json", payload)

    lines = ["bin_center_ps,count,expected,pearson"]
    for center, count, m in zip(hist.bin_centers, hist.counts, expected):
        pearson = (count - m) / math.sqrt(m) if m > 0 else 0.0
        lines.append(f"{_fmt(center)},{int(count)},{_fmt(m)},{_fmt(pearson)}")
    _write_text(out / "fit_residuals.csv", "\n".join(lines) + "\n")

    if want_svg:
        svg = _svg_plot(
            [
                ("data", "#1f6fb2", hist.bin_centers, hist.counts.astype(float)),
                ("model", "#c44e52", hist.bin_centers, expected),
            ],
            "delay (ps)",
            "counts per bin",
            "arrival-time histogram and fitted mixture",
        )
        _write_text(out / "fit.svg", svg)

    if not result.converged:
        click.echo("fit did not converge within the iteration budget; results written", err=True)
        sys.exit(EXIT_NUMERIC)


@main.command()
@click.option("--length", type=Quantity("um"), required=True, help="Wire length, um.")
@click.option("--signal-velocity", type=Quantity("um/ps"), required=True, help="Pulse velocity, um/ps.")
@click.option("--ground-velocity", type=Quantity("um/ps"), default=None, help="Ground-return velocity, um/ps.")
@click.option("--n-values", default="1,2,3,4,5,6,7,8,9,10", show_default=True, help="Comma-separated photon numbers.")
@click.option("--samples", type=int, default=200_000, show_default=True)
@click.option("--estimator", type=click.Choice([e.value for e in Estimator]), default="midrange", show_default=True)
@click.option("--bootstrap", type=int, default=200, show_default=True, help="Bootstrap resamples per n.")
@click.option("--histogram-bins", type=int, default=0, help="Also write a per-n timing histogram with this many bins.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("-o", "--out", "out_dir", required=True, help="Output directory.")
def geom(length, signal_velocity, ground_velocity, n_values, samples, estimator, bootstrap, histogram_bins, seed, out_dir):
    """Monte Carlo geometric timing jitter versus photon number."""
    try:
        wire = WireGeometry(length, signal_velocity, ground_velocity)
        ns = [int(v) for v in n_values.split(",") if v.strip()]
        if not ns:
            raise ValueError("--n-values must list at least one photon number")
        rng = np.random.default_rng(seed)
        result = geom_mc(wire, ns, samples, rng, estimator, bootstrap)
    except ValueError as exc:
        _fail(EXIT_CONFIG, exc)
    out = _resolve_out(out_dir, None)
    payload = {
        "wire": {
            "length_um": wire.length,
            "signal_velocity_um_ps": wire.signal_velocity,
            "ground_velocity_um_ps": wire.ground_velocity,
        },
        "estimator": str(Estimator(estimator).value),
        "samples": samples,
        "seed": seed,
        "per_n": [
            {"n": n, "sigma_ps": s, "bootstrap_se_ps": se} for n, s, se in result.per_n_std
        ],
        "fitted_exponent": result.fitted_exponent,
        "fit_residual": result.fit_residual,
        "analytic_sigma_ps": {
            "n1": geom_sigma_analytic(wire, 1),
            "n2": geom_sigma_analytic(wire, 2),
        },
        "conventional_readout_delay_ps": (
            conventional_readout_delay(wire) if wire.ground_velocity is not None else None
        ),
    }
    _write_json(out / "geom.json", payload)
    if histogram_bins > 0:
        for n in ns:
            rng_h = np.random.default_rng(np.random.SeedSequence((seed, n)))
            hist = geom_histogram(wire, n, samples, histogram_bins, rng_h, estimator)
            path = out / f"geom_hist_n{n:02d}.csv"
            try:
                write_histogram_csv(path, hist)
            except OSError as exc:
                _fail(EXIT_IO, exc)
            click.echo(f"wrote {path}")


@main.command()
@click.option("--elements", type=int, required=True, help="Number of independent detecting elements.")
@click.option("--max-photons", type=int, default=10, show_default=True)
@click.option("-o", "--out", "out_dir", default=None, help="Output directory (default: print to stdout).")
def overlap(elements, max_photons, out_dir):
    """Multi-photon same-element overlap probabilities, exact and approximate."""
    try:
        grid = ElementGrid(elements)
        if max_photons < 1:
            raise ValueError("--max-photons must be >= 1")
        rows = [
            {"n": n, "exact": overlap_exact(grid, n), "approx": overlap_approx(grid, n)}
            for n in range(1, max_photons + 1)
        ]
    except ValueError as exc:
        _fail(EXIT_CONFIG, exc)
    payload = {"elements": elements, "rows": rows}
    if out_dir is None:
        click.echo(json.dumps({"version": __version__, **payload}, indent=2, sort_keys=True))
        return
    out = _resolve_out(out_dir, None)
    _write_json(out / "overlap.json", payload)


@main.command()
@click.option("--kinetic-inductance", type=Quantity("nH"), required=True, help="e.g. 500nH")
@click.option("--amplitude", type=Quantity("mV"), required=True, help="e.g. 100mV")
@click.option("--noise-floor", type=Quantity("mV"), required=True, help="e.g. 10mV")
@click.option("--rise-time", "rise_time_1", type=Quantity("ps"), required=True, help="One-photon rise time, e.g. 300ps")
@click.option("--load-resistance", type=Quantity("Ohm"), default=50.0, show_default=True)
@click.option("--sigma-elec", type=Quantity("mV"), default=None, help="Noise amplitude for slew-noise jitter.")
@click.option("--threshold-fraction", type=float, default=0.5, show_default=True)
@click.option("--max-n", type=int, default=10, show_default=True)
@click.option("-o", "--out", "out_dir", default=None, help="Output directory (default: print to stdout).")
def pulse(kinetic_inductance, amplitude, noise_floor, rise_time_1, load_resistance, sigma_elec, threshold_fraction, max_n, out_dir):
    """Pulse-edge timing: threshold crossings, fall/reset times, bandwidth."""
    try:
        det = DetectorConfig(
            kinetic_inductance=kinetic_inductance,
            amplitude=amplitude,
            noise_floor=noise_floor,
            delta_mu=0.0,
            mu_infinity=0.0,
            rise_time_1=rise_time_1,
            load_resistance=load_resistance,
        )
        if max_n < 1:
            raise ValueError("--max-n must be >= 1")
        t_fall, t_reset = fall_and_reset(det)
        rows = []
        for n in range(1, max_n + 1):
            row = {
                "n": n,
                "threshold_crossing_ps": threshold_crossing(det, n, threshold_fraction),
                "rise_time_ps": rise_time(det, n),
            }
            if sigma_elec is not None:
                row["slew_noise_jitter_ps"] = slew_noise_jitter(det, sigma_elec, n)
            rows.append(row)
    except ValueError as exc:
        _fail(EXIT_CONFIG, exc)
    payload = {
        "kinetic_inductance_nH": kinetic_inductance,
        "load_resistance_ohm": load_resistance,
        "amplitude_mV": amplitude,
        "noise_floor_mV": noise_floor,
        "rise_time_1_ps": rise_time_1,
        "threshold_fraction": threshold_fraction,
        "fall_time_ps": t_fall,
        "reset_time_ps": t_reset,
        "bandwidth_GHz": bandwidth(det),
        "per_n": rows,
    }
    if out_dir is None:
        click.echo(json.dumps({"version": __version__, **payload}, indent=2, sort_keys=True))
        return
    out = _resolve_out(out_dir, None)
    _write_json(out / "pulse.json", payload)


@main.command()
@click.option("-c", "--config", "config_path", required=True, help="Run configuration JSON.")
@click.option("-o", "--out", "out_dir", default=None, help="Output directory (overrides config).")
@click.option("--seed", type=int, default=None, help="Override the configured seed.")
@click.option("--bin-width", type=float, default=2.0, show_default=True, help="Histogram bin width, ps.")
@click.option("--bootstrap", type=int, default=200, show_default=True, help="Bootstrap resamples per source.")
@click.option("--svg", "want_svg", is_flag=True, help="Write a width-versus-n_bar plot.")
def sweep(config_path, out_dir, seed, bin_width, bootstrap, want_svg):
    """Simulate the configured sources and report total width versus n_bar."""
    cfg = _read_config(config_path)
    plan = _build_plan(cfg, seed)
    out = _resolve_out(out_dir, cfg)
    try:
        rows = sweep_total_width(plan, bin_width=bin_width, n_bootstrap=bootstrap)
    except ValueError as exc:
        _fail(EXIT_CONFIG, exc)
    lines = ["n_bar,sigma_hist_ps,sigma_err_ps,sigma_model_ps"]
    for r in rows:
        lines.append(f"{_fmt(r.n_bar)},{_fmt(r.sigma_hist)},{_fmt(r.sigma_error)},{_fmt(r.sigma_model)}")
    _write_text(out / "sweep.csv", "\n".join(lines) + "\n")
    payload = {
        "seed": plan.seed,
        "merge_model": plan.merge_model.value,
        "events_per_source": plan.events_per_source,
        "bin_width_ps": bin_width,
        "bootstrap": bootstrap,
        "rows": [
            {
                "n_bar": r.n_bar,
                "sigma_hist_ps": r.sigma_hist,
                "sigma_err_ps": r.sigma_error,
                "sigma_model_ps": r.sigma_model,
            }
            for r in rows
        ],
    }
    _write_json(out / "sweep.json", payload)
    if want_svg:
        xs = [r.n_bar for r in rows]
        svg = _svg_plot(
            [
                ("measured", "#1f6fb2", xs, [r.sigma_hist for r in rows]),
                ("model", "#c44e52", xs, [r.sigma_model for r in rows]),
            ],
            "mean photon number",
            "total width (ps)",
            "histogram width versus mean photon number",
        )
        _write_text(out / "sweep.svg", svg)


if __name__ == "__main__":
    main()
