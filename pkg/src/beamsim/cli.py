"""Experiment orchestration: analytic curves, single runs, and sweeps.

Configuration is a flat ``key = value`` text file ('#' starts a comment);
absent keys take the standard-setup defaults, unknown keys are rejected.
Recognized keys:

  simulation   policy, interference_mode, vehicle_count, sim_duration_s,
               exploration_s, epsilon, dt_s, seed, band_count, warmup_s,
               window_s
  channel      carrier_ghz, bandwidth_hz, tx_power_dbm, beamforming_gain_db,
               noise_figure_db, snr_threshold_db, alpha_near, alpha_far,
               breakpoint_m
  scenario     segment_length_m, highway_width_m, edge_offset_m,
               site_x_m (comma list), north_site_shift_m,
               lanes_per_direction, beam_radius_m, beamwidth_deg
  analytic     activity_probs (comma list), grid_points, quad_phi, quad_r,
               mc_samples, analytic_beam

Exit codes: 0 success, 2 configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, replace
from pathlib import Path

from beamsim.analytic import distance_grid, interfered_area, interference_cdf
from beamsim.channel import ChannelParams
from beamsim.report import (
    empirical_cdf,
    plot_cdf_family,
    plot_sinr_trace,
    plot_sweep,
    plot_timeseries,
    summary_metrics,
    write_cdf_csv,
    write_csv,
    write_report_json,
    write_sinr_csv,
    write_summary_stats_csv,
    write_timeseries_csv,
)
from beamsim.scenario import ScenarioParams, build_highway, build_layout
from beamsim.simulator import MODES, POLICIES, SimConfig, monitored_beam, run

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

SWEEP_AXES = ("vehicle_count", "band_count", "exploration_s")
EXPLORATION_CHOICES = (120.0, 180.0, 240.0, 300.0, 600.0)


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class AnalyticSettings:
    activity_probs: tuple[float, ...] = (0.0, 0.2, 0.4, 0.6, 0.8)
    grid_points: int = 100
    quad_phi: int = 400
    quad_r: int = 400
    mc_samples: int = 1_000_000
    analytic_beam: int | None = None


@dataclass(frozen=True)
class ExperimentSpec:
    command: str
    out_dir: Path
    seeds: tuple[int, ...] = (1,)
    sweep_axis: str | None = None
    sweep_values: tuple[float, ...] = ()
    policies: tuple[str, ...] = ()
    figures: bool = True


_INT_KEYS = {"vehicle_count", "seed", "band_count", "lanes_per_direction",
             "grid_points", "quad_phi", "quad_r", "mc_samples",
             "analytic_beam"}
_FLOAT_KEYS = {"sim_duration_s", "exploration_s", "epsilon", "dt_s",
               "warmup_s", "window_s", "carrier_ghz", "bandwidth_hz",
               "tx_power_dbm", "beamforming_gain_db", "noise_figure_db",
               "snr_threshold_db", "alpha_near", "alpha_far", "breakpoint_m",
               "segment_length_m", "highway_width_m", "edge_offset_m",
               "north_site_shift_m", "beam_radius_m", "beamwidth_deg"}
_STR_KEYS = {"policy", "interference_mode"}
_LIST_KEYS = {"site_x_m", "activity_probs"}


def _parse_value(key: str, raw: str):
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
        if key in _LIST_KEYS:
            return tuple(float(v.strip()) for v in raw.split(",") if v.strip())
        if key in _STR_KEYS:
            return raw.strip()
    except ValueError as err:
        raise ConfigError(f"bad value for {key!r}: {raw!r} ({err})") from None
    raise ConfigError(f"unknown configuration key {key!r}")


def read_config_file(path: Path) -> dict:
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    values: dict = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        values[key] = _parse_value(key, raw)
    return values


def _check_range(key, value, lo, hi):
    if not lo <= value <= hi:
        raise ConfigError(f"{key}={value} outside allowed range [{lo}, {hi}]")


def build_configs(values: dict) -> tuple[SimConfig, AnalyticSettings]:
    """Apply defaults, validate ranges, and assemble typed configuration."""
    values = dict(values)
    scenario_kw, channel_kw, sim_kw, analytic_kw = {}, {}, {}, {}
    renames = {"segment_length_m": "segment_length",
               "highway_width_m": "highway_width",
               "edge_offset_m": "edge_offset",
               "site_x_m": "site_x",
               "north_site_shift_m": "north_site_shift",
               "beam_radius_m": "beam_radius",
               "lanes_per_direction": "lanes_per_direction"}
    for key, value in values.items():
        if key in renames:
            scenario_kw[renames[key]] = value
        elif key == "beamwidth_deg":
            scenario_kw["beamwidth"] = math.radians(value)
        elif key in ("carrier_ghz", "bandwidth_hz", "tx_power_dbm",
                     "beamforming_gain_db", "noise_figure_db",
                     "snr_threshold_db", "alpha_near", "alpha_far",
                     "breakpoint_m"):
            channel_kw[key] = value
        elif key in ("activity_probs", "grid_points", "quad_phi", "quad_r",
                     "mc_samples", "analytic_beam"):
            analytic_kw[key] = value
        else:
            sim_kw[key] = value

    if "vehicle_count" in sim_kw:
        count = sim_kw["vehicle_count"]
        _check_range("vehicle_count", count, 6, 40)
        if count % 2:
            raise ConfigError(f"vehicle_count={count} must be even")
    if "exploration_s" in sim_kw and sim_kw["exploration_s"] not in EXPLORATION_CHOICES:
        raise ConfigError(
            f"exploration_s={sim_kw['exploration_s']} not one of "
            f"{sorted(EXPLORATION_CHOICES)}")
    if "epsilon" in sim_kw:
        _check_range("epsilon", sim_kw["epsilon"], 0.0, 1.0)
    if "band_count" in sim_kw:
        _check_range("band_count", sim_kw["band_count"], 1, 5)
    if "policy" in sim_kw and sim_kw["policy"] not in POLICIES:
        raise ConfigError(f"policy={sim_kw['policy']!r} not one of {POLICIES}")
    if "interference_mode" in sim_kw and sim_kw["interference_mode"] not in MODES:
        raise ConfigError(
            f"interference_mode={sim_kw['interference_mode']!r} not one of {MODES}")
    for key, p_list in (("activity_probs", analytic_kw.get("activity_probs")),):
        if p_list is not None:
            for p in p_list:
                _check_range(key, p, 0.0, 1.0)

    try:
        scenario = ScenarioParams(**scenario_kw)
        channel = ChannelParams(**channel_kw)
        sim = SimConfig(scenario=scenario, channel=channel, **sim_kw)
        analytic = AnalyticSettings(**analytic_kw)
    except (TypeError, ValueError) as err:
        raise ConfigError(str(err)) from None
    return sim, analytic


def _run_name(config: SimConfig, seed: int) -> str:
    return f"{config.policy}_v{config.vehicle_count}_seed{seed}"


def cmd_analytic(spec: ExperimentSpec, sim: SimConfig,
                 analytic: AnalyticSettings) -> None:
    layout = build_layout(sim.scenario)
    hw = build_highway(sim.scenario)
    beam_id = (analytic.analytic_beam if analytic.analytic_beam is not None
               else monitored_beam(sim))
    grid = distance_grid(sim.scenario.beam_radius, analytic.grid_points)
    curves = {}
    for p in analytic.activity_probs:
        curve = interference_cdf(layout.with_uniform_activity(p), hw, beam_id,
                                 grid, n_phi=analytic.quad_phi,
                                 n_r=analytic.quad_r)
        curves[f"p={p:g}"] = curve
        write_cdf_csv(spec.out_dir / f"analytic_cdf_beam{beam_id}_p{p:g}.csv",
                      curve)
    rows = []
    for k in range(len(layout.beams)):
        area = interfered_area(layout, k, n_phi=analytic.quad_phi,
                               n_r=analytic.quad_r)
        sector = layout.beams[k].sector_area()
        rows.append((k, area, sector, area / sector))
    write_csv(spec.out_dir / "interfered_area.csv",
              ["beam_id", "interfered_m2", "sector_m2", "fraction"], rows)
    if spec.figures:
        plot_cdf_family(spec.out_dir / f"analytic_cdf_beam{beam_id}.png",
                        curves, f"service-distance CDF, beam {beam_id}")


def cmd_simulate(spec: ExperimentSpec, sim: SimConfig,
                 analytic: AnalyticSettings) -> None:
    beam_id = (analytic.analytic_beam if analytic.analytic_beam is not None
               else monitored_beam(sim))
    grid = distance_grid(sim.scenario.beam_radius, analytic.grid_points)
    stats: dict[str, list[float]] = {}
    for seed in spec.seeds:
        config = replace(sim, seed=seed)
        report = run(config)
        name = _run_name(config, seed)
        write_report_json(spec.out_dir / f"sim_{name}.json", report)
        write_timeseries_csv(spec.out_dir / f"timeseries_{name}.csv", report)
        samples = [s["clean_m"] for s in report.service_samples
                   if s["phase"] == "exploitation" and s["beam"] == beam_id]
        write_cdf_csv(
            spec.out_dir / f"service_distance_cdf_{name}.csv",
            empirical_cdf(samples, grid))
        if config.interference_mode == "practical":
            write_sinr_csv(spec.out_dir / f"sinr_{name}.csv", report)
            if spec.figures:
                plot_sinr_trace(spec.out_dir / f"sinr_{name}.png", report,
                                beam_id)
        if spec.figures:
            plot_timeseries(spec.out_dir / f"timeseries_{name}.png", report)
        for metric, value in summary_metrics(report).items():
            stats.setdefault(metric, []).append(value)
    if len(spec.seeds) > 1:
        write_summary_stats_csv(
            spec.out_dir / f"summary_{sim.policy}_v{sim.vehicle_count}.csv",
            stats)


def cmd_sweep(spec: ExperimentSpec, sim: SimConfig,
              analytic: AnalyticSettings) -> None:
    if spec.sweep_axis not in SWEEP_AXES:
        raise ConfigError(f"sweep axis must be one of {SWEEP_AXES}")
    if not spec.sweep_values:
        raise ConfigError("sweep needs at least one value")
    rows = []
    for value in spec.sweep_values:
        for policy in spec.policies:
            for seed in spec.seeds:
                overrides = {"policy": policy, "seed": seed}
                if spec.sweep_axis == "vehicle_count":
                    overrides["vehicle_count"] = int(value)
                elif spec.sweep_axis == "band_count":
                    overrides["band_count"] = int(value)
                else:
                    overrides["exploration_s"] = float(value)
                report = run(replace(sim, **overrides))
                for metric, result in summary_metrics(report).items():
                    rows.append({"policy": policy, "axis": spec.sweep_axis,
                                 "value": value, "seed": seed,
                                 "metric": metric, "result": result})
    write_csv(spec.out_dir / f"sweep_{spec.sweep_axis}.csv",
              ["policy", "axis", "value", "seed", "metric", "result"],
              [(r["policy"], r["axis"], r["value"], r["seed"], r["metric"],
                r["result"]) for r in rows])
    if spec.figures:
        headline = ("loss_rate_exploitation"
                    if spec.sweep_axis == "band_count"
                    else "interference_fraction")
        plot_sweep(spec.out_dir / f"sweep_{spec.sweep_axis}.png", rows,
                   headline, spec.sweep_axis)


def _parse_seeds(raw: str) -> tuple[int, ...]:
    try:
        seeds = tuple(int(v) for v in raw.split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"bad seed list {raw!r}") from None
    if not seeds:
        raise ConfigError("empty seed list")
    return seeds


def _parse_sweep(raw: str) -> tuple[str, tuple[float, ...]]:
    if "=" not in raw:
        raise ConfigError("sweep must look like axis=v1,v2,...")
    axis, _, values = raw.partition("=")
    try:
        parsed = tuple(float(v) for v in values.split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"bad sweep values {values!r}") from None
    return axis.strip(), parsed


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beamsim",
        description="Interference-aware beam allocation: curves and runs")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (("analytic", "emit service-distance CDFs and areas"),
                       ("simulate", "run the simulator for each seed"),
                       ("sweep", "cross-product sweep over an axis")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", type=Path, default=None,
                       help="key=value config file")
        p.add_argument("--out", type=Path, required=True,
                       help="output directory")
        p.add_argument("--seed", default="1", help="comma-separated seeds")
        p.add_argument("--policy", default=None, choices=POLICIES)
        p.add_argument("--mode", default=None, choices=MODES)
        p.add_argument("--no-figures", action="store_true",
                       help="skip figure rendering")
        if name == "sweep":
            p.add_argument("--sweep", required=True,
                           help="axis=v1,v2,... "
                                f"(axis one of {', '.join(SWEEP_AXES)})")
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        values = read_config_file(args.config) if args.config else {}
        if args.policy:
            values["policy"] = args.policy
        if args.mode:
            values["interference_mode"] = args.mode
        sim, analytic = build_configs(values)
        axis, sweep_values = (None, ())
        if args.command == "sweep":
            axis, sweep_values = _parse_sweep(args.sweep)
        policies = (args.policy,) if args.policy else POLICIES
        spec = ExperimentSpec(
            command=args.command,
            out_dir=args.out,
            seeds=_parse_seeds(args.seed),
            sweep_axis=axis,
            sweep_values=sweep_values,
            policies=policies,
            figures=not args.no_figures,
        )
    except ConfigError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        spec.out_dir.mkdir(parents=True, exist_ok=True)
        if args.command == "analytic":
            cmd_analytic(spec, sim, analytic)
        elif args.command == "simulate":
            cmd_simulate(spec, sim, analytic)
        else:
            cmd_sweep(spec, sim, analytic)
    except ConfigError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as err:  # noqa: BLE001 - CLI boundary
        print(f"runtime error: {err}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
