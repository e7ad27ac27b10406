"""Serialization of curves and run metrics: byte-stable CSV/JSON plus figures.

CSV files carry a header row, fixed column order, decimal-dot numerals and a
trailing newline, and are byte-identical across reruns of the same spec.
Figures are rendered next to the delimited outputs for quick inspection;
only the CSV/JSON outputs carry the reproducibility guarantee.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from beamsim.analytic import CdfCurve
from beamsim.simulator import MetricsReport


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".10g")
    return str(value)


def write_csv(path: Path, header: list[str], rows: list[tuple]) -> None:
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")


def write_cdf_csv(path: Path, curve: CdfCurve) -> None:
    write_csv(path, ["l_m", "cdf"], list(zip(curve.grid, curve.values)))


def empirical_cdf(samples, grid) -> CdfCurve:
    """CDF of observed service distances on the shared distance grid."""
    values = np.asarray(sorted(samples), dtype=float)
    grid = np.asarray(grid, dtype=float)
    if values.size:
        counts = np.searchsorted(values, grid, side="right") / values.size
    else:
        counts = np.zeros_like(grid)
    return CdfCurve(tuple(grid.tolist()), tuple(counts.tolist()))


def write_report_json(path: Path, report: MetricsReport) -> None:
    path.write_text(report.to_json())


def write_timeseries_csv(path: Path, report: MetricsReport) -> None:
    rows = [(w["t0_s"], w["t1_s"], w["service"], w["interference"], w["outage"])
            for w in report.windows]
    write_csv(path, ["t0_s", "t1_s", "service", "interference", "outage"], rows)


def write_sinr_csv(path: Path, report: MetricsReport) -> None:
    rows = [(s["start_s"], s["beam"], s["duration_s"], s["mean_sinr_db"],
             s["phase"])
            for s in report.sinr_services]
    write_csv(path, ["start_s", "beam", "duration_s", "mean_sinr_db", "phase"],
              rows)


def write_summary_stats_csv(path: Path, rows: dict[str, list[float]]) -> None:
    """Across-seed mean/stddev for each summary metric."""
    out = []
    for metric in sorted(rows):
        vals = np.asarray(rows[metric], dtype=float)
        out.append((metric, float(np.mean(vals)),
                    float(np.std(vals)) if len(vals) > 1 else 0.0, len(vals)))
    write_csv(path, ["metric", "mean", "stddev", "runs"], out)


def summary_metrics(report: MetricsReport) -> dict[str, float]:
    ex = report.aggregates["exploitation"]
    sd = report.aggregates["service_distance_exploitation"]
    return {
        "service_fraction": ex["service"],
        "interference_fraction": ex["interference"],
        "outage_fraction": ex["outage"],
        "mean_service_distance_m": sd["mean_m"],
        "zero_service_fraction": sd["zero_fraction"],
        "loss_rate": report.loss["loss_rate"],
        "loss_rate_exploitation": report.loss["loss_rate_exploitation"],
        "signaling_pushes": float(report.signaling["pushes"]),
        "signaling_pulls": float(report.signaling["pulls"]),
        "completed_transits": float(report.aggregates["completed_transits"]),
    }


# ---------------------------------------------------------------- figures


def plot_cdf_family(path: Path, curves: dict[str, CdfCurve],
                    title: str) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, curve in curves.items():
        ax.plot(curve.grid, curve.values, label=label)
    ax.set_xlabel("distance (m)")
    ax.set_ylabel("CDF")
    ax.set_title(title)
    ax.set_ylim(0, 1.02)
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_timeseries(path: Path, report: MetricsReport) -> None:
    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    t = [w["t0_s"] for w in report.windows]
    for key in ("service", "interference", "outage"):
        ax.plot(t, [w[key] for w in report.windows], label=key)
    expl = report.config["effective_exploration_s"]
    if expl > 0:
        ax.axvline(expl, color="gray", linestyle="--", linewidth=1,
                   label="exploitation start")
    ax.set_xlabel("time (s)")
    ax.set_ylabel("fraction of vehicle time")
    ax.set_ylim(0, 1.0)
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_sinr_trace(path: Path, report: MetricsReport, beam_id: int) -> None:
    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    pts = [s for s in report.sinr_services if s["beam"] == beam_id]
    ax.scatter([s["start_s"] for s in pts], [s["mean_sinr_db"] for s in pts],
               s=8, alpha=0.6)
    expl = report.config["effective_exploration_s"]
    if expl > 0:
        ax.axvline(expl, color="gray", linestyle="--", linewidth=1)
    ax.set_xlabel("service start time (s)")
    ax.set_ylabel("mean SINR per service (dB)")
    ax.set_title(f"beam {beam_id}")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_sweep(path: Path, rows: list[dict], metric: str, axis: str) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    policies = sorted({r["policy"] for r in rows})
    for policy in policies:
        pts: dict[float, list[float]] = {}
        for r in rows:
            if r["policy"] == policy and r["metric"] == metric:
                pts.setdefault(r["value"], []).append(r["result"])
        xs = sorted(pts)
        ax.plot(xs, [float(np.mean(pts[x])) for x in xs], marker="o",
                label=policy)
    ax.set_xlabel(axis)
    ax.set_ylabel(metric)
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
