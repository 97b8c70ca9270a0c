"""Figure rendering for run reports and scan summaries.

Everything draws through the Agg backend straight to files; nothing here
opens a window.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .diagnostics import DiagnosticsConfig, series_columns


def _norm_columns(config: DiagnosticsConfig) -> list[str]:
    keys = []
    for column in series_columns(config):
        if column in ("l2", "linf") or column.startswith(("lp:", "besov:", "ll:")):
            keys.append(column)
    return keys


def render_series_figures(series, config: DiagnosticsConfig, out_dir) -> list[Path]:
    """Render norms, continuation criteria, and the spectral tail to PNGs."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records = series.records
    times = series.times
    paths = []

    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    positive = False
    for key in _norm_columns(config):
        vals = np.array([rec[key] for rec in records], dtype=float)
        positive = positive or bool(np.any(vals > 0))
        ax.plot(times, vals, label=key)
    if positive:
        ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("norm")
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = out / "norms.png"
    fig.savefig(path, dpi=110)
    plt.close(fig)
    paths.append(path)

    fig, (ax_rate, ax_int) = plt.subplots(2, 1, sharex=True, figsize=(7.0, 6.0))
    ax_rate.plot(times, [rec["V"] for rec in records], label="V")
    ax_rate.plot(times, [rec["dir_crit"] for rec in records], label="dir_crit")
    ax_rate.set_ylabel("rate")
    ax_rate.grid(alpha=0.3)
    ax_rate.legend(fontsize=8)
    ax_int.plot(times, [rec["int_V"] for rec in records], label="int_V")
    ax_int.plot(times, [rec["int_dir_crit"] for rec in records], label="int_dir_crit")
    ax_int.set_xlabel("t")
    ax_int.set_ylabel("integral")
    ax_int.grid(alpha=0.3)
    ax_int.legend(fontsize=8)
    fig.tight_layout()
    path = out / "criteria.png"
    fig.savefig(path, dpi=110)
    plt.close(fig)
    paths.append(path)

    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    ax.plot(times, [rec["tail_frac"] for rec in records], label="tail_frac")
    ax.axhline(config.proxy.tail_threshold, linestyle="--", color="gray",
               label="threshold")
    ax.set_xlabel("t")
    ax.set_ylabel("fraction beyond dealias radius")
    ax.set_ylim(bottom=0.0)
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = out / "tail.png"
    fig.savefig(path, dpi=110)
    plt.close(fig)
    paths.append(path)
    return paths


def render_scan_figure(rows, variable: str, fit, path) -> Path:
    """Lifespan-versus-value summary; adds the fitted line for order scans."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pts = [
        (row["value"], row["t_star_proxy"])
        for row in rows
        if row.get("t_star_proxy") is not None
    ]
    if variable == "alpha" and fit is not None:
        fig, (ax_val, ax_fit) = plt.subplots(1, 2, figsize=(10.0, 4.2))
    else:
        fig, ax_val = plt.subplots(figsize=(6.0, 4.2))
        ax_fit = None
    if pts:
        values, tstars = zip(*pts)
        ax_val.plot(values, tstars, "o-")
        if variable == "amplitude" and min(values) > 0 and min(tstars) > 0:
            ax_val.set_xscale("log")
            ax_val.set_yscale("log")
    else:
        ax_val.text(0.5, 0.5, "no proxy firings", ha="center", va="center",
                    transform=ax_val.transAxes)
    ax_val.set_xlabel(variable)
    ax_val.set_ylabel("t_star_proxy")
    ax_val.grid(alpha=0.3)
    if ax_fit is not None:
        xs = np.array([np.log1p(1.0 / (1.0 - v)) for v, _ in pts if v < 1.0])
        ys = np.array([t for v, t in pts if v < 1.0])
        ax_fit.plot(xs, ys, "o")
        if xs.size:
            grid_x = np.linspace(xs.min(), xs.max(), 50)
            ax_fit.plot(grid_x, fit["slope"] * grid_x + fit["intercept"], "-",
                        label=f"slope {fit['slope']:.3g}, R^2 {fit['r_squared']:.3g}")
            ax_fit.legend(fontsize=8)
        ax_fit.set_xlabel("log(1 + 1/(1 - alpha))")
        ax_fit.set_ylabel("t_star_proxy")
        ax_fit.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path
