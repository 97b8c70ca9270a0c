"""Parameter scans over a base configuration.

A scan varies one knob (the fractional order or the datum amplitude) across
an explicit value list, runs each case independently, and aggregates the
proxy lifespans into a table.  For order scans the table is fitted against
log(1 + 1/(1 - alpha)); the fitted lifespan is a grid-bound surrogate for
the true one, so the fit is reported as a trend, not a verified constant.
"""
from __future__ import annotations

import dataclasses
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import repeat
from pathlib import Path

import numpy as np

from .config import SimConfig
from .diagnostics import criterion_report
from .solver import run

SCAN_COLUMNS = ("value", "status", "t_star_proxy", "int_V_at_stop", "int_dircrit_at_stop")
VARIABLES = ("alpha", "amplitude")


@dataclass(frozen=True)
class ScanSpec:
    base: SimConfig
    variable: str
    values: tuple[float, ...]

    def __post_init__(self):
        if self.variable not in VARIABLES:
            raise ValueError(
                f"variable must be one of {', '.join(VARIABLES)}, got {self.variable!r}"
            )
        object.__setattr__(self, "values", tuple(self.values))
        if not self.values:
            raise ValueError("values must be nonempty")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValueError("values must be sorted strictly increasing")


def _row_config(spec: ScanSpec, value: float, row_dir) -> SimConfig:
    base = spec.base
    output = dataclasses.replace(
        base.output, dir=str(row_dir) if row_dir is not None else None
    )
    if spec.variable == "alpha":
        return dataclasses.replace(base, alpha=value, output=output)
    initial = dataclasses.replace(base.initial, amplitude=value)
    return dataclasses.replace(base, initial=initial, output=output)


def _run_row(spec: ScanSpec, value: float, row_dir) -> dict:
    try:
        result = run(_row_config(spec, value, row_dir))
        report = criterion_report(result.series)
        return {
            "value": value,
            "status": result.status,
            "t_star_proxy": result.t_star_proxy,
            "int_V_at_stop": report["int_V_at_stop"],
            "int_dircrit_at_stop": report["int_dir_crit_at_stop"],
        }
    except Exception as exc:
        return {
            "value": value,
            "status": "error",
            "t_star_proxy": None,
            "int_V_at_stop": None,
            "int_dircrit_at_stop": None,
            "error": str(exc),
        }


def fit_lifespan_curve(alphas, t_stars) -> dict | None:
    """Least-squares line through (log(1 + 1/(1 - alpha)), t_star) pairs.

    Rows without a firing, and alpha >= 1 where the abscissa is undefined,
    are dropped.  Returns None when fewer than two points remain.
    """
    pts = [
        (np.log1p(1.0 / (1.0 - a)), t)
        for a, t in zip(alphas, t_stars)
        if t is not None and np.isfinite(t) and a < 1.0
    ]
    if len(pts) < 2:
        return None
    x = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    slope, intercept = np.polyfit(x, y, 1)
    residual = y - (slope * x + intercept)
    ss_res = float(np.sum(residual**2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        r_squared = 1.0 if ss_res == 0.0 else 0.0
    else:
        r_squared = 1.0 - ss_res / ss_tot
    return {
        "slope": float(slope),
        "intercept": float(intercept),
        "r_squared": r_squared,
        "n_points": len(pts),
    }


def format_fit(fit: dict) -> str:
    lines = [
        "x = log(1 + 1/(1 - alpha))",
        f"slope = {fit['slope']!r}",
        f"intercept = {fit['intercept']!r}",
        f"r_squared = {fit['r_squared']!r}",
        f"n_points = {fit['n_points']}",
    ]
    return "\n".join(lines) + "\n"


def write_scan_csv(rows, path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(SCAN_COLUMNS) + "\n")
        for row in rows:
            cells = [f"{row['value']:g}", row["status"]]
            for key in SCAN_COLUMNS[2:]:
                val = row.get(key)
                cells.append("" if val is None else f"{val:.17g}")
            fh.write(",".join(cells) + "\n")


def run_scan(spec: ScanSpec, out_dir=None, workers: int = 1):
    """Run every value of the scan, tolerating per-row failures.

    Returns (rows, fit) where rows follow the value order and fit is the
    lifespan line for alpha scans with enough firings, else None.  With an
    output directory each row writes into its own subdirectory and the
    aggregate table lands in scan.csv.
    """
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    dirs = [
        out / f"{spec.variable}_{value:g}" if out is not None else None
        for value in spec.values
    ]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_row, repeat(spec), spec.values, dirs))
    else:
        rows = [_run_row(spec, value, d) for value, d in zip(spec.values, dirs)]

    fit = None
    if spec.variable == "alpha":
        fit = fit_lifespan_curve(
            [row["value"] for row in rows], [row["t_star_proxy"] for row in rows]
        )
    if out is not None:
        write_scan_csv(rows, out / "scan.csv")
        if fit is not None:
            (out / "fit.txt").write_text(format_fit(fit))
    return rows, fit
