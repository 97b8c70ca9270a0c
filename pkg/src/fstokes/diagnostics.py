"""Per-sample diagnostics: norms, growth quantities, and the blow-up proxy.

A sample record is a flat dict keyed by the CSV column names, so the
writer below is a straight serialization.  The proxy never claims
blow-up: it flags either excessive growth of the tracking Besov norm or
loss of spectral resolution, and downstream reporting labels the
resulting times as proxy estimates.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from fstokes.lp import BesovParams, DyadicFilterBank, besov_norm, log_lipschitz_norm
from fstokes.spectral import RealField, forward_transform, lp_norm, partial_derivative
from fstokes.stokes import StokesOperator, stokes_velocity


@dataclass(frozen=True)
class BlowupProxyConfig:
    """Thresholds for the two proxy triggers."""

    norm_factor: float = 100.0
    tail_threshold: float = 0.1

    def __post_init__(self):
        if not self.norm_factor > 1.0:
            raise ValueError(f"norm_factor must exceed 1, got {self.norm_factor}")
        if not 0.0 < self.tail_threshold < 1.0:
            raise ValueError(
                f"tail_threshold must lie in (0, 1), got {self.tail_threshold}"
            )


@dataclass(frozen=True)
class DiagnosticsConfig:
    """What to evaluate per sample and how often.

    ``tracking_s`` is the regularity the run monitors; None selects
    1 - alpha, the scaling-critical choice.  The gradient of the
    density joins V exactly when that regularity reaches 1.
    """

    cadence: int = 10
    lp_exponents: tuple = ()
    besov_indices: tuple = ((0.0, np.inf, 1.0),)
    ll_alphas: tuple = ()
    tracking_s: float | None = None
    proxy: BlowupProxyConfig = field(default_factory=BlowupProxyConfig)

    def __post_init__(self):
        if int(self.cadence) < 1:
            raise ValueError(f"cadence must be >= 1, got {self.cadence}")


def _fmt_index(x) -> str:
    if np.isinf(x):
        return "inf"
    x = float(x)
    if x == int(x):
        return str(int(x))
    return "%g" % x


def series_columns(config: DiagnosticsConfig) -> list:
    """CSV column names, in the order rows are written."""
    cols = ["time", "dt", "l2", "linf"]
    cols += [f"lp:{_fmt_index(p)}" for p in config.lp_exponents]
    cols += [
        f"besov:{_fmt_index(s)}_{_fmt_index(p)}_{_fmt_index(r)}"
        for (s, p, r) in config.besov_indices
    ]
    cols += [f"ll:{_fmt_index(a)}" for a in config.ll_alphas]
    cols += ["V", "int_V", "dir_crit", "int_dir_crit", "tail_frac", "proxy_state"]
    return cols


def _norm_keys(config: DiagnosticsConfig) -> list:
    skip = {"time", "dt", "int_V", "int_dir_crit", "proxy_state"}
    return [c for c in series_columns(config) if c not in skip] + ["proxy_norm"]


def _tail_fraction(rho: RealField) -> float:
    """Energy fraction carried by modes beyond the dealiasing radius."""
    grid = rho.grid
    power = np.abs(forward_transform(rho).coeffs) ** 2
    total = float(np.sum(power))
    if total == 0.0:
        return 0.0
    outside = float(np.sum(power[grid.kmag > grid.n / 3.0]))
    return outside / total


def sample(state, op: StokesOperator, bank: DyadicFilterBank, config: DiagnosticsConfig,
           reference_norm: float | None = None) -> dict:
    """Evaluate one diagnostics record for ``state`` (uses t, dt, rho).

    ``reference_norm`` is the initial tracking norm the proxy compares
    against; omit it for the first sample.  A non-finite density short
    circuits to a diverged record with NaN norms.
    """
    grid = op.grid
    rho = state.rho
    record = {"time": float(state.t), "dt": float(state.dt)}
    if not np.all(np.isfinite(rho.values)):
        for key in _norm_keys(config):
            record[key] = np.nan
        record["proxy_state"] = "diverged"
        return record

    record["l2"] = lp_norm(rho, 2)
    record["linf"] = lp_norm(rho, np.inf)
    for p in config.lp_exponents:
        record[f"lp:{_fmt_index(p)}"] = lp_norm(rho, p)
    for s, p, r in config.besov_indices:
        key = f"besov:{_fmt_index(s)}_{_fmt_index(p)}_{_fmt_index(r)}"
        record[key] = besov_norm(bank, BesovParams(s, p, r), rho)
    for a in config.ll_alphas:
        record[f"ll:{_fmt_index(a)}"] = log_lipschitz_norm(bank, a, rho)

    u = stokes_velocity(op, rho)
    v_value = max(
        lp_norm(partial_derivative(comp, axis), np.inf)
        for comp in u
        for axis in range(grid.d)
    )
    s_track = config.tracking_s if config.tracking_s is not None else 1.0 - op.alpha
    if s_track >= 1.0:
        v_value += max(
            lp_norm(partial_derivative(rho, axis), np.inf) for axis in range(grid.d)
        )
    record["V"] = v_value

    ddrho = partial_derivative(rho, grid.d - 1)
    record["dir_crit"] = besov_norm(bank, BesovParams(-op.alpha, np.inf, 1.0), ddrho)
    record["tail_frac"] = _tail_fraction(rho)
    record["proxy_norm"] = besov_norm(
        bank, BesovParams(1.0 - op.alpha, np.inf, 1.0), rho
    )

    if reference_norm is not None and record["proxy_norm"] > (
        config.proxy.norm_factor * reference_norm
    ):
        record["proxy_state"] = "norm"
    elif record["tail_frac"] > config.proxy.tail_threshold:
        record["proxy_state"] = "tail"
    else:
        record["proxy_state"] = "ok"
    return record


class DiagnosticsSeries:
    """Ordered sample records with trapezoid running integrals.

    ``append`` copies the record, enforces strictly increasing times,
    and fills in int_V and int_dir_crit.  When a value turns non-finite
    the corresponding integral freezes at its last finite value so the
    pre-divergence history stays readable.
    """

    def __init__(self):
        self.records: list = []

    def append(self, record: dict) -> dict:
        rec = dict(record)
        if self.records:
            prev = self.records[-1]
            dt = rec["time"] - prev["time"]
            if dt <= 0:
                raise ValueError(
                    f"sample times must be strictly increasing, got {rec['time']}"
                    f" after {prev['time']}"
                )
            rec["int_V"] = _advance(prev["int_V"], prev["V"], rec["V"], dt)
            rec["int_dir_crit"] = _advance(
                prev["int_dir_crit"], prev["dir_crit"], rec["dir_crit"], dt
            )
        else:
            rec["int_V"] = 0.0
            rec["int_dir_crit"] = 0.0
        self.records.append(rec)
        return rec

    @property
    def times(self) -> list:
        return [rec["time"] for rec in self.records]


def _advance(total, left, right, dt):
    if np.isfinite(left) and np.isfinite(right):
        return total + 0.5 * (left + right) * dt
    return total


def lifespan_estimate(series: DiagnosticsSeries) -> dict:
    """First sampled proxy crossing, reported without interpolation."""
    if not series.records:
        raise ValueError("cannot estimate a lifespan from an empty series")
    for rec in series.records:
        if rec["proxy_state"] != "ok":
            return {"t_star_proxy": rec["time"], "which_trigger": rec["proxy_state"]}
    return {"t_star_proxy": None, "which_trigger": None}


def criterion_report(series: DiagnosticsSeries) -> dict:
    """Continuation-criterion integrals along the run and at its stop time.

    The stop time is the first proxy firing when one occurred and the
    final sample otherwise, so scans can rank runs by how much each
    criterion accumulated before trouble.
    """
    if not series.records:
        raise ValueError("cannot report criteria for an empty series")
    stop = next(
        (i for i, rec in enumerate(series.records) if rec["proxy_state"] != "ok"),
        len(series.records) - 1,
    )
    return {
        "times": series.times,
        "int_V": [rec["int_V"] for rec in series.records],
        "int_dir_crit": [rec["int_dir_crit"] for rec in series.records],
        "int_V_at_stop": series.records[stop]["int_V"],
        "int_dir_crit_at_stop": series.records[stop]["int_dir_crit"],
    }


def write_series_csv(series: DiagnosticsSeries, config: DiagnosticsConfig, path) -> None:
    """One row per sample; floats with 17 significant digits."""
    cols = series_columns(config)
    lines = [",".join(cols)]
    for rec in series.records:
        cells = []
        for col in cols:
            value = rec[col]
            cells.append(value if col == "proxy_state" else "%.17g" % value)
        lines.append(",".join(cells))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
