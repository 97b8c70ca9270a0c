"""Time integration for the transport equation driven by the nonlocal velocity.

The integrator is classical RK4 with either a fixed step or a CFL-limited
adaptive step.  States are immutable in practice: ``step`` returns a new
``SolverState`` and flags divergence instead of raising mid-stage, so a
driver loop can stop cleanly and keep the last finite field.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import SimConfig, build_equilibrium, initial_datum, serialize_config
from .diagnostics import DiagnosticsSeries, lifespan_estimate, sample, write_series_csv
from .lp import DyadicFilterBank
from .spectral import (
    Grid,
    RealField,
    SpectralField,
    forward_transform,
    inverse_transform,
    write_snapshot,
)
from .stokes import EquilibriumProfile, StokesOperator, transport_divergence_coeffs

SPEED_FLOOR = 1e-8


@dataclass
class SchemeConfig:
    """Integration parameters plus the optional model variations.

    ``frozen_velocity`` replaces the coupled velocity with a fixed field,
    which turns the system into passive transport.  ``equilibrium`` switches
    the unknown to a perturbation around a vertical profile.
    """

    cfl: float = 0.5
    dt_fixed: float | None = None
    regularization: tuple[str, int] | None = None
    equilibrium: EquilibriumProfile | None = None
    frozen_velocity: list[RealField] | None = None

    def __post_init__(self):
        if not 0.0 < self.cfl <= 1.0:
            raise ValueError(f"cfl must lie in (0, 1], got {self.cfl}")
        if self.dt_fixed is not None and self.dt_fixed <= 0.0:
            raise ValueError(f"dt_fixed must be positive, got {self.dt_fixed}")


@dataclass
class SolverState:
    t: float
    rho: RealField
    step_count: int = 0
    dt: float = 0.0
    cfl: float = 0.5
    diverged: bool = False
    diverged_time: float | None = None


@dataclass
class RunResult:
    status: str
    series: DiagnosticsSeries
    state: SolverState
    t_star_proxy: float | None
    which_trigger: str | None


def _frozen_coeffs(scheme: SchemeConfig, grid: Grid) -> list[np.ndarray]:
    cached = getattr(scheme, "_frozen_hats", None)
    if cached is None:
        for u in scheme.frozen_velocity:
            if u.grid is not grid:
                raise ValueError("frozen velocity grid does not match the operator grid")
        cached = [forward_transform(u).coeffs for u in scheme.frozen_velocity]
        scheme._frozen_hats = cached
    return cached


def _rhs_values(values: np.ndarray, scheme: SchemeConfig, op: StokesOperator) -> np.ndarray:
    grid = op.grid
    keep = op.dealias_mask
    rho_hat = forward_transform(RealField(grid, values)).coeffs
    if scheme.frozen_velocity is not None:
        vel = _frozen_coeffs(scheme, grid)
    else:
        vel = op.velocity_coeffs(rho_hat)
    out = -transport_divergence_coeffs(grid, keep, rho_hat, vel)
    if scheme.equilibrium is not None:
        # Perturbation form: the transported background contributes u_d dR.
        ud = inverse_transform(SpectralField(grid, vel[grid.d - 1] * keep))
        dr_hat = forward_transform(scheme.equilibrium.dR).coeffs
        dr = inverse_transform(SpectralField(grid, dr_hat * keep))
        source = forward_transform(RealField(grid, dr.values * ud.values))
        out = out - keep * source.coeffs
    if op.projection_mask is not None:
        out = out * op.projection_mask
    return inverse_transform(SpectralField(grid, out)).values


def rhs(state: SolverState, scheme: SchemeConfig, op: StokesOperator) -> RealField:
    """Time derivative of the density for the current state."""
    if state.diverged:
        raise ValueError("cannot evaluate the rhs of a diverged state")
    return RealField(op.grid, _rhs_values(state.rho.values, scheme, op))


def _try_rhs(values, scheme, op):
    """The rhs, or None when the evaluation leaves floating-point range."""
    if not np.all(np.isfinite(values)):
        return None
    try:
        with np.errstate(over="ignore", invalid="ignore"):
            out = _rhs_values(values, scheme, op)
    except ValueError:
        return None
    if not np.all(np.isfinite(out)):
        return None
    return out


def _max_speed(state, scheme, op):
    grid = op.grid
    if scheme.frozen_velocity is not None:
        vel = _frozen_coeffs(scheme, grid)
    else:
        rho_hat = forward_transform(state.rho).coeffs
        vel = op.velocity_coeffs(rho_hat)
    umax = 0.0
    for coeffs in vel:
        u = inverse_transform(SpectralField(grid, coeffs * op.dealias_mask))
        umax = max(umax, float(np.max(np.abs(u.values))))
    return umax


def _choose_dt(state, scheme, op, max_dt):
    if scheme.dt_fixed is not None:
        dt = scheme.dt_fixed
    else:
        umax = _max_speed(state, scheme, op)
        dt = scheme.cfl * op.grid.h / max(umax, SPEED_FLOOR)
    if max_dt is not None:
        dt = min(dt, max_dt)
    return dt


def step(
    state: SolverState,
    scheme: SchemeConfig,
    op: StokesOperator,
    max_dt: float | None = None,
) -> SolverState:
    """Advance one RK4 step, clipping the step size to ``max_dt`` if given."""
    if state.diverged:
        raise ValueError("cannot step a diverged state")
    grid = op.grid
    dt = _choose_dt(state, scheme, op, max_dt)
    y = state.rho.values

    def failed():
        return dataclasses.replace(state, dt=dt, diverged=True, diverged_time=state.t)

    k1 = _try_rhs(y, scheme, op)
    if k1 is None:
        return failed()
    k2 = _try_rhs(y + 0.5 * dt * k1, scheme, op)
    if k2 is None:
        return failed()
    k3 = _try_rhs(y + 0.5 * dt * k2, scheme, op)
    if k3 is None:
        return failed()
    k4 = _try_rhs(y + dt * k3, scheme, op)
    if k4 is None:
        return failed()
    ynew = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(ynew)):
        return failed()
    return dataclasses.replace(
        state,
        t=state.t + dt,
        rho=RealField(grid, ynew),
        step_count=state.step_count + 1,
        dt=dt,
        cfl=scheme.cfl,
    )


def _snapshot_name(t: float) -> str:
    return f"rho_t{t:.6}.fstf"


def run(config: SimConfig, out_dir=None) -> RunResult:
    """Integrate a configured problem to its horizon.

    Samples diagnostics at the configured cadence, stops early when the
    blowup proxy fires or the integrator diverges, and writes the resolved
    config, the diagnostics series, and any requested snapshots when an
    output directory is set.  ``out_dir`` overrides ``config.output.dir``.
    """
    grid = Grid(config.grid.n, config.grid.d)
    op = StokesOperator(grid, config.alpha, regularization=config.scheme.regularization)
    bank = DyadicFilterBank(grid)
    scheme = SchemeConfig(
        cfl=config.scheme.cfl,
        dt_fixed=config.scheme.dt_fixed,
        regularization=config.scheme.regularization,
        equilibrium=build_equilibrium(config, grid),
    )
    dcfg = config.diagnostics

    out = Path(out_dir) if out_dir is not None else None
    if out is None and config.output.dir is not None:
        out = Path(config.output.dir)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.resolved").write_text(serialize_config(config))

    state = SolverState(t=0.0, rho=initial_datum(config, grid), cfl=config.scheme.cfl)
    series = DiagnosticsSeries()
    rec = sample(state, op, bank, dcfg)
    series.append(rec)
    reference = rec["proxy_norm"]
    fired = rec["proxy_state"] not in ("ok", "diverged")
    diverged = rec["proxy_state"] == "diverged"

    snap_times = set(config.output.snapshot_times)
    if out is not None and any(abs(t) <= 1e-12 for t in snap_times):
        write_snapshot(state.rho, out / _snapshot_name(0.0))
    events = sorted(t for t in snap_times | {config.t_end} if 1e-12 < t <= config.t_end + 1e-12)

    if not fired and not diverged:
        for target in events:
            while state.t < target - 1e-9:
                state = step(state, scheme, op, max_dt=target - state.t)
                if state.diverged:
                    break
                if abs(state.t - target) <= 1e-9:
                    state.t = target
                if state.step_count % dcfg.cadence == 0:
                    rec = sample(state, op, bank, dcfg, reference_norm=reference)
                    series.append(rec)
                    if rec["proxy_state"] != "ok":
                        fired = True
                        break
            if state.diverged or fired:
                break
            if out is not None and target in snap_times:
                write_snapshot(state.rho, out / _snapshot_name(target))
        if state.diverged:
            diverged = True
            if state.t > series.records[-1]["time"] + 1e-15:
                rec = sample(state, op, bank, dcfg, reference_norm=reference)
                rec["proxy_state"] = "diverged"
                series.append(rec)
            else:
                series.records[-1]["proxy_state"] = "diverged"
        elif not fired and state.t > series.records[-1]["time"] + 1e-15:
            rec = sample(state, op, bank, dcfg, reference_norm=reference)
            series.append(rec)
            if rec["proxy_state"] != "ok":
                fired = True

    if diverged:
        status = "diverged"
    elif fired:
        status = "blowup_proxy"
    else:
        status = "completed"
    est = lifespan_estimate(series)
    t_star = est["t_star_proxy"] if status == "blowup_proxy" else None
    trigger = est["which_trigger"] if status == "blowup_proxy" else None

    if out is not None:
        write_series_csv(series, dcfg, out / "series.csv")
    return RunResult(
        status=status,
        series=series,
        state=state,
        t_star_proxy=t_star,
        which_trigger=trigger,
    )
