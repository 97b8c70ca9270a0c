"""Pseudo-spectral fractional Stokes transport on the periodic torus.

The package is organized around the chain density -> velocity -> transport:
``spectral`` holds the grid and multiplier machinery, ``stokes`` the
velocity law u = (-Lap)^{-alpha/2} P(rho g), ``solver`` the RK4 time
stepper, ``lp`` the Littlewood-Paley filter bank and Besov norms, and
``diagnostics``/``config``/``scan``/``cli`` the experiment harness around
them.
"""

from fstokes.config import (
    ConfigError,
    SimConfig,
    initial_datum,
    parse_config,
    preset_initial_datum,
    serialize_config,
)
from fstokes.diagnostics import (
    BlowupProxyConfig,
    DiagnosticsConfig,
    DiagnosticsSeries,
    criterion_report,
    lifespan_estimate,
    sample,
    write_series_csv,
)
from fstokes.lp import (
    BesovParams,
    DyadicFilterBank,
    besov_norm,
    bony_decompose,
    dyadic_block,
    log_lipschitz_norm,
)
from fstokes.scan import ScanSpec, fit_lifespan_curve, run_scan
from fstokes.solver import RunResult, SchemeConfig, SolverState, rhs, run, step
from fstokes.spectral import (
    Grid,
    MultiplierSpec,
    RealField,
    SpectralField,
    apply_multiplier,
    dealias,
    forward_transform,
    fractional_laplacian,
    inverse_transform,
    leray_project,
    lp_norm,
    partial_derivative,
    read_snapshot,
    write_snapshot,
)
from fstokes.stokes import (
    EquilibriumProfile,
    StokesOperator,
    advection_term,
    pressure_gradient,
    stokes_velocity,
    structure_split,
)

__all__ = [
    "BesovParams",
    "BlowupProxyConfig",
    "ConfigError",
    "DiagnosticsConfig",
    "DiagnosticsSeries",
    "DyadicFilterBank",
    "EquilibriumProfile",
    "Grid",
    "MultiplierSpec",
    "RealField",
    "RunResult",
    "ScanSpec",
    "SchemeConfig",
    "SimConfig",
    "SolverState",
    "SpectralField",
    "StokesOperator",
    "advection_term",
    "apply_multiplier",
    "besov_norm",
    "bony_decompose",
    "criterion_report",
    "dealias",
    "dyadic_block",
    "fit_lifespan_curve",
    "forward_transform",
    "fractional_laplacian",
    "initial_datum",
    "inverse_transform",
    "leray_project",
    "lifespan_estimate",
    "log_lipschitz_norm",
    "lp_norm",
    "parse_config",
    "partial_derivative",
    "preset_initial_datum",
    "pressure_gradient",
    "read_snapshot",
    "rhs",
    "run",
    "run_scan",
    "sample",
    "serialize_config",
    "step",
    "stokes_velocity",
    "structure_split",
    "write_series_csv",
    "write_snapshot",
]

__version__ = "0.1.0"
