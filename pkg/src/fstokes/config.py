"""Run configuration: parsing, serialization, and initial-datum presets.

Config files are line oriented ``key = value`` with dotted section
names and ``#`` comments.  Parsing validates everything it can and
reports every problem at once, each tagged with its line number;
``serialize_config`` writes back a fully resolved file (all defaults
materialized) that reparses to an equal config.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from fstokes.diagnostics import BlowupProxyConfig, DiagnosticsConfig
from fstokes.spectral import (
    Grid,
    RealField,
    SpectralField,
    forward_transform,
    inverse_transform,
    read_snapshot,
)
from fstokes.stokes import EquilibriumProfile

PRESET_NAMES = (
    "stratified_sin",
    "shear_sin",
    "perturbed_stratification",
    "random_smooth",
    "from_file",
)


class ConfigError(Exception):
    """All config problems found in one pass, one message per line."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("\n".join(self.errors))


@dataclass(frozen=True)
class GridSpec:
    n: int = 128
    d: int = 2


@dataclass(frozen=True)
class SchemeSpec:
    cfl: float = 0.5
    dt_fixed: float | None = None
    regularization: tuple | None = None


@dataclass(frozen=True)
class InitialSpec:
    name: str = "stratified_sin"
    amplitude: float = 1.0
    epsilon: float = 0.1
    k0: float = 4.0
    path: str | None = None


@dataclass(frozen=True)
class EquilibriumSpec:
    name: str | None = None
    amplitude: float = 1.0


@dataclass(frozen=True)
class OutputSpec:
    dir: str | None = None
    snapshot_times: tuple = ()


@dataclass(frozen=True)
class SimConfig:
    alpha: float = 1.0
    grid: GridSpec = field(default_factory=GridSpec)
    t_end: float = 1.0
    scheme: SchemeSpec = field(default_factory=SchemeSpec)
    initial: InitialSpec = field(default_factory=InitialSpec)
    equilibrium: EquilibriumSpec = field(default_factory=EquilibriumSpec)
    diagnostics: DiagnosticsConfig = field(default_factory=DiagnosticsConfig)
    seed: int = 0
    output: OutputSpec = field(default_factory=OutputSpec)


def _parse_float(val):
    try:
        return float(val)
    except ValueError:
        raise ValueError(f"expected a number, got {val!r}") from None


def _parse_int(val):
    try:
        return int(val)
    except ValueError:
        raise ValueError(f"expected an integer, got {val!r}") from None


def _parse_grid_n(val):
    n = _parse_int(val)
    if n < 8 or n & (n - 1):
        raise ValueError(f"grid.n must be a power of two >= 8, got {n}")
    return n


def _parse_grid_d(val):
    d = _parse_int(val)
    if d not in (2, 3):
        raise ValueError(f"grid.d must be 2 or 3, got {d}")
    return d


def _parse_nonneg_float(val):
    x = _parse_float(val)
    if x < 0:
        raise ValueError(f"expected a nonnegative number, got {val}")
    return x


def _parse_cfl(val):
    x = _parse_float(val)
    if not 0.0 < x <= 1.0:
        raise ValueError(f"cfl must lie in (0, 1], got {x}")
    return x


def _parse_dt(val):
    if val == "none":
        return None
    x = _parse_float(val)
    if x <= 0:
        raise ValueError(f"dt must be positive, got {x}")
    return x


def _parse_regularization(val):
    if val == "none":
        return None
    kind, sep, level = val.partition(":")
    if not sep or kind not in ("friedrichs", "bandpass"):
        raise ValueError(
            f"regularization must be none, friedrichs:<n>, or bandpass:<N>, got {val!r}"
        )
    try:
        level = int(level)
    except ValueError:
        raise ValueError(f"regularization level {level!r} is not an integer") from None
    if level < 1:
        raise ValueError(f"regularization level must be >= 1, got {level}")
    return (kind, level)


def _parse_extended(token):
    if token == "inf":
        return np.inf
    return _parse_float(token)


def _parse_lp_list(val):
    out = []
    for token in val.split():
        p = _parse_extended(token)
        if p < 1:
            raise ValueError(f"Lebesgue exponent must be >= 1, got {token}")
        out.append(p)
    return tuple(out)


def _parse_besov_list(val):
    out = []
    for token in val.split():
        parts = token.split(":")
        if len(parts) != 3:
            raise ValueError(f"besov entry {token!r} must have the form s:p:r")
        s = _parse_float(parts[0])
        p = _parse_extended(parts[1])
        r = _parse_extended(parts[2])
        if p < 1 or r < 1:
            raise ValueError(f"besov entry {token!r} needs p, r >= 1")
        out.append((s, p, r))
    return tuple(out)


def _parse_ll_list(val):
    out = []
    for token in val.split():
        a = _parse_float(token)
        if a < 0:
            raise ValueError(f"log-Lipschitz exponent must be >= 0, got {token}")
        out.append(a)
    return tuple(out)


def _parse_tracking(val):
    if val == "auto":
        return None
    return _parse_float(val)


def _parse_cadence(val):
    c = _parse_int(val)
    if c < 1:
        raise ValueError(f"cadence must be >= 1, got {c}")
    return c


def _parse_norm_factor(val):
    x = _parse_float(val)
    if not x > 1.0:
        raise ValueError(f"norm_factor must exceed 1, got {x}")
    return x


def _parse_tail_threshold(val):
    x = _parse_float(val)
    if not 0.0 < x < 1.0:
        raise ValueError(f"tail_threshold must lie in (0, 1), got {x}")
    return x


def _parse_seed(val):
    s = _parse_int(val)
    if s < 0:
        raise ValueError(f"seed must be >= 0, got {s}")
    return s


def _parse_preset_name(val):
    if val not in PRESET_NAMES:
        raise ValueError(f"unknown preset {val!r}; choose from {', '.join(PRESET_NAMES)}")
    return val


def _parse_equilibrium_name(val):
    if val == "none":
        return None
    if val not in ("sin", "cos"):
        raise ValueError(f"equilibrium name must be none, sin, or cos, got {val!r}")
    return val


def _parse_optional_str(val):
    return None if val == "none" else val


def _parse_positive_float(val):
    x = _parse_float(val)
    if x <= 0:
        raise ValueError(f"expected a positive number, got {val}")
    return x


def _parse_time_list(val):
    out = []
    for token in val.split():
        t = _parse_float(token)
        if t < 0:
            raise ValueError(f"snapshot time must be >= 0, got {token}")
        out.append(t)
    return tuple(out)


_PARSERS = {
    "alpha": _parse_float,
    "grid.n": _parse_grid_n,
    "grid.d": _parse_grid_d,
    "t_end": _parse_nonneg_float,
    "scheme.cfl": _parse_cfl,
    "scheme.dt": _parse_dt,
    "scheme.regularization": _parse_regularization,
    "initial.name": _parse_preset_name,
    "initial.amplitude": _parse_float,
    "initial.epsilon": _parse_nonneg_float,
    "initial.k0": _parse_positive_float,
    "initial.path": _parse_optional_str,
    "equilibrium.name": _parse_equilibrium_name,
    "equilibrium.amplitude": _parse_float,
    "diagnostics.cadence": _parse_cadence,
    "diagnostics.lp": _parse_lp_list,
    "diagnostics.besov": _parse_besov_list,
    "diagnostics.ll": _parse_ll_list,
    "diagnostics.tracking_s": _parse_tracking,
    "diagnostics.proxy.norm_factor": _parse_norm_factor,
    "diagnostics.proxy.tail_threshold": _parse_tail_threshold,
    "seed": _parse_seed,
    "output.dir": _parse_optional_str,
    "output.snapshot_times": _parse_time_list,
}

_DEFAULTS = {
    "alpha": 1.0,
    "grid.n": 128,
    "grid.d": 2,
    "t_end": 1.0,
    "scheme.cfl": 0.5,
    "scheme.dt": None,
    "scheme.regularization": None,
    "initial.name": "stratified_sin",
    "initial.amplitude": 1.0,
    "initial.epsilon": 0.1,
    "initial.k0": 4.0,
    "initial.path": None,
    "equilibrium.name": None,
    "equilibrium.amplitude": 1.0,
    "diagnostics.cadence": 10,
    "diagnostics.lp": (),
    "diagnostics.besov": ((0.0, np.inf, 1.0),),
    "diagnostics.ll": (),
    "diagnostics.tracking_s": None,
    "diagnostics.proxy.norm_factor": 100.0,
    "diagnostics.proxy.tail_threshold": 0.1,
    "seed": 0,
    "output.dir": None,
    "output.snapshot_times": (),
}


def parse_config(text: str) -> SimConfig:
    """Parse and fully validate a config, raising ConfigError with every problem."""
    errors = []
    lines_of = {}
    values = dict(_DEFAULTS)
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep:
            errors.append(f"line {lineno}: expected key = value, got {line!r}")
            continue
        key = key.strip()
        val = val.strip()
        if key not in _PARSERS:
            errors.append(f"line {lineno}: unknown key {key!r}")
            continue
        if key in lines_of:
            errors.append(f"line {lineno}: duplicate key {key!r}")
            continue
        lines_of[key] = lineno
        try:
            values[key] = _PARSERS[key](val)
        except ValueError as exc:
            errors.append(f"line {lineno}: {exc}")

    d = values["grid.d"]
    if not 0.0 <= values["alpha"] <= d:
        errors.append(
            f"line {lines_of.get('alpha', 0)}: alpha must lie in [0, d]"
            f" with d = {d}, got {values['alpha']}"
        )
    if values["initial.name"] == "from_file":
        path = values["initial.path"]
        if path is None:
            errors.append(
                f"line {lines_of.get('initial.name', 0)}:"
                " initial.name = from_file needs initial.path"
            )
        elif not os.path.exists(path):
            errors.append(
                f"line {lines_of.get('initial.path', 0)}:"
                f" initial.path {path!r} does not exist"
            )
    if errors:
        raise ConfigError(errors)

    return SimConfig(
        alpha=values["alpha"],
        grid=GridSpec(n=values["grid.n"], d=values["grid.d"]),
        t_end=values["t_end"],
        scheme=SchemeSpec(
            cfl=values["scheme.cfl"],
            dt_fixed=values["scheme.dt"],
            regularization=values["scheme.regularization"],
        ),
        initial=InitialSpec(
            name=values["initial.name"],
            amplitude=values["initial.amplitude"],
            epsilon=values["initial.epsilon"],
            k0=values["initial.k0"],
            path=values["initial.path"],
        ),
        equilibrium=EquilibriumSpec(
            name=values["equilibrium.name"],
            amplitude=values["equilibrium.amplitude"],
        ),
        diagnostics=DiagnosticsConfig(
            cadence=values["diagnostics.cadence"],
            lp_exponents=values["diagnostics.lp"],
            besov_indices=values["diagnostics.besov"],
            ll_alphas=values["diagnostics.ll"],
            tracking_s=values["diagnostics.tracking_s"],
            proxy=BlowupProxyConfig(
                norm_factor=values["diagnostics.proxy.norm_factor"],
                tail_threshold=values["diagnostics.proxy.tail_threshold"],
            ),
        ),
        seed=values["seed"],
        output=OutputSpec(
            dir=values["output.dir"],
            snapshot_times=values["output.snapshot_times"],
        ),
    )


def _num(x) -> str:
    return repr(float(x))


def serialize_config(config: SimConfig) -> str:
    """Render a resolved config; floats use repr so reparsing is exact."""
    diag = config.diagnostics
    pairs = [
        ("alpha", _num(config.alpha)),
        ("grid.n", str(config.grid.n)),
        ("grid.d", str(config.grid.d)),
        ("t_end", _num(config.t_end)),
        ("scheme.cfl", _num(config.scheme.cfl)),
        ("scheme.dt", "none" if config.scheme.dt_fixed is None else _num(config.scheme.dt_fixed)),
        (
            "scheme.regularization",
            "none"
            if config.scheme.regularization is None
            else "%s:%d" % config.scheme.regularization,
        ),
        ("initial.name", config.initial.name),
        ("initial.amplitude", _num(config.initial.amplitude)),
        ("initial.epsilon", _num(config.initial.epsilon)),
        ("initial.k0", _num(config.initial.k0)),
        ("initial.path", config.initial.path or "none"),
        ("equilibrium.name", config.equilibrium.name or "none"),
        ("equilibrium.amplitude", _num(config.equilibrium.amplitude)),
        ("diagnostics.cadence", str(diag.cadence)),
        ("diagnostics.lp", " ".join(_num(p) for p in diag.lp_exponents)),
        (
            "diagnostics.besov",
            " ".join(f"{_num(s)}:{_num(p)}:{_num(r)}" for (s, p, r) in diag.besov_indices),
        ),
        ("diagnostics.ll", " ".join(_num(a) for a in diag.ll_alphas)),
        (
            "diagnostics.tracking_s",
            "auto" if diag.tracking_s is None else _num(diag.tracking_s),
        ),
        ("diagnostics.proxy.norm_factor", _num(diag.proxy.norm_factor)),
        ("diagnostics.proxy.tail_threshold", _num(diag.proxy.tail_threshold)),
        ("seed", str(config.seed)),
        ("output.dir", config.output.dir or "none"),
        ("output.snapshot_times", " ".join(_num(t) for t in config.output.snapshot_times)),
    ]
    return "".join(f"{key} = {value}\n" for key, value in pairs)


def _band_noise(grid: Grid, k0: float, seed: int) -> np.ndarray:
    """Band-limited white noise, zero mean, normalized to unit sup norm."""
    rng = np.random.default_rng(seed)
    white = RealField(grid, rng.standard_normal(grid.shape))
    hat = forward_transform(white).coeffs
    keep = grid.kmag <= k0
    keep[grid.origin] = False
    values = inverse_transform(SpectralField(grid, hat * keep)).values
    peak = np.max(np.abs(values))
    return values / peak if peak > 0 else values


def _smooth_noise(grid: Grid, k0: float, seed: int) -> np.ndarray:
    """Gaussian-decay spectrum exp(-|k|^2 / (2 k0^2)), zero mean, unit sup norm."""
    rng = np.random.default_rng(seed)
    white = RealField(grid, rng.standard_normal(grid.shape))
    hat = forward_transform(white).coeffs
    decay = np.exp(-grid.k2 / (2.0 * k0 * k0))
    decay[grid.origin] = 0.0
    values = inverse_transform(SpectralField(grid, hat * decay)).values
    peak = np.max(np.abs(values))
    return values / peak if peak > 0 else values


def preset_initial_datum(name: str, grid: Grid, amplitude: float = 1.0,
                         epsilon: float = 0.1, k0: float = 4.0,
                         path: str | None = None, seed: int = 0) -> RealField:
    """Named deterministic initial data; see PRESET_NAMES."""
    xd = grid.x[grid.d - 1]
    if name == "stratified_sin":
        return RealField(grid, amplitude * np.sin(xd))
    if name == "shear_sin":
        return RealField(grid, amplitude * np.sin(grid.x[0]))
    if name == "perturbed_stratification":
        # amplitude scales the whole datum so that rescaling it rescales
        # the solution, not just the stratified part
        shape = np.sin(xd) + epsilon * _band_noise(grid, k0, seed)
        return RealField(grid, amplitude * shape)
    if name == "random_smooth":
        return RealField(grid, amplitude * _smooth_noise(grid, k0, seed))
    if name == "from_file":
        if path is None:
            raise ValueError("from_file preset needs a path")
        loaded = read_snapshot(path)
        if loaded.grid != grid:
            raise ValueError(
                f"snapshot grid {loaded.grid!r} does not match requested {grid!r}"
            )
        return loaded
    raise ValueError(f"unknown preset {name!r}")


def initial_datum(config: SimConfig, grid: Grid) -> RealField:
    """The initial density selected by a config."""
    spec = config.initial
    return preset_initial_datum(
        spec.name,
        grid,
        amplitude=spec.amplitude,
        epsilon=spec.epsilon,
        k0=spec.k0,
        path=spec.path,
        seed=config.seed,
    )


def build_equilibrium(config: SimConfig, grid: Grid) -> EquilibriumProfile | None:
    spec = config.equilibrium
    if spec.name is None:
        return None
    return EquilibriumProfile.from_name(grid, spec.name, spec.amplitude)
