"""Spectral core: periodic grids, transforms, and Fourier multipliers.

Everything lives on the isotropic torus [0, 2pi)^d sampled on an n^d
lattice, so wavevectors are integers and every multiplier below is exact
and diagonal in Fourier space.  Coefficients are normalized so that
f(x) = sum_k c_k exp(i k.x); with that convention Parseval reads
int |f|^2 dx = (2 pi)^d sum_k |c_k|^2.
"""
from __future__ import annotations

import struct
import warnings

import numpy as np

SNAPSHOT_MAGIC = b"FSTF"
SNAPSHOT_VERSION = 1


class Grid:
    """Uniform periodic grid on [0, 2pi)^d with integer wavevectors.

    Caches the stacked wavevector mesh ``k`` (shape (d, n, ..., n)), its
    squared magnitude ``k2``, the magnitude ``kmag``, and the coordinate
    mesh ``x``.
    """

    def __init__(self, n: int, d: int = 2):
        if d not in (2, 3):
            raise ValueError(f"d must be 2 or 3, got {d}")
        n = int(n)
        if n < 8 or (n & (n - 1)) != 0:
            raise ValueError(f"n must be a power of two >= 8, got {n}")
        self.n = n
        self.d = int(d)
        self.h = 2.0 * np.pi / n
        self.shape = (n,) * d
        axis = np.fft.fftfreq(n, 1.0 / n)
        self.k = np.stack(np.meshgrid(*([axis] * d), indexing="ij"))
        self.k2 = np.sum(self.k**2, axis=0)
        self.kmag = np.sqrt(self.k2)
        coords = np.arange(n) * self.h
        self.x = np.stack(np.meshgrid(*([coords] * d), indexing="ij"))
        # Modes with a component at the unpaired Nyquist frequency -n/2.
        # Direction-mixing multipliers are ill-defined there (the sign of
        # the wavevector component is ambiguous on the lattice) and
        # annihilate them to keep real fields real.
        self.nyquist_free = np.all(np.abs(self.k) < n // 2, axis=0)

    @property
    def origin(self):
        return (0,) * self.d

    def __eq__(self, other):
        return isinstance(other, Grid) and self.n == other.n and self.d == other.d

    def __hash__(self):
        return hash((self.n, self.d))

    def __repr__(self):
        return f"Grid(n={self.n}, d={self.d})"


class RealField:
    """Real scalar samples on a grid, row-major."""

    def __init__(self, grid: Grid, values):
        values = np.asarray(values, dtype=np.float64)
        if values.shape != grid.shape:
            raise ValueError(
                f"values shape {values.shape} does not match grid shape {grid.shape}"
            )
        self.grid = grid
        self.values = values

    def copy(self) -> "RealField":
        return RealField(self.grid, self.values.copy())

    def __add__(self, other: "RealField") -> "RealField":
        return RealField(self.grid, self.values + other.values)

    def __sub__(self, other: "RealField") -> "RealField":
        return RealField(self.grid, self.values - other.values)

    def __mul__(self, scale) -> "RealField":
        return RealField(self.grid, self.values * float(scale))

    __rmul__ = __mul__


class SpectralField:
    """Complex Fourier coefficients indexed by integer wavevectors."""

    def __init__(self, grid: Grid, coeffs):
        coeffs = np.asarray(coeffs, dtype=np.complex128)
        if coeffs.shape != grid.shape:
            raise ValueError(
                f"coeffs shape {coeffs.shape} does not match grid shape {grid.shape}"
            )
        self.grid = grid
        self.coeffs = coeffs

    def copy(self) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs.copy())


class MultiplierSpec:
    """Scalar Fourier multiplier evaluated on the wavevector lattice.

    ``symbol`` receives the stacked wavevector array of shape (d, ...) and
    returns multiplier values; ``zero_mode_rule`` is "zero", "identity",
    or an explicit numeric value, and is always consulted at k = 0.
    Matrix-valued operators (the Leray projection) have dedicated
    functions instead of going through this type.
    """

    def __init__(self, symbol, zero_mode_rule="zero"):
        numeric = isinstance(zero_mode_rule, (int, float, complex)) and not isinstance(
            zero_mode_rule, bool
        )
        if zero_mode_rule not in ("zero", "identity") and not numeric:
            raise ValueError(f"bad zero_mode_rule: {zero_mode_rule!r}")
        self.symbol = symbol
        self.zero_mode_rule = zero_mode_rule

    def table(self, grid: Grid) -> np.ndarray:
        """Evaluate the symbol on the full lattice with the k = 0 rule applied."""
        with np.errstate(divide="ignore", invalid="ignore"):
            raw = np.asarray(self.symbol(grid.k))
        table = np.broadcast_to(raw, grid.shape).astype(np.complex128)
        if self.zero_mode_rule == "zero":
            table[grid.origin] = 0.0
        elif self.zero_mode_rule == "identity":
            table[grid.origin] = 1.0
        else:
            table[grid.origin] = complex(self.zero_mode_rule)
        bad = np.argwhere(~np.isfinite(table))
        if bad.size:
            kvec = tuple(int(grid.k[(i, *bad[0])]) for i in range(grid.d))
            raise ValueError(f"multiplier symbol is not finite at k = {kvec}")
        return table


def forward_transform(f: RealField) -> SpectralField:
    """Transform samples to Fourier coefficients (pre: finite input)."""
    bad = np.argwhere(~np.isfinite(f.values))
    if bad.size:
        where = tuple(int(i) for i in bad[0])
        raise ValueError(f"non-finite sample at grid index {where}")
    n = f.grid.n
    return SpectralField(f.grid, np.fft.fftn(f.values) / n**f.grid.d)


def inverse_transform(f: SpectralField) -> RealField:
    n = f.grid.n
    return RealField(f.grid, np.fft.ifftn(f.coeffs).real * n**f.grid.d)


def apply_multiplier(spec: MultiplierSpec, f: SpectralField) -> SpectralField:
    return SpectralField(f.grid, f.coeffs * spec.table(f.grid))


def fractional_laplacian(f: RealField, s: float) -> RealField:
    """(-Laplacian)^{s/2}: multiplier |k|^s.

    The mean mode is preserved for s = 0 and annihilated otherwise; for
    negative s that convention is what makes the inverse well defined.
    """
    if abs(s) > f.grid.d:
        warnings.warn(
            f"fractional order s = {s} outside the working range [-d, d]",
            stacklevel=2,
        )
    rule = "identity" if s == 0 else "zero"
    spec = MultiplierSpec(lambda k: np.sum(k**2, axis=0) ** (s / 2.0), rule)
    return inverse_transform(apply_multiplier(spec, forward_transform(f)))


def partial_derivative(f: RealField, axis: int) -> RealField:
    """Spectral derivative i k_axis; zero at that axis's unpaired Nyquist mode."""
    if not 0 <= axis < f.grid.d:
        raise ValueError(f"axis {axis} out of range for d = {f.grid.d}")
    half = f.grid.n // 2
    spec = MultiplierSpec(
        lambda k: np.where(np.abs(k[axis]) < half, 1j * k[axis], 0.0), "zero"
    )
    return inverse_transform(apply_multiplier(spec, forward_transform(f)))


def leray_project(u) -> list:
    """Project a velocity field onto divergence-free fields.

    Subtracts k (k.u_hat) / |k|^2 mode by mode; the mean mode passes
    through unchanged since constant fields are divergence-free.  Modes
    touching the unpaired Nyquist frequency are annihilated (the mixing
    terms k_i k_j have no Hermitian-consistent value there).
    """
    grid = u[0].grid
    if len(u) != grid.d:
        raise ValueError(f"expected {grid.d} components, got {len(u)}")
    for comp in u[1:]:
        if comp.grid != grid:
            raise ValueError("mismatched grids in velocity components")
    hats = [forward_transform(comp).coeffs for comp in u]
    inv_k2 = np.zeros(grid.shape)
    nonzero = grid.k2 > 0
    inv_k2[nonzero] = 1.0 / grid.k2[nonzero]
    k_dot_u = sum(grid.k[i] * hats[i] for i in range(grid.d))
    return [
        inverse_transform(
            SpectralField(
                grid, (hats[i] - grid.k[i] * inv_k2 * k_dot_u) * grid.nyquist_free
            )
        )
        for i in range(grid.d)
    ]


def dealias(f: SpectralField) -> SpectralField:
    """2/3-rule truncation: zero every coefficient with any |k_i| > n/3."""
    cutoff = f.grid.n / 3.0
    keep = np.all(np.abs(f.grid.k) <= cutoff, axis=0)
    return SpectralField(f.grid, f.coeffs * keep)


def lp_norm(f: RealField, p) -> float:
    """Quadrature L^p norm (rectangle rule; exact for band-limited p = 2)."""
    if np.isinf(p):
        return float(np.max(np.abs(f.values)))
    if p < 1:
        raise ValueError(f"p must be >= 1 or inf, got {p}")
    d = f.grid.d
    return float((f.grid.h**d * np.sum(np.abs(f.values) ** p)) ** (1.0 / p))


def write_snapshot(f: RealField, path) -> None:
    """Write one scalar field: magic, version, d, axis sizes, row-major f8."""
    grid = f.grid
    header = struct.pack("<4sII", SNAPSHOT_MAGIC, SNAPSHOT_VERSION, grid.d)
    header += struct.pack(f"<{grid.d}I", *grid.shape)
    payload = np.ascontiguousarray(f.values, dtype="<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(header + payload)


def read_snapshot(path) -> RealField:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 12 or data[:4] != SNAPSHOT_MAGIC:
        raise ValueError(f"{path}: bad snapshot magic")
    version, d = struct.unpack_from("<II", data, 4)
    if version != SNAPSHOT_VERSION:
        raise ValueError(f"{path}: unsupported snapshot version {version}")
    if d not in (2, 3):
        raise ValueError(f"{path}: unsupported dimension {d}")
    axes = struct.unpack_from(f"<{d}I", data, 12)
    if len(set(axes)) != 1:
        raise ValueError(f"{path}: anisotropic snapshot not supported")
    grid = Grid(axes[0], d=d)
    offset = 12 + 4 * d
    count = grid.n**d
    if len(data) != offset + 8 * count:
        raise ValueError(f"{path}: truncated snapshot payload")
    values = np.frombuffer(data, dtype="<f8", offset=offset, count=count)
    return RealField(grid, values.reshape(grid.shape).copy())
