"""Density-to-velocity law and the transport nonlinearity built on it.

The velocity solves the fractional balance
(-Lap)^{alpha/2} u + grad pi = rho e_d with div u = 0, so in Fourier
space u_hat = |k|^{-alpha} (e_d - k k_d / |k|^2) rho_hat with the mean
mode dropped.  An operator may carry a spectral smoothing of the
density feeding this law; that is how the regularized approximations
used by the time stepper are expressed.
"""
from __future__ import annotations

import numpy as np

from fstokes.lp import chi_profile
from fstokes.spectral import (
    Grid,
    RealField,
    SpectralField,
    forward_transform,
    inverse_transform,
    partial_derivative,
)


class StokesOperator:
    """Multiplier tables for one (grid, alpha, regularization) triple.

    ``regularization`` is None, ``("friedrichs", n_cut)`` for a sharp
    Euclidean cutoff |k| <= n_cut on the density, or ``("bandpass", N)``
    for the smooth dyadic low-pass keeping blocks up to N.  The
    Friedrichs mask doubles as the outer projection of the regularized
    evolution and is exposed as ``projection_mask``.
    """

    def __init__(self, grid: Grid, alpha: float, regularization=None):
        alpha = float(alpha)
        if not 0.0 <= alpha <= grid.d:
            raise ValueError(f"alpha must be in [0, {grid.d}], got {alpha}")
        self.grid = grid
        self.alpha = alpha
        self.regularization = regularization
        d = grid.d
        nonzero = grid.k2 > 0
        inv_k2 = np.zeros(grid.shape)
        inv_k2[nonzero] = 1.0 / grid.k2[nonzero]
        inv_alpha = np.zeros(grid.shape)
        inv_alpha[nonzero] = grid.kmag[nonzero] ** (-alpha)
        self.inv_k2 = inv_k2
        self.inv_alpha = inv_alpha
        kd = grid.k[d - 1]
        self.pressure_symbols = [
            grid.k[i] * kd * inv_k2 * grid.nyquist_free for i in range(d)
        ]
        self.velocity_symbols = []
        for i in range(d):
            delta = 1.0 if i == d - 1 else 0.0
            sym = inv_alpha * (delta - grid.k[i] * kd * inv_k2) * grid.nyquist_free
            sym[grid.origin] = 0.0
            self.velocity_symbols.append(sym)
        self.dealias_mask = np.all(np.abs(grid.k) <= grid.n / 3.0, axis=0)
        self.smoothing, self.projection_mask = self._build_smoothing(regularization)

    def _build_smoothing(self, regularization):
        grid = self.grid
        if regularization is None:
            return np.ones(grid.shape), None
        try:
            kind, level = regularization
        except (TypeError, ValueError):
            raise ValueError(f"bad regularization {regularization!r}") from None
        level = int(level)
        if kind == "friedrichs":
            if level < 1:
                raise ValueError(f"regularization cutoff must be >= 1, got {level}")
            mask = (grid.kmag <= level).astype(float)
            return mask, mask
        if kind == "bandpass":
            if level < 1:
                raise ValueError(f"regularization level must be >= 1, got {level}")
            j_max = int(np.ceil(np.log2(grid.n / 2.0)))
            if level >= j_max:
                return np.ones(grid.shape), None
            return chi_profile(grid.kmag / 2.0 ** (level + 1)), None
        raise ValueError(f"unknown regularization kind {kind!r}")

    def velocity_coeffs(self, rho_coeffs: np.ndarray) -> list:
        """Velocity coefficients from density coefficients, smoothing included."""
        smoothed = rho_coeffs * self.smoothing
        return [sym * smoothed for sym in self.velocity_symbols]


def _check_grid(op: StokesOperator, f: RealField) -> None:
    if f.grid != op.grid:
        raise ValueError("field grid does not match the operator grid")


def stokes_velocity(op: StokesOperator, rho: RealField) -> list:
    """Velocity induced by the density: divergence-free with zero mean."""
    _check_grid(op, rho)
    rhat = forward_transform(rho)
    return [
        inverse_transform(SpectralField(op.grid, coeffs))
        for coeffs in op.velocity_coeffs(rhat.coeffs)
    ]


def pressure_gradient(op: StokesOperator, rho: RealField) -> list:
    """Gradient of the pressure balancing the non-solenoidal part of rho e_d."""
    _check_grid(op, rho)
    rhat = forward_transform(rho).coeffs * op.smoothing
    return [
        inverse_transform(SpectralField(op.grid, sym * rhat))
        for sym in op.pressure_symbols
    ]


def transport_divergence_coeffs(grid: Grid, keep: np.ndarray, rho_coeffs: np.ndarray,
                                velocity_coeffs: list) -> np.ndarray:
    """Coefficients of div(rho u) with 2/3-rule products.

    Both factors are truncated before multiplying, so the quadratic term
    is alias free; for divergence-free u the result equals u . grad rho
    exactly on the kept band.
    """
    rho_t = inverse_transform(SpectralField(grid, rho_coeffs * keep))
    total = np.zeros(grid.shape, dtype=np.complex128)
    for i, coeffs in enumerate(velocity_coeffs):
        u_t = inverse_transform(SpectralField(grid, coeffs * keep))
        flux = forward_transform(RealField(grid, rho_t.values * u_t.values))
        total += 1j * grid.k[i] * keep * flux.coeffs
    return total


def advection_divergence_coeffs(op: StokesOperator, rhat: SpectralField) -> SpectralField:
    """div(rho u) coefficients with u induced by rho itself."""
    total = transport_divergence_coeffs(
        op.grid, op.dealias_mask, rhat.coeffs, op.velocity_coeffs(rhat.coeffs)
    )
    return SpectralField(op.grid, total)


def advection_term(op: StokesOperator, rho: RealField) -> RealField:
    """u . grad rho evaluated in divergence form."""
    _check_grid(op, rho)
    return inverse_transform(advection_divergence_coeffs(op, forward_transform(rho)))


def _trim(grid: Grid, keep: np.ndarray, values: np.ndarray) -> RealField:
    hat = forward_transform(RealField(grid, values))
    return inverse_transform(SpectralField(grid, hat.coeffs * keep))


def structure_split(op: StokesOperator, rho: RealField):
    """Split u . grad rho into the vertical term and a gradient remainder.

    Writing u = (-Lap)^{-alpha/2} rho~ e_d + grad q with the potential
    q = -(-Lap)^{-1-alpha/2} d_d rho~ (rho~ the smoothed density), the
    advection term becomes

        term1 = [(-Lap)^{-alpha/2} rho~] d_d rho,
        term2 = grad rho . grad q.

    Both terms are built from the same truncated factors as
    advection_term, so term1 + term2 matches it to rounding.
    """
    _check_grid(op, rho)
    grid = op.grid
    keep = op.dealias_mask
    rhat = forward_transform(rho).coeffs * keep
    shat = rhat * op.smoothing
    kd = grid.k[grid.d - 1]
    vert = inverse_transform(SpectralField(grid, op.inv_alpha * shat))
    ddrho = inverse_transform(SpectralField(grid, 1j * kd * rhat))
    term1 = vert.values * ddrho.values
    term2 = np.zeros(grid.shape)
    for i in range(grid.d):
        drho = inverse_transform(SpectralField(grid, 1j * grid.k[i] * rhat))
        dq = inverse_transform(
            SpectralField(grid, -grid.k[i] * kd * op.inv_alpha * op.inv_k2 * shat)
        )
        term2 += drho.values * dq.values
    return _trim(grid, keep, term1), _trim(grid, keep, term2)


class EquilibriumProfile:
    """Background density depending on the vertical coordinate only.

    Such profiles are exact steady states of the transport law; the
    vertical derivative dR is the coefficient in the linearization
    around them.
    """

    def __init__(self, R: RealField):
        grid = R.grid
        horizontal = tuple(range(grid.d - 1))
        column = R.values.mean(axis=horizontal)
        residual = R.values - column
        scale = max(1.0, float(np.max(np.abs(R.values))))
        if np.max(residual**2) > 1e-12 * scale**2:
            raise ValueError("equilibrium profile must depend on x_d only")
        self.R = R.copy()
        self.dR = partial_derivative(R, grid.d - 1)

    @classmethod
    def from_name(cls, grid: Grid, name: str, amplitude: float) -> "EquilibriumProfile":
        xd = grid.x[grid.d - 1]
        if name == "sin":
            values = amplitude * np.sin(xd)
        elif name == "cos":
            values = amplitude * np.cos(xd)
        else:
            raise ValueError(f"unknown profile {name!r}")
        return cls(RealField(grid, values))
