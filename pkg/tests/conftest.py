"""Shared helpers: independent brute-force oracles and field generators.

The oracles here deliberately avoid numpy's FFT.  Coefficients are formed
by explicit exponential sums, one mode at a time, so they can arbitrate
disagreements with the library's transform-based operators.
"""
import numpy as np

from fstokes.spectral import Grid, RealField


def mode_list(n):
    """Integer wavevectors along one axis in transform storage order."""
    k = np.arange(n)
    k[k >= (n + 1) // 2] -= n
    return k


def quad_l2(values, h):
    """Rectangle-rule L2 norm of grid samples."""
    d = values.ndim
    return np.sqrt(h**d * np.sum(values**2))


def random_field(grid, rng, kmax=None, zero_mean=False):
    """Smooth random RealField, optionally band-limited to |k_i| <= kmax."""
    values = rng.standard_normal(grid.shape)
    if kmax is not None:
        hat = np.fft.fftn(values)
        mask = np.all(np.abs(grid.k) <= kmax, axis=0)
        values = np.fft.ifftn(hat * mask).real
    if zero_mean:
        values = values - values.mean()
    return RealField(grid, values)


def _mode_iter(n, d):
    ks = mode_list(n)
    if d == 2:
        for a, k1 in enumerate(ks):
            for b, k2 in enumerate(ks):
                yield (a, b), np.array([k1, k2], dtype=float)
    else:
        for a, k1 in enumerate(ks):
            for b, k2 in enumerate(ks):
                for c, k3 in enumerate(ks):
                    yield (a, b, c), np.array([k1, k2, k3], dtype=float)


def _phases(n, d, kvec):
    x = 2.0 * np.pi * np.arange(n) / n
    if d == 2:
        return np.exp(-1j * (kvec[0] * x[:, None] + kvec[1] * x[None, :]))
    return np.exp(
        -1j
        * (
            kvec[0] * x[:, None, None]
            + kvec[1] * x[None, :, None]
            + kvec[2] * x[None, None, :]
        )
    )


def bruteforce_multiplier(values, symbol):
    """Apply a scalar Fourier multiplier by explicit per-mode DFT sums.

    symbol(kvec) -> complex scalar; the k = 0 convention is whatever the
    symbol itself returns there, so pass one that encodes the rule.
    """
    n = values.shape[0]
    d = values.ndim
    out = np.zeros(values.shape, dtype=complex)
    for _, kvec in _mode_iter(n, d):
        phase = _phases(n, d, kvec)
        coeff = np.sum(values * phase) / n**d
        out += symbol(kvec) * coeff * np.conj(phase)
    return out.real


def bruteforce_leray(component_values):
    """Project a velocity field onto divergence-free fields, mode by mode.

    Mirrors the library convention: modes with a component at the
    unpaired Nyquist frequency -n/2 are annihilated.
    """
    d = len(component_values)
    n = component_values[0].shape[0]
    out = [np.zeros(component_values[0].shape, dtype=complex) for _ in range(d)]
    for _, kvec in _mode_iter(n, d):
        if np.any(2 * np.abs(kvec) >= n):
            continue
        phase = _phases(n, d, kvec)
        coeffs = np.array([np.sum(v * phase) / n**d for v in component_values])
        ksq = np.dot(kvec, kvec)
        if ksq > 0:
            coeffs = coeffs - kvec * (np.dot(kvec, coeffs) / ksq)
        for i in range(d):
            out[i] += coeffs[i] * np.conj(phase)
    return [o.real for o in out]
