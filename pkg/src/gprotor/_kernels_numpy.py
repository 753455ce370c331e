"""Pure-numpy versions of the pointwise kernels.

Every function here has an identically named ``@njit`` twin in
``_kernels_numba``; the two must agree to roundoff.
"""

import numpy as np


def density_power(psi, sigma):
    """|psi|^(2 sigma)."""
    rho = psi.real * psi.real + psi.imag * psi.imag
    if sigma == 1.0:
        return rho
    return rho ** sigma


def nonlinear_phase(psi, pot, a, sigma, dt):
    """psi * exp(-i dt (pot + a |psi|^(2 sigma)))."""
    phase = pot + a * density_power(psi, sigma)
    return psi * np.exp(-1j * dt * phase)


def rotated_phase(psi, xp, xq, base, c, s, wp2, wq2, a, sigma, dt):
    """Nonlinear phase with the in-plane potential evaluated at the rotated point.

    The rotated coordinates are ``(c xp + s xq, -s xp + c xq)``; ``base``
    carries the out-of-plane part of the potential (zeros in 2D).
    """
    yp = c * xp + s * xq
    yq = -s * xp + c * xq
    pot = base + 0.5 * (wp2 * yp * yp + wq2 * yq * yq)
    return nonlinear_phase(psi, pot, a, sigma, dt)


def flow_forcing(phi, pot, lphi, a, sigma, mu):
    """(mu - V - a|phi|^(2 sigma)) phi + (Omega.L) phi, the explicit part of the gradient flow."""
    return (mu - pot - a * density_power(phi, sigma)) * phi + lphi


def power_sum(psi, p):
    """sum |psi|^p."""
    rho = psi.real * psi.real + psi.imag * psi.imag
    if p == 2.0:
        return float(rho.sum())
    return float((rho ** (0.5 * p)).sum())


def weighted_sum(psi, w):
    """sum w |psi|^2."""
    rho = psi.real * psi.real + psi.imag * psi.imag
    return float((w * rho).sum())
