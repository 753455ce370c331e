"""Numba-compiled pointwise kernels (flat, contiguous arrays only)."""

import math

import numpy as np
from numba import njit


@njit(cache=True)
def density_power(psi, sigma):
    out = np.empty(psi.shape[0])
    for i in range(psi.shape[0]):
        z = psi[i]
        rho = z.real * z.real + z.imag * z.imag
        out[i] = rho if sigma == 1.0 else rho ** sigma
    return out


@njit(cache=True)
def nonlinear_phase(psi, pot, a, sigma, dt):
    out = np.empty_like(psi)
    for i in range(psi.shape[0]):
        z = psi[i]
        rho = z.real * z.real + z.imag * z.imag
        if sigma != 1.0:
            rho = rho ** sigma
        theta = -dt * (pot[i] + a * rho)
        ct = math.cos(theta)
        st = math.sin(theta)
        out[i] = complex(z.real * ct - z.imag * st, z.real * st + z.imag * ct)
    return out


@njit(cache=True)
def rotated_phase(psi, xp, xq, base, c, s, wp2, wq2, a, sigma, dt):
    out = np.empty_like(psi)
    for i in range(psi.shape[0]):
        yp = c * xp[i] + s * xq[i]
        yq = -s * xp[i] + c * xq[i]
        z = psi[i]
        rho = z.real * z.real + z.imag * z.imag
        if sigma != 1.0:
            rho = rho ** sigma
        theta = -dt * (base[i] + 0.5 * (wp2 * yp * yp + wq2 * yq * yq) + a * rho)
        ct = math.cos(theta)
        st = math.sin(theta)
        out[i] = complex(z.real * ct - z.imag * st, z.real * st + z.imag * ct)
    return out


@njit(cache=True)
def flow_forcing(phi, pot, lphi, a, sigma, mu):
    out = np.empty_like(phi)
    for i in range(phi.shape[0]):
        z = phi[i]
        rho = z.real * z.real + z.imag * z.imag
        if sigma != 1.0:
            rho = rho ** sigma
        out[i] = (mu - pot[i] - a * rho) * z + lphi[i]
    return out


@njit(cache=True)
def power_sum(psi, p):
    acc = 0.0
    half = 0.5 * p
    # integer powers by repeated multiplication; pow() is far slower
    k = int(half)
    integral = k == half and 1 <= k <= 8
    for i in range(psi.shape[0]):
        z = psi[i]
        rho = z.real * z.real + z.imag * z.imag
        if integral:
            r = rho
            for _ in range(k - 1):
                r *= rho
            acc += r
        else:
            acc += rho ** half
    return acc


@njit(cache=True)
def weighted_sum(psi, w):
    acc = 0.0
    for i in range(psi.shape[0]):
        z = psi[i]
        acc += w[i] * (z.real * z.real + z.imag * z.imag)
    return acc
