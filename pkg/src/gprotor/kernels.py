"""Backend selection for the pointwise kernels and FFT plumbing.

Set ``GPROTOR_NUMBA=0`` to force the numpy path; by default the numba
kernels are used whenever numba imports. ``GPROTOR_THREADS`` caps the
number of FFT workers.
"""

import os

import numpy as np
import scipy.fft

from . import _kernels_numpy

try:
    from . import _kernels_numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _kernels_numba = None


def _want_numba():
    flag = os.environ.get("GPROTOR_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "no", "off") and _kernels_numba is not None


BACKEND = "numba" if _want_numba() else "numpy"
_impl = _kernels_numba if BACKEND == "numba" else _kernels_numpy


def fft_workers():
    try:
        return max(1, int(os.environ.get("GPROTOR_THREADS", "1")))
    except ValueError:
        return 1


def _flat(a, dtype):
    return np.ascontiguousarray(a, dtype=dtype).reshape(-1)


def nonlinear_phase(psi, pot, a, sigma, dt):
    pot = np.broadcast_to(pot, psi.shape)
    out = _impl.nonlinear_phase(_flat(psi, np.complex128), _flat(pot, np.float64),
                                float(a), float(sigma), float(dt))
    return out.reshape(psi.shape)


def rotated_phase(psi, xp, xq, base, c, s, wp2, wq2, a, sigma, dt):
    shape = psi.shape
    xp = _flat(np.broadcast_to(xp, shape), np.float64)
    xq = _flat(np.broadcast_to(xq, shape), np.float64)
    base = _flat(np.broadcast_to(base, shape), np.float64)
    out = _impl.rotated_phase(_flat(psi, np.complex128), xp, xq, base, float(c), float(s),
                              float(wp2), float(wq2), float(a), float(sigma), float(dt))
    return out.reshape(shape)


def flow_forcing(phi, pot, lphi, a, sigma, mu):
    pot = np.broadcast_to(pot, phi.shape)
    out = _impl.flow_forcing(_flat(phi, np.complex128), _flat(pot, np.float64),
                             _flat(lphi, np.complex128), float(a), float(sigma), float(mu))
    return out.reshape(phi.shape)


def power_sum(psi, p):
    return float(_impl.power_sum(_flat(psi, np.complex128), float(p)))


def weighted_sum(psi, w):
    w = np.broadcast_to(w, psi.shape)
    return float(_impl.weighted_sum(_flat(psi, np.complex128), _flat(w, np.float64)))


def fftn(a, axes=None):
    return scipy.fft.fftn(a, axes=axes, workers=fft_workers())


def ifftn(a, axes=None):
    return scipy.fft.ifftn(a, axes=axes, workers=fft_workers())


def fft(a, axis):
    return scipy.fft.fft(a, axis=axis, workers=fft_workers())


def ifft(a, axis):
    return scipy.fft.ifft(a, axis=axis, workers=fft_workers())
