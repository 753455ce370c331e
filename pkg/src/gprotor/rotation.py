"""Rotations of wave fields about a coordinate axis.

``rotate_field(u, alpha)`` returns ``x -> u(R x)`` with ``R = exp(alpha J)``
and ``J = [[0, 1], [-1, 0]]`` in the rotation plane, i.e. the map
generated by the angular momentum operator. Quarter turns are exact index
permutations; the remainder (|angle| <= pi/4) is done with three Fourier
shears, each exact for band-limited periodic data.
"""

import math
import warnings

import numpy as np
from scipy.linalg import expm

from . import kernels
from .errors import ConfigurationError
from .field import boundary_amplitude

_PLANES = {0: (1, 2), 1: (2, 0), 2: (0, 1)}


def theta_matrix(rotation, dim):
    """Skew-symmetric generator Theta with Theta x = x ^ Omega."""
    o1, o2, o3 = (float(r) for r in rotation)
    if dim == 2:
        if o1 or o2:
            raise ConfigurationError("in 2D the rotation must be (0, 0, |Omega|)")
        return np.array([[0.0, o3], [-o3, 0.0]])
    return np.array([[0.0, o3, -o2], [-o3, 0.0, o1], [o2, -o1, 0.0]])


def rotation_matrix(rotation, dim, t):
    """exp(t Theta); orthogonal with unit determinant."""
    return expm(t * theta_matrix(rotation, dim))


def _plane(dim, axis):
    if dim == 2:
        if axis != 2:
            raise ConfigurationError("2D fields rotate about the out-of-plane axis only")
        return 0, 1
    return _PLANES[axis]


def _quarter_turn(v, p, q):
    # w(y) = u(y_q, -y_p) on the grid -L + j h, exact for periodic data
    n = v.shape[p]
    idx = (-np.arange(n)) % n
    w = np.swapaxes(v, p, q)
    return np.take(w, idx, axis=p)


def _shear(v, grid, along, by, factor):
    # u(x + factor * x_by e_along)
    k = grid.kcoords()[along]
    x = grid.coords()[by]
    return kernels.ifft(np.exp(1j * factor * k * x) * kernels.fft(v, axis=along), axis=along)


def rotate_values(values, grid, angle, axis=2):
    p, q = _plane(grid.dim, axis)
    if grid.points[p] != grid.points[q] or grid.half_width[p] != grid.half_width[q]:
        raise ConfigurationError("rotation needs identical sampling along both in-plane axes")
    v = np.asarray(values, dtype=np.complex128)
    quarters = int(round(angle / (0.5 * math.pi)))
    rest = angle - quarters * 0.5 * math.pi
    for _ in range(quarters % 4):
        v = _quarter_turn(v, p, q)
    if rest != 0.0:
        a = math.tan(0.5 * rest)
        b = -math.sin(rest)
        v = _shear(v, grid, p, q, a)
        v = _shear(v, grid, q, p, b)
        v = _shear(v, grid, p, q, a)
    return v


def rotate_field(field, angle, axis=2, warn_tol=1e-8):
    """u -> u(exp(angle J) x) in the plane orthogonal to ``axis``."""
    if boundary_amplitude(field) > warn_tol:
        warnings.warn("rotating a field with significant amplitude at the box boundary; "
                      "periodic wrap-around degrades accuracy", RuntimeWarning, stacklevel=2)
    return field.with_values(rotate_values(field.values, field.grid, float(angle), axis))


def frame_transform(psi, t, params, inverse=False):
    """Rotating-frame psi(t) -> fixed-frame Psi(t, x) = psi(t, exp(t Theta) x)."""
    if not params.axis_aligned:
        raise ConfigurationError("frame transform needs an axis-aligned rotation")
    angle = params.rotation_speed * float(t)
    if inverse:
        angle = -angle
    return rotate_field(psi, angle, axis=params.rotation_axis)
