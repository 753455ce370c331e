"""Uniform periodic grids, wave fields, trap parameters and observables."""

import math
from dataclasses import dataclass, field as dc_field
from functools import cached_property

import numpy as np

from . import kernels
from .errors import (ConfigurationError, DegenerateInputError,
                     DiscretizationError, DomainError)

IMAG_TOL = 1e-10


def _is_pow2(n):
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class GridSpec:
    """Periodic box [-L, L)^d sampled with ``points`` nodes per axis."""

    dim: int
    points: tuple
    half_width: tuple

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ConfigurationError(f"dim must be 2 or 3, got {self.dim}")
        if len(self.points) != self.dim or len(self.half_width) != self.dim:
            raise ConfigurationError("points/half_width must have one entry per axis")
        for n in self.points:
            if not isinstance(n, (int, np.integer)) or n < 8 or not _is_pow2(int(n)):
                raise ConfigurationError(f"points per axis must be a power of two >= 8, got {n}")
        for L in self.half_width:
            if not (L > 0 and math.isfinite(L)):
                raise ConfigurationError(f"half_width must be positive, got {L}")

    @property
    def spacing(self):
        return tuple(2.0 * L / n for n, L in zip(self.points, self.half_width))

    @property
    def cell_volume(self):
        return float(np.prod(self.spacing))

    @property
    def shape(self):
        return tuple(int(n) for n in self.points)

    @property
    def size(self):
        return int(np.prod(self.shape))

    @cached_property
    def axes(self):
        """1D node coordinates per axis, -L + j h."""
        return tuple(-L + h * np.arange(n)
                     for n, L, h in zip(self.points, self.half_width, self.spacing))

    @cached_property
    def wavenumbers(self):
        """1D angular wavenumbers per axis in FFT order (pi k / L, k = -n/2 .. n/2-1)."""
        return tuple(2.0 * np.pi * np.fft.fftfreq(n, d=h)
                     for n, h in zip(self.points, self.spacing))

    def coords(self):
        """Broadcastable coordinate arrays, one per axis."""
        return _sparse(self.axes)

    def kcoords(self):
        return _sparse(self.wavenumbers)

    @cached_property
    def k_squared(self):
        out = 0.0
        for k in self.kcoords():
            out = out + k * k
        return np.broadcast_to(out, self.shape)

    @cached_property
    def r_squared(self):
        out = 0.0
        for x in self.coords():
            out = out + x * x
        return np.broadcast_to(out, self.shape)


def _sparse(vectors):
    d = len(vectors)
    out = []
    for j, v in enumerate(vectors):
        shape = [1] * d
        shape[j] = v.size
        out.append(v.reshape(shape))
    return out


def make_grid(dim, points_per_axis, half_width):
    if np.isscalar(points_per_axis):
        points_per_axis = (int(points_per_axis),) * int(dim)
    if np.isscalar(half_width):
        half_width = (float(half_width),) * int(dim)
    return GridSpec(int(dim), tuple(int(n) for n in points_per_axis),
                    tuple(float(L) for L in half_width))


@dataclass(frozen=True, eq=False)
class WaveField:
    """Complex samples on ``grid``; ``values`` has shape ``grid.shape`` (C order)."""

    grid: GridSpec
    values: np.ndarray = dc_field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        if v.shape != self.grid.shape:
            if v.size != self.grid.size:
                raise ConfigurationError(f"expected {self.grid.size} values, got {v.size}")
            v = v.reshape(self.grid.shape)
        if not np.all(np.isfinite(v)):
            raise DiscretizationError("wave field contains non-finite values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def with_values(self, values):
        return WaveField(self.grid, values)

    def __mul__(self, other):
        return self.with_values(self.values * other)

    __rmul__ = __mul__

    def __add__(self, other):
        return self.with_values(self.values + other.values)

    def __sub__(self, other):
        return self.with_values(self.values - other.values)

    def conj(self):
        return self.with_values(np.conj(self.values))


@dataclass(frozen=True)
class ProblemParams:
    """Trap frequencies, rotation vector, interaction strength/power and mass.

    The interaction must be subcritical: ``a > 0`` needs ``0 < sigma < 2/(d-2)_+``
    and ``a < 0`` needs ``0 < sigma < 2/d``. ``a == 0`` (linear) accepts any
    ``sigma > 0``.
    """

    omegas: tuple
    rotation: tuple = (0.0, 0.0, 0.0)
    a: float = 0.0
    sigma: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        omegas = tuple(abs(float(w)) for w in self.omegas)
        rotation = tuple(float(r) for r in self.rotation)
        d = len(omegas)
        if d not in (2, 3):
            raise ConfigurationError(f"need 2 or 3 trap frequencies, got {d}")
        if any(w == 0.0 or not math.isfinite(w) for w in omegas):
            raise ConfigurationError("trap frequencies must be finite and nonzero")
        if len(rotation) != 3 or not all(math.isfinite(r) for r in rotation):
            raise ConfigurationError("rotation must be a finite 3-vector")
        if d == 2 and (rotation[0] != 0.0 or rotation[1] != 0.0 or rotation[2] < 0.0):
            raise ConfigurationError("in 2D the rotation must be (0, 0, |Omega|)")
        if not (self.mass > 0):
            raise ConfigurationError("mass must be positive")
        a, sigma = float(self.a), float(self.sigma)
        if not (sigma > 0 and math.isfinite(sigma)):
            raise ConfigurationError("sigma must be positive (0 < sigma)")
        if a > 0 and d == 3 and not sigma < 2.0:
            raise ConfigurationError(
                "defocusing case requires 'a > 0 (defocusing) and 0 < sigma < 2/(d-2)_+'; "
                f"got sigma={sigma} in d=3")
        if a < 0 and not sigma < 2.0 / d:
            raise ConfigurationError(
                "focusing case requires 'a < 0 (focusing) and 0 < sigma < 2/d'; "
                f"got sigma={sigma} in d={d}")
        object.__setattr__(self, "omegas", omegas)
        object.__setattr__(self, "rotation", rotation)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "mass", float(self.mass))

    @property
    def dim(self):
        return len(self.omegas)

    @property
    def omega_min(self):
        return min(self.omegas)

    @property
    def rotation_norm(self):
        return float(np.linalg.norm(self.rotation))

    @property
    def axis_aligned(self):
        return sum(1 for r in self.rotation if r != 0.0) <= 1

    @property
    def rotation_axis(self):
        """Index of the rotation axis (2 when there is no rotation)."""
        nz = [j for j, r in enumerate(self.rotation) if r != 0.0]
        if len(nz) > 1:
            raise ConfigurationError("rotation is not aligned with a coordinate axis")
        return nz[0] if nz else 2

    @property
    def rotation_plane(self):
        """(p, q) such that the rotation acts in the x_p-x_q plane, cyclically ordered."""
        return {0: (1, 2), 1: (2, 0), 2: (0, 1)}[self.rotation_axis]

    @property
    def rotation_speed(self):
        """Signed component of the rotation along its axis."""
        return self.rotation[self.rotation_axis]

    def replace(self, **changes):
        kw = dict(omegas=self.omegas, rotation=self.rotation, a=self.a,
                  sigma=self.sigma, mass=self.mass)
        kw.update(changes)
        return ProblemParams(**kw)

    def to_dict(self):
        return dict(omegas=list(self.omegas), rotation=list(self.rotation), a=self.a,
                    sigma=self.sigma, mass=self.mass)


@dataclass(frozen=True)
class ObservableRecord:
    t: float
    mass: float
    energy_rot: float
    sigma_norm_sq: float
    X: tuple
    P: tuple
    ang: float


def potential(grid, params):
    """Harmonic trap 1/2 sum omega_j^2 x_j^2 on the grid (not periodized)."""
    if grid.dim != params.dim:
        raise ConfigurationError("grid and parameter dimensions differ")
    out = 0.0
    for w, x in zip(params.omegas, grid.coords()):
        out = out + 0.5 * w * w * x * x
    return np.broadcast_to(out, grid.shape)


def gaussian_packet(grid, center, momentum, width=1.0):
    """exp(i p0.x) exp(-|x - x0|^2 / (2 w^2)); unnormalized."""
    center = np.asarray(center, dtype=float)
    momentum = np.asarray(momentum, dtype=float)
    if center.shape != (grid.dim,) or momentum.shape != (grid.dim,):
        raise ConfigurationError("center and momentum need one entry per axis")
    if not width > 0:
        raise ConfigurationError("width must be positive")
    for x0, L in zip(center, grid.half_width):
        if not -L <= x0 < L:
            raise DomainError(f"packet center {center} lies outside the box")
    arg = 0.0
    phase = 0.0
    for x, x0, p0 in zip(grid.coords(), center, momentum):
        arg = arg + (x - x0) ** 2
        phase = phase + p0 * x
    return WaveField(grid, np.exp(1j * phase - arg / (2.0 * width * width)))


def _values(f):
    return f.values if isinstance(f, WaveField) else np.asarray(f)


def inner(f, g):
    """<f, g> = integral conj(f) g."""
    return complex(np.vdot(_values(f), _values(g)) * f.grid.cell_volume)


def mass(field):
    return kernels.power_sum(field.values, 2.0) * field.grid.cell_volume


def normalize(field, N=1.0):
    m = mass(field)
    if not m > 0:
        raise DegenerateInputError("cannot normalize a field with zero mass")
    return field.with_values(field.values * math.sqrt(N / m))


def spectral_derivative(values, grid, axis):
    k = grid.kcoords()[axis]
    return kernels.ifft(1j * k * kernels.fft(values, axis=axis), axis=axis)


def gradient_spectral(field):
    return [field.with_values(spectral_derivative(field.values, field.grid, j))
            for j in range(field.grid.dim)]


def kinetic_integral(field):
    """integral |grad psi|^2 via Parseval."""
    g = field.grid
    psi_hat = kernels.fftn(field.values)
    return kernels.weighted_sum(psi_hat, g.k_squared) * g.cell_volume / g.size


def _rotation_field(grid, rotation):
    """Components of Omega ^ x as broadcastable arrays (None where identically zero)."""
    x = list(grid.coords())
    if grid.dim == 2:
        x.append(0.0)
    o1, o2, o3 = rotation
    comps = [o2 * x[2] - o3 * x[1], o3 * x[0] - o1 * x[2], o1 * x[1] - o2 * x[0]]
    return [c if np.any(c) else None for c in comps[:grid.dim]]


def apply_angular(values, grid, rotation):
    """(Omega.L) psi = -i (Omega ^ x) . grad psi."""
    out = np.zeros(grid.shape, dtype=np.complex128)
    for j, c in enumerate(_rotation_field(grid, rotation)):
        if c is not None:
            out += c * spectral_derivative(values, grid, j)
    return -1j * out


def _check_real(z, scale, what):
    if abs(z.imag) > IMAG_TOL * max(scale, 1.0):
        raise DiscretizationError(f"{what} has imaginary residue {z.imag:.3e}")
    return float(z.real)


def angular_expectation(field, rotation):
    """<psi, (Omega.L) psi>; real by self-adjointness."""
    rotation = tuple(float(r) for r in rotation)
    if not any(rotation):
        return 0.0
    lpsi = apply_angular(field.values, field.grid, rotation)
    z = inner(field, lpsi)
    return _check_real(z, sigma_norm_sq(field), "angular expectation")


def interaction_integral(field, sigma):
    """integral |psi|^(2 sigma + 2)."""
    return kernels.power_sum(field.values, 2.0 * sigma + 2.0) * field.grid.cell_volume


def energy(field, params):
    """Rotating-frame energy E_Omega."""
    g = field.grid
    e = 0.5 * kinetic_integral(field)
    e += kernels.weighted_sum(field.values, potential(g, params)) * g.cell_volume
    if params.a != 0.0:
        e += params.a / (params.sigma + 1.0) * interaction_integral(field, params.sigma)
    e -= angular_expectation(field, params.rotation)
    if not math.isfinite(e):
        raise DiscretizationError("energy overflowed")
    return e


def sigma_norm_sq(field):
    """||u||^2 + ||grad u||^2 + || |x| u ||^2."""
    g = field.grid
    return (mass(field) + kinetic_integral(field)
            + kernels.weighted_sum(field.values, g.r_squared) * g.cell_volume)


def sigma_inner(f, g):
    """Sigma inner product <f, g>_Sigma (conjugate-linear in f)."""
    grid = f.grid
    fh = kernels.fftn(f.values)
    gh = kernels.fftn(g.values)
    kin = np.vdot(fh * grid.k_squared, gh) / grid.size
    pot = np.vdot(f.values * (1.0 + grid.r_squared), g.values)
    return complex((kin + pot) * grid.cell_volume)


def moments(field):
    """Mean position X and momentum P."""
    g = field.grid
    rho = np.abs(field.values) ** 2
    scale = sigma_norm_sq(field)
    X = np.empty(g.dim)
    P = np.empty(g.dim)
    for j, x in enumerate(g.coords()):
        X[j] = float(np.sum(x * rho)) * g.cell_volume
        z = inner(field, -1j * spectral_derivative(field.values, g, j))
        P[j] = _check_real(z, scale, "momentum")
    return X, P


def boundary_amplitude(field):
    """Largest |psi| on the outermost node layers of the box."""
    v = np.abs(field.values)
    m = 0.0
    for j in range(v.ndim):
        m = max(m, float(np.take(v, 0, axis=j).max()), float(np.take(v, -1, axis=j).max()))
    return m


def observe(field, params, t=0.0):
    X, P = moments(field)
    return ObservableRecord(
        t=float(t),
        mass=mass(field),
        energy_rot=energy(field, params),
        sigma_norm_sq=sigma_norm_sq(field),
        X=tuple(float(v) for v in X),
        P=tuple(float(v) for v in P),
        ang=angular_expectation(field, params.rotation),
    )
