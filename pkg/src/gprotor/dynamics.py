"""Split-step time evolution in the rotating and in the fixed frame.

Rotating frame: i psi_t = (-1/2 Lap + V + a|psi|^(2 sigma) - Omega.L) psi.
Fixed frame:    i Psi_t = (-1/2 Lap + W(t, x) + a|Psi|^(2 sigma)) Psi with
W(t, x) = V(exp(t Theta) x).

Both steppers are symmetric (second-order) compositions of exactly solvable
unitary substeps, so mass is conserved to roundoff.
"""

import math
import os
import warnings
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import kernels
from .errors import (BoundaryEscapeError, ConfigurationError, DomainError, EnergyDriftError,
                     InstabilityError)
from .field import (ObservableRecord, WaveField, angular_expectation,
                    boundary_amplitude, interaction_integral, kinetic_integral,
                    mass, moments, observe, potential, sigma_norm_sq)

ROTATING = "rotating"
FIXED = "fixed"


@dataclass
class EvolveConfig:
    dt: float = 1e-3
    t_final: float = 1.0
    frame: str = ROTATING
    record_every: int = 10
    snapshot_every: int = 0
    t0: float = 0.0
    # relative bound on |E(t) - E(0)| in the rotating frame; None disables the check
    energy_drift_tol: float | None = 1e-3
    # a fresh run (t0 == 0) must start with the field negligible on the box edge
    boundary_setup: float | None = 1e-12
    boundary_warn: float = 1e-8
    boundary_abort: float | None = None

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigurationError("dt must be positive")
        if int(self.record_every) < 1:
            raise ConfigurationError("record_every must be >= 1")
        if int(self.snapshot_every) < 0:
            raise ConfigurationError("snapshot_every must be >= 0")
        if self.frame not in (ROTATING, FIXED):
            raise ConfigurationError(f"frame must be '{ROTATING}' or '{FIXED}'")
        self.record_every = int(self.record_every)
        self.snapshot_every = int(self.snapshot_every)

    @property
    def n_steps(self):
        return max(0, int(round((self.t_final - self.t0) / self.dt)))


def _require_axis_aligned(params):
    if not params.axis_aligned:
        raise ConfigurationError("time evolution supports axis-aligned rotation only")


class RotatingStepper:
    """Alternating-direction splitting for the rotating-frame equation.

    With Omega along axis r and (p, q) the cyclic in-plane pair,
    -Omega.L = i W (x_p d_q - x_q d_p). The operator
    -1/2 d_p^2 - i W x_q d_p is diagonal after a 1D transform along p
    (symbol 1/2 k_p^2 + W x_q k_p, with x_q a parameter), likewise
    -1/2 d_q^2 + i W x_p d_q has symbol 1/2 k_q^2 - W x_p k_q.
    Composition: P/2 Q/2 [R/2] N [R/2] Q/2 P/2.
    """

    def __init__(self, grid, params, dt):
        _require_axis_aligned(params)
        self.grid, self.params, self.dt = grid, params, float(dt)
        W = params.rotation_speed
        p, q = (0, 1) if grid.dim == 2 else params.rotation_plane
        self.p, self.q = p, q
        k = grid.kcoords()
        x = grid.coords()
        h = 0.5 * self.dt
        self.mult_p = np.exp(-1j * h * (0.5 * k[p] ** 2 + W * x[q] * k[p]))
        self.mult_q = np.exp(-1j * h * (0.5 * k[q] ** 2 - W * x[p] * k[q]))
        self.r = None
        if grid.dim == 3:
            self.r = 3 - p - q
            self.mult_r = np.exp(-1j * h * 0.5 * k[self.r] ** 2)
        self.pot = np.ascontiguousarray(potential(grid, params))

    def _lin(self, v, axis, mult):
        return kernels.ifft(mult * kernels.fft(v, axis=axis), axis=axis)

    def step(self, v, t=0.0):
        v = self._lin(v, self.p, self.mult_p)
        v = self._lin(v, self.q, self.mult_q)
        if self.r is not None:
            v = self._lin(v, self.r, self.mult_r)
        v = kernels.nonlinear_phase(v, self.pot, self.params.a, self.params.sigma, self.dt)
        if self.r is not None:
            v = self._lin(v, self.r, self.mult_r)
        v = self._lin(v, self.q, self.mult_q)
        return self._lin(v, self.p, self.mult_p)


class FixedStepper:
    """Strang splitting with the rotated potential sampled at the midpoint time."""

    def __init__(self, grid, params, dt):
        _require_axis_aligned(params)
        self.grid, self.params, self.dt = grid, params, float(dt)
        self.half_kin = np.exp(-0.25j * self.dt * grid.k_squared)
        p, q = (0, 1) if grid.dim == 2 else params.rotation_plane
        x = grid.coords()
        shape = grid.shape
        self.xp = np.ascontiguousarray(np.broadcast_to(x[p], shape))
        self.xq = np.ascontiguousarray(np.broadcast_to(x[q], shape))
        self.wp2 = params.omegas[p] ** 2
        self.wq2 = params.omegas[q] ** 2
        if grid.dim == 3:
            r = 3 - p - q
            self.base = np.ascontiguousarray(
                np.broadcast_to(0.5 * params.omegas[r] ** 2 * x[r] ** 2, shape))
        else:
            self.base = np.zeros(shape)

    def step(self, v, t=0.0):
        v = kernels.ifftn(self.half_kin * kernels.fftn(v))
        ang = self.params.rotation_speed * (t + 0.5 * self.dt)
        v = kernels.rotated_phase(v, self.xp, self.xq, self.base, math.cos(ang), math.sin(ang),
                                  self.wp2, self.wq2, self.params.a, self.params.sigma, self.dt)
        return kernels.ifftn(self.half_kin * kernels.fftn(v))


def rotated_potential(grid, params, t):
    """W(t, x) = V(exp(t Theta) x) for axis-aligned rotation."""
    _require_axis_aligned(params)
    p, q = (0, 1) if grid.dim == 2 else params.rotation_plane
    x = grid.coords()
    ang = params.rotation_speed * t
    c, s = math.cos(ang), math.sin(ang)
    yp = c * x[p] + s * x[q]
    yq = -s * x[p] + c * x[q]
    out = 0.5 * (params.omegas[p] ** 2 * yp ** 2 + params.omegas[q] ** 2 * yq ** 2)
    if grid.dim == 3:
        r = 3 - p - q
        out = out + 0.5 * params.omegas[r] ** 2 * x[r] ** 2
    return np.broadcast_to(out, grid.shape)


def fixed_frame_energy(field, params, t):
    """E_0 with the time-dependent potential W(t, .)."""
    g = field.grid
    e = 0.5 * kinetic_integral(field)
    e += kernels.weighted_sum(field.values, rotated_potential(g, params, t)) * g.cell_volume
    if params.a != 0.0:
        e += params.a / (params.sigma + 1.0) * interaction_integral(field, params.sigma)
    return e


def make_stepper(grid, params, dt, frame):
    if frame == ROTATING:
        return RotatingStepper(grid, params, dt)
    if frame == FIXED:
        return FixedStepper(grid, params, dt)
    raise ConfigurationError(f"unknown frame {frame!r}")


def strang_step_rotating(field, params, dt):
    return field.with_values(RotatingStepper(field.grid, params, dt).step(field.values))


def strang_step_fixed(field, params, t, dt):
    return field.with_values(FixedStepper(field.grid, params, dt).step(field.values, t))


def record(field, params, t, frame):
    if frame == ROTATING:
        return observe(field, params, t)
    X, P = moments(field)
    return ObservableRecord(
        t=float(t), mass=mass(field), energy_rot=fixed_frame_energy(field, params, t),
        sigma_norm_sq=sigma_norm_sq(field), X=tuple(X.tolist()), P=tuple(P.tolist()),
        ang=angular_expectation(field, params.rotation))


@dataclass
class EvolveResult:
    series: list
    field: WaveField
    t: float
    snapshots: list = dc_field(default_factory=list)
    boundary_max: float = 0.0


def evolve(field0, params, config, snapshot_dir=None, on_record=None):
    """Step ``field0`` to ``config.t_final`` recording observables.

    In the fixed frame the ``energy_rot`` column carries E_0 evaluated with
    the rotated potential W(t, .), which is not conserved in general.
    """
    grid = field0.grid
    stepper = make_stepper(grid, params, config.dt, config.frame)
    v = np.array(field0.values)
    t = float(config.t0)
    n = config.n_steps
    series = [record(field0, params, t, config.frame)]
    e0 = series[0].energy_rot
    warned = False
    bmax = boundary_amplitude(field0)
    if config.boundary_setup is not None and config.t0 == 0.0 and bmax > config.boundary_setup:
        raise DomainError(f"initial field has amplitude {bmax:.2e} on the box edge "
                          f"(limit {config.boundary_setup:.0e}); enlarge half_width or "
                          "refine the grid")
    snaps = []
    if on_record:
        on_record(series[-1], field0)
    for i in range(1, n + 1):
        v = stepper.step(v, t)
        t = config.t0 + i * config.dt
        if not np.isfinite(v.sum()):
            raise InstabilityError(f"non-finite field at step {i} (t={t:.6g}); reduce dt",
                                   step=i, series=series)
        rec_now = (i % config.record_every == 0) or i == n
        snap_now = config.snapshot_every and i % config.snapshot_every == 0
        if not (rec_now or snap_now):
            continue
        f = WaveField(grid, v)
        if rec_now:
            rec = record(f, params, t, config.frame)
            series.append(rec)
            if on_record:
                on_record(rec, f)
            b = boundary_amplitude(f)
            bmax = max(bmax, b)
            if config.boundary_abort is not None and b > config.boundary_abort:
                raise BoundaryEscapeError(
                    f"boundary amplitude {b:.2e} exceeds {config.boundary_abort:.1e} at t={t:.4g}")
            if b > config.boundary_warn and not warned:
                warned = True
                warnings.warn(f"boundary amplitude {b:.2e} at t={t:.4g}: mass is reaching the "
                              "edge of the box", RuntimeWarning, stacklevel=2)
            if (config.frame == ROTATING and config.energy_drift_tol is not None
                    and abs(rec.energy_rot - e0) > config.energy_drift_tol * max(1.0, abs(e0))):
                raise EnergyDriftError(
                    f"energy drift {abs(rec.energy_rot - e0):.3e} exceeds bound at t={t:.4g}",
                    series=series)
        if snap_now and snapshot_dir is not None:
            from .io import write_snapshot
            path = os.path.join(snapshot_dir, f"snap_{i:08d}")
            write_snapshot(f, path, params=params, t=t)
            snaps.append(path)
    return EvolveResult(series=series, field=WaveField(grid, v), t=t, snapshots=snaps,
                        boundary_max=bmax)
