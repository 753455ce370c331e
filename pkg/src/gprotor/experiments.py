"""Desk-scale numerical experiments: orbital stability, moment agreement, resonance."""

import math
import warnings
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.optimize import minimize_scalar

from . import ehrenfest
from .dynamics import FIXED, ROTATING, EvolveConfig, evolve
from .errors import (ConfigurationError, DegenerateInputError, PreconditionError,
                     UnsupportedCaseError)
from .field import (WaveField, energy, gaussian_packet, make_grid, moments, normalize,
                    sigma_inner, sigma_norm_sq)
from .groundstate import GroundStateConfig, solve_ground_state
from .rotation import rotate_values

ODE = "MomentODE"
PDE = "PDE"
BOUNDED = "Bounded"
GROWING = "Growing"
# resonant PDE runs are trusted only while the edge amplitude stays below this
RESONANT_HORIZON = 1e-6


@dataclass
class ExperimentConfig:
    points: int = 64
    half_width: float = 8.0
    dt: float = 1e-3
    record_every: int = 100
    frame: str = ROTATING
    seed: int = 0
    groundstate: GroundStateConfig = dc_field(default_factory=GroundStateConfig)

    def grid(self, dim):
        return make_grid(dim, self.points, self.half_width)


# ---------------------------------------------------------------------------
# orbit distance


def _rotation_symmetric(params):
    if not params.axis_aligned:
        return False
    p, q = (0, 1) if params.dim == 2 else params.rotation_plane
    return params.omegas[p] == params.omegas[q]


def _gauge_distance(psi, ref):
    # min over theta of ||psi - e^{i theta} ref||_Sigma; the optimal phase is arg <ref, psi>_Sigma
    c = sigma_inner(ref, psi)
    theta = math.atan2(c.imag, c.real)
    diff = psi.values - np.exp(1j * theta) * ref.values
    return math.sqrt(max(sigma_norm_sq(WaveField(psi.grid, diff)), 0.0)), theta


def orbit_distance(psi, phi, params, n_angles=64, angle_tol=1e-6):
    """Sigma-distance from ``psi`` to the symmetry orbit of ``phi``.

    The orbit consists of gauge rotations e^{i theta} phi and, for traps that are
    symmetric in the rotation plane, spatial rotations of phi as well. This is an
    upper bound for the distance to the full set of minimizers.
    """
    if psi.grid != phi.grid:
        raise ConfigurationError("orbit distance needs both fields on the same grid")
    if not _rotation_symmetric(params):
        return _gauge_distance(psi, phi)[0]
    axis = params.rotation_axis
    grid = phi.grid

    def dist(alpha):
        ref = WaveField(grid, rotate_values(phi.values, grid, alpha, axis))
        return _gauge_distance(psi, ref)[0]

    angles = np.linspace(0.0, 2.0 * math.pi, n_angles, endpoint=False)
    vals = [dist(a) for a in angles]
    j = int(np.argmin(vals))
    h = angles[1] - angles[0]
    res = minimize_scalar(dist, bounds=(angles[j] - h, angles[j] + h), method="bounded",
                          options={"xatol": angle_tol})
    return float(min(vals[j], res.fun))


# ---------------------------------------------------------------------------
# orbital stability


@dataclass
class OrbitDistanceReport:
    times: list
    dist: list
    sup_dist: float
    perturbation_size: float
    frame: str = ROTATING
    upper_bound: bool = True
    ground_state_energy: float = float("nan")


def smooth_perturbation(grid, seed=0):
    """Random smooth field of unit Sigma-norm: Gaussian envelope times a random quadratic."""
    rng = np.random.default_rng(seed)
    x = grid.coords()
    d = grid.dim
    coef = rng.standard_normal((1 + d + d * d, 2)) @ np.array([1.0, 1j])
    poly = coef[0] + sum(coef[1 + i] * x[i] for i in range(d))
    poly = poly + sum(coef[1 + d + i * d + j] * x[i] * x[j] for i in range(d) for j in range(d))
    g = WaveField(grid, poly * np.exp(-0.5 * grid.r_squared))
    return g * (1.0 / math.sqrt(sigma_norm_sq(g)))


def stability_experiment(params, delta, T, config=None, phi=None):
    """Perturb a ground state by ``delta`` in Sigma-norm and track the orbit distance.

    In the fixed frame the reference is the ground state rotated by |Omega| t.
    """
    config = config or ExperimentConfig()
    grid = config.grid(params.dim) if phi is None else phi.grid
    if phi is None:
        gs = solve_ground_state(params, grid, config.groundstate)
        if not gs.converged:
            raise PreconditionError(f"ground state did not converge (residual {gs.residual:.2e})")
        phi = gs.phi
    g = smooth_perturbation(grid, config.seed)
    psi0 = normalize(phi + g * delta, params.mass) if delta else phi
    times, dist = [], []

    def on_record(rec, f):
        ref = phi
        if config.frame == FIXED and params.rotation_speed:
            ref = WaveField(grid, rotate_values(phi.values, grid, params.rotation_speed * rec.t,
                                                params.rotation_axis))
        times.append(rec.t)
        dist.append(orbit_distance(f, ref, params))

    ec = EvolveConfig(dt=config.dt, t_final=T, frame=config.frame,
                      record_every=config.record_every)
    evolve(psi0, params, ec, on_record=on_record)
    return OrbitDistanceReport(times, dist, float(max(dist)), float(delta), config.frame,
                               ground_state_energy=energy(phi, params))


# ---------------------------------------------------------------------------
# moments: PDE against ODE


@dataclass
class MomentAgreement:
    max_dev_X: float
    max_dev_P: float
    times: np.ndarray
    pde: np.ndarray
    ode: np.ndarray


def moment_agreement(params, psi0, T, config=None):
    """Evolve the PDE and compare its moments with the closed moment system."""
    config = config or ExperimentConfig()
    ec = EvolveConfig(dt=config.dt, t_final=T, frame=ROTATING,
                      record_every=config.record_every, boundary_abort=1e-4)
    res = evolve(psi0, params, ec)
    times = np.array([r.t for r in res.series])
    pde = np.array([np.r_[r.X, r.P] for r in res.series])
    ode = np.array([s.Xi for s in ehrenfest.propagate_moments(pde[0], params, times)])
    d = params.dim
    dev = np.abs(pde - ode)
    return MomentAgreement(float(dev[:, :d].max()), float(dev[:, d:].max()), times, pde, ode)


# ---------------------------------------------------------------------------
# resonance


@dataclass
class ResonanceReport:
    fitted_rate: float
    predicted_rate: float
    window: tuple
    relative_error: float
    frame: str
    source: str
    regime: str = ehrenfest.EXPONENTIAL
    direction: str = "forward"
    residual: float = float("nan")
    boundary_max: float = float("nan")
    times: np.ndarray | None = dc_field(default=None, repr=False)
    norms: np.ndarray | None = dc_field(default=None, repr=False)


def _symplectic_basis(M, d):
    """Columns (e_1..e_d, f_1..f_d) with S^T J S = J built from the eigenvectors of M.

    Assumes one real pair +-lambda and otherwise purely imaginary pairs.
    """
    J = np.block([[np.zeros((d, d)), np.eye(d)], [-np.eye(d), np.zeros((d, d))]])
    lam, V = np.linalg.eig(M)
    scale = max(1.0, np.abs(lam).max())
    ip = int(np.argmax(lam.real))
    im = int(np.argmin(lam.real))
    vp, vm = V[:, ip].real, V[:, im].real
    es, fs = [vp], [vm / (vp @ J @ vm)]
    for i in np.argsort(-lam.imag):
        if lam[i].imag <= 1e-9 * scale or abs(lam[i].real) > 1e-9 * scale:
            continue
        a, b = V[:, i].real, V[:, i].imag
        s = a @ J @ b
        es.append(a / math.sqrt(abs(s)))
        fs.append(np.sign(s) * b / math.sqrt(abs(s)))
    if len(es) != d:
        raise UnsupportedCaseError("expected a single real eigenvalue pair and oscillatory modes")
    return np.column_stack(es + fs), vp


def resonant_packet(grid, params, offset=0.02, squeeze=0.06):
    """Gaussian whose mean rides the growing mode and whose shape tracks it.

    The mean is placed on the unstable eigenvector so X(t) grows like e^{lambda t}
    from the start. The covariance is squeezed along that direction so the
    packet stays compact while its centre moves out. The defaults keep the edge of a
    256^2 box of half-width 16 below 1e-6 up to t = 6 for omega = (1, 2), |Omega| = 1.5.
    """
    gc = ehrenfest.classify_growth(params)
    if gc.regime != ehrenfest.EXPONENTIAL:
        raise PreconditionError("resonant packet needs parameters in the exponential regime")
    d = params.dim
    M = ehrenfest.build_generator(params)
    S, vp = _symplectic_basis(M, d)
    c = np.ones(2 * d)
    c[0], c[d] = squeeze, 1.0 / squeeze
    cov = S @ np.diag(0.5 * c) @ S.T
    sxx = cov[:d, :d]
    sxp = cov[:d, d:]
    inv = np.linalg.inv(sxx)
    A_im = -inv @ sxp
    A = 0.5 * inv + 0.5j * (A_im + A_im.T)
    Xi0 = offset / np.linalg.norm(vp[:d]) * vp
    x = grid.coords()
    dx = [x[i] - Xi0[i] for i in range(d)]
    quad = sum(A[i, j] * dx[i] * dx[j] for i in range(d) for j in range(d))
    phase = sum(Xi0[d + i] * x[i] for i in range(d))
    return normalize(WaveField(grid, np.exp(-0.5 * quad + 1j * phase)), params.mass)


def _direction(params, Xi0):
    rs = ehrenfest.resonant_subspace(params)
    coef = rs.coefficients(Xi0)
    tol = 1e-10 * max(1.0, np.linalg.norm(Xi0))
    if np.all(np.abs(coef) < tol):
        raise DegenerateInputError(
            "initial moments lie in the non-growing subspace H; growth requires (X0, P0) outside H")
    # growth as t -> +inf comes from the +lambda coefficient, as t -> -inf from -lambda;
    # follow whichever is larger
    if rs.regime == ehrenfest.LINEAR or abs(coef[0]) >= abs(coef[1]):
        return "forward", rs, coef
    return "backward", rs, coef


def _reflect(values, grid, params):
    # x_q -> -x_q on the periodic grid
    q = 1 if grid.dim == 2 else params.rotation_plane[1]
    idx = (-np.arange(grid.points[q])) % grid.points[q]
    return np.take(values, idx, axis=q)


def _fit_log(t, y):
    return float(np.polyfit(t, np.log(y), 1)[0])


def _fit_linear(t, y):
    c = np.polyfit(t, y, 1)
    resid = float(np.max(np.abs(np.polyval(c, t) - y) / np.abs(y)))
    return float(c[0]), resid


def resonance_experiment(params, source=ODE, window=None, initial=None, config=None,
                         n_samples=401):
    """Measure the growth of the moments and compare with the predicted rate.

    Exponential regime: slope of log||Xi|| (ODE) or log|X| (PDE) over the window.
    Linear regime: straight-line fit of |X(t)|; predicted slope from the Jordan chain.
    When the data only grows backwards in time, the run is mirrored so that the
    fit is done on the growing branch and ``direction`` says so.
    """
    gc = ehrenfest.classify_growth(params)
    if gc.regime == ehrenfest.BOUNDED:
        raise PreconditionError("parameters are in the bounded regime; nothing to measure")
    config = config or ExperimentConfig(points=256, half_width=16.0, record_every=20)
    d = params.dim
    linear = gc.regime == ehrenfest.LINEAR
    if source == ODE:
        window = tuple(window or ((10.0, 50.0) if linear else (20.0, 40.0)))
        if initial is None:
            if linear:
                initial = ehrenfest.resonant_subspace(params).generalized_vector
            else:
                initial = np.r_[0.5, np.zeros(2 * d - 1)]
        Xi0 = np.asarray(initial, dtype=float)
        direction, rs, coef = _direction(params, Xi0)
        sign = 1.0 if direction == "forward" else -1.0
        t = np.linspace(window[0], window[1], n_samples)
        states = ehrenfest.propagate_moments(Xi0, params, sign * t)
        if linear:
            y = np.array([np.linalg.norm(s.X) for s in states])
        else:
            y = np.array([np.linalg.norm(s.Xi) for s in states])
        boundary = float("nan")
    elif source == PDE:
        window = tuple(window or (2.0, 6.0))
        grid = config.grid(d)
        psi0 = resonant_packet(grid, params) if initial is None else initial
        X0, P0 = moments(psi0)
        Xi0 = np.r_[X0, P0]
        direction, rs, coef = _direction(params, Xi0)
        if direction == "backward":
            psi0 = psi0.with_values(np.conj(_reflect(psi0.values, grid, params)))
        ec = EvolveConfig(dt=config.dt, t_final=window[1], frame=ROTATING,
                          record_every=config.record_every, energy_drift_tol=None,
                          boundary_abort=RESONANT_HORIZON)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            res = evolve(psi0, params, ec)
        ts = np.array([r.t for r in res.series])
        keep = (ts >= window[0] - 1e-12) & (ts <= window[1] + 1e-12)
        t = ts[keep]
        y = np.array([np.linalg.norm(r.X) for r in res.series])[keep]
        boundary = res.boundary_max
    else:
        raise ConfigurationError(f"unknown source {source!r}")
    if linear:
        fitted, resid = _fit_linear(t, y)
        predicted = abs(coef[0]) * np.linalg.norm(rs.defective_direction[:d])
    else:
        fitted, resid = _fit_log(t, y), float("nan")
        predicted = gc.rate
    return ResonanceReport(fitted_rate=abs(fitted), predicted_rate=float(predicted),
                           window=window, relative_error=abs(abs(fitted) - predicted) / predicted,
                           frame=ROTATING, source=source, regime=gc.regime, direction=direction,
                           residual=resid, boundary_max=boundary, times=t, norms=y)


# ---------------------------------------------------------------------------
# Sigma-norm growth


@dataclass
class SigmaProbe:
    trend: str
    times: np.ndarray
    series: np.ndarray


def quartile_trend(series):
    """Growing iff the mean of the last quarter exceeds twice the mean of the first."""
    s = np.asarray(series, dtype=float)
    k = max(1, s.size // 4)
    return GROWING if s[-k:].mean() > 2.0 * s[:k].mean() else BOUNDED


def sigma_growth_probe(params, psi0, T, config=None):
    """Track the Sigma-norm up to T; the run aborts once the edge amplitude passes the horizon."""
    config = config or ExperimentConfig()
    ec = EvolveConfig(dt=config.dt, t_final=T, frame=ROTATING,
                      record_every=config.record_every, energy_drift_tol=None,
                      boundary_abort=RESONANT_HORIZON)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = evolve(psi0, params, ec)
    t = np.array([r.t for r in res.series])
    s = np.array([r.sigma_norm_sq for r in res.series])
    return SigmaProbe(quartile_trend(s), t, s)


def offset_gaussian(grid, params, center, width=None):
    """Normalized Gaussian at ``center`` with zero momentum."""
    d = grid.dim
    w = width if width is not None else 1.0 / math.sqrt(params.omega_min)
    return normalize(gaussian_packet(grid, center, np.zeros(d), w), params.mass)


def even_resonant_packet(grid, params, squeeze=0.06):
    """The squeezed resonant packet recentred at the origin (X0 = P0 = 0)."""
    return resonant_packet(grid, params, offset=0.0, squeeze=squeeze)
