"""Acceptance criteria. Each test prints one PASS/FAIL line; long PDE runs are marked slow."""

import math
import time
import warnings

import numpy as np
import pytest

from gprotor import ehrenfest
from gprotor.cli import regime_sweep
from gprotor.dynamics import FIXED, EvolveConfig, evolve
from gprotor.experiments import (GROWING, ODE, PDE, ExperimentConfig, moment_agreement,
                                 offset_gaussian, resonance_experiment, sigma_growth_probe,
                                 stability_experiment)
from gprotor.field import ProblemParams, WaveField, energy, make_grid, mass
from gprotor.groundstate import (GroundStateConfig, chemical_potential, coercivity_check,
                                 solve_ground_state, stationary_residual)
from gprotor.rotation import frame_transform, rotate_field

pytestmark = pytest.mark.filterwarnings("ignore:boundary amplitude")

RES = ProblemParams((1.0, 2.0), (0.0, 0.0, 1.5), a=1.0)
LIN = ProblemParams((1.0, 2.0), (0.0, 0.0, 1.0), a=1.0)
SLOW = ProblemParams((1.0, 2.0), (0.0, 0.0, 0.5), a=1.0, sigma=1.0)


@pytest.fixture
def verdict(capsys):
    def report(n, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
        assert ok, detail
    return report


def test_c1_classifier_exactness(verdict):
    gc = ehrenfest.classify_growth(RES)
    b, c = 9.5, -2.1875
    lam = math.sqrt((-b + math.sqrt(b * b - 4 * c)) / 2)
    eig = np.linalg.eigvals(ehrenfest.build_generator(RES)).real.max()
    best = min(_timed(ehrenfest.classify_growth, RES) for _ in range(200))
    ok = (gc.regime == ehrenfest.EXPONENTIAL and gc.b == b and gc.c == c
          and abs(gc.rate - lam) <= 1e-9 and abs(gc.rate - eig) <= 1e-9 and best < 1e-3)
    verdict(1, ok, f"rate={gc.rate:.10f} eig={eig:.10f} |diff|={abs(gc.rate - eig):.1e} "
                   f"runtime={best * 1e6:.0f}us")


def _timed(f, *args):
    t0 = time.perf_counter()
    f(*args)
    return time.perf_counter() - t0


def _expected_regime(r2, rw, tol=1e-12):
    lo, hi = min(1.0, r2), max(1.0, r2)
    on_edge = abs(rw - lo) <= tol * hi or abs(rw - hi) <= tol * hi
    if r2 != 1.0 and on_edge:
        return ehrenfest.LINEAR
    if lo < rw < hi and not on_edge:
        return ehrenfest.EXPONENTIAL
    return ehrenfest.BOUNDED


def test_c2_regime_map(verdict):
    grid = np.linspace(0.25, 2.7, 50)
    t0 = time.perf_counter()
    rows = regime_sweep(grid, grid)
    elapsed = time.perf_counter() - t0
    agree = sum(r[6] for r in rows)
    tri = sum(r[2] == _expected_regime(r[0], r[1]) for r in rows)
    counts = {k: sum(r[2] == k for r in rows) for k in
              (ehrenfest.BOUNDED, ehrenfest.LINEAR, ehrenfest.EXPONENTIAL)}
    ok = agree == 2500 and tri == 2500 and elapsed < 1.0
    verdict(2, ok, f"formula/eig agree {agree}/2500, trichotomy {tri}/2500, {counts}, "
                   f"{elapsed:.2f}s")


@pytest.mark.slow
def test_c3_moment_agreement(verdict):
    devs = []
    for n, dt in ((128, 1e-3), (256, 5e-4)):
        grid = make_grid(2, n, 8.0)
        cfg = ExperimentConfig(points=n, dt=dt, record_every=int(round(0.05 / dt)))
        rep = moment_agreement(SLOW, offset_gaussian(grid, SLOW, [0.5, 0.0]), 5.0, cfg)
        devs.append(max(rep.max_dev_X, rep.max_dev_P))
    ok = devs[0] <= 1e-2 and devs[0] / devs[1] >= 2.0
    verdict(3, ok, f"max deviation {devs[0]:.2e} (128^2, dt=1e-3), {devs[1]:.2e} "
                   f"(256^2, dt=5e-4), ratio {devs[0] / devs[1]:.2f}")


@pytest.mark.slow
def test_c4_resonance_growth(verdict):
    ode = resonance_experiment(RES, ODE, (20.0, 40.0))
    pde = resonance_experiment(RES, PDE, (2.0, 6.0),
                               config=ExperimentConfig(points=256, half_width=16.0, dt=1e-3,
                                                       record_every=20))
    # the probe horizon ends before the edge amplitude of the spreading packet reaches 1e-6
    probe_cfg = ExperimentConfig(points=256, half_width=16.0, dt=1e-3, record_every=50)
    psi0 = offset_gaussian(probe_cfg.grid(2), RES, [0.5, 0.0])
    probe = sigma_growth_probe(RES, psi0, 3.5, probe_cfg)
    lin = resonance_experiment(LIN, ODE)
    ok = (abs(ode.fitted_rate - 0.474275) <= 1e-6 and pde.relative_error <= 0.05
          and probe.trend == GROWING and lin.residual <= 1e-3)
    verdict(4, ok, f"ODE slope {ode.fitted_rate:.7f}, PDE slope {pde.fitted_rate:.5f} "
                   f"(rel err {pde.relative_error:.1e}), Sigma probe {probe.trend}, "
                   f"linear-fit residual {lin.residual:.1e}")


@pytest.mark.slow
def test_c5_conservation(verdict):
    grid = make_grid(2, 128, 8.0)
    psi0 = offset_gaussian(grid, SLOW, [0.5, 0.0])
    dm, de = [], []
    for dt in (1e-3, 5e-4):
        cfg = EvolveConfig(dt=dt, t_final=5.0, record_every=int(round(0.1 / dt)),
                           energy_drift_tol=None)
        s = evolve(psi0, SLOW, cfg).series
        m = np.array([r.mass for r in s])
        e = np.array([r.energy_rot for r in s])
        dm.append(np.abs(m / m[0] - 1).max())
        de.append(np.abs(e / e[0] - 1).max())
    ratio = de[0] / de[1]
    ok = dm[0] <= 1e-10 and de[0] <= 1e-6 and 3.5 <= ratio <= 4.5
    verdict(5, ok, f"mass drift {dm[0]:.1e}, energy drift {de[0]:.1e}, "
                   f"dt-halving ratio {ratio:.3f}")


@pytest.mark.slow
def test_c6_frame_equivalence(verdict):
    grid = make_grid(2, 128, 8.0)
    psi0 = offset_gaussian(grid, SLOW, [0.5, 0.0])
    rot = evolve(psi0, SLOW, EvolveConfig(dt=1e-3, t_final=1.0, record_every=100)).field
    fix = evolve(psi0, SLOW, EvolveConfig(dt=1e-3, t_final=1.0, frame=FIXED,
                                          record_every=100)).field
    err = math.sqrt(mass(frame_transform(rot, 1.0, SLOW) - fix))
    drift = {}
    for om in ((1.0, 1.0), (1.0, 2.0)):
        p = SLOW.replace(omegas=om)
        s = evolve(offset_gaussian(grid, p, [0.5, 0.0]), p,
                   EvolveConfig(dt=1e-3, t_final=5.0, frame=FIXED, record_every=100)).series
        e = np.array([r.energy_rot for r in s])
        drift[om] = float(np.abs(e - e[0]).max())
    ok = err <= 1e-4 and drift[(1.0, 1.0)] <= 1e-6 and drift[(1.0, 2.0)] > 1e-3
    verdict(6, ok, f"frame L2 error {err:.1e}, fixed-frame E0 drift isotropic "
                   f"{drift[(1.0, 1.0)]:.1e}, anisotropic {drift[(1.0, 2.0)]:.1e}")


@pytest.mark.slow
def test_c7_ground_states(verdict):
    grid = make_grid(2, 64, 8.0)
    lin = ProblemParams((1.0, 1.0), (0.0, 0.0, 0.0))
    gs = solve_ground_state(lin, grid)
    exact = np.exp(-0.5 * grid.r_squared) / math.sqrt(math.pi)
    phase = np.vdot(exact, gs.phi.values)
    phase /= abs(phase)
    l2 = math.sqrt(mass(gs.phi - WaveField(grid, exact * phase)))
    mu_err = abs(gs.mu - 1.0)
    cases = [
        (ProblemParams((1.0, 1.0), (0.0, 0.0, 0.5), a=1.0), grid, None),
        (ProblemParams((1.0, 2.0), (0.0, 0.0, 0.5), a=10.0), grid, None),
        (ProblemParams((1.0, 1.5), (0.0, 0.0, 0.0), a=5.0, sigma=0.5), grid, None),
        (ProblemParams((1.0, 1.0), (0.0, 0.0, 0.9), a=30.0), make_grid(2, 128, 8.0),
         GroundStateConfig(init={"kind": "vortex", "charge": 1})),
    ]
    worst_res, worst_gauge, all_ok = 0.0, 0.0, gs.converged
    for p, g, cfg in cases:
        r = solve_ground_state(p, g, cfg)
        all_ok &= r.converged and coercivity_check(r.phi, p).holds
        worst_res = max(worst_res, stationary_residual(r.phi, p))
        e = energy(r.phi, p)
        worst_gauge = max(worst_gauge, abs(energy(r.phi * np.exp(0.7j), p) - e))
        if p.omegas[0] == p.omegas[1]:
            worst_gauge = max(worst_gauge, abs(energy(rotate_field(r.phi, 0.9), p) - e))
    ok = (all_ok and l2 <= 1e-8 and mu_err <= 1e-6 and worst_res <= 1e-10
          and worst_gauge <= 1e-12)
    verdict(7, ok, f"analytic L2 {l2:.1e}, |mu-1| {mu_err:.1e}, worst residual "
                   f"{worst_res:.1e}, orbit energy spread {worst_gauge:.1e}")


@pytest.mark.slow
def test_c8_orbital_stability(verdict):
    p = ProblemParams((1.0, 1.0), (0.0, 0.0, 0.5), a=1.0)
    base = ExperimentConfig(points=64, half_width=8.0, dt=1e-3, record_every=100)
    phi = solve_ground_state(p, base.grid(2)).phi
    sup = {}
    for frame in ("rotating", FIXED):
        cfg = ExperimentConfig(points=64, half_width=8.0, dt=1e-3, record_every=100, frame=frame)
        for delta in (0.0, 1e-2):
            sup[frame, delta] = stability_experiment(p, delta, 20.0, cfg, phi=phi).sup_dist
    r = sup[FIXED, 1e-2] / sup["rotating", 1e-2]
    ok = sup["rotating", 1e-2] <= 5e-2 and sup["rotating", 0.0] <= 1e-6 and 0.5 <= r <= 2.0
    verdict(8, ok, f"sup dist delta=1e-2 {sup['rotating', 1e-2]:.2e} (<= 5e-2), delta=0 "
                   f"{sup['rotating', 0.0]:.1e}, fixed/rotating {r:.3f}")


def test_c9_nongrowing_subspace(verdict):
    details, ok = [], True
    for d, p in ((2, RES), (3, ProblemParams((1.0, 2.0, 1.3), (0.0, 0.0, 1.5)))):
        rs = ehrenfest.resonant_subspace(p)
        ok &= rs.dim == 2 * (d - 1)
        t = np.linspace(0.0, 50.0, 501)
        worst = 0.0
        for k in range(rs.dim):
            xi0 = rs.H_basis[:, k]
            traj = np.array([s.Xi for s in ehrenfest.propagate_moments(xi0, p, t)])
            worst = max(worst, np.linalg.norm(traj, axis=1).max() / np.linalg.norm(xi0))
        ok &= worst <= 10.0
        details.append(f"d={d} dim H={rs.dim} max growth {worst:.2f}")
    for d, p in ((2, LIN), (3, ProblemParams((1.0, 2.0, 1.3), (0.0, 0.0, 1.0)))):
        rs = ehrenfest.resonant_subspace(p)
        ok &= rs.dim == 2 * d - 1
        details.append(f"linear d={d} dim H={rs.dim}")
    verdict(9, ok, "; ".join(details))


def test_c9_defective_direction(verdict):
    W = LIN.rotation_speed
    target = np.array([1.0, 0.0, 0.0, -W])
    target /= np.linalg.norm(target)
    v0 = ehrenfest.resonant_subspace(LIN).defective_direction
    err = min(np.linalg.norm(v0 - target), np.linalg.norm(v0 + target))
    kernel = np.linalg.norm(ehrenfest.build_generator(LIN) @ target)
    verdict(9, err <= 1e-9, f"defective direction {np.round(v0, 6).tolist()} vs "
                            f"(1,0,0,-|Omega|)/norm: distance {err:.2e}; "
                            f"|M V| for that V = {kernel:.2e}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
