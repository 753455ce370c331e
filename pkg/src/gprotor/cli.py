"""Command-line interface: ``gprotor <subcommand> ...``.

Exit status: 0 on success, 1 when a validated run fails (non-convergence,
instability, energy drift, boundary escape), 2 on configuration errors.
"""

import argparse
import dataclasses
import math
import os
import sys
import warnings

import numpy as np

from . import ehrenfest, experiments
from .dynamics import evolve
from .errors import (BoundaryEscapeError, ConfigurationError, DegenerateInputError,
                     DivergenceError, EnergyDriftError, InstabilityError, NoResonanceError,
                     PreconditionError, SnapshotError, UnsupportedCaseError)
from .field import ProblemParams, gaussian_packet, normalize
from .groundstate import initial_guess, solve_ground_state
from .io import (parse_config, read_snapshot, write_manifest, write_report, write_series,
                 write_snapshot, write_table)

CONFIG_ERRORS = (ConfigurationError, PreconditionError, DegenerateInputError,
                 UnsupportedCaseError, NoResonanceError, SnapshotError)
RUN_ERRORS = (InstabilityError, EnergyDriftError, BoundaryEscapeError, DivergenceError)


class RunFailed(Exception):
    pass


def _add_config_args(p):
    p.add_argument("--config", help="JSON run configuration (a manifest also works)")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override a configuration entry, dot-separated path (repeatable)")
    p.add_argument("--output", help="output directory (overrides the configuration)")


def _load(args):
    cfg = parse_config(args.config, args.overrides)
    if args.output:
        cfg.output = args.output
        cfg.raw["output"] = args.output
    os.makedirs(cfg.output, exist_ok=True)
    return cfg


def _initial_field(cfg):
    init = dict(cfg.initial)
    kind = init.get("kind", "gaussian").lower()
    grid, params = cfg.grid, cfg.params
    d = params.dim
    if kind == "gaussian":
        w = init.get("width", 1.0 / math.sqrt(params.omega_min))
        f = gaussian_packet(grid, init.get("center", [0.0] * d), init.get("momentum", [0.0] * d), w)
        return normalize(f, params.mass), 0.0
    if kind == "groundstate":
        res = solve_ground_state(params, grid, cfg.groundstate)
        if not res.converged:
            raise RunFailed(f"ground state did not converge (residual {res.residual:.3e})")
        return res.phi, 0.0
    if kind == "file":
        f, meta = read_snapshot(init["path"])
        return f, float(meta.get("t", 0.0))
    if kind == "resonant":
        return experiments.resonant_packet(grid, params, init.get("offset", 0.02),
                                           init.get("squeeze", 0.06)), 0.0
    if kind == "vortex":
        return initial_guess(grid, params, init), 0.0
    raise ConfigurationError(f"unknown initial kind {kind!r}")


# ---------------------------------------------------------------------------


def cmd_groundstate(args):
    cfg = _load(args)
    res = solve_ground_state(cfg.params, cfg.grid, cfg.groundstate)
    out = cfg.output
    write_snapshot(res.phi, os.path.join(out, "ground_state"), params=cfg.params)
    write_table(os.path.join(out, "convergence.csv"), ["iter", "energy", "residual", "mu"],
                [[i, repr(e), repr(r), repr(m)] for i, e, r, m in res.log])
    write_report(os.path.join(out, "report.txt"), "ground state",
                 {"converged": res.converged, "iterations": res.iters, "energy": res.energy,
                  "mu": res.mu, "residual": res.residual})
    write_manifest(out, "groundstate", cfg.to_dict(),
                   ["ground_state.json", "ground_state.bin", "convergence.csv", "report.txt"])
    print(f"converged={res.converged} energy={res.energy:.12g} mu={res.mu:.12g} "
          f"residual={res.residual:.3e} iters={res.iters}")
    return 0 if res.converged else 1


def cmd_evolve(args):
    cfg = _load(args)
    if args.resume:
        psi0, meta = read_snapshot(args.resume)
        t0 = float(meta["t"])
        if psi0.grid != cfg.grid:
            raise ConfigurationError("resume snapshot grid differs from the configured grid")
    else:
        psi0, t0 = _initial_field(cfg)
    ec = dataclasses.replace(cfg.evolve, t0=t0) if t0 else cfg.evolve
    out = cfg.output
    snapdir = os.path.join(out, "snapshots") if ec.snapshot_every else None
    if snapdir:
        os.makedirs(snapdir, exist_ok=True)
    outputs = ["series.csv", "final.json", "final.bin"]
    try:
        res = evolve(psi0, cfg.params, ec, snapshot_dir=snapdir)
    except (InstabilityError, EnergyDriftError) as exc:
        if exc.series:
            write_series(exc.series, os.path.join(out, "series.csv"))
        write_manifest(out, "evolve", cfg.to_dict(), ["series.csv"], {"error": str(exc)})
        raise
    write_series(res.series, os.path.join(out, "series.csv"))
    write_snapshot(res.field, os.path.join(out, "final"), params=cfg.params, t=res.t)
    outputs += [os.path.relpath(p, out) + ext for p in res.snapshots for ext in (".json", ".bin")]
    write_manifest(out, "evolve", cfg.to_dict(), outputs, {"boundary_max": res.boundary_max})
    last = res.series[-1]
    print(f"t={res.t:.6g} mass={last.mass:.15g} energy_rot={last.energy_rot:.12g} "
          f"boundary_max={res.boundary_max:.2e}")
    return 0


def _classify_params(args):
    omegas = [args.omega1, args.omega2] + ([args.omega3] if args.omega3 is not None else [])
    if args.rotation is not None:
        if len(omegas) == 2:
            raise ConfigurationError("--rotation needs --omega3 (general rotation is 3D)")
        return ProblemParams(tuple(omegas), tuple(args.rotation))
    return ProblemParams(tuple(omegas), (0.0, 0.0, args.Omega))


def cmd_classify(args):
    params = _classify_params(args)
    if params.axis_aligned:
        gc = ehrenfest.classify_growth(params)
    else:
        gc = ehrenfest.classify_general_omega(params)
    line = f"regime={gc.regime} rate={gc.rate:.6f} dim_H={gc.dim_H}"
    if params.axis_aligned:
        line += f" b={gc.b:.12g} c={gc.c:.12g} D={gc.D:.12g}"
    if gc.beyond_axis_aligned:
        line += " beyond_axis_aligned=1"
    if gc.indeterminate:
        line += " indeterminate=1"
    print(line)
    if args.output:
        os.makedirs(args.output, exist_ok=True)
        write_report(os.path.join(args.output, "classify.txt"), "growth classification",
                     {"regime": gc.regime, "rate": gc.rate, "dim_H": gc.dim_H, "b": gc.b,
                      "c": gc.c, "D": gc.D})
        write_manifest(args.output, "classify", {"params": params.to_dict()}, ["classify.txt"])
    return 0


def cmd_moments(args):
    cfg = _load(args)
    d = cfg.params.dim
    exp = cfg.experiment
    Xi0 = args.xi0 or exp.get("Xi0") or np.r_[0.5, np.zeros(2 * d - 1)]
    Xi0 = np.asarray(Xi0, dtype=float)
    t_final = args.t_final if args.t_final is not None else float(exp.get("T", 10.0))
    samples = args.samples if args.samples is not None else int(exp.get("samples", 101))
    times = np.linspace(0.0, t_final, samples)
    states = ehrenfest.propagate_moments(Xi0, cfg.params, times)
    head = ["t"] + [f"X{i + 1}" for i in range(d)] + [f"P{i + 1}" for i in range(d)]
    write_table(os.path.join(cfg.output, "moments.csv"), head,
                [[repr(s.t)] + [repr(float(v)) for v in s.Xi] for s in states])
    gc = ehrenfest.classify_growth(cfg.params) if cfg.params.axis_aligned else \
        ehrenfest.classify_general_omega(cfg.params)
    raw = cfg.to_dict()
    raw["experiment"] = dict(raw.get("experiment", {}), Xi0=Xi0.tolist(), T=t_final,
                             samples=samples)
    write_manifest(cfg.output, "moments", raw, ["moments.csv"])
    print(f"regime={gc.regime} rate={gc.rate:.6f} |Xi(T)|={np.linalg.norm(states[-1].Xi):.6g}")
    return 0


def regime_sweep(ratios2, ratiosW, omega1=1.0):
    """Formula and eigensolve classification over (omega2/omega1, |Omega|/omega1)."""
    rows = []
    for r2 in ratios2:
        for rw in ratiosW:
            p = ProblemParams((omega1, omega1 * r2), (0.0, 0.0, omega1 * rw))
            a = ehrenfest.classify_growth(p)
            b = ehrenfest.classify_general_omega(p)
            agree = a.regime == b.regime and abs(a.rate - b.rate) <= 1e-9 * max(1.0, a.rate)
            rows.append((float(r2), float(rw), a.regime, a.rate, b.regime, b.rate, agree,
                         a.b, a.c, a.D, a.dim_H))
    return rows


def cmd_sweep(args):
    os.makedirs(args.output, exist_ok=True)
    r2 = np.linspace(args.ratio2[0], args.ratio2[1], args.n)
    rw = np.linspace(args.ratio_omega[0], args.ratio_omega[1], args.n)
    rows = regime_sweep(r2, rw, args.omega1)
    w1 = args.omega1
    write_table(os.path.join(args.output, "sweep.csv"),
                ["omega1", "omega2", "omega3", "Omega", "regime", "rate", "b", "c", "D", "dim_H",
                 "regime_eig", "rate_eig", "agree"],
                [[repr(w1), repr(w1 * r2), "", repr(w1 * rw), reg, repr(rate), repr(b), repr(c),
                  repr(D), dh, reg_e, repr(rate_e), int(ok)]
                 for r2, rw, reg, rate, reg_e, rate_e, ok, b, c, D, dh in rows])
    write_manifest(args.output, "sweep", {"omega1": args.omega1, "ratio2": list(args.ratio2),
                                          "ratio_omega": list(args.ratio_omega), "n": args.n},
                   ["sweep.csv"])
    counts = {}
    for row in rows:
        counts[row[2]] = counts.get(row[2], 0) + 1
    n_agree = sum(r[6] for r in rows)
    print(" ".join(f"{k}={v}" for k, v in sorted(counts.items())) + f" agree={n_agree}/{len(rows)}")
    return 0 if n_agree == len(rows) else 1


def cmd_experiment(args):
    cfg = _load(args)
    exp = dict(cfg.experiment)
    name = args.name
    ec = cfg.evolve
    xc = experiments.ExperimentConfig(points=cfg.grid.points[0], half_width=cfg.grid.half_width[0],
                                      dt=ec.dt, record_every=int(exp.get("record_every",
                                                                         ec.record_every)),
                                      frame=ec.frame, seed=cfg.seed, groundstate=cfg.groundstate)
    out = cfg.output
    T = float(exp.get("T", ec.t_final))
    if name == "stability":
        rep = experiments.stability_experiment(cfg.params, float(exp.get("delta", 1e-2)), T, xc)
        write_table(os.path.join(out, "orbit_distance.csv"), ["t", "dist"],
                    [[repr(t), repr(d)] for t, d in zip(rep.times, rep.dist)])
        fields = {"sup_dist": rep.sup_dist, "perturbation_size": rep.perturbation_size,
                  "frame": rep.frame, "upper_bound_surrogate": rep.upper_bound}
        files = ["orbit_distance.csv"]
        line = f"sup_dist={rep.sup_dist:.6e} delta={rep.perturbation_size:g} frame={rep.frame}"
    elif name == "agreement":
        psi0, _ = _initial_field(cfg)
        rep = experiments.moment_agreement(cfg.params, psi0, T, xc)
        d = cfg.params.dim
        head = (["t"] + [f"pde_X{i + 1}" for i in range(d)] + [f"pde_P{i + 1}" for i in range(d)]
                + [f"ode_X{i + 1}" for i in range(d)] + [f"ode_P{i + 1}" for i in range(d)])
        write_table(os.path.join(out, "moments.csv"), head,
                    [[repr(t)] + [repr(float(v)) for v in np.r_[a, b]]
                     for t, a, b in zip(rep.times, rep.pde, rep.ode)])
        fields = {"max_dev_X": rep.max_dev_X, "max_dev_P": rep.max_dev_P}
        files = ["moments.csv"]
        line = f"max_dev_X={rep.max_dev_X:.3e} max_dev_P={rep.max_dev_P:.3e}"
    elif name == "resonance":
        source = {"ode": experiments.ODE, "pde": experiments.PDE}.get(
            str(exp.get("source", "ode")).lower(), exp.get("source"))
        initial = exp.get("Xi0") if source == experiments.ODE else None
        if source == experiments.PDE and cfg.initial.get("kind", "resonant") != "resonant":
            initial = _initial_field(cfg)[0]
        rep = experiments.resonance_experiment(cfg.params, source, exp.get("window"), initial, xc)
        write_table(os.path.join(out, "growth.csv"), ["t", "norm"],
                    [[repr(float(t)), repr(float(y))] for t, y in zip(rep.times, rep.norms)])
        fields = {k: v for k, v in dataclasses.asdict(rep).items() if k not in ("times", "norms")}
        files = ["growth.csv"]
        line = (f"regime={rep.regime} fitted_rate={rep.fitted_rate:.6f} "
                f"predicted_rate={rep.predicted_rate:.6f} relative_error={rep.relative_error:.3e} "
                f"direction={rep.direction}")
    else:  # argparse restricts the choices
        raise ConfigurationError(f"unknown experiment {name!r}")
    write_report(os.path.join(out, "report.txt"), f"experiment {name}", fields)
    write_manifest(out, f"experiment {name}", cfg.to_dict(), files + ["report.txt"])
    print(line)
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="gprotor", description="rotating Gross-Pitaevskii toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("groundstate", help="compute a ground state by gradient flow")
    _add_config_args(p)
    p.set_defaults(func=cmd_groundstate)

    p = sub.add_parser("evolve", help="time evolution in the rotating or fixed frame")
    _add_config_args(p)
    p.add_argument("--resume", metavar="SNAPSHOT", help="continue from a snapshot")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("classify", help="growth regime of the moment system")
    p.add_argument("--omega1", type=float, required=True)
    p.add_argument("--omega2", type=float, required=True)
    p.add_argument("--omega3", type=float)
    p.add_argument("--Omega", type=float, default=0.0, help="rotation speed about the last axis")
    p.add_argument("--rotation", type=float, nargs=3, metavar=("O1", "O2", "O3"),
                   help="general rotation vector (3D only)")
    p.add_argument("--output")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("moments", help="propagate the moment system")
    _add_config_args(p)
    p.add_argument("--xi0", type=float, nargs="+", help="initial (X, P)")
    p.add_argument("--t-final", type=float)
    p.add_argument("--samples", type=int)
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("sweep", help="regime map over frequency and rotation ratios")
    p.add_argument("--omega1", type=float, default=1.0)
    p.add_argument("--ratio2", type=float, nargs=2, default=(0.25, 2.7))
    p.add_argument("--ratio-omega", type=float, nargs=2, default=(0.25, 2.7))
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--output", default="gprotor-sweep")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("experiment", help="scripted experiments")
    p.add_argument("name", choices=["stability", "resonance", "agreement"])
    _add_config_args(p)
    p.set_defaults(func=cmd_experiment)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RUN_ERRORS + (RunFailed,) as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
