"""Snapshots, CSV series, run configuration and manifests."""

import copy
import csv
import dataclasses
import json
import os
import platform
import sys
import time

import numpy as np

from .dynamics import EvolveConfig
from .errors import (ConfigurationError, SnapshotError, SnapshotSizeError,
                     SnapshotTruncatedError, SnapshotVersionError)
from .field import GridSpec, ObservableRecord, ProblemParams, WaveField
from .groundstate import GroundStateConfig

FORMAT_VERSION = 1
_DTYPE = np.dtype("<f8")


# ---------------------------------------------------------------------------
# snapshots: JSON sidecar + raw little-endian (re, im) float64 payload


def _snapshot_paths(path):
    base = os.fspath(path)
    for ext in (".json", ".bin"):
        if base.endswith(ext):
            base = base[: -len(ext)]
    return base + ".json", base + ".bin"


def write_snapshot(field, path, params=None, t=0.0):
    meta_path, data_path = _snapshot_paths(path)
    g = field.grid
    payload = np.empty(2 * g.size, dtype=_DTYPE)
    flat = np.ascontiguousarray(field.values).reshape(-1)
    payload[0::2] = flat.real
    payload[1::2] = flat.imag
    meta = {
        "format_version": FORMAT_VERSION,
        "dim": g.dim,
        "points_per_axis": list(g.points),
        "half_width": list(g.half_width),
        "t": float(t),
        "params": params.to_dict() if params is not None else None,
        "payload_bytes": int(payload.nbytes),
        "layout": "row-major, last axis fastest, interleaved re/im, float64 little-endian",
    }
    with open(data_path, "wb") as fh:
        fh.write(payload.tobytes())
    with open(meta_path, "w") as fh:
        json.dump(meta, fh, indent=2)
    return meta_path, data_path


def read_snapshot(path):
    """Return (WaveField, metadata); ``metadata['params']`` is a ProblemParams or None."""
    meta_path, data_path = _snapshot_paths(path)
    try:
        with open(meta_path) as fh:
            meta = json.load(fh)
    except (OSError, ValueError) as exc:
        raise SnapshotError(f"cannot read snapshot metadata {meta_path}: {exc}") from exc
    if meta.get("format_version") != FORMAT_VERSION:
        raise SnapshotVersionError(
            f"snapshot format version {meta.get('format_version')!r}, expected {FORMAT_VERSION}")
    grid = GridSpec(int(meta["dim"]), tuple(meta["points_per_axis"]), tuple(meta["half_width"]))
    expected = 16 * grid.size
    declared = int(meta.get("payload_bytes", expected))
    with open(data_path, "rb") as fh:
        raw = fh.read()
    if declared != expected:
        raise SnapshotSizeError(
            f"metadata declares {declared} payload bytes but the grid needs {expected}")
    if len(raw) < declared:
        raise SnapshotTruncatedError(f"payload has {len(raw)} of {declared} bytes")
    if len(raw) != declared:
        raise SnapshotSizeError(f"payload has {len(raw)} bytes, metadata declares {declared}")
    data = np.frombuffer(raw, dtype=_DTYPE)
    values = (data[0::2] + 1j * data[1::2]).reshape(grid.shape)
    out = dict(meta)
    out["params"] = ProblemParams(**meta["params"]) if meta.get("params") else None
    return WaveField(grid, values), out


def snapshot_roundtrip(field, path, params=None, t=0.0):
    write_snapshot(field, path, params=params, t=t)
    return read_snapshot(path)[0]


# ---------------------------------------------------------------------------
# CSV


def series_header(dim):
    return (["t", "mass", "energy_rot", "sigma_norm_sq"]
            + [f"X{i + 1}" for i in range(dim)] + [f"P{i + 1}" for i in range(dim)] + ["ang"])


def write_series(records, path):
    records = list(records)
    dim = len(records[0].X) if records else 2
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(series_header(dim))
        for r in records:
            w.writerow([repr(float(v)) for v in (r.t, r.mass, r.energy_rot, r.sigma_norm_sq,
                                                 *r.X, *r.P, r.ang)])


def read_series(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    head, body = rows[0], rows[1:]
    dim = sum(1 for h in head if h.startswith("X"))
    out = []
    for row in body:
        v = [float(x) for x in row]
        out.append(ObservableRecord(t=v[0], mass=v[1], energy_rot=v[2], sigma_norm_sq=v[3],
                                    X=tuple(v[4:4 + dim]), P=tuple(v[4 + dim:4 + 2 * dim]),
                                    ang=v[4 + 2 * dim]))
    return out


def write_table(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


# ---------------------------------------------------------------------------
# run configuration


_EVOLVE_KEYS = {f.name for f in dataclasses.fields(EvolveConfig)}
_GS_KEYS = {f.name for f in dataclasses.fields(GroundStateConfig)}
_SCHEMA = {
    "params": {"omegas", "rotation", "a", "sigma", "mass"},
    "grid": {"points", "half_width"},
    "evolve": _EVOLVE_KEYS,
    "groundstate": _GS_KEYS,
    "initial": {"kind", "center", "momentum", "width", "path", "charge", "offset", "squeeze"},
    "experiment": {"name", "delta", "T", "source", "window", "Xi0", "record_every", "samples"},
    "seed": None,
    "output": None,
}
DEFAULTS = {
    "params": {"omegas": [1.0, 1.0], "rotation": [0.0, 0.0, 0.0], "a": 0.0, "sigma": 1.0,
               "mass": 1.0},
    "grid": {"points": 64, "half_width": 8.0},
    "evolve": {},
    "groundstate": {},
    "initial": {"kind": "gaussian"},
    "experiment": {},
    "seed": 0,
    "output": "gprotor-out",
}


@dataclasses.dataclass
class RunConfig:
    params: ProblemParams
    grid: GridSpec
    evolve: EvolveConfig
    groundstate: GroundStateConfig
    initial: dict
    experiment: dict
    seed: int
    output: str
    raw: dict

    def to_dict(self):
        return copy.deepcopy(self.raw)


def _parse_value(text):
    try:
        return json.loads(text)
    except ValueError:
        return text


def apply_override(cfg, assignment):
    """Apply ``a.b=value`` to a nested dict; the value is read as JSON when possible."""
    if "=" not in assignment:
        raise ConfigurationError(f"override {assignment!r} is not of the form key=value")
    key, text = assignment.split("=", 1)
    parts = key.strip().split(".")
    node = cfg
    for p in parts[:-1]:
        nxt = node.setdefault(p, {})
        if not isinstance(nxt, dict):
            raise ConfigurationError(f"override {key!r} descends into a non-section")
        node = nxt
    node[parts[-1]] = _parse_value(text.strip())


def _check_keys(cfg):
    for k, v in cfg.items():
        if k not in _SCHEMA:
            raise ConfigurationError(f"unknown configuration key {k!r}")
        allowed = _SCHEMA[k]
        if allowed is None:
            continue
        if not isinstance(v, dict):
            raise ConfigurationError(f"section {k!r} must be a mapping")
        bad = sorted(set(v) - allowed)
        if bad:
            raise ConfigurationError(f"unknown key(s) in {k!r}: {', '.join(bad)}")


def build_config(cfg):
    _check_keys(cfg)
    merged = copy.deepcopy(DEFAULTS)
    for k, v in cfg.items():
        if isinstance(v, dict):
            merged[k].update(v)
        else:
            merged[k] = v
    try:
        params = ProblemParams(**{k: (tuple(v) if isinstance(v, list) else v)
                                  for k, v in merged["params"].items()})
        g = merged["grid"]
        grid_obj = GridSpec(params.dim, _per_axis(g["points"], params.dim, int),
                            _per_axis(g["half_width"], params.dim, float))
        evolve = EvolveConfig(**merged["evolve"])
        gs = GroundStateConfig(**merged["groundstate"])
    except TypeError as exc:
        raise ConfigurationError(str(exc)) from exc
    merged["evolve"] = dataclasses.asdict(evolve)
    merged["groundstate"] = dataclasses.asdict(gs)
    return RunConfig(params, grid_obj, evolve, gs, merged["initial"], merged["experiment"],
                     int(merged["seed"]), str(merged["output"]), merged)


def _per_axis(v, d, cast):
    if isinstance(v, (list, tuple)):
        if len(v) != d:
            raise ConfigurationError(f"expected {d} per-axis entries, got {len(v)}")
        return tuple(cast(x) for x in v)
    return (cast(v),) * d


def parse_config(path=None, overrides=()):
    """Load a JSON run configuration (or a manifest) and apply ``key=value`` overrides."""
    cfg = {}
    if path is not None:
        try:
            with open(path) as fh:
                cfg = json.load(fh)
        except (OSError, ValueError) as exc:
            raise ConfigurationError(f"cannot read configuration {path}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ConfigurationError("configuration must be a JSON object")
        if "config" in cfg and "versions" in cfg:
            cfg = cfg["config"]
    for ov in overrides:
        apply_override(cfg, ov)
    return build_config(cfg)


# ---------------------------------------------------------------------------
# manifest


def _versions():
    import scipy

    from . import kernels
    out = {"python": platform.python_version(), "numpy": np.__version__,
           "scipy": scipy.__version__, "kernel_backend": kernels.BACKEND}
    try:
        import numba
        out["numba"] = numba.__version__
    except ImportError:
        out["numba"] = None
    try:
        from importlib.metadata import version
        out["gprotor"] = version("artifact")
    except Exception:
        out["gprotor"] = None
    return out


def write_manifest(outdir, command, config=None, outputs=(), extra=None):
    os.makedirs(outdir, exist_ok=True)
    man = {
        "command": command,
        "argv": sys.argv,
        "config": config,
        "outputs": sorted(outputs),
        "versions": _versions(),
        "created": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    if extra:
        man.update(extra)
    path = os.path.join(outdir, "manifest.json")
    with open(path, "w") as fh:
        json.dump(man, fh, indent=2, default=_json_default)
    return path


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, complex):
        return [o.real, o.imag]
    if dataclasses.is_dataclass(o):
        return dataclasses.asdict(o)
    return str(o)


def write_report(path, title, fields):
    """Plain-text key: value report."""
    with open(path, "w") as fh:
        fh.write(f"# {title}\n")
        for k, v in fields.items():
            if isinstance(v, float):
                v = f"{v:.10g}"
            fh.write(f"{k}: {v}\n")
    return path
