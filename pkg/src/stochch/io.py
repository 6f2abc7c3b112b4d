"""Reading and writing trajectories, tables and run manifests."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import platform
from pathlib import Path

import numpy as np

from .grid import Grid, read_fields, write_fields
from .sde import Trajectory

__all__ = [
    "save_trajectory",
    "load_trajectory",
    "write_csv",
    "write_json",
    "sha256_file",
    "versions",
]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return _jsonable(obj.item())
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def write_json(path, doc) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n")
    return path


def write_csv(path, columns: dict[str, np.ndarray]) -> Path:
    """One row per index; floats written with repr so values round-trip exactly."""
    path = Path(path)
    names = list(columns)
    cols = [np.asarray(columns[k]) for k in names]
    lengths = {c.shape[0] for c in cols}
    if len(lengths) != 1:
        raise ValueError("columns have different lengths")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    for i in range(lengths.pop()):
        w.writerow([repr(float(c[i])) for c in cols])
    path.write_text(buf.getvalue())
    return path


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def versions() -> dict:
    import scipy

    from . import __version__

    return {"stochch": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


def save_trajectory(traj: Trajectory, stem) -> list[Path]:
    """Write ``stem.schf`` (u_0, q_0, u_1, q_1, ...), ``stem.wiener.schf`` and ``stem.json``."""
    stem = Path(stem)
    fields_path = stem.with_suffix(".schf")
    wiener_path = stem.with_name(stem.name + ".wiener.schf")
    side_path = stem.with_suffix(".json")
    write_fields(fields_path, [row for pair in zip(traj.u, traj.q) for row in pair])
    write_fields(wiener_path, [traj.wiener])
    write_json(side_path, {
        "config_hash": traj.config_hash,
        "n": traj.grid.n,
        "dt": traj.dt,
        "times": traj.times,
        "steps": traj.steps,
        "path_index": traj.path_index,
        "seed": traj.seed,
        "failure_time": traj.failure_time,
        "layout": "u and q records alternate per snapshot",
        "wiener_file": wiener_path.name,
    })
    return [fields_path, wiener_path, side_path]


def load_trajectory(stem) -> Trajectory:
    stem = Path(stem)
    side = json.loads(stem.with_suffix(".json").read_text())
    recs = read_fields(stem.with_suffix(".schf"))
    if len(recs) % 2:
        raise ValueError("odd number of field records")
    wiener = read_fields(stem.with_name(side["wiener_file"]))[0]
    return Trajectory(
        side["config_hash"], Grid(side["n"]), side["dt"], np.array(side["steps"], dtype=int),
        np.array(side["times"], dtype=float), np.array(recs[0::2]), np.array(recs[1::2]),
        wiener, side["path_index"], side["seed"], side["failure_time"],
    )
