"""CSV and manifest writers."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .dynamics import Trajectory

TRAJECTORY_HEADER = ("t", "x", "p", "s_ent", "e_osc", "e_ss", "norm", "total_energy")
STATICS_HEADER = ("branch", "x", "p", "eigenvalue", "residual")


class IoError(OSError):
    pass


def _num(v) -> str:
    # repr of a Python float is the shortest round-trip decimal
    return repr(float(v))


def _write_rows(path: Path, header, rows) -> int:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            n = 0
            for row in rows:
                writer.writerow(row)
                n += 1
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    return n


def write_trajectory_csv(traj: Trajectory, path) -> dict:
    columns = [traj.times, traj.x, traj.p, traj.s_ent, traj.e_osc, traj.e_ss, traj.norm, traj.total_energy]
    rows = ([_num(v) for v in row] for row in zip(*columns))
    n = _write_rows(path, TRAJECTORY_HEADER, rows)
    return {"regime": traj.regime, "kind": "trajectory", "path": str(path), "rows": n}


def write_states_csv(traj: Trajectory, path) -> dict:
    dim = traj.states.shape[1] if traj.states.ndim == 2 else 0
    header = ["t"] + [f"{part}_{i}" for i in range(dim) for part in ("re", "im")]
    rows = (
        [_num(t)] + [_num(v) for c in state for v in (c.real, c.imag)] for t, state in zip(traj.times, traj.states)
    )
    n = _write_rows(path, header, rows)
    return {"regime": traj.regime, "kind": "states", "path": str(path), "rows": n}


def read_trajectory_csv(path) -> dict[str, np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader]
    data = np.array(rows, dtype=float).reshape(-1, len(header))
    return {name: data[:, i] for i, name in enumerate(header)}


def write_statics_csv(solutions, path) -> dict:
    rows = ([str(s.branch), _num(s.x), _num(s.p), _num(s.eigenvalue), _num(s.residual)] for s in solutions)
    n = _write_rows(path, STATICS_HEADER, rows)
    return {"kind": "statics", "path": str(path), "rows": n}


def write_manifest(manifest: dict, path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(manifest, indent=2, sort_keys=False) + "\n", encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    return path
