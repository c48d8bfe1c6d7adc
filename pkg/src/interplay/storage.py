"""Trajectory and report persistence.

Trajectories are stored as JSON with matrices as nested row-major lists.
``json`` writes floats with their shortest round-trip repr, so a
save/load cycle reproduces every entry bit for bit.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Union

import numpy as np

from .core import Snapshot, Status, Termination, Trajectory, frozen
from .montecarlo import MonteCarloReport

FORMAT_NAME = "interplay-trajectory"
FORMAT_VERSION = 1

PathLike = Union[str, Path]


def _mat(a):
    return None if a is None else np.asarray(a, dtype=np.float64).tolist()


def trajectory_to_dict(traj: Trajectory) -> dict:
    n, m = traj.initial.Y.shape
    return {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "n": n,
        "m": m,
        "config": traj.config,
        "termination": {"status": traj.termination.status.value, "step": traj.termination.step},
        "snapshots": [
            {"t": s.t, "Y": _mat(s.Y), "X": _mat(s.X), "W": _mat(s.W)} for s in traj.snapshots
        ],
    }


def trajectory_from_dict(doc: dict) -> Trajectory:
    if doc.get("format") != FORMAT_NAME:
        raise ValueError("not a trajectory document")
    n, m = doc["n"], doc["m"]
    snaps = []
    for s in doc["snapshots"]:
        Y = frozen(s["Y"])
        if Y.shape != (n, m):
            raise ValueError(f"snapshot t={s['t']} has opinion shape {Y.shape}, expected {(n, m)}")
        X = None if s.get("X") is None else frozen(s["X"])
        W = None if s.get("W") is None else frozen(s["W"])
        snaps.append(Snapshot(int(s["t"]), Y, X, W))
    term = doc["termination"]
    return Trajectory(snaps, Termination(Status(term["status"]), int(term["step"])), doc.get("config", {}))


def save_trajectory(traj: Trajectory, path: PathLike) -> Path:
    path = Path(path)
    path.write_text(json.dumps(trajectory_to_dict(traj), indent=1) + "\n")
    return path


def load_trajectory(path: PathLike) -> Trajectory:
    return trajectory_from_dict(json.loads(Path(path).read_text()))


def save_trajectory_csv(traj: Trajectory, path: PathLike) -> Path:
    """Flat export: one row per (t, matrix, i, j, value)."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "matrix", "i", "j", "value"])
        for s in traj.snapshots:
            for name in ("Y", "X", "W"):
                a = getattr(s, name)
                if a is None:
                    continue
                for (i, j), v in np.ndenumerate(a):
                    w.writerow([s.t, name, i, j, repr(float(v))])
    return path


def save_report(report: MonteCarloReport, path: PathLike) -> Path:
    path = Path(path)
    path.write_text(json.dumps(report.to_dict(), indent=1, sort_keys=True) + "\n")
    return path


def load_matrix(path: PathLike) -> np.ndarray:
    """Read a matrix from a JSON nested list or a comma/whitespace-separated text file."""
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json" or text.lstrip().startswith("["):
        data = json.loads(text)
        if isinstance(data, dict):
            data = data["matrix"]
        return np.array(data, dtype=np.float64, ndmin=2)
    delim = "," if "," in text else None
    return np.loadtxt(path, delimiter=delim, ndmin=2)
