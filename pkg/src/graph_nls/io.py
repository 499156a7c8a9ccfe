"""File formats: trajectory CSV, result JSON, initial-state files.

All floating point output uses 17 significant digits so values round-trip
exactly.  Files are written to a temporary name and renamed into place.
"""

from __future__ import annotations

import json
import os
import tempfile

import numpy as np

from .errors import ConfigError
from .dynamics import SystemState, Trajectory, from_wave

__all__ = [
    "atomic_write_text",
    "write_json",
    "write_trajectory_csv",
    "trajectory_summary",
    "load_initial_state",
    "format_float",
]


def format_float(x) -> str:
    return f"{float(x):.17g}"


def atomic_write_text(path, text) -> None:
    path = os.fspath(path)
    d = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return [_jsonable(x) for x in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(x) for x in obj]
    return obj


def write_json(path, data) -> None:
    atomic_write_text(path, json.dumps(_jsonable(data), indent=2) + "\n")


def write_trajectory_csv(path, traj: Trajectory) -> None:
    n = len(traj.rhos[0])
    cols = (
        ["t"]
        + [f"rho_{j+1}" for j in range(n)]
        + [f"S_{j+1}" for j in range(n)]
        + ["mass", "energy", "min_rho", "norm_resid"]
    )
    lines = [",".join(cols)]
    for k in range(len(traj)):
        row = (
            [traj.times[k]]
            + list(traj.rhos[k])
            + list(traj.Ss[k])
            + [traj.mass[k], traj.energy[k], traj.min_rho[k], traj.norm_resid[k]]
        )
        lines.append(",".join(format_float(x) for x in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def trajectory_summary(traj: Trajectory) -> dict:
    mass = np.asarray(traj.mass)
    energy = np.asarray(traj.energy)
    summary = {
        "snapshots": len(traj),
        "t_final": traj.times[-1] if len(traj) else None,
        "max_mass_error": float(np.abs(mass - 1.0).max()),
        "max_energy_drift": float(
            np.abs(energy - energy[0]).max() / max(abs(energy[0]), 1e-300)
        ),
        "min_rho": float(min(traj.min_rho)),
        "max_norm_resid": float(np.abs(np.asarray(traj.norm_resid)).max()),
        "halvings": traj.halvings,
        "error": traj.error,
    }
    return summary


def load_initial_state(data, h: float) -> SystemState:
    """Initial state from {"rho": [...], "S": [...]} or {"psi_re", "psi_im"}."""
    if "rho" in data and "S" in data:
        if set(data) != {"rho", "S"}:
            raise ConfigError(f"unexpected keys in initial state: {sorted(set(data) - {'rho', 'S'})}")
        return SystemState(np.asarray(data["rho"], float), np.asarray(data["S"], float))
    if "psi_re" in data and "psi_im" in data:
        if set(data) != {"psi_re", "psi_im"}:
            raise ConfigError(
                f"unexpected keys in initial state: {sorted(set(data) - {'psi_re', 'psi_im'})}"
            )
        psi = np.asarray(data["psi_re"], float) + 1j * np.asarray(data["psi_im"], float)
        return from_wave(psi, h)
    raise ConfigError("initial state needs rho/S or psi_re/psi_im")
