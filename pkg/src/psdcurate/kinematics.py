"""Kinematic baseline metrics: polyline path length and mean jerk norm."""
from __future__ import annotations

import numpy as np

from .models import Trajectory, ValidationError


def _positions(traj) -> tuple[np.ndarray, float]:
    if isinstance(traj, Trajectory):
        return traj.samples, (traj.dt if traj.dt is not None else 1.0)
    x = np.asarray(traj, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    return x, 1.0


def path_length(traj) -> float:
    """Sum of Euclidean step lengths, accumulated in time order."""
    x, _ = _positions(traj)
    if x.shape[0] < 2:
        raise ValidationError("trajectory too short for path length")
    steps = np.linalg.norm(np.diff(x, axis=0), axis=1)
    return float(np.cumsum(steps)[-1])


def mean_jerk(traj, dt: float | None = None) -> float:
    """Mean norm of the forward third difference divided by ``dt**3``.

    ``dt`` defaults to the trajectory's own step (1 when absent), so the
    result is in position units per second**3 or per step**3.
    """
    x, traj_dt = _positions(traj)
    dt = traj_dt if dt is None else float(dt)
    if x.shape[0] < 4:
        raise ValidationError(f"trajectory too short for jerk (T={x.shape[0]}, need T >= 4)")
    third = x[3:] - 3.0 * x[2:-1] + 3.0 * x[1:-2] - x[:-3]
    norms = np.linalg.norm(third, axis=1)
    return float(np.cumsum(norms)[-1] / norms.shape[0] / dt**3)
