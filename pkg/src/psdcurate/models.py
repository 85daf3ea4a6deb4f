"""Core value types shared by every stage of the pipeline."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

METRICS = ("psd_w", "path_length", "mean_jerk")
LABELS = (1, 2, 3)


class ValidationError(ValueError):
    """Input violates a documented invariant (bad record, bad parameter)."""


@dataclass(frozen=True, eq=False)
class Trajectory:
    """One demonstration: ``T`` time-ordered position samples of dimension ``d``.

    ``samples`` is stored as a read-only ``(T, d)`` float64 array. ``dt`` is
    the step duration in seconds (``None`` means unit timestep) and ``label``
    an optional oracle quality label (1 worse, 2 okay, 3 better).
    """

    id: str
    samples: np.ndarray
    dt: Optional[float] = None
    label: Optional[int] = None

    def __post_init__(self):
        if not isinstance(self.id, str) or not self.id:
            raise ValidationError("trajectory id must be a non-empty string")
        try:
            arr = np.array(self.samples, dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"trajectory {self.id!r}: samples are not numeric vectors ({exc})") from None
        if arr.ndim != 2:
            raise ValidationError(
                f"trajectory {self.id!r}: samples must be a list of equal-length vectors"
            )
        if arr.shape[0] < 2:
            raise ValidationError(f"trajectory {self.id!r}: trajectory too short (T={arr.shape[0]}, need T >= 2)")
        if arr.shape[1] < 1:
            raise ValidationError(f"trajectory {self.id!r}: samples must have dimension >= 1")
        if not np.all(np.isfinite(arr)):
            raise ValidationError(f"trajectory {self.id!r}: samples contain NaN or Inf")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)
        if self.dt is not None:
            dt = float(self.dt)
            if not np.isfinite(dt) or dt <= 0:
                raise ValidationError(f"trajectory {self.id!r}: dt must be strictly positive, got {self.dt!r}")
            object.__setattr__(self, "dt", dt)
        if self.label is not None:
            if isinstance(self.label, bool) or int(self.label) != self.label or self.label not in LABELS:
                raise ValidationError(f"trajectory {self.id!r}: label must be one of {LABELS}, got {self.label!r}")
            object.__setattr__(self, "label", int(self.label))

    @property
    def T(self) -> int:
        return self.samples.shape[0]

    @property
    def dim(self) -> int:
        return self.samples.shape[1]

    def __eq__(self, other):
        if not isinstance(other, Trajectory):
            return NotImplemented
        return (
            self.id == other.id
            and self.dt == other.dt
            and self.label == other.label
            and self.samples.shape == other.samples.shape
            and bool(np.array_equal(self.samples, other.samples))
        )

    __hash__ = None


@dataclass(frozen=True)
class Dataset:
    name: str
    trajectories: tuple

    def __post_init__(self):
        trajs = tuple(self.trajectories)
        if not trajs:
            raise ValidationError(f"dataset {self.name!r} is empty")
        seen = {}
        for i, tr in enumerate(trajs):
            if tr.id in seen:
                raise ValidationError(
                    f"duplicate trajectory id {tr.id!r} at records {seen[tr.id]} and {i}"
                )
            seen[tr.id] = i
        object.__setattr__(self, "trajectories", trajs)

    def __len__(self):
        return len(self.trajectories)

    def __iter__(self):
        return iter(self.trajectories)

    @property
    def ids(self) -> list[str]:
        return [t.id for t in self.trajectories]

    def by_id(self, traj_id: str) -> Trajectory:
        for t in self.trajectories:
            if t.id == traj_id:
                return t
        raise KeyError(traj_id)


@dataclass(frozen=True)
class ScoreRow:
    id: str
    T: int
    W: float
    path_length: float
    mean_jerk: float
    label: Optional[int] = None

    def metric(self, name: str) -> float:
        if name not in METRICS:
            raise ValidationError(f"unknown metric {name!r}; expected one of {METRICS}")
        return self.W if name == "psd_w" else getattr(self, name)


@dataclass(frozen=True)
class ScoreTable:
    """Per-demonstration metrics in dataset order."""

    rows: tuple
    config_fingerprint: str = ""

    def __post_init__(self):
        rows = tuple(self.rows)
        seen = set()
        for r in rows:
            if r.id in seen:
                raise ValidationError(f"duplicate id {r.id!r} in score table")
            seen.add(r.id)
            for name in METRICS:
                v = r.metric(name)
                if not np.isfinite(v) or v < 0:
                    raise ValidationError(f"row {r.id!r}: {name} must be finite and >= 0, got {v!r}")
        object.__setattr__(self, "rows", rows)

    def __len__(self):
        return len(self.rows)

    @property
    def ids(self) -> list[str]:
        return [r.id for r in self.rows]

    def values(self, metric: str) -> np.ndarray:
        return np.array([r.metric(metric) for r in self.rows], dtype=np.float64)

    def labels(self) -> np.ndarray:
        missing = [r.id for r in self.rows if r.label is None]
        if missing:
            shown = ", ".join(missing[:10]) + (" ..." if len(missing) > 10 else "")
            raise ValidationError(f"{len(missing)} row(s) lack an oracle label: {shown}")
        return np.array([r.label for r in self.rows], dtype=np.int64)


@dataclass(frozen=True)
class CurationManifest:
    rho: float
    metric: str
    threshold_W: float
    retained: tuple
    discarded: tuple
    config_fingerprint: str = ""

    def __post_init__(self):
        object.__setattr__(self, "retained", tuple(self.retained))
        object.__setattr__(self, "discarded", tuple(self.discarded))
        if self.metric not in METRICS:
            raise ValidationError(f"unknown metric {self.metric!r}")
        if not 0 <= self.rho < 1:
            raise ValidationError(f"rho must lie in [0, 1), got {self.rho!r}")
        overlap = set(self.retained) & set(self.discarded)
        if overlap:
            raise ValidationError(f"ids both retained and discarded: {sorted(overlap)}")

    def check_against(self, ids: Sequence[str]) -> None:
        """Raise unless retained and discarded partition ``ids`` exactly."""
        expected = set(ids)
        got = set(self.retained) | set(self.discarded)
        if got != expected or len(self.retained) + len(self.discarded) != len(expected):
            missing = sorted(expected - got)
            extra = sorted(got - expected)
            raise ValidationError(
                f"manifest does not partition the scored ids (missing={missing[:5]}, unknown={extra[:5]})"
            )
