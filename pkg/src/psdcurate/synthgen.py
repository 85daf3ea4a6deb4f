"""Seeded synthetic demonstrations with ground-truth quality labels.

Experts follow a minimum-jerk reach between a start and a goal drawn from
two fixed workspace boxes (a pick-and-place shape, metres). Lower labels
get progressively heavier artifacts: oscillation bursts, pauses and
overshoot-and-correct excursions. Pauses and overshoots insert samples, so
worse demonstrations are also longer.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .models import Dataset, Trajectory, ValidationError

START_BOX = ((0.35, -0.20, 0.20), (0.45, -0.10, 0.30))
GOAL_BOX = ((0.55, 0.10, 0.05), (0.65, 0.20, 0.15))
N_BURSTS = 3
OVERSHOOT_STEPS = 8


@dataclass(frozen=True)
class Oscillation:
    amplitude: float = 0.0
    cycles_per_step: float = 0.1
    burst_fraction: float = 0.0


@dataclass(frozen=True)
class Pauses:
    count: int = 0
    length_steps: int = 0


@dataclass(frozen=True)
class Overshoots:
    count: int = 0
    magnitude: float = 0.0


@dataclass(frozen=True)
class ArtifactSpec:
    oscillation: Oscillation = field(default_factory=Oscillation)
    pauses: Pauses = field(default_factory=Pauses)
    overshoots: Overshoots = field(default_factory=Overshoots)
    seed: int = 0

    def __post_init__(self):
        osc = self.oscillation
        if osc.amplitude < 0 or self.overshoots.magnitude < 0:
            raise ValidationError("artifact magnitudes must be >= 0")
        if not 0 < osc.cycles_per_step < 0.5:
            raise ValidationError(f"cycles_per_step must lie in (0, 0.5), got {osc.cycles_per_step}")
        if not 0 <= osc.burst_fraction <= 1:
            raise ValidationError(f"burst_fraction must lie in [0, 1], got {osc.burst_fraction}")
        if self.pauses.count < 0 or self.pauses.length_steps < 0 or self.overshoots.count < 0:
            raise ValidationError("artifact counts and lengths must be >= 0")


def default_artifact_levels() -> dict[int, ArtifactSpec]:
    return {
        3: ArtifactSpec(),
        2: ArtifactSpec(
            oscillation=Oscillation(amplitude=0.01, cycles_per_step=0.08, burst_fraction=0.3),
            pauses=Pauses(count=2, length_steps=20),
            overshoots=Overshoots(count=1, magnitude=0.03),
        ),
        1: ArtifactSpec(
            oscillation=Oscillation(amplitude=0.025, cycles_per_step=0.12, burst_fraction=0.5),
            pauses=Pauses(count=4, length_steps=30),
            overshoots=Overshoots(count=3, magnitude=0.06),
        ),
    }


@dataclass(frozen=True)
class SynthConfig:
    n_per_label: int = 100
    base_length: int = 200
    artifact_levels: dict = field(default_factory=default_artifact_levels)
    expert_perturbation: float = 0.004
    seed: int = 0

    def __post_init__(self):
        if self.n_per_label < 1:
            raise ValidationError(f"n_per_label must be >= 1, got {self.n_per_label}")
        if self.base_length < 16:
            raise ValidationError(f"base_length must be >= 16, got {self.base_length}")
        if self.expert_perturbation < 0:
            raise ValidationError("expert_perturbation must be >= 0")
        if set(self.artifact_levels) != {1, 2, 3}:
            raise ValidationError("artifact_levels needs an entry for each label 1, 2, 3")


def min_jerk_profile(T: int) -> np.ndarray:
    """Normalised quintic ``10s^3 - 15s^4 + 6s^5`` on ``s = t/(T-1)``."""
    s = np.arange(T) / (T - 1)
    return s**3 * (10.0 + s * (-15.0 + 6.0 * s))


def generate_expert(start, goal, T: int, seed: int = 0, perturbation: float = 0.0, dt: float | None = None,
                    traj_id: str = "expert", label: int | None = None) -> Trajectory:
    """Minimum-jerk reach plus a smooth seeded wobble that vanishes at both ends."""
    if T < 16:
        raise ValidationError(f"expert trajectory needs T >= 16, got {T}")
    start = np.asarray(start, dtype=np.float64)
    goal = np.asarray(goal, dtype=np.float64)
    x = start + np.outer(min_jerk_profile(T), goal - start)
    if perturbation > 0:
        rng = np.random.default_rng(seed)
        s = np.arange(T) / (T - 1)
        harmonics = np.sin(np.pi * np.outer(s, np.arange(1, 4)))  # (T, 3), zero at s=0 and s=1
        coef = rng.normal(scale=perturbation, size=(3, start.shape[0])) / np.arange(1, 4)[:, None]
        x = x + harmonics @ coef
        x[0], x[-1] = start, goal
    return Trajectory(traj_id, x, dt=dt, label=label)


def _overshoot(x: np.ndarray, rng: np.random.Generator, magnitude: float) -> np.ndarray:
    """Insert an excursion past a random interior via-point and a return to it."""
    T = x.shape[0]
    t = int(rng.integers(1, T - 1))
    heading = x[t] - x[t - 1]
    norm = np.linalg.norm(heading)
    if norm == 0:
        heading = rng.normal(size=x.shape[1])
        norm = np.linalg.norm(heading)
    peak = x[t] + magnitude * heading / norm
    ramp = min_jerk_profile(OVERSHOOT_STEPS + 1)[1:]
    out_leg = x[t] + np.outer(ramp, peak - x[t])
    back_leg = peak + np.outer(ramp, x[t] - peak)
    return np.concatenate([x[: t + 1], out_leg, back_leg, x[t + 1:]])


def _insert_pauses(x: np.ndarray, rng: np.random.Generator, count: int, length: int) -> np.ndarray:
    T = x.shape[0]
    where = np.sort(rng.choice(T, size=min(count, T), replace=False))
    pieces, prev = [], 0
    for t in where:
        pieces.append(x[prev: t + 1])
        pieces.append(np.repeat(x[t: t + 1], length, axis=0))
        prev = t + 1
    pieces.append(x[prev:])
    return np.concatenate(pieces)


def _add_oscillation(x: np.ndarray, rng: np.random.Generator, osc: Oscillation) -> np.ndarray:
    T, d = x.shape
    t = np.arange(T)
    out = x.copy()
    if osc.burst_fraction >= 1:
        windows = [(0, T)]
    else:
        burst = int(round(osc.burst_fraction * T / N_BURSTS))
        bounds = np.linspace(0, T, N_BURSTS + 1).astype(int)
        windows = []
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            width = min(burst, hi - lo)
            if width > 0:
                a = int(rng.integers(lo, hi - width + 1))
                windows.append((a, a + width))
    for a, b in windows:
        direction = rng.normal(size=d)
        direction /= np.linalg.norm(direction)
        phase = rng.uniform(0, 2 * np.pi)
        wave = osc.amplitude * np.sin(2 * np.pi * osc.cycles_per_step * t[a:b] + phase)
        out[a:b] += np.outer(wave, direction)
    return out


def corrupt(traj: Trajectory, spec: ArtifactSpec) -> Trajectory:
    """Apply overshoots, then pauses, then oscillation bursts, seeded by ``spec.seed``.

    A spec with all counts and magnitudes at zero returns ``traj`` unchanged.
    """
    rng = np.random.default_rng(spec.seed)
    x = np.array(traj.samples)
    if spec.overshoots.magnitude > 0:
        for _ in range(spec.overshoots.count):
            x = _overshoot(x, rng, spec.overshoots.magnitude)
    if spec.pauses.count > 0 and spec.pauses.length_steps > 0:
        x = _insert_pauses(x, rng, spec.pauses.count, spec.pauses.length_steps)
    if spec.oscillation.amplitude > 0 and spec.oscillation.burst_fraction > 0:
        x = _add_oscillation(x, rng, spec.oscillation)
    if x.shape == traj.samples.shape and np.array_equal(x, traj.samples):
        return traj
    return Trajectory(traj.id, x, dt=traj.dt, label=traj.label)


def _demo_seed(master: int, index: int) -> int:
    # Counter-based child seeds keep each demo independent of generation order.
    return int(np.random.SeedSequence([master, index]).generate_state(2, np.uint32).view(np.uint64)[0])


def generate_dataset(config: SynthConfig | None = None, name: str = "synthetic") -> Dataset:
    """``n_per_label`` demos for each label, interleaved 3, 2, 1, 3, 2, 1, ..."""
    config = config or SynthConfig()
    trajs = []
    index = 0
    for i in range(config.n_per_label):
        for label in (3, 2, 1):
            seed = _demo_seed(config.seed, index)
            rng = np.random.default_rng(seed)
            start = rng.uniform(*START_BOX)
            goal = rng.uniform(*GOAL_BOX)
            expert_seed, artifact_seed = (int(v) for v in rng.integers(0, 2**63, size=2))
            base = generate_expert(
                start, goal, config.base_length, seed=expert_seed,
                perturbation=config.expert_perturbation, traj_id=f"demo_{index:04d}", label=label,
            )
            spec = replace(config.artifact_levels[label], seed=artifact_seed)
            trajs.append(corrupt(base, spec))
            index += 1
    return Dataset(name, tuple(trajs))
