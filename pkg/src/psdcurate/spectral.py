"""Discrete Fourier transform, power spectra and the total-spectral-power score W.

For a trajectory with per-dimension signals ``x_d(t)``, ``t = 0..T-1``::

    X_d(k) = sum_t x_d(t) exp(-2j*pi*k*t/T)       k = 0..T-1
    P_d(k) = |X_d(k)|**2
    P(k)   = sum_d P_d(k)
    W      = sum_k P(k)

The transform is evaluated at exact length (no padding), so with the default
configuration ``W == T * sum_d sum_t x_d(t)**2`` (Parseval). ``dt`` never
enters W: scores from datasets recorded at different rates are not comparable.
"""
from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import __version__
from .kinematics import mean_jerk, path_length
from .models import Dataset, ScoreRow, ScoreTable, Trajectory, ValidationError

DETREND_MODES = ("none", "mean", "linear")
LENGTH_NORMALIZE_MODES = ("none", "per_sample")
TRANSFORMS = ("fft", "direct")

# Largest T whose full twiddle matrix is cached (2048**2 complex128 = 64 MiB).
_CACHE_MAX_T = 2048
_DIRECT_ROW_BLOCK = 256


@dataclass(frozen=True)
class SpectralConfig:
    """Options left open by the bare ``P ~ |X|^2`` definition.

    The power constant is fixed at 1. ``transform`` selects between the
    fast FFT path and the direct O(T^2) summation; both compute the same
    transform and differ only in rounding.
    """

    detrend: str = "none"
    include_dc: bool = True
    length_normalize: str = "none"
    transform: str = "fft"

    def __post_init__(self):
        if self.detrend not in DETREND_MODES:
            raise ValidationError(f"detrend must be one of {DETREND_MODES}, got {self.detrend!r}")
        if self.length_normalize not in LENGTH_NORMALIZE_MODES:
            raise ValidationError(
                f"length_normalize must be one of {LENGTH_NORMALIZE_MODES}, got {self.length_normalize!r}"
            )
        if self.transform not in TRANSFORMS:
            raise ValidationError(f"transform must be one of {TRANSFORMS}, got {self.transform!r}")
        if not isinstance(self.include_dc, bool):
            raise ValidationError("include_dc must be a bool")

    def fingerprint(self) -> str:
        payload = json.dumps({"tool": "psdcurate", "version": __version__, **asdict(self)}, sort_keys=True)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class Spectrum:
    coefficients: np.ndarray
    T: int

    @property
    def omega(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.T) / self.T

    @property
    def power(self) -> np.ndarray:
        c = self.coefficients
        return c.real * c.real + c.imag * c.imag


@dataclass(frozen=True, eq=False)
class SpectralResult:
    per_dimension_power: np.ndarray  # (d, T)
    aggregated_power: np.ndarray  # (T,)
    W: float
    config: SpectralConfig

    @property
    def T(self) -> int:
        return self.aggregated_power.shape[0]


def _as_signal(signal) -> np.ndarray:
    x = np.asarray(signal, dtype=np.float64)
    if x.ndim != 1:
        raise ValidationError(f"signal must be one-dimensional, got shape {x.shape}")
    if x.shape[0] < 2:
        raise ValidationError(f"signal too short: T={x.shape[0]}, need T >= 2")
    if not np.all(np.isfinite(x)):
        raise ValidationError("signal contains NaN or Inf")
    return x


def _twiddle_rows(T: int, rows: np.ndarray) -> np.ndarray:
    # Reduce k*t modulo T before scaling so the phase stays accurate for large T.
    t = np.arange(T, dtype=np.int64)
    idx = np.multiply.outer(rows.astype(np.int64), t) % T
    theta = (2.0 * np.pi / T) * idx
    return np.cos(theta) - 1j * np.sin(theta)


@lru_cache(maxsize=4)
def _twiddle_matrix(T: int) -> np.ndarray:
    m = _twiddle_rows(T, np.arange(T))
    m.setflags(write=False)
    return m


def _direct_columns(x: np.ndarray) -> np.ndarray:
    """Direct summation of the DFT along axis 0 of a real ``(T, d)`` array."""
    T = x.shape[0]
    if T <= _CACHE_MAX_T:
        return _twiddle_matrix(T) @ x
    out = np.empty(x.shape, dtype=np.complex128)
    for start in range(0, T, _DIRECT_ROW_BLOCK):
        rows = np.arange(start, min(start + _DIRECT_ROW_BLOCK, T))
        out[rows] = _twiddle_rows(T, rows) @ x
    return out


def _transform_columns(x: np.ndarray, transform: str) -> np.ndarray:
    if transform == "direct":
        return _direct_columns(x)
    return np.fft.fft(x, axis=0)


def dft(signal: Sequence[float]) -> Spectrum:
    """Exact-length forward DFT of a real signal on the grid ``2*pi*k/T``."""
    x = _as_signal(signal)
    return Spectrum(np.fft.fft(x), x.shape[0])


def dft_direct(signal: Sequence[float]) -> Spectrum:
    """O(T^2) evaluation of the DFT sum; the reference for :func:`dft`."""
    x = _as_signal(signal)
    return Spectrum(_direct_columns(x[:, None])[:, 0], x.shape[0])


def detrend(x: np.ndarray, mode: str) -> np.ndarray:
    """Remove the per-column mean or least-squares line from a ``(T, d)`` array."""
    if mode == "none":
        return x
    centered = x - x.mean(axis=0)
    if mode == "mean":
        return centered
    if mode != "linear":
        raise ValidationError(f"unknown detrend mode {mode!r}")
    t = np.arange(x.shape[0], dtype=np.float64)
    t -= t.mean()
    slope = (t @ centered) / (t @ t)
    return centered - np.outer(t, slope)


def _ordered_sum(values: np.ndarray) -> float:
    # Sequential left-to-right sum; np.sum is pairwise and order-dependent on shape.
    if values.size == 0:
        return 0.0
    return float(np.cumsum(values)[-1])


def spectral_power(samples: np.ndarray, config: SpectralConfig) -> SpectralResult:
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    T, d = x.shape
    X = _transform_columns(detrend(x, config.detrend), config.transform)
    per_dim = np.ascontiguousarray((X.real * X.real + X.imag * X.imag).T)
    if not config.include_dc:
        per_dim[:, 0] = 0.0
    agg = per_dim[0].copy()
    for i in range(1, d):
        agg += per_dim[i]
    W = _ordered_sum(agg)
    if config.length_normalize == "per_sample":
        W /= T
    per_dim.setflags(write=False)
    agg.setflags(write=False)
    return SpectralResult(per_dim, agg, W, config)


def score_trajectory(traj: Trajectory, config: SpectralConfig | None = None) -> SpectralResult:
    return spectral_power(traj.samples, config or SpectralConfig())


def _score_row(traj: Trajectory, config: SpectralConfig) -> ScoreRow:
    try:
        jerk = mean_jerk(traj)
    except ValidationError as exc:
        raise ValidationError(f"trajectory {traj.id!r}: {exc}") from None
    return ScoreRow(
        id=traj.id,
        T=traj.T,
        W=score_trajectory(traj, config).W,
        path_length=path_length(traj),
        mean_jerk=jerk,
        label=traj.label,
    )


def score_dataset(ds: Dataset, config: SpectralConfig | None = None, jobs: int = 1) -> ScoreTable:
    """Score every trajectory of ``ds``; rows follow dataset order.

    Output is bit-identical for any ``jobs`` since each row is computed
    independently with a fixed summation order.
    """
    config = config or SpectralConfig()
    if len(ds) == 0:
        raise ValidationError("cannot score an empty dataset")
    dims = {}
    for tr in ds:
        dims.setdefault(tr.dim, []).append(tr.id)
    if len(dims) > 1:
        majority = max(dims, key=lambda k: len(dims[k]))
        odd = [i for k, ids in dims.items() if k != majority for i in ids]
        raise ValidationError(
            f"mixed dimensionality: most trajectories have d={majority}, but these differ: {odd[:10]}"
        )
    if jobs < 1:
        raise ValidationError(f"jobs must be >= 1, got {jobs}")
    if jobs == 1:
        rows = [_score_row(tr, config) for tr in ds]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(lambda tr: _score_row(tr, config), ds.trajectories))
    return ScoreTable(tuple(rows), config.fingerprint())
