"""Ranking and quantile filtering of scored demonstrations."""
from __future__ import annotations

import math
from fractions import Fraction
from pathlib import Path

import numpy as np

from .models import METRICS, CurationManifest, Dataset, ScoreTable, ValidationError


def _check_metric(metric: str) -> None:
    if metric not in METRICS:
        raise ValidationError(f"unknown metric {metric!r}; expected one of {METRICS}")


def rank_order(values) -> np.ndarray:
    """Indices sorted ascending by value; equal values keep input order."""
    return np.argsort(np.asarray(values, dtype=np.float64), kind="stable")


def rank(table: ScoreTable, metric: str = "psd_w") -> list[str]:
    """Ids ordered best to worst (lowest score first, ties by dataset order)."""
    _check_metric(metric)
    if len(table) == 0:
        raise ValidationError("cannot rank an empty score table")
    ids = table.ids
    return [ids[i] for i in rank_order(table.values(metric))]


def discard_count(n: int, rho: float) -> int:
    """``floor(rho * n)``, reading ``rho`` as the decimal it was written as.

    Binary rounding would otherwise make e.g. ``floor(0.57 * 100)`` come out
    as 56.
    """
    if not 0 <= rho < 1:
        raise ValidationError(f"rho must lie in [0, 1), got {rho!r}")
    return math.floor(Fraction(repr(float(rho))) * n)


def filter_table(table: ScoreTable, metric: str = "psd_w", rho: float = 0.5) -> CurationManifest:
    """Discard the ``floor(rho*N)`` highest-scoring demonstrations.

    Membership is decided by count over :func:`rank`, not by re-applying
    the threshold, so boundary ties never shift the retained count. The
    reported ``threshold_W`` is the largest retained score.
    """
    n_drop = discard_count(len(table), rho)
    ordered = rank(table, metric)
    keep = set(ordered[: len(ordered) - n_drop])
    scores = dict(zip(table.ids, table.values(metric)))
    retained = [i for i in table.ids if i in keep]
    discarded = [i for i in table.ids if i not in keep]
    threshold = max(scores[i] for i in retained)
    return CurationManifest(
        rho=float(rho),
        metric=metric,
        threshold_W=float(threshold),
        retained=tuple(retained),
        discarded=tuple(discarded),
        config_fingerprint=table.config_fingerprint,
    )


def select(ds: Dataset, manifest: CurationManifest) -> Dataset:
    """Retained trajectories of ``ds`` in their original order."""
    known = set(ds.ids)
    unknown = [i for i in (*manifest.retained, *manifest.discarded) if i not in known]
    if unknown:
        raise ValidationError(f"manifest references ids absent from dataset {ds.name!r}: {unknown[:10]}")
    keep = set(manifest.retained)
    return Dataset(ds.name, tuple(t for t in ds if t.id in keep))


def materialize(ds: Dataset, manifest: CurationManifest, out_path) -> Path:
    from .dataset_io import write_jsonl

    return write_jsonl(select(ds, manifest), out_path)
