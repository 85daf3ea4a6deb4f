"""Ranking-quality evaluation against oracle labels.

A removal policy orders demonstrations for deletion. Its curve records, for
each number ``m`` of removed demonstrations, the mean label of the ``N - m``
that remain.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .curation import discard_count, rank_order
from .dataset_io import atomic_open, fmt_float
from .models import METRICS, ScoreTable, ValidationError

ORACLE = "oracle"
ANTI_ORACLE = "anti_oracle"
RANDOM_EXPECTATION = "random_expectation"
RANDOM_SAMPLE = "random_sample"
POLICIES = (*METRICS, ORACLE, ANTI_ORACLE, RANDOM_EXPECTATION, RANDOM_SAMPLE)
SUMMARY_COLUMNS = ("dataset", "task", "random", "oracle", *METRICS)


@dataclass(frozen=True, eq=False)
class EvaluationCurve:
    policy: str
    q_mean: np.ndarray  # q_mean[m] for m = 0..N-1

    @property
    def m(self) -> np.ndarray:
        return np.arange(self.q_mean.shape[0])

    @property
    def points(self) -> list[tuple[int, float]]:
        return list(zip(range(self.q_mean.shape[0]), self.q_mean.tolist()))

    def at(self, m: int) -> float:
        return float(self.q_mean[m])


def _remaining_means(labels: np.ndarray, removal: np.ndarray) -> np.ndarray:
    """Mean of ``labels`` left after deleting ``removal[:m]``, for each m."""
    n = labels.shape[0]
    removed = np.concatenate(([0], np.cumsum(labels[removal])[:-1]))
    total = int(labels.sum())
    remaining = np.arange(n, 0, -1)
    # Label sums are small integers, so numerators are exact.
    return (total - removed) / remaining


def removal_order(table: ScoreTable, policy: str, seed: int | None = None) -> np.ndarray:
    """Row indices in the order the policy removes them (first removed first)."""
    if policy in METRICS:
        return rank_order(table.values(policy))[::-1]
    labels = table.labels()
    if policy == ORACLE:
        return np.argsort(labels, kind="stable")
    if policy == ANTI_ORACLE:
        return np.argsort(-labels, kind="stable")
    if policy == RANDOM_SAMPLE:
        if seed is None:
            raise ValidationError("random_sample policy needs a seed")
        return np.random.default_rng(seed).permutation(len(table))
    raise ValidationError(f"policy {policy!r} has no removal order")


def remaining_quality_curve(table: ScoreTable, policy: str, seed: int | None = None) -> EvaluationCurve:
    if policy not in POLICIES:
        raise ValidationError(f"unknown policy {policy!r}; expected one of {POLICIES}")
    labels = table.labels()
    if policy == RANDOM_EXPECTATION:
        return EvaluationCurve(policy, np.full(labels.shape[0], labels.sum() / labels.shape[0]))
    return EvaluationCurve(policy, _remaining_means(labels, removal_order(table, policy, seed)))


def summary_at(table: ScoreTable, policy: str, rho: float, seed: int | None = None) -> float:
    """Mean remaining label after the policy removes ``floor(rho*N)`` demos."""
    m = discard_count(len(table), rho)
    return remaining_quality_curve(table, policy, seed).at(m)


def rank_correlation(table: ScoreTable, metric: str = "psd_w") -> float:
    """Spearman correlation oriented so that +1 means the metric orders like the labels.

    Ranks metric ascending (low score = better) against labels descending
    (high label = better); ties take average ranks. Equals minus the plain
    Spearman coefficient between metric and label.
    """
    labels = table.labels()
    if np.all(labels == labels[0]):
        raise ValidationError("correlation undefined: all labels are equal")
    values = table.values(metric)
    if np.all(values == values[0]):
        raise ValidationError(f"correlation undefined: all {metric} values are equal")
    rho = stats.spearmanr(values, labels).statistic
    return float(-rho)


def curves_text(curves) -> str:
    curves = list(curves)
    if not curves:
        raise ValidationError("no curves to write")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["policy", "m", "q_mean"])
    for c in curves:
        for m, q in enumerate(c.q_mean.tolist()):
            w.writerow([c.policy, m, fmt_float(q)])
    return buf.getvalue()


def emit_curves(curves, path):
    text = curves_text(curves)
    with atomic_open(path) as fh:
        fh.write(text)
    return path


def read_curves(path) -> list[EvaluationCurve]:
    grouped: dict[str, list[tuple[int, float]]] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        for rec in csv.DictReader(fh):
            grouped.setdefault(rec["policy"], []).append((int(rec["m"]), float(rec["q_mean"])))
    out = []
    for policy, pts in grouped.items():
        pts.sort()
        out.append(EvaluationCurve(policy, np.array([q for _, q in pts])))
    return out


def summary_row(table: ScoreTable, rho: float, dataset: str = "-", task: str = "-", seed: int | None = None) -> dict:
    """One Table-II-style row; ``random`` is the sampled value when ``seed`` is given."""
    random_policy = RANDOM_EXPECTATION if seed is None else RANDOM_SAMPLE
    row = {
        "dataset": dataset,
        "task": task,
        "random": summary_at(table, random_policy, rho, seed),
        "oracle": summary_at(table, ORACLE, rho),
    }
    for metric in METRICS:
        row[metric] = summary_at(table, metric, rho)
    return row


def summary_text(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for r in rows:
        w.writerow([r[c] if c in ("dataset", "task") else "%.4f" % r[c] for c in SUMMARY_COLUMNS])
    return buf.getvalue()
