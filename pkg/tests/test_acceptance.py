"""Acceptance criteria, one test each; results are echoed in the terminal summary."""
import math
import time
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from conftest import ACCEPTANCE_LINES
from psdcurate.cli import main
from psdcurate.curation import filter_table, rank
from psdcurate.dataset_io import (
    load_dataset,
    read_manifest,
    read_score_table,
    write_csv_dir,
    write_jsonl,
    write_manifest,
    write_score_table,
)
from psdcurate.evaluation import remaining_quality_curve, summary_at
from psdcurate.kinematics import mean_jerk, path_length
from psdcurate.models import Dataset, ScoreRow, ScoreTable, Trajectory
from psdcurate.spectral import SpectralConfig, dft, score_dataset, score_trajectory
from psdcurate.synthgen import SynthConfig, generate_dataset


def record(number, title, ok, detail=""):
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {number:>2}. {title}: {detail}")
    assert ok, f"criterion {number} ({title}) failed: {detail}"


def primes_upto(n):
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(n**0.5) + 1):
        if sieve[p]:
            sieve[p * p:: p] = False
    return np.flatnonzero(sieve)


def test_01_parseval_oracle():
    g = np.random.default_rng(2024)
    primes = primes_upto(4096)
    lengths = np.concatenate([g.choice(primes, 300, replace=False), [2, 3, 4096], g.integers(2, 4097, size=697)])
    t0 = time.perf_counter()
    worst = 0.0
    for T in lengths:
        x = g.normal(size=int(T)) * g.uniform(0.01, 100) + g.normal()
        lhs = float(np.sum(dft(x).power))
        rhs = int(T) * math.fsum(x * x)
        worst = max(worst, abs(lhs - rhs) / rhs)
    elapsed = time.perf_counter() - t0
    record(1, "Parseval oracle", len(lengths) == 1000 and worst <= 1e-9 and elapsed <= 60,
           f"1000 signals ({len(set(lengths) & set(primes))} prime lengths), max rel err {worst:.2e}, {elapsed:.1f}s")


def test_02_analytic_spectra():
    worst = 0.0
    ok = True
    p = dft(np.full(37, 2.5)).power
    ok &= p[0] == pytest.approx(37**2 * 2.5**2, rel=1e-12)
    ok &= float(np.max(p[1:])) <= 1e-9 * p.sum()
    for T, k0, A in [(64, 5, 1.5), (100, 10, 0.2), (97, 13, 3.0), (2000, 321, 0.01), (31, 15, 1.0)]:
        t = np.arange(T)
        p = dft(A * np.sin(2 * np.pi * k0 * t / T)).power
        target = T * T * A * A / 4
        worst = max(worst, abs(p[k0] - target) / target, abs(p[T - k0] - target) / target)
        ok &= float(np.max(np.delete(p, [k0, T - k0]))) <= 1e-9 * p.sum()
    ok &= worst <= 1e-9
    record(2, "Analytic spectra", bool(ok), f"DC-only constant; sinusoid peaks T^2A^2/4 within {worst:.1e} rel")


def test_03_scaling_law():
    g = np.random.default_rng(3)
    worst = 0.0
    for detrend in ("none", "mean", "linear"):
        cfg = SpectralConfig(detrend=detrend)
        for _ in range(20):
            x = g.normal(size=(int(g.integers(3, 500)), 3)) + g.normal(size=3)
            w = score_trajectory(Trajectory("a", x), cfg).W
            for c in (0.5, 2.0, 10.0):
                wc = score_trajectory(Trajectory("a", c * x), cfg).W
                worst = max(worst, abs(wc - c * c * w) / (c * c * w))
    record(3, "Quadratic scaling", worst <= 1e-12, f"max rel err {worst:.1e} over 3 detrend modes x c in {{0.5,2,10}}")


def test_04_rank_invariance():
    g = np.random.default_rng(4)
    transforms = {"2w": lambda w: 2 * w, "w^2": lambda w: w * w, "sqrt": np.sqrt, "log1p": np.log1p}
    ok = True
    for _ in range(200):
        n = int(g.integers(1, 120))
        w = np.round(g.exponential(size=n) * 10, int(g.integers(0, 3))) + 1e-3  # includes ties
        base = rank(ScoreTable(tuple(ScoreRow(f"i{k}", 4, float(v), 0.0, 0.0) for k, v in enumerate(w))))
        for f in transforms.values():
            fw = f(w)
            t = ScoreTable(tuple(ScoreRow(f"i{k}", 4, float(v), 0.0, 0.0) for k, v in enumerate(fw)))
            ok &= rank(t) == base
    record(4, "Rank invariance", bool(ok), f"200 tables x {len(transforms)} increasing maps, ties included")


@pytest.fixture(scope="module")
def balanced_table():
    return score_dataset(generate_dataset(SynthConfig(n_per_label=100, seed=0)))


def test_05_table_ii_oracle_arithmetic(balanced_table, tmp_path):
    oracle = summary_at(balanced_table, "oracle", 0.5)
    expectation = summary_at(balanced_table, "random_expectation", 0.5)
    sampled = np.array([summary_at(balanced_table, "random_sample", 0.5, seed=s) for s in range(200)])
    within = float(np.mean(np.abs(sampled - 1.99) <= 0.08))
    write_score_table(balanced_table, tmp_path / "s.csv")
    code = main(["eval", "--scores", str(tmp_path / "s.csv"), "--curves", str(tmp_path / "c.csv"),
                 "--sample-random", "0"])
    ok = abs(oracle - 2.67) <= 0.005 and expectation == 2.0 and abs(sampled.mean() - 1.99) <= 0.08 and code == 0
    record(5, "Oracle and random summary arithmetic", ok,
           f"oracle {oracle:.4f}, random expectation {expectation!r}, sampled mean {sampled.mean():.4f} "
           f"over 200 seeds ({within:.0%} of seeds within 1.99 +/- 0.08)")


def test_06_fig3_shape_on_synthetic():
    t0 = time.perf_counter()
    worst_rho, worst_q150, band_ok = -1.0, 3.0, True
    for seed in range(20):
        table = score_dataset(generate_dataset(SynthConfig(seed=seed)))
        labels = table.labels()
        assert len(table) == 300 and np.bincount(labels).tolist() == [0, 100, 100, 100]
        curve = remaining_quality_curve(table, "psd_w").q_mean
        oracle = remaining_quality_curve(table, "oracle").q_mean
        random = remaining_quality_curve(table, "random_expectation").q_mean
        band_ok &= bool(np.all(curve >= random - 1e-12) and np.all(curve <= oracle + 1e-12))
        worst_q150 = min(worst_q150, curve[150])
        worst_rho = max(worst_rho, stats.spearmanr(table.values("psd_w"), labels).statistic)
    elapsed = time.perf_counter() - t0
    ok = band_ok and worst_q150 >= 2.5 and worst_rho <= -0.8 and elapsed <= 300
    record(6, "Remaining-quality curve shape on synthetic data", ok,
           f"20 seeds: curve within [random, oracle]={band_ok}, min q(150)={worst_q150:.3f}, "
           f"max Spearman(W,label)={worst_rho:.3f}, {elapsed:.1f}s")


def test_07_kinematic_baselines():
    t = np.arange(50, dtype=float)
    line = np.stack([0.25 * t + 1.0, 2.0 * t, -t], axis=1)
    cube = np.stack([t**3, 0 * t, 0 * t], axis=1)
    theta = 2 * np.pi * np.arange(361) / 360
    circle = np.stack([np.cos(theta), np.sin(theta), np.zeros(361)], axis=1)
    chord = 360 * 2 * math.sin(math.pi / 360)
    circle_err = abs(path_length(circle) - chord) / chord
    g = np.random.default_rng(7)
    x = np.cumsum(g.normal(size=(200, 3)), axis=0)
    q, _ = np.linalg.qr(g.normal(size=(3, 3)))
    moved = x @ q.T + np.array([3.0, -2.0, 10.0])
    inv_err = max(abs(path_length(moved) - path_length(x)) / path_length(x),
                  abs(mean_jerk(moved) - mean_jerk(x)) / mean_jerk(x))
    ok = (mean_jerk(line) == 0.0 and mean_jerk(Trajectory("c", cube, dt=1.0)) == 6.0
          and circle_err <= 1e-9 and inv_err <= 1e-9)
    record(7, "Kinematic baselines", ok,
           f"line jerk {mean_jerk(line):.1e}, cubic jerk {mean_jerk(cube)}, 360-gon rel err {circle_err:.1e}, "
           f"rigid-motion rel err {inv_err:.1e}")


def test_08_curation_count_laws():
    g = np.random.default_rng(8)
    rhos = [i / 10 for i in range(10)]
    ok = True
    for n in range(1, 302):
        w = g.integers(0, max(2, n // 4), size=n).astype(float)
        table = ScoreTable(tuple(ScoreRow(f"i{k}", 4, float(v), 0.0, 0.0) for k, v in enumerate(w)))
        previous = None
        for r in rhos:
            m = filter_table(table, "psd_w", r)
            ok &= len(m.discarded) == math.floor(Fraction(str(r)) * n)
            ok &= len(m.retained) + len(m.discarded) == n
            if previous is not None:
                ok &= set(m.retained) <= previous
            previous = set(m.retained)
    record(8, "Curation count laws", bool(ok), "N in [1, 301] x rho in {0, 0.1, ..., 0.9}")


@pytest.fixture(scope="module")
def big_dataset(tmp_path_factory):
    g = np.random.default_rng(9)
    path = tmp_path_factory.mktemp("big") / "big.jsonl"
    trajs = tuple(
        Trajectory(f"demo_{i:03d}", 0.5 + np.cumsum(g.normal(scale=1e-3, size=(2000, 3)), axis=0), label=1 + i % 3)
        for i in range(300)
    )
    write_jsonl(Dataset("big", trajs), path)
    return path


@pytest.mark.slow
def test_09_runtime_budget(big_dataset, tmp_path):
    t0 = time.perf_counter()
    code_fast = main(["score", "--input", str(big_dataset), "--output", str(tmp_path / "a.csv"), "--jobs", "8"])
    fast = time.perf_counter() - t0
    t0 = time.perf_counter()
    code_direct = main(["score", "--input", str(big_dataset), "--output", str(tmp_path / "b.csv"),
                        "--jobs", "1", "--transform", "direct"])
    direct = time.perf_counter() - t0
    a, b = read_score_table(tmp_path / "a.csv"), read_score_table(tmp_path / "b.csv")
    agree = max(abs(x.W - y.W) / x.W for x, y in zip(a.rows, b.rows))
    ok = code_fast == 0 and code_direct == 0 and fast <= 10 and direct <= 60 and agree <= 1e-9 and len(a) == 300
    record(9, "Runtime budget", ok,
           f"300x2000x3: --jobs 8 {fast:.1f}s (<=10s), direct single-threaded {direct:.1f}s (<=60s), "
           f"W agreement {agree:.1e}")


def _pipeline(root):
    root.mkdir()
    steps = [
        ["synth", "--n-per-label", "30", "--base-length", "120", "--seed", "5", "--out", str(root / "d.jsonl")],
        ["score", "--input", str(root / "d.jsonl"), "--output", str(root / "s.csv"), "--detrend", "mean"],
        ["filter", "--scores", str(root / "s.csv"), "--rho", "0.5", "--manifest", str(root / "m.json"),
         "--dataset", str(root / "d.jsonl"), "--out-dataset", str(root / "f.jsonl")],
        ["eval", "--scores", str(root / "s.csv"), "--curves", str(root / "c.csv"), "--sample-random", "1"],
    ]
    return [main(s) for s in steps]


def test_10_determinism(tmp_path, capsys):
    codes = _pipeline(tmp_path / "run1") + _pipeline(tmp_path / "run2")
    names = sorted(p.name for p in (tmp_path / "run1").iterdir())
    same = all((tmp_path / "run1" / n).read_bytes() == (tmp_path / "run2" / n).read_bytes() for n in names)
    d = tmp_path / "run1" / "d.jsonl"
    main(["score", "--input", str(d), "--output", str(tmp_path / "j1.csv"), "--jobs", "1"])
    main(["score", "--input", str(d), "--output", str(tmp_path / "j8.csv"), "--jobs", "8"])
    jobs_same = (tmp_path / "j1.csv").read_bytes() == (tmp_path / "j8.csv").read_bytes()
    ok = codes == [0] * 8 and same and jobs_same and len(names) == 6
    record(10, "Determinism", ok, f"{len(names)} pipeline outputs byte-identical={same}; jobs 1 vs 8 identical={jobs_same}")


def test_11_io_round_trips(tmp_path, balanced_table):
    ds = generate_dataset(SynthConfig(n_per_label=5, seed=3))
    ds = Dataset(ds.name, tuple(Trajectory(t.id, t.samples, dt=0.05 if t.label == 2 else None, label=t.label)
                               for t in ds))
    write_jsonl(ds, tmp_path / "a.jsonl")
    write_jsonl(load_dataset(tmp_path / "a.jsonl"), tmp_path / "b.jsonl")
    jsonl_ok = (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()

    write_csv_dir(ds, tmp_path / "c1")
    write_csv_dir(load_dataset(tmp_path / "c1", "csv_dir"), tmp_path / "c2")
    csv_ok = all((tmp_path / "c1" / f.name).read_bytes() == f.read_bytes() for f in (tmp_path / "c2").iterdir())

    write_score_table(balanced_table, tmp_path / "s1.csv")
    write_score_table(read_score_table(tmp_path / "s1.csv"), tmp_path / "s2.csv")
    score_ok = (tmp_path / "s1.csv").read_bytes() == (tmp_path / "s2.csv").read_bytes()

    m = filter_table(balanced_table, "psd_w", 0.3)
    write_manifest(m, tmp_path / "m1.json", scored_ids=balanced_table.ids)
    write_manifest(read_manifest(tmp_path / "m1.json"), tmp_path / "m2.json")
    manifest_ok = (tmp_path / "m1.json").read_bytes() == (tmp_path / "m2.json").read_bytes()

    ok = jsonl_ok and csv_ok and score_ok and manifest_ok and load_dataset(tmp_path / "a.jsonl").trajectories == ds.trajectories
    record(11, "I/O round-trips", ok,
           f"jsonl={jsonl_ok}, csv-dir={csv_ok}, score table={score_ok}, manifest={manifest_ok}")
