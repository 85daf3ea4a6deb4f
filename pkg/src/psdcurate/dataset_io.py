"""Readers and writers for demonstration datasets, score tables and manifests.

Formats
-------
JSONL dataset
    One object per line: ``{"id": str, "samples": [[x, y, z], ...],
    "dt": float (optional), "label": 1|2|3 (optional)}``.
CSV directory
    ``index.csv`` with columns ``id,file,label,dt`` (label/dt may be blank)
    plus one CSV per demonstration with header ``x,y,z`` (``x0..x{d-1}``
    when d != 3).
Score table
    CSV ``id,T,W,path_length,mean_jerk,label``, floats at 17 significant
    digits. The scoring config and its fingerprint go to a sidecar
    ``<path>.meta.json``.
Manifest
    JSON ``{"rho", "threshold_W", "metric", "config_fingerprint",
    "retained", "discarded"}``.

All writers go through a temp file plus rename, so a failed write never
leaves a truncated output behind.
"""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from .models import CurationManifest, Dataset, ScoreRow, ScoreTable, Trajectory, ValidationError

FORMATS = ("jsonl", "csv_dir")
SCORE_COLUMNS = ("id", "T", "W", "path_length", "mean_jerk", "label")
INDEX_COLUMNS = ("id", "file", "label", "dt")


def fmt_float(x: float) -> str:
    return "%.17g" % float(x)


@contextmanager
def atomic_open(path, mode: str = "w"):
    """Open a temp file beside ``path`` and move it into place on success."""
    path = Path(path)
    parent = path.parent if str(path.parent) else Path(".")
    if not parent.is_dir():
        raise FileNotFoundError(f"output directory does not exist: {parent}")
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=parent)
    try:
        kwargs = {} if "b" in mode else {"encoding": "utf-8", "newline": ""}
        with os.fdopen(fd, mode, **kwargs) as fh:
            yield fh
        os.chmod(tmp, 0o666 & ~_umask())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def _umask() -> int:
    mask = os.umask(0)
    os.umask(mask)
    return mask


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".meta.json")


# -- datasets -------------------------------------------------------------


def _trajectory_from_record(rec, where: str) -> Trajectory:
    if not isinstance(rec, dict):
        raise ValidationError(f"{where}: record must be a JSON object")
    for key in ("id", "samples"):
        if key not in rec:
            raise ValidationError(f"{where}: missing field {key!r}")
    if not isinstance(rec["id"], str):
        raise ValidationError(f"{where}: field 'id' must be a string")
    samples = rec["samples"]
    if not isinstance(samples, list) or not all(isinstance(s, list) for s in samples):
        raise ValidationError(f"{where}: field 'samples' must be a list of coordinate lists")
    if samples and len({len(s) for s in samples}) != 1:
        raise ValidationError(f"{where}: field 'samples' has inconsistent dimensionality")
    for s in samples:
        for v in s:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ValidationError(f"{where}: field 'samples' contains non-numeric value {v!r}")
    dt = rec.get("dt")
    if dt is not None and (isinstance(dt, bool) or not isinstance(dt, (int, float))):
        raise ValidationError(f"{where}: field 'dt' must be a number")
    label = rec.get("label")
    if label is not None and (isinstance(label, bool) or not isinstance(label, int)):
        raise ValidationError(f"{where}: field 'label' must be an integer in {{1, 2, 3}}")
    try:
        return Trajectory(rec["id"], samples, dt=dt, label=label)
    except ValidationError as exc:
        raise ValidationError(f"{where}: {exc}") from None


def _check_unique(trajs, locations, source) -> None:
    first = {}
    for tr, loc in zip(trajs, locations):
        if tr.id in first:
            raise ValidationError(f"{source}: duplicate id {tr.id!r} at {first[tr.id]} and {loc}")
        first[tr.id] = loc


def read_jsonl(path) -> Dataset:
    path = Path(path)
    trajs, locs = [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            where = f"{path}:{lineno}"
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{where}: invalid JSON ({exc.msg})") from None
            trajs.append(_trajectory_from_record(rec, where))
            locs.append(f"line {lineno}")
    if not trajs:
        raise ValidationError(f"{path}: dataset is empty")
    _check_unique(trajs, locs, path)
    return Dataset(path.stem, tuple(trajs))


def _record(tr: Trajectory) -> dict:
    rec = {"id": tr.id, "samples": tr.samples.tolist()}
    if tr.dt is not None:
        rec["dt"] = tr.dt
    if tr.label is not None:
        rec["label"] = tr.label
    return rec


def write_jsonl(ds: Dataset, path) -> Path:
    with atomic_open(path) as fh:
        for tr in ds:
            fh.write(json.dumps(_record(tr)))
            fh.write("\n")
    return Path(path)


def _dim_columns(d: int) -> list[str]:
    return ["x", "y", "z"] if d == 3 else [f"x{i}" for i in range(d)]


def read_csv_dir(path) -> Dataset:
    root = Path(path)
    index = root / "index.csv"
    if not index.is_file():
        raise FileNotFoundError(f"{root}: missing index.csv")
    trajs, locs = [], []
    with open(index, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in ("id", "file") if c not in (reader.fieldnames or [])]
        if missing:
            raise ValidationError(f"{index}: header lacks columns {missing}")
        for recno, row in enumerate(reader, start=1):
            where = f"{index}:record {recno}"
            label = (row.get("label") or "").strip()
            dt = (row.get("dt") or "").strip()
            try:
                label_v = int(label) if label else None
            except ValueError:
                raise ValidationError(f"{where}: field 'label' is not an integer: {label!r}") from None
            try:
                dt_v = float(dt) if dt else None
            except ValueError:
                raise ValidationError(f"{where}: field 'dt' is not a number: {dt!r}") from None
            samples = _read_sample_csv(root / row["file"], where)
            try:
                trajs.append(Trajectory(row["id"], samples, dt=dt_v, label=label_v))
            except ValidationError as exc:
                raise ValidationError(f"{where}: {exc}") from None
            locs.append(f"record {recno}")
    if not trajs:
        raise ValidationError(f"{root}: dataset is empty")
    _check_unique(trajs, locs, index)
    return Dataset(root.name, tuple(trajs))


def _read_sample_csv(path: Path, where: str) -> np.ndarray:
    if not path.is_file():
        raise ValidationError(f"{where}: field 'file' points to missing file {path}")
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValidationError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if header != _dim_columns(len(header)):
        raise ValidationError(f"{path}: header must be x,y,z or x0..x{{d-1}}, got {','.join(header)}")
    try:
        return np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=np.float64).reshape(-1, len(header))
    except ValueError as exc:
        raise ValidationError(f"{path}: bad sample row ({exc})") from None


def write_csv_dir(ds: Dataset, path) -> Path:
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    index_rows = []
    for i, tr in enumerate(ds):
        fname = f"demo_{i:05d}.csv"
        with atomic_open(root / fname) as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(_dim_columns(tr.dim))
            for s in tr.samples.tolist():
                w.writerow([repr(v) for v in s])
        index_rows.append(
            [tr.id, fname, "" if tr.label is None else tr.label, "" if tr.dt is None else repr(tr.dt)]
        )
    with atomic_open(root / "index.csv") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(INDEX_COLUMNS)
        w.writerows(index_rows)
    return root


def load_dataset(path, format: str = "jsonl") -> Dataset:
    """Load a dataset, preserving file order."""
    fmt = format.replace("-", "_")
    if fmt not in FORMATS:
        raise ValidationError(f"unknown dataset format {format!r}; expected one of {FORMATS}")
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file or directory: {path}")
    return read_jsonl(path) if fmt == "jsonl" else read_csv_dir(path)


# -- score tables ---------------------------------------------------------


def score_table_text(table: ScoreTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCORE_COLUMNS)
    for r in table.rows:
        w.writerow([
            r.id,
            r.T,
            fmt_float(r.W),
            fmt_float(r.path_length),
            fmt_float(r.mean_jerk),
            "" if r.label is None else r.label,
        ])
    return buf.getvalue()


def write_score_table(table: ScoreTable, path, config=None) -> Path:
    """Write the score CSV in dataset order, plus the fingerprint sidecar."""
    if len(table) == 0:
        raise ValidationError("refusing to write an empty score table")
    text = score_table_text(table)
    meta = {"config_fingerprint": table.config_fingerprint}
    if config is not None:
        from dataclasses import asdict

        meta["config"] = asdict(config)
    with atomic_open(sidecar_path(path)) as fh:
        fh.write(json.dumps(meta, sort_keys=True, indent=2) + "\n")
    with atomic_open(path) as fh:
        fh.write(text)
    return Path(path)


def read_score_table(path) -> ScoreTable:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != SCORE_COLUMNS:
            raise ValidationError(f"{path}: header must be {','.join(SCORE_COLUMNS)}")
        for lineno, rec in enumerate(reader, start=2):
            try:
                rows.append(
                    ScoreRow(
                        id=rec["id"],
                        T=int(rec["T"]),
                        W=float(rec["W"]),
                        path_length=float(rec["path_length"]),
                        mean_jerk=float(rec["mean_jerk"]),
                        label=int(rec["label"]) if rec["label"] else None,
                    )
                )
            except (TypeError, ValueError) as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise ValidationError(f"{path}: score table is empty")
    fingerprint = ""
    meta = sidecar_path(path)
    if meta.is_file():
        fingerprint = json.loads(meta.read_text(encoding="utf-8")).get("config_fingerprint", "")
    return ScoreTable(tuple(rows), fingerprint)


# -- manifests ------------------------------------------------------------


def manifest_text(manifest: CurationManifest) -> str:
    doc = {
        "rho": manifest.rho,
        "threshold_W": manifest.threshold_W,
        "metric": manifest.metric,
        "config_fingerprint": manifest.config_fingerprint,
        "retained": list(manifest.retained),
        "discarded": list(manifest.discarded),
    }
    return json.dumps(doc, indent=2) + "\n"


def write_manifest(manifest: CurationManifest, path, scored_ids=None) -> Path:
    """Write the manifest JSON; with ``scored_ids``, first check it partitions them."""
    if scored_ids is not None:
        manifest.check_against(scored_ids)
    with atomic_open(path) as fh:
        fh.write(manifest_text(manifest))
    return Path(path)


def read_manifest(path) -> CurationManifest:
    path = Path(path)
    doc = json.loads(path.read_text(encoding="utf-8"))
    try:
        return CurationManifest(
            rho=float(doc["rho"]),
            metric=doc["metric"],
            threshold_W=float(doc["threshold_W"]),
            retained=tuple(doc["retained"]),
            discarded=tuple(doc["discarded"]),
            config_fingerprint=doc.get("config_fingerprint", ""),
        )
    except KeyError as exc:
        raise ValidationError(f"{path}: missing field {exc.args[0]!r}") from None


# -- spectra --------------------------------------------------------------


def write_spectrum_csv(result, path) -> Path:
    """Per-bin export of a :class:`~psdcurate.spectral.SpectralResult` (two-sided grid)."""
    d, T = result.per_dimension_power.shape
    dim_names = ["P_x", "P_y", "P_z"] if d == 3 else [f"P_x{i}" for i in range(d)]
    with atomic_open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "omega", "P_agg", *dim_names])
        for k in range(T):
            w.writerow([
                k,
                fmt_float(2.0 * np.pi * k / T),
                fmt_float(result.aggregated_power[k]),
                *(fmt_float(result.per_dimension_power[i, k]) for i in range(d)),
            ])
    return Path(path)
