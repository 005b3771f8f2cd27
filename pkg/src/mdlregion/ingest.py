"""Loading raw spatial time series, cleaning, discretising, and writing results."""
from __future__ import annotations

import csv
import hashlib
import json
import math
import warnings
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .cluster_state import SymbolMatrix, states_from_labels
from .codelength import CodelengthBreakdown
from .optimizer import MergeTrajectory, Partition, TrajectoryStep

MISSING_TOKENS = {"", "NA", "NaN", "nan", "N/A"}
SCHEMA_VERSION = 1


@dataclass(eq=False)
class RawSeriesTable:
    """Site ids, coordinates and an N x T value array.

    ``values`` is float with NaN for missing entries, or an object array of
    strings with ``None`` for missing when the data are categorical.
    """

    site_ids: list[str]
    coordinates: np.ndarray
    values: np.ndarray
    timestamps: list[str]

    def __post_init__(self):
        self.coordinates = np.asarray(self.coordinates, dtype=np.float64).reshape(-1, 2)
        n = len(self.site_ids)
        if self.coordinates.shape[0] != n or self.values.shape[0] != n:
            raise ValueError("site_ids, coordinates and values disagree on N")
        if self.values.ndim != 2 or self.values.shape[1] != len(self.timestamps):
            raise ValueError("values must be N x T with one timestamp per column")
        if len(set(self.site_ids)) != n:
            raise ValueError("site ids must be unique")

    @property
    def missing(self) -> np.ndarray:
        if self.values.dtype == object:
            return np.vectorize(lambda v: v is None, otypes=[bool])(self.values)
        return np.isnan(self.values)

    def subset(self, rows) -> "RawSeriesTable":
        rows = np.asarray(rows)
        return RawSeriesTable([self.site_ids[i] for i in rows], self.coordinates[rows],
                              self.values[rows], list(self.timestamps))


def _cell(text: str, categorical: bool):
    text = text.strip()
    if text in MISSING_TOKENS:
        return None if categorical else math.nan
    return text if categorical else float(text)


def _time_key(label: str):
    try:
        return (0, float(label), "")
    except ValueError:
        return (1, 0.0, label)


def read_wide_csv(path, categorical: bool = False) -> RawSeriesTable:
    """Header ``id,x,y,t1,...,tT``; empty or ``NA`` cells are missing."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader)]
        if header[:3] != ["id", "x", "y"]:
            raise ValueError(f"{path}: wide CSV header must start with id,x,y; got {header[:3]}")
        stamps = header[3:]
        if not stamps:
            raise ValueError(f"{path}: no time columns")
        ids, xy, vals = [], [], []
        for lineno, row in enumerate(reader, 2):
            if not row or not any(c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ValueError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            ids.append(row[0].strip())
            xy.append((float(row[1]), float(row[2])))
            vals.append([_cell(c, categorical) for c in row[3:]])
    values = np.array(vals, dtype=object if categorical else np.float64)
    if values.size == 0:
        values = values.reshape(0, len(stamps))
    return RawSeriesTable(ids, np.array(xy), values, stamps)


def read_long_csv(path, categorical: bool = False) -> RawSeriesTable:
    """Header ``id,x,y,timestamp,value``; pivoted to wide, timestamps sorted."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        need = {"id", "x", "y", "timestamp", "value"}
        fields = {f.strip() for f in reader.fieldnames or []}
        if not need <= fields:
            raise ValueError(f"{path}: long CSV needs columns {sorted(need)}; got {sorted(fields)}")
        coords: dict[str, tuple[float, float]] = {}
        cells: dict[tuple[str, str], object] = {}
        for lineno, row in enumerate(reader, 2):
            row = {k.strip(): v for k, v in row.items()}
            sid, ts = row["id"].strip(), row["timestamp"].strip()
            if (sid, ts) in cells:
                raise ValueError(f"{path}:{lineno}: duplicate observation for id={sid!r}, "
                                 f"timestamp={ts!r}")
            coords.setdefault(sid, (float(row["x"]), float(row["y"])))
            cells[(sid, ts)] = _cell(row["value"], categorical)
    ids = list(coords)
    stamps = sorted({ts for _, ts in cells}, key=_time_key)
    col = {ts: k for k, ts in enumerate(stamps)}
    if categorical:
        values = np.full((len(ids), len(stamps)), None, dtype=object)
    else:
        values = np.full((len(ids), len(stamps)), np.nan)
    row_of = {sid: k for k, sid in enumerate(ids)}
    for (sid, ts), v in cells.items():
        values[row_of[sid], col[ts]] = v
    return RawSeriesTable(ids, np.array([coords[s] for s in ids]), values, stamps)


def read_table(path, categorical: bool = False) -> RawSeriesTable:
    """Dispatch on the header: long format if it has a ``timestamp`` column."""
    with open(path, newline="") as fh:
        header = [h.strip() for h in next(csv.reader(fh))]
    if "timestamp" in header and "value" in header:
        return read_long_csv(path, categorical)
    return read_wide_csv(path, categorical)


def filter_completeness(table: RawSeriesTable, min_fraction: float = 0.8
                        ) -> tuple[RawSeriesTable, list[str]]:
    """Drop sites observed at fewer than ``min_fraction`` of the time steps."""
    if not 0 < min_fraction <= 1:
        raise ValueError(f"min_fraction must lie in (0, 1], got {min_fraction}")
    T = len(table.timestamps)
    observed = (~table.missing).sum(axis=1)
    # integer comparison avoids 0.8 * T rounding at the boundary
    keep = observed * 10**9 >= round(min_fraction * 10**9) * T
    removed = [sid for sid, k in zip(table.site_ids, keep) if not k]
    if not keep.any():
        raise ValueError(f"no site reaches {min_fraction:.0%} completeness")
    return table.subset(np.flatnonzero(keep)), removed


def interpolate_missing(table: RawSeriesTable) -> RawSeriesTable:
    """Linear interpolation on the time index; edge gaps take the nearest observation."""
    vals = np.asarray(table.values, dtype=np.float64)
    out = vals.copy()
    idx = np.arange(vals.shape[1])
    for i, row in enumerate(vals):
        ok = ~np.isnan(row)
        if not ok.any():
            raise ValueError(f"site {table.site_ids[i]!r} has no observations to interpolate from")
        if not ok.all():
            out[i] = np.interp(idx, idx[ok], row[ok])
    return replace(table, values=out)


def discretize_uniform(table: RawSeriesTable, S: int) -> SymbolMatrix:
    """Uniform binning on the global value range, giving symbols 1..S."""
    if S < 2:
        raise ValueError("need at least 2 bins")
    x = np.asarray(table.values, dtype=np.float64)
    if np.isnan(x).any():
        raise ValueError("table has missing values; interpolate first")
    lo, hi = float(x.min()), float(x.max())
    span = hi - lo
    if span == 0:
        warnings.warn("constant table: every entry maps to symbol 1", RuntimeWarning, stacklevel=2)
    eps = 1e-9 * span if span > 0 else 1e-9
    z = np.rint((x - lo) / (span + eps) * (S - 1)).astype(np.int64) + 1
    return SymbolMatrix(z, S)


def ordinal_encode(table: RawSeriesTable, category_order: Sequence[str]) -> RawSeriesTable:
    """Map category labels to 1..S floats (NaN where missing)."""
    code = {str(c): k for k, c in enumerate(category_order, 1)}
    if len(code) != len(category_order):
        raise ValueError("category order lists a category twice")
    out = np.full(table.values.shape, np.nan)
    for (i, t), v in np.ndenumerate(table.values):
        if v is None or (isinstance(v, float) and math.isnan(v)):
            continue
        key = str(v).strip()
        if key not in code:
            raise ValueError(f"unknown category {key!r} at site {table.site_ids[i]!r}")
        out[i, t] = code[key]
    return replace(table, values=out)


def passthrough_categorical(table: RawSeriesTable, category_order: Sequence[str]) -> SymbolMatrix:
    """Ordinal mapping of already-categorical data to symbols 1..S."""
    if len(category_order) < 2:
        raise ValueError("need at least 2 categories (S >= 2)")
    enc = ordinal_encode(table, category_order)
    if np.isnan(enc.values).any():
        raise ValueError("table has missing values; encode, interpolate, then round_ordinal")
    return SymbolMatrix(enc.values.astype(np.int64), len(category_order))


def round_ordinal(table: RawSeriesTable, S: int) -> SymbolMatrix:
    """Round interpolated ordinal codes back onto 1..S."""
    x = np.asarray(table.values, dtype=np.float64)
    return SymbolMatrix(np.clip(np.rint(x), 1, S).astype(np.int64), S)


def read_categories(path) -> list[str]:
    with open(path) as fh:
        return [line.strip() for line in fh if line.strip()]


def symbol_table(table: RawSeriesTable, S: int | None = None) -> SymbolMatrix:
    """Use already-integer symbols directly; S defaults to the largest symbol."""
    x = np.asarray(table.values, dtype=np.float64)
    if np.isnan(x).any() or np.any(x != np.rint(x)):
        raise ValueError("values are not complete integer symbols; use --bins or --categorical")
    z = x.astype(np.int64)
    return SymbolMatrix(z, S if S is not None else max(2, int(z.max())))


# --- results ----------------------------------------------------------------

def data_hash(z: SymbolMatrix) -> str:
    h = hashlib.sha256()
    h.update(f"{z.n_series}x{z.series_length}/S={z.alphabet_size};".encode())
    h.update(np.ascontiguousarray(z.values, dtype="<i8").tobytes())
    return h.hexdigest()


def cluster_summaries(z: SymbolMatrix, partition: Partition) -> list[dict]:
    """Size, driver, mismatch rate and encoding cost for each cluster."""
    out = []
    for k, st in enumerate(states_from_labels(z, partition.labels), 1):
        rows = z.values[list(st.members)]
        mismatch = float((rows != st.driver[None, :]).mean())
        out.append({
            "cluster": k,
            "size": st.size,
            "members": list(st.members),
            "driver": st.driver.tolist(),
            "mismatch_rate": mismatch,
            "mean_symbol": float(rows.mean()),
            "var_symbol": float(rows.var()),
            "contingency_bits": st.cached_cost,
            "contingency_bits_per_series": st.cached_cost / st.size,
        })
    return out


def serialize_result(partition: Partition, trajectory: MergeTrajectory | None, z: SymbolMatrix,
                     meta: dict | None = None, site_ids: Sequence[str] | None = None,
                     baseline: CodelengthBreakdown | None = None) -> dict:
    """Build the JSON-ready result document."""
    ids = list(site_ids) if site_ids is not None else [str(i) for i in range(len(partition.labels))]
    doc = {
        "schema_version": SCHEMA_VERSION,
        "meta": {**(meta or {}), "data_hash": data_hash(z), "n_series": z.n_series,
                 "series_length": z.series_length, "alphabet_size": z.alphabet_size},
        "n_clusters": partition.n_clusters,
        "labels": [{"id": sid, "cluster": int(c)} for sid, c in zip(ids, partition.labels)],
        "drivers": partition.drivers.tolist(),
        "clusters": cluster_summaries(z, partition),
        "breakdown": partition.breakdown.as_dict(),
        "eta": None,
        "trajectory": None,
    }
    if baseline is not None:
        doc["baseline_bits"] = baseline.total_bits
        doc["eta"] = partition.breakdown.total_bits / baseline.total_bits
    if trajectory is not None:
        doc["trajectory"] = {
            "best_step_index": trajectory.best_step_index,
            "steps": [{"D": s.n_clusters,
                       "merged": list(s.merged) if s.merged is not None else None,
                       "total_bits": s.total_bits} for s in trajectory.steps],
        }
    return doc


def write_result(doc: dict, path) -> None:
    path = Path(path)
    try:
        path.write_text(json.dumps(doc, indent=1))
    except OSError as exc:
        raise OSError(f"could not write result to {path}: {exc}") from exc


def load_result(path) -> tuple[Partition, MergeTrajectory | None, dict]:
    """Inverse of :func:`write_result`: the partition, trajectory (if any) and document."""
    doc = json.loads(Path(path).read_text())
    labels = np.array([r["cluster"] for r in doc["labels"]], dtype=np.int64)
    part = Partition(labels, np.array(doc["drivers"], dtype=np.int64),
                     CodelengthBreakdown(**doc["breakdown"]))
    traj = None
    if doc.get("trajectory"):
        t = doc["trajectory"]
        traj = MergeTrajectory(len(labels), [
            TrajectoryStep(s["D"], tuple(s["merged"]) if s["merged"] is not None else None,
                           s["total_bits"]) for s in t["steps"]], t["best_step_index"])
    return part, traj, doc


def write_labels_csv(site_ids: Sequence[str], labels, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "cluster"])
        for sid, c in zip(site_ids, labels):
            w.writerow([sid, int(c)])


def read_labels_csv(path) -> dict[str, int]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"id", "cluster"} <= set(reader.fieldnames):
            raise ValueError(f"{path}: labels CSV needs header id,cluster")
        return {row["id"].strip(): int(row["cluster"]) for row in reader}


def write_trajectory_csv(trajectory: MergeTrajectory, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["D", "merged_a", "merged_b", "total_bits"])
        for s in trajectory.steps:
            a, b = s.merged if s.merged is not None else ("", "")
            w.writerow([s.n_clusters, a, b, repr(s.total_bits)])


def geojson_points(site_ids: Sequence[str], coordinates: np.ndarray, labels) -> dict:
    return {
        "type": "FeatureCollection",
        "features": [
            {"type": "Feature",
             "geometry": {"type": "Point", "coordinates": [float(x), float(y)]},
             "properties": {"id": sid, "cluster": int(c)}}
            for sid, (x, y), c in zip(site_ids, coordinates, labels)
        ],
    }


def write_wide_csv(path, site_ids: Sequence[str], coordinates: np.ndarray, values: np.ndarray,
                   timestamps: Sequence[str] | None = None) -> None:
    T = values.shape[1]
    stamps = list(timestamps) if timestamps is not None else [f"t{k + 1}" for k in range(T)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "x", "y", *stamps])
        for sid, (x, y), row in zip(site_ids, coordinates, values):
            w.writerow([sid, repr(float(x)), repr(float(y)), *row.tolist()])
