"""Run records: JSON with a checksum, plus one CSV side file per series.

Floats are written with ``repr`` so a load reproduces them bit for bit.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__

SCHEMA_VERSION = 1


@dataclass
class RunRecord:
    """Outcome of one experiment or checker sweep.

    ``series`` maps a series name to a column table {column: list of values};
    all columns in a series have the same length.
    """

    name: str
    config: dict
    seed: int | None = None
    series: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    version: str = __version__
    wall_time: float = 0.0

    def add_series(self, name: str, /, **columns):
        lengths = {len(v) for v in columns.values()}
        if len(lengths) > 1:
            raise ValueError(f"series {name!r} has ragged columns")
        self.series[name] = {k: [_plain(x) for x in v] for k, v in columns.items()}

    def column(self, series: str, col: str) -> list:
        return self.series[series][col]

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "name": self.name,
            "version": self.version,
            "seed": self.seed,
            "config": _plain(self.config),
            "summary": _plain(self.summary),
            "series": self.series,
            "wall_time": self.wall_time,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        return cls(
            name=d["name"],
            config=d["config"],
            seed=d.get("seed"),
            series=d.get("series", {}),
            summary=d.get("summary", {}),
            version=d.get("version", "unknown"),
            wall_time=d.get("wall_time", 0.0),
        )

    def series_equal(self, other: "RunRecord") -> bool:
        """Bit-for-bit comparison of all series (NaN equals NaN)."""
        if self.series.keys() != other.series.keys():
            return False
        for name, cols in self.series.items():
            ocols = other.series[name]
            if cols.keys() != ocols.keys():
                return False
            for c, vals in cols.items():
                if len(vals) != len(ocols[c]):
                    return False
                for a, b in zip(vals, ocols[c]):
                    if isinstance(a, float) and isinstance(b, float):
                        if not (a == b or (math.isnan(a) and math.isnan(b))):
                            return False
                        if a == 0.0 and math.copysign(1, a) != math.copysign(1, b):
                            return False
                    elif a != b:
                        return False
        return True


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def _plain(x):
    """Convert numpy scalars / arrays / tuples into JSON-native values."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if hasattr(x, "tolist"):
        return _plain(x.tolist())
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, float):
        return x
    try:
        return float(x)
    except (TypeError, ValueError):
        return str(x)


def _checksum(body: dict) -> str:
    blob = json.dumps(body, sort_keys=True, allow_nan=True).encode()
    return hashlib.sha256(blob).hexdigest()


def series_csv_path(path: Path, series: str) -> Path:
    return path.with_name(f"{path.stem}.{series}.csv")


def write_series_csv(path: Path, columns: dict):
    names = list(columns)
    rows = zip(*(columns[n] for n in names))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])


def persist(record: RunRecord, path, csv_files: bool = True) -> Path:
    """Write ``record`` as JSON (with checksum) and, optionally, per-series CSVs."""
    path = Path(path)
    if path.suffix != ".json":
        path = path / f"{record.name}.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    body = record.to_dict()
    doc = {"checksum": _checksum(body), **body}
    path.write_text(json.dumps(doc, indent=1, allow_nan=True))
    if csv_files:
        for name, cols in record.series.items():
            write_series_csv(series_csv_path(path, name), cols)
    return path


def load(path) -> RunRecord:
    """Read a record, rejecting truncated or edited files; warn on a version mismatch."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed run record {path}: {exc}") from None
    if not isinstance(doc, dict) or "checksum" not in doc:
        raise ValueError(f"malformed run record {path}: no checksum")
    stored = doc.pop("checksum")
    if _checksum(doc) != stored:
        raise ValueError(f"run record {path} failed its checksum")
    if doc.get("version") != __version__:
        warnings.warn(
            f"record written by version {doc.get('version')}, reading with {__version__}",
            UserWarning,
            stacklevel=2,
        )
    return RunRecord.from_dict(doc)
