"""Resource-counter traces, epoch labels and the line-oriented trace format.

A trace file is UTF-8 text. The first line is a JSON manifest object::

    {"machine_id": "vm-03", "created_at": "2026-01-01T00:00:00+00:00",
     "sample_interval": 0.5, "feature_names": ["cpu.user", ...],
     "ransomware_start": 1200, "app_events": [[310, "firefox-install"]]}

Every following line is a JSON array holding the N counter values of one
sample. Rows can be appended while a collector is running.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

PathLike = Union[str, Path]

BENIGN = 0
INFECTED = 1

_REQUIRED_KEYS = ("machine_id", "created_at", "sample_interval", "feature_names")


class TraceFormatError(ValueError):
    """Raised when a trace file cannot be parsed.

    ``lineno`` is the 1-based line of the offending record (1 is the manifest).
    """

    def __init__(self, message: str, lineno: Optional[int] = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


def _now_iso() -> str:
    return datetime.now(timezone.utc).replace(microsecond=0).isoformat()


@dataclass(frozen=True)
class Trace:
    """One machine run: an M x N matrix of counter snapshots plus metadata.

    Rows are time samples ``X[k]``; columns follow ``feature_names``.
    ``ransomware_start`` is the 0-based sample index at which ransomware
    begins, or None for traces without an infection. ``gaps`` lists sample
    indices after which the collector lost a row.
    """

    machine_id: str
    feature_names: tuple[str, ...]
    samples: np.ndarray
    sample_interval: float = 0.5
    created_at: str = field(default_factory=_now_iso)
    ransomware_start: Optional[int] = None
    app_events: tuple[tuple[int, str], ...] = ()
    gaps: tuple[int, ...] = ()

    def __post_init__(self):
        samples = np.array(self.samples, dtype=np.float64)
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "feature_names", tuple(str(f) for f in self.feature_names))
        object.__setattr__(
            self, "app_events", tuple((int(k), str(name)) for k, name in self.app_events)
        )
        object.__setattr__(self, "gaps", tuple(int(g) for g in self.gaps))
        if self.ransomware_start is not None:
            object.__setattr__(self, "ransomware_start", int(self.ransomware_start))
        self.validate()

    @property
    def n_samples(self) -> int:
        return self.samples.shape[0]

    @property
    def n_features(self) -> int:
        return self.samples.shape[1]

    @property
    def is_positive(self) -> bool:
        return self.ransomware_start is not None

    def validate(self) -> None:
        s = self.samples
        if s.ndim != 2:
            raise ValueError(f"samples must be 2-D, got shape {s.shape}")
        m, n = s.shape
        if m < 2 or n < 2:
            raise ValueError(f"trace needs at least 2 samples and 2 features, got {m}x{n}")
        if len(self.feature_names) != n:
            raise ValueError(
                f"{len(self.feature_names)} feature names for {n} columns"
            )
        if not np.all(np.isfinite(s)):
            raise ValueError("samples contain non-finite values")
        if np.any(s < 0):
            raise ValueError("samples contain negative counter values")
        if not (self.sample_interval > 0 and math.isfinite(self.sample_interval)):
            raise ValueError(f"sample_interval must be positive, got {self.sample_interval}")
        if self.ransomware_start is not None and not 0 <= self.ransomware_start < m:
            raise ValueError(
                f"ransomware_start {self.ransomware_start} outside [0, {m})"
            )

    def manifest(self) -> dict:
        out = {
            "machine_id": self.machine_id,
            "created_at": self.created_at,
            "sample_interval": self.sample_interval,
            "feature_names": list(self.feature_names),
        }
        if self.ransomware_start is not None:
            out["ransomware_start"] = self.ransomware_start
        out["app_events"] = [[k, name] for k, name in self.app_events]
        if self.gaps:
            out["gaps"] = list(self.gaps)
        return out

    def __eq__(self, other):
        if not isinstance(other, Trace):
            return NotImplemented
        return self.manifest() == other.manifest() and np.array_equal(
            self.samples, other.samples
        )

    __hash__ = None


def label_trace(trace: Trace) -> np.ndarray:
    """Epoch labels: 0 before the ransomware start, 1 from it onwards."""
    labels = np.zeros(trace.n_samples, dtype=np.int8)
    if trace.ransomware_start is not None:
        labels[trace.ransomware_start:] = INFECTED
    return labels


def format_row(row: Iterable[float]) -> str:
    # repr() of a float round-trips exactly; json.dumps uses it
    return json.dumps([float(v) for v in row])


def format_manifest(manifest: dict) -> str:
    return json.dumps(manifest, sort_keys=False)


def write_trace(trace: Trace, destination: PathLike) -> None:
    path = Path(destination)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_manifest(trace.manifest()) + "\n")
        for row in trace.samples:
            fh.write(format_row(row) + "\n")


def parse_manifest(line: str, lineno: int = 1) -> dict:
    try:
        manifest = json.loads(line)
    except json.JSONDecodeError as exc:
        raise TraceFormatError(f"manifest is not valid JSON ({exc.msg})", lineno) from None
    if not isinstance(manifest, dict):
        raise TraceFormatError("manifest must be a JSON object", lineno)
    for key in _REQUIRED_KEYS:
        if key not in manifest:
            raise TraceFormatError(f"manifest missing '{key}'", lineno)
    names = manifest["feature_names"]
    if not isinstance(names, list) or not all(isinstance(n, str) for n in names):
        raise TraceFormatError("'feature_names' must be a list of strings", lineno)
    return manifest


def parse_row(line: str, n_features: int, lineno: int) -> list[float]:
    try:
        row = json.loads(line)
    except json.JSONDecodeError as exc:
        raise TraceFormatError(f"row is not valid JSON ({exc.msg})", lineno) from None
    if not isinstance(row, list):
        raise TraceFormatError("row must be a JSON array", lineno)
    if len(row) != n_features:
        raise TraceFormatError(
            f"row has {len(row)} values, manifest declares {n_features} features", lineno
        )
    values = []
    for v in row:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise TraceFormatError(f"non-numeric value {v!r}", lineno)
        if not math.isfinite(v):
            raise TraceFormatError(f"non-finite value {v!r}", lineno)
        values.append(float(v))
    return values


def read_trace(source: PathLike) -> Trace:
    path = Path(source)
    with path.open("r", encoding="utf-8") as fh:
        first = fh.readline()
        if not first.strip():
            raise TraceFormatError("empty trace file", 1)
        manifest = parse_manifest(first, 1)
        n = len(manifest["feature_names"])
        rows = []
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            rows.append(parse_row(line, n, lineno))
    samples = np.array(rows, dtype=np.float64).reshape(len(rows), n)
    try:
        return Trace(
            machine_id=str(manifest["machine_id"]),
            created_at=str(manifest["created_at"]),
            sample_interval=float(manifest["sample_interval"]),
            feature_names=tuple(manifest["feature_names"]),
            samples=samples,
            ransomware_start=manifest.get("ransomware_start"),
            app_events=tuple(tuple(e) for e in manifest.get("app_events", [])),
            gaps=tuple(manifest.get("gaps", [])),
        )
    except (ValueError, TypeError) as exc:
        raise TraceFormatError(f"invalid trace: {exc}") from None


def export_csv(trace: Trace, destination: PathLike) -> None:
    """Write the samples as CSV with a feature-name header, for plotting tools."""
    with Path(destination).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(trace.feature_names)
        for row in trace.samples:
            writer.writerow([repr(float(v)) for v in row])


def read_traces(paths: Sequence[PathLike]) -> list[Trace]:
    return [read_trace(p) for p in sorted(Path(p) for p in paths)]
