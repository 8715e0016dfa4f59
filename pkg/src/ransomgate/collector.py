"""Lightweight live monitor that samples resource counters into a trace file."""

from __future__ import annotations

import logging
import os
import socket
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Protocol, Sequence, Union

import numpy as np

from .trace import Trace, _now_iso, format_manifest, format_row

log = logging.getLogger(__name__)


class MetricsSource(Protocol):
    feature_names: tuple[str, ...]

    def read_counters(self) -> Sequence[float]: ...


class SourceError(RuntimeError):
    pass


class FakeSource:
    """Linear counters: sample ``k`` reads ``k * rates``. Optionally fails on given reads."""

    def __init__(self, rates: Sequence[float], fail_on: Sequence[int] = (), names=None):
        self.rates = np.asarray(rates, dtype=np.float64)
        self.feature_names = tuple(names or (f"fake.{i}" for i in range(self.rates.size)))
        self.fail_on = set(fail_on)
        self._reads = 0
        self._k = 0

    def read_counters(self):
        read = self._reads
        self._reads += 1
        if read in self.fail_on:
            raise SourceError(f"simulated read failure #{read}")
        row = self._k * self.rates
        self._k += 1
        return row


class ReplaySource:
    """Replays the samples of a stored trace, one row per read."""

    def __init__(self, trace: Trace):
        self.trace = trace
        self.feature_names = trace.feature_names
        self._k = 0

    def __len__(self):
        return self.trace.n_samples

    def read_counters(self):
        if self._k >= self.trace.n_samples:
            raise SourceError("replay exhausted")
        row = self.trace.samples[self._k]
        self._k += 1
        return row


class PlatformSource:
    """Best-effort OS counters via psutil. The feature set depends on the platform."""

    def __init__(self):
        import psutil

        self._psutil = psutil
        self.feature_names = tuple(name for name, _ in self._snapshot())

    def _snapshot(self):
        ps = self._psutil
        cpu = ps.cpu_times()
        mem = ps.virtual_memory()
        out = [
            ("cpu.user", cpu.user),
            ("cpu.system", cpu.system),
            ("cpu.idle", cpu.idle),
            ("mem.used", float(mem.used)),
            ("mem.percent", float(mem.percent)),
        ]
        disk = ps.disk_io_counters()
        if disk is not None:
            out += [
                ("disk.read.count", float(disk.read_count)),
                ("disk.write.count", float(disk.write_count)),
                ("disk.read.bytes", float(disk.read_bytes)),
                ("disk.write.bytes", float(disk.write_bytes)),
            ]
        net = ps.net_io_counters()
        if net is not None:
            out += [
                ("net.tx.bytes", float(net.bytes_sent)),
                ("net.rx.bytes", float(net.bytes_recv)),
                ("net.tx.packets", float(net.packets_sent)),
                ("net.rx.packets", float(net.packets_recv)),
            ]
        stats = ps.cpu_stats()
        out += [("ctx.switches", float(stats.ctx_switches)), ("irq.count", float(stats.interrupts))]
        return out

    def read_counters(self):
        snap = self._snapshot()
        if tuple(n for n, _ in snap) != self.feature_names:
            raise SourceError("platform feature set changed during the session")
        return [max(0.0, float(v)) for _, v in snap]


@dataclass
class CollectionSummary:
    path: Path
    rows: int
    timestamps: list[float] = field(default_factory=list)
    gaps: list[int] = field(default_factory=list)  # row index after which a read failed
    missed_deadlines: int = 0


def collect(
    source: MetricsSource,
    interval: float,
    duration: float,
    sink: Union[str, Path],
    machine_id: Optional[str] = None,
    created_at: Optional[str] = None,
    clock: Callable[[], float] = time.monotonic,
    sleep: Callable[[float], None] = time.sleep,
    max_rows: Optional[int] = None,
) -> CollectionSummary:
    """Sample ``source`` every ``interval`` seconds for ``duration`` seconds.

    Rows are appended to ``sink`` as they arrive, each flushed whole. Ticks
    that are already past when the loop wakes up are counted as missed and
    skipped. A failed read leaves a gap, recorded in the manifest when the
    file is finalized.
    """
    if interval <= 0:
        raise ValueError(f"interval must be positive, got {interval}")
    names = tuple(source.feature_names)
    path = Path(sink)
    manifest = {
        "machine_id": machine_id or socket.gethostname(),
        "created_at": created_at or _now_iso(),
        "sample_interval": float(interval),
        "feature_names": list(names),
        "app_events": [],
    }
    summary = CollectionSummary(path=path, rows=0)
    last_tick = int(duration / interval + 1e-9)
    start = clock()
    tick = 0
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_manifest(manifest) + "\n")
        while True:
            if tick > last_tick:
                break
            deadline = start + tick * interval
            if max_rows is not None and summary.rows >= max_rows:
                break
            now = clock()
            if now < deadline:
                sleep(deadline - now)
            elif now - deadline >= interval:
                # drop the ticks already past and sample the current one
                skipped = min(int((now - deadline) // interval), last_tick + 1 - tick)
                summary.missed_deadlines += skipped
                log.warning("missed %d sampling deadline(s)", skipped)
                tick += skipped
                if tick > last_tick:
                    break
            try:
                row = np.asarray(source.read_counters(), dtype=np.float64)
                if row.shape != (len(names),) or not np.all(np.isfinite(row)):
                    raise SourceError(f"bad snapshot of shape {row.shape}")
            except Exception as exc:  # noqa: BLE001 - any source failure becomes a gap
                log.error("read failed at tick %d: %s", tick, exc)
                summary.gaps.append(summary.rows)
                tick += 1
                continue
            fh.write(format_row(row) + "\n")
            fh.flush()
            summary.rows += 1
            summary.timestamps.append(clock())
            tick += 1

    if summary.rows < 2:
        raise SourceError(f"only {summary.rows} rows collected; a trace needs at least 2")
    if summary.gaps:
        _rewrite_manifest(path, dict(manifest, gaps=summary.gaps))
    return summary


def _rewrite_manifest(path: Path, manifest: dict) -> None:
    lines = path.read_text(encoding="utf-8").splitlines(keepends=True)
    lines[0] = format_manifest(manifest) + "\n"
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text("".join(lines), encoding="utf-8")
    os.replace(tmp, path)


def replay_check(original: Union[str, Path], replayed: Union[str, Path]) -> bool:
    """True if two trace files share an identical body (everything after the manifest)."""
    a = Path(original).read_text(encoding="utf-8").splitlines()[1:]
    b = Path(replayed).read_text(encoding="utf-8").splitlines()[1:]
    return a == b

