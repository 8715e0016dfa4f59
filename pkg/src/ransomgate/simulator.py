"""Synthetic workload traces from a time-shared process-rate model.

Every active process ``i`` contributes its per-resource rate ``r_i`` scaled
by its share of the machine, ``f_i = 1 / n(k)`` with ``n(k)`` processes
running at sample ``k``. Counters accumulate those increments. An idle
baseline process is always running, so ``n(k) >= 1``.

Process profiles below are synthetic. Their magnitudes are free parameters
chosen to look plausible, not measurements.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .trace import Trace, write_trace

log = logging.getLogger(__name__)

IDLE = "idle-baseline"
APPLICATION = "application"
BACKGROUND = "background"
RANSOMWARE = "ransomware"

H0, H1A, H1B = "h0", "h1a", "h1b"
KINDS = (H0, H1A, H1B)

DEFAULT_FEATURES = (
    "cpu.user",
    "cpu.system",
    "mem.used",
    "sda1.write.count",
    "sda1.read.count",
    "net.tx",
    "net.rx",
    "sda1.write.kb",
    "sda1.read.kb",
    "proc.forks",
    "ctx.switches",
    "page.faults",
    "fs.opens",
    "fs.renames",
    "irq.count",
    "load.index",
)

# Increments per second at full time share, one column per DEFAULT_FEATURES entry.
_BASE_RATES = {
    "idle":            [2, 1, 5, 1, 0.5, 2, 3, 4, 2, 0.2, 50, 20, 1, 0.05, 100, 0.5],
    "firefox-install": [40, 15, 50, 120, 20, 10, 400, 2000, 200, 2, 400, 300, 80, 5, 300, 2],
    "gcc-install":     [60, 20, 60, 200, 40, 8, 300, 3000, 300, 10, 600, 500, 150, 8, 300, 3],
    "tar-gzip":        [90, 10, 30, 60, 150, 0.5, 0.5, 800, 2500, 0.5, 300, 200, 100, 0.2, 250, 1.5],
    "ransomware":      [85, 30, 40, 250, 250, 0.5, 0.5, 3000, 3000, 0.5, 500, 400, 200, 200, 350, 2],
    # short-lived user and housekeeping activity
    "browser":         [30, 8, 40, 10, 5, 20, 300, 150, 60, 1, 300, 250, 30, 1, 200, 1.5],
    "file-indexer":    [25, 10, 20, 5, 200, 0.5, 0.5, 50, 2500, 0.5, 150, 100, 300, 0.1, 150, 1],
    "backup-sync":     [30, 15, 25, 220, 200, 0.5, 0.5, 2500, 2500, 1, 250, 150, 180, 3, 200, 1.5],
}

# (min, max) seconds for the ransomware to reach full encryption speed
_RANSOM_RAMP = (1.0, 6.0)

# (min, max) run length in seconds
_DURATIONS = {
    "firefox-install": (90.0, 240.0),
    "gcc-install": (120.0, 300.0),
    "tar-gzip": (60.0, 240.0),
    "ransomware": (300.0, 900.0),
    "browser": (20.0, 120.0),
    "file-indexer": (20.0, 90.0),
    "backup-sync": (20.0, 90.0),
}

APPLICATIONS = ("firefox-install", "gcc-install", "tar-gzip")
BACKGROUND_TASKS = ("browser", "file-indexer", "backup-sync")


@dataclass(frozen=True)
class ProcessProfile:
    name: str
    rates: np.ndarray
    duration: Optional[float] = None  # seconds; None runs to the end of the trace
    ramp: float = 0.0  # seconds to climb linearly from zero to full rate

    def __post_init__(self):
        rates = np.asarray(self.rates, dtype=np.float64)
        if rates.ndim != 1 or not np.all(np.isfinite(rates)) or np.any(rates < 0):
            raise ValueError(f"{self.name}: rates must be a finite non-negative vector")
        object.__setattr__(self, "rates", rates)


@dataclass(frozen=True)
class ScheduledEvent:
    start: int
    profile: ProcessProfile
    kind: str


@dataclass(frozen=True)
class EventSchedule:
    events: tuple[ScheduledEvent, ...]
    total_samples: int
    buffer: int = 0

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        limit = self.total_samples - self.buffer
        for ev in self.events:
            if not 0 <= ev.start < limit:
                raise ValueError(f"event {ev.profile.name} starts at {ev.start}, outside [0, {limit})")
        if sum(ev.kind == RANSOMWARE for ev in self.events) > 1:
            raise ValueError("at most one ransomware event per schedule")

    @property
    def ransomware_start(self) -> Optional[int]:
        for ev in self.events:
            if ev.kind == RANSOMWARE:
                return ev.start
        return None


@dataclass(frozen=True)
class SimConfig:
    n_features: int = 16
    sample_interval: float = 0.5
    noise_std: float = 0.1
    duration_min: float = 30.0
    buffer_min: float = 5.0
    profile_jitter: float = 0.25  # lognormal sigma of a per-trace scale on each process
    background_per_min: float = 0.5  # mean starts per minute of short background tasks
    seed: int = 0

    def __post_init__(self):
        if self.n_features < 2:
            raise ValueError("n_features must be >= 2")
        if self.noise_std < 0:
            raise ValueError("noise_std must be >= 0")
        if self.sample_interval <= 0:
            raise ValueError("sample_interval must be positive")

    @property
    def total_samples(self) -> int:
        return int(round(self.duration_min * 60.0 / self.sample_interval))

    @property
    def buffer_samples(self) -> int:
        return int(round(self.buffer_min * 60.0 / self.sample_interval))

    def samples(self, seconds: float) -> int:
        return int(round(seconds / self.sample_interval))


def feature_names(n_features: int) -> tuple[str, ...]:
    if n_features <= len(DEFAULT_FEATURES):
        return DEFAULT_FEATURES[:n_features]
    extra = tuple(f"index.{i}" for i in range(n_features - len(DEFAULT_FEATURES)))
    return DEFAULT_FEATURES + extra


def profile_rates(name: str, n_features: int) -> np.ndarray:
    """Rate vector of a built-in profile, extended with synthetic index columns."""
    base = np.asarray(_BASE_RATES[name], dtype=np.float64)
    if n_features <= base.size:
        return base[:n_features].copy()
    # extra columns: fixed pseudo-random rates per profile, stable across runs
    key = list(_BASE_RATES).index(name)
    rng = np.random.default_rng([7919, key])
    extra = rng.uniform(1.0, 50.0, size=n_features - base.size)
    return np.concatenate([base, extra])


def builtin_profile(name: str, n_features: int, duration: Optional[float] = None) -> ProcessProfile:
    return ProcessProfile(name, profile_rates(name, n_features), duration)


def expected_ratio_jump(n: int, A: float, B: float, r_a: float, r_b: float) -> float:
    """Ratio of two resource rates after a new process joins ``n`` equal-share ones.

    ``A`` and ``B`` are the current per-process average rates of resources a
    and b; the newcomer uses them at ``r_a`` and ``r_b``.
    """
    den = n * B + r_b
    if den == 0:
        raise ZeroDivisionError("n * B + r_b is zero")
    return (n * A + r_a) / den


def active_rates(schedule: EventSchedule, n_features: int, sample_interval: float) -> np.ndarray:
    """Noise-free per-sample rate matrix implied by a schedule (M x N)."""
    M = schedule.total_samples
    total = np.zeros((M, n_features))
    count = np.zeros(M)
    for ev in schedule.events:
        if ev.profile.rates.size != n_features:
            raise ValueError(f"{ev.profile.name}: rate vector has {ev.profile.rates.size} entries")
        if ev.profile.duration is None:
            stop = M
        else:
            stop = min(M, ev.start + max(1, int(round(ev.profile.duration / sample_interval))))
        scale = np.ones(stop - ev.start)
        if ev.profile.ramp > 0:
            t = (np.arange(stop - ev.start) + 1) * sample_interval
            scale = np.minimum(1.0, t / ev.profile.ramp)
        total[ev.start:stop] += scale[:, np.newaxis] * ev.profile.rates
        count[ev.start:stop] += 1
    if np.any(count == 0):
        raise ValueError(f"no process active at sample {int(np.flatnonzero(count == 0)[0])}")
    return total / count[:, np.newaxis]


def simulate_trace(
    config: SimConfig,
    schedule: EventSchedule,
    machine_id: str = "sim-0",
    created_at: str = "1970-01-01T00:00:00+00:00",
) -> Trace:
    """Integrate the time-shared rate model into cumulative counters.

    The increment recorded between samples ``k`` and ``k+1`` uses the set of
    processes active at ``k``, so a process starting at ``k0`` first shows up
    in transformed row ``k0``.
    """
    n = config.n_features
    dt = config.sample_interval
    rates = active_rates(schedule, n, dt)
    inc = dt * rates[:-1]
    if config.noise_std > 0:
        rng = np.random.default_rng([config.seed, 1])
        noise = rng.normal(0.0, config.noise_std, size=inc.shape)
        inc = inc * (1.0 + np.maximum(noise, -1.0))
    X = np.zeros((schedule.total_samples, n))
    X[1:] = np.cumsum(inc, axis=0)
    apps = tuple((ev.start, ev.profile.name) for ev in schedule.events if ev.kind == APPLICATION)
    return Trace(
        machine_id=machine_id,
        created_at=created_at,
        sample_interval=dt,
        feature_names=feature_names(n),
        samples=X,
        ransomware_start=schedule.ransomware_start,
        app_events=tuple(sorted(apps)),
    )


def _jittered(name, config, rng, duration=None, ramp=0.0):
    rates = profile_rates(name, config.n_features)
    if config.profile_jitter > 0 and name != "idle":
        rates = rates * float(np.exp(rng.normal(0.0, config.profile_jitter)))
    return ProcessProfile(name, rates, duration, ramp)


def _ransomware(config, rng, duration):
    return _jittered("ransomware", config, rng, duration, float(rng.uniform(*_RANSOM_RAMP)))


def _background(config, rng, usable):
    """Poisson arrivals of short background tasks over the whole trace."""
    n = int(rng.poisson(config.background_per_min * usable * config.sample_interval / 60.0))
    out = []
    for start in np.sort(rng.integers(0, usable, size=n)):
        name = BACKGROUND_TASKS[int(rng.integers(len(BACKGROUND_TASKS)))]
        lo, hi = _DURATIONS[name]
        prof = _jittered(name, config, rng, float(rng.uniform(lo, hi)))
        out.append(ScheduledEvent(int(start), prof, BACKGROUND))
    return out


def make_schedule(kind: str, config: SimConfig, rng_seed: int) -> EventSchedule:
    """Draw a random event schedule for one experiment kind.

    ``h0``: idle, then firefox/gcc installs and a tar-gzip compression started
    in parallel. ``h1a``: the same plus a ransomware process inside that
    window. ``h1b``: idle, an application period, then ransomware, then the
    shutdown buffer; phase starts are strictly ordered.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown schedule kind {kind!r}; expected one of {KINDS}")
    rng = np.random.default_rng(rng_seed)
    M = config.total_samples
    buf = config.buffer_samples
    usable = M - buf
    s = config.samples

    def duration(name):
        lo, hi = _DURATIONS[name]
        return float(rng.uniform(lo, hi))

    events = [ScheduledEvent(0, _jittered("idle", config, rng), IDLE)]
    events += _background(config, rng, usable)

    if kind in (H0, H1A):
        min_needed = s(60) + s(60)
        if usable < min_needed:
            raise ValueError(f"{M} samples cannot hold idle, activity and a {buf}-sample buffer")
        idle_end = int(rng.integers(s(30), max(s(30) + 1, min(s(600), usable - s(60)))))
        window = min(s(300), usable - idle_end)
        for name in APPLICATIONS:
            start = idle_end + int(rng.integers(0, window))
            events.append(ScheduledEvent(start, _jittered(name, config, rng, duration(name)), APPLICATION))
        if kind == H1A:
            start = idle_end + int(rng.integers(0, window))
            prof = _ransomware(config, rng, duration("ransomware"))
            events.append(ScheduledEvent(start, prof, RANSOMWARE))
    else:
        if usable < s(30) + s(120) + s(60):
            raise ValueError(f"{M} samples cannot hold idle, application and ransomware phases")
        idle_end = int(rng.integers(s(30), max(s(30) + 1, min(s(300), usable - s(180)))))
        app_len = int(rng.integers(s(120), max(s(120) + 1, min(s(600), usable - idle_end - s(60)))))
        ransom_start = idle_end + app_len
        for name in APPLICATIONS:
            start = idle_end + int(rng.integers(0, app_len // 2))
            # sequential: applications finish before the ransomware phase
            dur = min(duration(name), (ransom_start - start) * config.sample_interval)
            events.append(ScheduledEvent(start, _jittered(name, config, rng, dur), APPLICATION))
        prof = _ransomware(config, rng, duration("ransomware"))
        events.append(ScheduledEvent(ransom_start, prof, RANSOMWARE))

    return EventSchedule(tuple(events), M, buf)


def generate_corpus(
    kind: str,
    count: int,
    instances: int,
    config: SimConfig = SimConfig(),
    seed: Optional[int] = None,
) -> list[Trace]:
    """``count`` experiments x ``instances`` machines, each with its own derived seed."""
    if count < 1 or instances < 1:
        raise ValueError("count and instances must be >= 1")
    seed = config.seed if seed is None else seed
    root = np.random.SeedSequence([seed, KINDS.index(kind)])
    children = root.spawn(count * instances)
    traces = []
    for e in range(count):
        for i in range(instances):
            child = children[e * instances + i]
            trace_seed = int(child.generate_state(1)[0])
            sched = make_schedule(kind, config, trace_seed)
            cfg = replace(config, seed=trace_seed)
            mid = f"{kind}-e{e:03d}-i{i}"
            traces.append(simulate_trace(cfg, sched, machine_id=mid))
    return traces


def write_corpus(
    traces: Sequence[Trace], directory: Union[str, Path], kind: str, seed: int
) -> Path:
    """Write traces plus a ``manifest.json`` listing files, kinds and seeds."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for t in traces:
        name = f"{t.machine_id}.trace"
        write_trace(t, out / name)
        entries.append({"file": name, "kind": kind, "ransomware_start": t.ransomware_start})
    manifest = {"kind": kind, "seed": seed, "traces": entries}
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=1) + "\n", encoding="utf-8")
    return path
