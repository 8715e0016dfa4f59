import json

import numpy as np
import pytest

from ransomgate.collector import FakeSource, ReplaySource, SourceError, collect, replay_check
from ransomgate.trace import read_trace, write_trace


class FakeClock:
    def __init__(self, step=0.0):
        self.now = 100.0
        self.step = step  # time consumed by each clock read

    def __call__(self):
        self.now += self.step
        return self.now

    def sleep(self, seconds):
        self.now += seconds


def test_linear_source_cadence(tmp_path):
    clock = FakeClock()
    path = tmp_path / "live.trace"
    summary = collect(FakeSource([2.0, 5.0]), 0.5, 2.0, path, machine_id="box",
                      clock=clock, sleep=clock.sleep)
    assert 4 <= summary.rows <= 5
    assert summary.missed_deadlines == 0
    assert np.all(np.diff(summary.timestamps) > 0)
    t = read_trace(path)
    assert t.n_samples == summary.rows
    inc = np.diff(t.samples, axis=0)
    assert np.all(inc == inc[0])


def test_read_failure_leaves_gap(tmp_path):
    clock = FakeClock()
    path = tmp_path / "gap.trace"
    summary = collect(FakeSource([1.0, 1.0], fail_on=[2]), 0.5, 2.0, path, machine_id="box",
                      clock=clock, sleep=clock.sleep)
    assert summary.gaps == [2]
    manifest = json.loads(path.read_text().splitlines()[0])
    assert manifest["gaps"] == [2]
    t = read_trace(path)
    assert t.n_samples == summary.rows
    assert t.gaps == (2,)


def test_missed_deadlines_are_skipped_not_backfilled(tmp_path):
    clock = FakeClock(step=0.7)
    summary = collect(FakeSource([1.0, 1.0]), 0.5, 5.0, tmp_path / "slow.trace",
                      machine_id="box", clock=clock, sleep=clock.sleep)
    assert summary.missed_deadlines > 0
    assert summary.rows + summary.missed_deadlines <= 11


def test_replay_is_byte_identical(tmp_path, small_trace):
    original = tmp_path / "orig.trace"
    write_trace(small_trace, original)
    clock = FakeClock()
    copy = tmp_path / "copy.trace"
    collect(ReplaySource(read_trace(original)), 0.5, 10.0, copy, machine_id="box",
            clock=clock, sleep=clock.sleep, max_rows=small_trace.n_samples)
    assert replay_check(original, copy)
    body = lambda p: p.read_bytes().split(b"\n", 1)[1]  # noqa: E731
    assert body(original) == body(copy)


def test_collect_preconditions(tmp_path):
    with pytest.raises(ValueError):
        collect(FakeSource([1.0, 1.0]), 0.0, 1.0, tmp_path / "x.trace")
    clock = FakeClock()
    with pytest.raises(SourceError):
        collect(FakeSource([1.0, 1.0], fail_on=range(10)), 0.5, 2.0, tmp_path / "y.trace",
                clock=clock, sleep=clock.sleep)
