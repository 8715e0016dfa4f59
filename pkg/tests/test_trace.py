import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ransomgate.trace import Trace, TraceFormatError, export_csv, label_trace, read_trace, write_trace


def make(samples, start=None, events=()):
    samples = np.asarray(samples, dtype=float)
    return Trace(
        machine_id="m",
        feature_names=tuple(f"f{j}" for j in range(samples.shape[1])),
        samples=samples,
        ransomware_start=start,
        app_events=events,
        created_at="2024-01-01T00:00:00+00:00",
    )


@pytest.mark.parametrize(
    "M, start, expected",
    [
        (5, 2, [0, 0, 1, 1, 1]),
        (3, None, [0, 0, 0]),
        (4, 0, [1, 1, 1, 1]),
    ],
)
def test_label_trace(M, start, expected):
    t = make(np.zeros((M, 2)), start)
    assert label_trace(t).tolist() == expected


@pytest.mark.parametrize(
    "samples, start",
    [
        (np.zeros((1, 2)), None),
        (np.zeros((3, 1)), None),
        ([[0, 0], [np.nan, 1]], None),
        ([[0, 0], [-1, 1]], None),
        (np.zeros((3, 2)), 3),
    ],
)
def test_invalid_traces_rejected(samples, start):
    with pytest.raises(ValueError):
        make(samples, start)


def test_round_trip(tmp_path, small_trace):
    path = tmp_path / "t.trace"
    write_trace(small_trace, path)
    assert read_trace(path) == small_trace


def test_round_trip_keeps_metadata(tmp_path):
    t = make([[0, 0], [1.1, 2.2], [3.3, 4.4]], start=1, events=[(0, "tar-gzip")])
    path = tmp_path / "t.trace"
    write_trace(t, path)
    back = read_trace(path)
    assert back.ransomware_start == 1
    assert back.app_events == ((0, "tar-gzip"),)
    assert back.samples.tobytes() == t.samples.tobytes()


def test_arity_error_names_line(tmp_path, small_trace):
    path = tmp_path / "t.trace"
    write_trace(small_trace, path)
    lines = path.read_text().splitlines()
    lines[2] = "[1.0, 2.0, 3.0]"
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(TraceFormatError) as err:
        read_trace(path)
    assert err.value.lineno == 3
    assert "3 values" in str(err.value)


def test_missing_feature_names(tmp_path):
    path = tmp_path / "t.trace"
    manifest = {"machine_id": "m", "created_at": "x", "sample_interval": 0.5}
    path.write_text(json.dumps(manifest) + "\n[1, 2]\n[3, 4]\n")
    with pytest.raises(TraceFormatError, match="feature_names"):
        read_trace(path)


def test_non_finite_value(tmp_path, small_trace):
    path = tmp_path / "t.trace"
    write_trace(small_trace, path)
    with path.open("a") as fh:
        fh.write("[1.0, NaN]\n")
    with pytest.raises(TraceFormatError, match="line 5"):
        read_trace(path)


def test_csv_export(tmp_path, small_trace):
    path = tmp_path / "t.csv"
    export_csv(small_trace, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "a,b"
    assert lines[2] == "4.0,1.0"


counters = arrays(
    np.float64,
    st.tuples(st.integers(2, 12), st.integers(2, 6)),
    elements=st.floats(0, 1e12, allow_nan=False, allow_infinity=False),
)


@settings(max_examples=60, deadline=None)
@given(samples=counters, data=st.data())
def test_round_trip_property(tmp_path_factory, samples, data):
    M = samples.shape[0]
    start = data.draw(st.one_of(st.none(), st.integers(0, M - 1)))
    t = make(samples, start)
    path = tmp_path_factory.mktemp("rt") / "t.trace"
    write_trace(t, path)
    back = read_trace(path)
    assert back == t
    labels = label_trace(back)
    assert len(labels) == M
    assert np.all(np.diff(labels) >= 0)
