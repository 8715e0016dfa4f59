"""Ratio-of-rates transform.

Maps an M x N counter matrix ``X`` to an (M-1) x N matrix ``C`` of
relative rates:

1. first difference ``dX`` (per-sample increments),
2. global affine normalization of ``dX`` into the unit interval -> ``A``,
3. exponential smoothing with factor ``delta`` -> ``B``,
4. cyclic neighbour ratios ``C[:, j] = B[:, j] / B[:, (j + 1) % N]``.

Step 4 cancels any positive rescaling of a row, so the output tracks how
resources are used relative to each other rather than absolute load.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .trace import Trace

DEFAULT_EPSILON = 1e-6


@dataclass(frozen=True)
class TransformParams:
    delta: float = 0.0
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        if not 0.0 <= self.delta <= 1.0:
            raise ValueError(f"delta must lie in [0, 1], got {self.delta}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")


@dataclass(frozen=True)
class RateRatioMatrix:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    norm_min: float
    norm_max: float

    def to_csv(self, destination: Union[str, Path], which: str = "C") -> None:
        """Dump one of the A/B/C matrices as ``row, col0, col1, ...`` CSV."""
        mat = {"A": self.A, "B": self.B, "C": self.C}[which]
        with Path(destination).open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["row"] + [f"c{j}" for j in range(mat.shape[1])])
            for k, row in enumerate(mat):
                writer.writerow([k] + [repr(float(v)) for v in row])


def first_difference(samples: np.ndarray) -> np.ndarray:
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError(f"need a 2-D matrix with at least 2 rows, got shape {x.shape}")
    return x[1:] - x[:-1]


def normalize_with(dX: np.ndarray, m: float, mx: float) -> np.ndarray:
    """Affine-map ``dX`` with given extremes, clamping into [0, 1].

    When ``mx == m`` every entry maps to 0.5.
    """
    dX = np.asarray(dX, dtype=np.float64)
    if mx == m:
        return np.full(dX.shape, 0.5)
    return np.clip((dX - m) / (mx - m), 0.0, 1.0)


def affine_normalize(dX: np.ndarray) -> tuple[np.ndarray, float, float]:
    """Normalize by the global min and max of ``dX``.

    Returns ``(A, m, Mx)``. The minimum is subtracted so that A lands in the
    unit interval even when increments are negative.
    """
    dX = np.asarray(dX, dtype=np.float64)
    if dX.size == 0:
        raise ValueError("empty increment matrix")
    if not np.all(np.isfinite(dX)):
        raise ValueError("increment matrix contains non-finite values")
    m = float(dX.min())
    mx = float(dX.max())
    return normalize_with(dX, m, mx), m, mx


def exp_smooth(A: np.ndarray, delta: float) -> np.ndarray:
    """``B[0] = A[0]``; ``B[k] = delta * B[k-1] + (1 - delta) * A[k]``."""
    if not 0.0 <= delta <= 1.0:
        raise ValueError(f"delta must lie in [0, 1], got {delta}")
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] < 1:
        raise ValueError(f"need a 2-D matrix with at least 1 row, got shape {A.shape}")
    B = A.copy()
    if delta == 0.0:
        return B
    keep = 1.0 - delta
    for k in range(1, B.shape[0]):
        B[k] = delta * B[k - 1] + keep * A[k]
    return B


def rate_ratios(B: np.ndarray, epsilon: float = DEFAULT_EPSILON) -> np.ndarray:
    """Cyclic neighbour ratios of the floored matrix ``max(B, epsilon)``."""
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    Bp = np.maximum(np.asarray(B, dtype=np.float64), epsilon)
    return Bp / np.roll(Bp, -1, axis=-1)


def ratio_of_rates_transform(
    trace: Union[Trace, np.ndarray],
    params: TransformParams = TransformParams(),
    norm: Optional[tuple[float, float]] = None,
) -> RateRatioMatrix:
    """Run the full transform on a trace (or a raw sample matrix).

    ``norm`` freezes the normalization extremes ``(m, Mx)``; values outside
    them are clamped. Without it the trace's own extremes are used.
    """
    samples = trace.samples if isinstance(trace, Trace) else trace
    dX = first_difference(samples)
    if norm is None:
        A, m, mx = affine_normalize(dX)
    else:
        m, mx = float(norm[0]), float(norm[1])
        A = normalize_with(dX, m, mx)
    B = exp_smooth(A, params.delta)
    C = rate_ratios(B, params.epsilon)
    return RateRatioMatrix(A=A, B=B, C=C, norm_min=m, norm_max=mx)


def pooled_extremes(traces) -> tuple[float, float]:
    """Global (min, max) increment over a collection of traces."""
    lo, hi = np.inf, -np.inf
    for t in traces:
        dX = first_difference(t.samples)
        lo = min(lo, float(dX.min()))
        hi = max(hi, float(dX.max()))
    if not np.isfinite(lo):
        raise ValueError("no traces given")
    return lo, hi


@dataclass
class StreamState:
    """Per-stream state of the online transform.

    Normalization extremes and smoothing parameters are frozen, usually
    taken from a trained model.
    """

    norm_min: float
    norm_max: float
    params: TransformParams
    n_features: int
    prev_sample: Optional[np.ndarray] = None
    prev_B: Optional[np.ndarray] = None
    index: int = 0


def streaming_transform_step(
    state: StreamState, sample
) -> tuple[StreamState, Optional[np.ndarray]]:
    """Consume one raw sample; return the next C row, or None for the first sample."""
    x = np.asarray(sample, dtype=np.float64)
    if x.shape != (state.n_features,):
        raise ValueError(f"sample has shape {x.shape}, expected ({state.n_features},)")
    if state.prev_sample is None:
        state.prev_sample = x.copy()
        return state, None
    a = normalize_with(x - state.prev_sample, state.norm_min, state.norm_max)
    if state.prev_B is None:
        b = a
    elif state.params.delta == 0.0:
        b = a
    else:
        b = state.params.delta * state.prev_B + (1.0 - state.params.delta) * a
    state.prev_sample = x.copy()
    state.prev_B = b
    state.index += 1
    return state, rate_ratios(b[np.newaxis, :], state.params.epsilon)[0]


def stream_rows(samples, norm: tuple[float, float], params: TransformParams) -> np.ndarray:
    """Run :func:`streaming_transform_step` over a whole sample matrix."""
    samples = np.asarray(samples, dtype=np.float64)
    state = StreamState(norm[0], norm[1], params, samples.shape[1])
    rows = []
    for x in samples:
        state, row = streaming_transform_step(state, x)
        if row is not None:
            rows.append(row)
    return np.array(rows).reshape(len(rows), samples.shape[1])
