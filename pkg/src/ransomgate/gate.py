"""Decision-gate sampling of transformed states into labeled training sets."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .trace import BENIGN, INFECTED, Trace, label_trace
from .transform import TransformParams, pooled_extremes, ratio_of_rates_transform

log = logging.getLogger(__name__)

INFECTED_GATE = "infected-gate"
BENIGN_RANDOM = "benign-random"
APP_GATE = "app-gate"


@dataclass(frozen=True)
class DecisionGate:
    """Sampling and smoothing triple <alpha, beta, delta> plus benign budget.

    ``alpha`` is the wait (in transformed states) after an onset, ``beta`` the
    number of states captured, ``delta`` the smoothing factor. The benign
    budget defaults to ``beta``.
    """

    alpha: int
    beta: int
    delta: float
    benign_samples: Optional[int] = None

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if self.beta < 1:
            raise ValueError(f"beta must be >= 1, got {self.beta}")
        if not 0.0 <= self.delta <= 1.0:
            raise ValueError(f"delta must lie in [0, 1], got {self.delta}")
        if self.benign_samples is None:
            object.__setattr__(self, "benign_samples", self.beta)
        if self.benign_samples < 1:
            raise ValueError(f"benign_samples must be >= 1, got {self.benign_samples}")


@dataclass
class LabeledStateSet:
    """Transformed states with labels and where each one came from.

    ``provenance`` holds ``(trace_id, index, kind)`` per row. The transform
    constants used to build the rows travel with the set so a classifier
    trained on it can reproduce them online.
    """

    features: np.ndarray
    labels: np.ndarray
    provenance: list[tuple[str, int, str]]
    feature_names: tuple[str, ...] = ()
    norm_min: float = 0.0
    norm_max: float = 1.0
    params: TransformParams = field(default_factory=TransformParams)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int8)
        if not (len(self.features) == len(self.labels) == len(self.provenance)):
            raise ValueError("features, labels and provenance differ in length")

    def __len__(self):
        return len(self.labels)

    def subset(self, idx) -> "LabeledStateSet":
        idx = np.asarray(idx, dtype=int)
        return LabeledStateSet(
            features=self.features[idx],
            labels=self.labels[idx],
            provenance=[self.provenance[i] for i in idx],
            feature_names=self.feature_names,
            norm_min=self.norm_min,
            norm_max=self.norm_max,
            params=self.params,
        )

    def to_csv(self, destination: Union[str, Path]) -> None:
        names = list(self.feature_names) or [f"c{j}" for j in range(self.features.shape[1])]
        with Path(destination).open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["label", "trace_id", "index", "kind"] + names)
            for row, lab, (tid, k, kind) in zip(self.features, self.labels, self.provenance):
                writer.writerow([int(lab), tid, k, kind] + [repr(float(v)) for v in row])


@dataclass(frozen=True)
class GateWindow:
    indices: np.ndarray
    truncated: bool


def gate_indices(s: int, alpha: int, beta: int, M: int) -> GateWindow:
    """Indices ``s+alpha .. s+alpha+beta-1`` clipped to the transformed rows ``[0, M-1)``.

    ``M`` is the raw sample count, so valid transformed indices stop at M-2.
    """
    start = s + alpha
    n_rows = M - 1
    if start >= n_rows:
        raise ValueError(
            f"gate start {start} lies beyond the last transformed state {n_rows - 1}"
        )
    stop = start + beta
    truncated = stop > n_rows
    if truncated:
        log.warning("gate at %d truncated to %d states", start, n_rows - start)
    return GateWindow(np.arange(start, min(stop, n_rows)), truncated)


def sample_benign(labels: np.ndarray, b: int, rng_seed: int) -> np.ndarray:
    """Draw ``b`` benign indices uniformly without replacement (all if fewer exist).

    Indices address transformed rows, so the last raw sample is never drawn.
    """
    labels = np.asarray(labels)
    pool = np.flatnonzero(labels[: max(len(labels) - 1, 0)] == BENIGN)
    if pool.size == 0:
        raise ValueError("benign epoch is empty")
    if b >= pool.size:
        return pool.copy()
    rng = np.random.default_rng(rng_seed)
    return np.sort(rng.choice(pool, size=b, replace=False))


def trace_id(trace: Trace, ordinal: int) -> str:
    return trace.machine_id or f"trace-{ordinal}"


def _trace_rows(trace, ordinal, gate, seed, balance):
    """Emit (indices, labels, kinds) for one transformed trace."""
    M = trace.n_samples
    labels = label_trace(trace)
    s = trace.ransomware_start
    idx, lab, kind = [], [], []

    if s is not None:
        if s + gate.alpha < M - 1:
            win = gate_indices(s, gate.alpha, gate.beta, M)
            idx += list(win.indices)
            lab += [INFECTED] * len(win.indices)
            kind += [INFECTED_GATE] * len(win.indices)
        else:
            log.warning("%s: infected gate falls beyond the trace end", trace_id(trace, ordinal))

    if np.any(labels[: M - 1] == BENIGN):
        for k in sample_benign(labels, gate.benign_samples, seed):
            idx.append(int(k))
            lab.append(BENIGN)
            kind.append(BENIGN_RANDOM)

    for event_k, _name in trace.app_events:
        if event_k + gate.alpha >= M - 1:
            continue
        for k in gate_indices(event_k, gate.alpha, gate.beta, M).indices:
            # an application gate that runs into the infected epoch is not benign
            if s is not None and k >= s:
                continue
            idx.append(int(k))
            lab.append(BENIGN)
            kind.append(APP_GATE)

    if balance:
        n_inf = lab.count(INFECTED)
        benign_pos = [i for i, l in enumerate(lab) if l == BENIGN]
        if len(benign_pos) > n_inf:
            rng = np.random.default_rng([seed, 1])
            keep = set(rng.choice(benign_pos, size=n_inf, replace=False).tolist())
            sel = [i for i, l in enumerate(lab) if l == INFECTED or i in keep]
            idx = [idx[i] for i in sel]
            lab = [lab[i] for i in sel]
            kind = [kind[i] for i in sel]
    return idx, lab, kind


def build_training_set(
    traces: Sequence[Trace],
    gate: DecisionGate,
    rng_seed: int = 0,
    epsilon: float = 1e-6,
    norm: Optional[tuple[float, float]] = None,
    balance: bool = False,
    transformed: Optional[Sequence[np.ndarray]] = None,
) -> LabeledStateSet:
    """Sample gate, benign and application-startup states from every trace.

    All traces are transformed with shared normalization extremes (pooled over
    ``traces`` unless ``norm`` is given) so the rows live in the same feature
    space a streaming detector will see. With ``balance`` each trace keeps at
    most as many benign rows as it has infected rows. ``transformed`` may
    carry precomputed C matrices, which must match ``norm`` and ``gate.delta``.
    """
    if not traces:
        raise ValueError("no traces given")
    names = traces[0].feature_names
    for t in traces:
        if t.feature_names != names:
            raise ValueError(f"trace {t.machine_id} has a different feature schema")
    params = TransformParams(delta=gate.delta, epsilon=epsilon)
    if norm is None:
        norm = pooled_extremes(traces)
    if transformed is None:
        transformed = [ratio_of_rates_transform(t, params, norm=norm).C for t in traces]

    feats, labels, prov = [], [], []
    for ordinal, (t, C) in enumerate(zip(traces, transformed)):
        idx, lab, kind = _trace_rows(t, ordinal, gate, rng_seed ^ ordinal, balance)
        tid = trace_id(t, ordinal)
        for k, l, kd in zip(idx, lab, kind):
            feats.append(C[k])
            labels.append(l)
            prov.append((tid, int(k), kd))

    n = traces[0].n_features
    return LabeledStateSet(
        features=np.array(feats).reshape(len(feats), n),
        labels=np.array(labels, dtype=np.int8),
        provenance=prov,
        feature_names=names,
        norm_min=norm[0],
        norm_max=norm[1],
        params=params,
    )
