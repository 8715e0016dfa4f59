"""Cross-fold accuracy, decision-gate sweeps and online threshold detection."""

from __future__ import annotations

import csv
import json
import logging
from collections import Counter
from dataclasses import asdict, dataclass, field
from itertools import product
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .boost import DEFAULT_ROUNDS, StumpEnsemble, train_adaboost
from .gate import DecisionGate, LabeledStateSet, build_training_set
from .trace import INFECTED, Trace
from .transform import TransformParams, pooled_extremes, ratio_of_rates_transform, stream_rows

log = logging.getLogger(__name__)

PathLike = Union[str, Path]


class SchemaMismatchError(ValueError):
    pass


# -- cross-fold validation ---------------------------------------------------


def fold_partition(n: int, k: int, rng_seed: int) -> list[np.ndarray]:
    """Shuffle ``range(n)`` and cut it into ``k`` folds whose sizes differ by at most one."""
    if k < 2:
        raise ValueError(f"need at least 2 folds, got {k}")
    if n < k:
        raise ValueError(f"{n} rows cannot fill {k} folds")
    perm = np.random.default_rng(rng_seed).permutation(n)
    return np.array_split(perm, k)


def cross_fold_accuracy(
    data: LabeledStateSet, k: int = 10, rng_seed: int = 0, rounds: int = DEFAULT_ROUNDS
) -> float:
    """Mean held-out accuracy over ``k`` folds, classifying at vote fraction > 0.5."""
    y = data.labels == INFECTED
    if y.all() or not y.any():
        raise ValueError("cross-validation needs both benign and infected rows")
    accs = []
    for j, test in enumerate(fold_partition(len(data), k, rng_seed)):
        train = np.setdiff1d(np.arange(len(data)), test, assume_unique=True)
        model = train_adaboost(data.subset(train), rounds=rounds, rng_seed=rng_seed)
        pred = model.scores(data.features[test]) > 0.5
        accs.append(float(np.mean(pred == y[test])))
    return float(np.mean(accs))


# -- parameter sweep ---------------------------------------------------------


@dataclass
class SweepGrid:
    alphas: list[int]
    betas: list[int]
    deltas: list[float]
    folds: int = 10
    cells: dict = field(default_factory=dict)  # (alpha, beta, delta) -> mean accuracy

    def accuracy(self, alpha, beta, delta) -> Optional[float]:
        return self.cells.get((alpha, beta, delta))

    def best(self) -> tuple[tuple[int, int, float], float]:
        key = max(self.cells, key=lambda c: (self.cells[c], -c[0], -c[1], -c[2]))
        return key, self.cells[key]

    def to_csv(self, destination: PathLike) -> None:
        with Path(destination).open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["alpha", "beta", "delta", "mean_accuracy"])
            for a, b, d in product(self.alphas, self.betas, self.deltas):
                acc = self.cells.get((a, b, d))
                writer.writerow([a, b, repr(float(d)), "" if acc is None else repr(acc)])


def sweep_gates(
    traces: Sequence[Trace],
    alphas: Sequence[int],
    betas: Sequence[int],
    deltas: Sequence[float],
    folds: int = 10,
    rng_seed: int = 0,
    rounds: int = DEFAULT_ROUNDS,
    balance: bool = False,
    epsilon: float = 1e-6,
) -> SweepGrid:
    """Cross-fold accuracy for every <alpha, beta, delta> in the grid.

    Cells whose gate captures no infected state in any trace are left out of
    ``cells`` rather than scored as zero.
    """
    if not alphas or not betas or not deltas:
        raise ValueError("alphas, betas and deltas must all be non-empty")
    if not traces:
        raise ValueError("no traces given")
    if not any(t.is_positive for t in traces):
        raise ValueError("the sweep needs at least one trace with a ransomware start")
    grid = SweepGrid(list(alphas), list(betas), [float(d) for d in deltas], folds)
    norm = pooled_extremes(traces)
    for d in grid.deltas:
        params = TransformParams(delta=d, epsilon=epsilon)
        Cs = [ratio_of_rates_transform(t, params, norm=norm).C for t in traces]
        for a, b in product(grid.alphas, grid.betas):
            gate = DecisionGate(a, b, d)
            data = build_training_set(
                traces, gate, rng_seed, epsilon=epsilon, norm=norm, balance=balance, transformed=Cs
            )
            n_inf = int(np.sum(data.labels == INFECTED))
            if n_inf == 0 or n_inf == len(data) or len(data) < folds:
                log.info("cell <%d, %d, %g> has no usable gate data", a, b, d)
                continue
            grid.cells[(a, b, d)] = cross_fold_accuracy(data, folds, rng_seed, rounds)
            log.debug("cell <%d, %d, %g>: %.4f", a, b, d, grid.cells[(a, b, d)])
    return grid


# -- online detection --------------------------------------------------------


@dataclass
class DetectionReport:
    trace_id: str
    tau: float
    fired: bool
    first_fire_index: Optional[int] = None
    delay_samples: Optional[int] = None
    delay_seconds: Optional[float] = None
    ransomware_start: Optional[int] = None
    per_state_scores: Optional[list[float]] = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1)


def check_schema(model: StumpEnsemble, trace: Trace) -> None:
    if tuple(trace.feature_names) == tuple(model.feature_names):
        return
    missing = [f for f in model.feature_names if f not in trace.feature_names]
    if missing:
        raise SchemaMismatchError(
            f"trace {trace.machine_id} is missing feature '{missing[0]}'"
            + (f" (and {len(missing) - 1} more)" if len(missing) > 1 else "")
        )
    raise SchemaMismatchError(
        f"trace {trace.machine_id} orders its features differently from the model"
    )


def score_trace(model: StumpEnsemble, trace: Trace) -> np.ndarray:
    """Ransomware probability of every transformed state, computed online."""
    check_schema(model, trace)
    rows = stream_rows(trace.samples, model.norm, model.params)
    return model.scores(rows)


def report_from_scores(
    trace: Trace, scores: np.ndarray, tau: float, keep_scores: bool = False
) -> DetectionReport:
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau must lie in [0, 1], got {tau}")
    hits = np.flatnonzero(scores > tau)
    report = DetectionReport(
        trace_id=trace.machine_id,
        tau=float(tau),
        fired=hits.size > 0,
        ransomware_start=trace.ransomware_start,
    )
    if hits.size:
        first = int(hits[0])
        report.first_fire_index = first
        s = trace.ransomware_start
        if s is not None and first >= s:
            report.delay_samples = first - s
            report.delay_seconds = report.delay_samples * trace.sample_interval
    if keep_scores:
        report.per_state_scores = [float(v) for v in scores]
    return report


def detect_online(
    model: StumpEnsemble, trace: Trace, tau: float, keep_scores: bool = False
) -> DetectionReport:
    """Stream a trace through the frozen transform; fire at the first score > tau."""
    return report_from_scores(trace, score_trace(model, trace), tau, keep_scores)


@dataclass
class ThresholdCurves:
    taus: list[float]
    positive_rate: list[float]
    negative_rate: list[float]
    positive_reports: dict = field(default_factory=dict)  # tau -> list[DetectionReport]
    negative_reports: dict = field(default_factory=dict)

    def to_csv(self, destination: PathLike) -> None:
        with Path(destination).open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["tau", "positive_rate", "negative_rate"])
            for t, p, n in zip(self.taus, self.positive_rate, self.negative_rate):
                writer.writerow([repr(t), repr(p), repr(n)])


def threshold_curves(
    model: StumpEnsemble,
    positives: Sequence[Trace],
    negatives: Sequence[Trace],
    taus: Sequence[float],
) -> ThresholdCurves:
    """Fraction of each population with at least one detection, per tau."""
    if not positives or not negatives:
        raise ValueError("both populations must be non-empty")
    taus = [float(t) for t in taus]
    if taus != sorted(taus):
        raise ValueError("taus must be sorted ascending")
    pos_scores = [(t, score_trace(model, t)) for t in positives]
    neg_scores = [(t, score_trace(model, t)) for t in negatives]
    curves = ThresholdCurves(taus, [], [])
    for tau in taus:
        prep = [report_from_scores(t, s, tau) for t, s in pos_scores]
        nrep = [report_from_scores(t, s, tau) for t, s in neg_scores]
        curves.positive_reports[tau] = prep
        curves.negative_reports[tau] = nrep
        curves.positive_rate.append(sum(r.fired for r in prep) / len(prep))
        curves.negative_rate.append(sum(r.fired for r in nrep) / len(nrep))
    return curves


@dataclass
class DelayHistogram:
    counts: dict  # delay in samples -> number of traces
    misses: int
    early: int = 0  # fired before the ransomware started

    @property
    def mode(self) -> Optional[int]:
        if not self.counts:
            return None
        return max(sorted(self.counts), key=lambda d: self.counts[d])

    def to_csv(self, destination: PathLike) -> None:
        with Path(destination).open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["delay_samples", "count"])
            for d in sorted(self.counts):
                writer.writerow([d, self.counts[d]])


def delay_histogram(reports: Sequence[DetectionReport]) -> DelayHistogram:
    counts = Counter(r.delay_samples for r in reports if r.fired and r.delay_samples is not None)
    misses = sum(not r.fired for r in reports)
    early = sum(r.fired and r.delay_samples is None for r in reports)
    return DelayHistogram(dict(sorted(counts.items())), misses, early)


def choose_tau(curves: ThresholdCurves, max_negative_rate: float = 0.0) -> Optional[float]:
    """Smallest tau whose false-detection rate stays within ``max_negative_rate``
    while keeping the best positive rate among such taus."""
    best = None
    for tau, p, n in zip(curves.taus, curves.positive_rate, curves.negative_rate):
        if n <= max_negative_rate and (best is None or p > best[1]):
            best = (tau, p)
    return None if best is None else best[0]
