"""Discrete AdaBoost over one-feature threshold stumps.

The ensemble turns a transformed state into a ransomware probability: the
weighted fraction of stumps that vote "infected".
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

from .gate import LabeledStateSet
from .trace import INFECTED
from .transform import TransformParams

MODEL_FORMAT = "ransomgate-stump-ensemble"
MODEL_VERSION = 1

ERR_FLOOR = 1e-10
DEFAULT_ROUNDS = 50

LE = "le"  # x <= threshold votes infected
GT = "gt"  # x > threshold votes infected


class ModelFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Stump:
    feature_index: int
    threshold: float
    polarity: str
    weight: float

    def votes(self, X: np.ndarray) -> np.ndarray:
        """Boolean "infected" vote for each row of ``X``."""
        col = X[..., self.feature_index]
        return col <= self.threshold if self.polarity == LE else col > self.threshold


@dataclass
class StumpEnsemble:
    stumps: list[Stump]
    norm_min: float
    norm_max: float
    delta: float
    epsilon: float
    feature_names: tuple[str, ...]
    rounds: int = DEFAULT_ROUNDS
    training_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.stumps:
            raise ValueError("an ensemble needs at least one stump")
        self.feature_names = tuple(self.feature_names)
        self._feat = np.array([s.feature_index for s in self.stumps], dtype=int)
        self._thr = np.array([s.threshold for s in self.stumps], dtype=np.float64)
        self._le = np.array([s.polarity == LE for s in self.stumps])
        self._w = np.array([s.weight for s in self.stumps], dtype=np.float64)
        self._wsum = float(self._w.sum())

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    @property
    def params(self) -> TransformParams:
        return TransformParams(delta=self.delta, epsilon=self.epsilon)

    @property
    def norm(self) -> tuple[float, float]:
        return self.norm_min, self.norm_max

    def scores(self, X: np.ndarray) -> np.ndarray:
        """Vectorized :func:`predict_score` over the rows of ``X``."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.n_features:
            raise ValueError(f"rows have {X.shape[1]} features, model expects {self.n_features}")
        vals = X[:, self._feat]
        votes = np.where(self._le, vals <= self._thr, vals > self._thr)
        if self._wsum == 0.0:
            # only a zero-weight placeholder stump: no evidence either way
            return np.full(X.shape[0], 0.5)
        return (votes @ self._w) / self._wsum


def best_stump(X: np.ndarray, y: np.ndarray, w: np.ndarray) -> tuple[int, float, str, float]:
    """Minimum weighted-error stump over every feature, threshold and polarity.

    ``y`` is boolean (True = infected), ``w`` sums to one. Candidate
    thresholds are the midpoints between consecutive distinct values of a
    feature plus ``-inf`` (the constant stump). Ties go to the lowest
    feature index, then the lowest threshold, then ``le`` before ``gt``.
    Returns ``(feature, threshold, polarity, error)``.
    """
    best = None
    pos_total = float(w[y].sum())
    neg_total = float(w[~y].sum())
    for j in range(X.shape[1]):
        order = np.argsort(X[:, j], kind="stable")
        v = X[order, j]
        wp = np.where(y[order], w[order], 0.0)
        wn = np.where(y[order], 0.0, w[order])
        left_pos = np.concatenate(([0.0], np.cumsum(wp)))
        left_neg = np.concatenate(([0.0], np.cumsum(wn)))
        # split position i puts the first i sorted values on the <= side
        split = np.concatenate(([True], v[1:] > v[:-1], [False]))
        cand = np.flatnonzero(split[:-1])
        err_le = left_neg[cand] + (pos_total - left_pos[cand])
        err_gt = left_pos[cand] + (neg_total - left_neg[cand])
        errs = np.column_stack([err_le, err_gt]).ravel()
        flat = int(np.argmin(errs))
        err = float(errs[flat])
        if best is None or err < best[3]:
            i = cand[flat // 2]
            if i == 0:
                thr = -math.inf
            else:
                thr = float((v[i - 1] + v[i]) / 2.0)
                if thr >= v[i]:  # adjacent floats can round the midpoint up
                    thr = float(v[i - 1])
            best = (j, thr, LE if flat % 2 == 0 else GT, err)
    return best


def train_adaboost(
    data: LabeledStateSet, rounds: int = DEFAULT_ROUNDS, rng_seed: int = 0
) -> StumpEnsemble:
    """Fit a discrete AdaBoost stump ensemble to a labeled state set.

    Stops early once a round cannot beat a coin flip (error >= 0.5) or after
    recording a round with zero weighted error.
    """
    if rounds < 1:
        raise ValueError(f"rounds must be >= 1, got {rounds}")
    if len(data) == 0:
        raise ValueError("empty training set")
    y = data.labels == INFECTED
    if y.all() or not y.any():
        raise ValueError("training data must contain both benign and infected states")
    X = data.features
    n = len(y)
    w = np.full(n, 1.0 / n)
    sign = np.where(y, 1.0, -1.0)

    stumps: list[Stump] = []
    errors: list[float] = []
    for _ in range(rounds):
        j, thr, pol, err = best_stump(X, y, w)
        if err >= 0.5:
            if not stumps:
                stumps.append(Stump(j, thr, pol, 0.0))
                errors.append(err)
            break
        e = max(err, ERR_FLOOR)
        alpha = 0.5 * math.log((1.0 - e) / e)
        stump = Stump(j, thr, pol, alpha)
        stumps.append(stump)
        errors.append(err)
        h = np.where(stump.votes(X), 1.0, -1.0)
        w = w * np.exp(-alpha * sign * h)
        w /= w.sum()
        if err < ERR_FLOOR:  # separable; cumsum rounding can leave ~1e-16 instead of 0
            break

    meta = {
        "seed": int(rng_seed),
        "round_errors": errors,
        "n_rows": int(n),
        "trace_ids": sorted({p[0] for p in data.provenance}),
    }
    return StumpEnsemble(
        stumps=stumps,
        norm_min=float(data.norm_min),
        norm_max=float(data.norm_max),
        delta=float(data.params.delta),
        epsilon=float(data.params.epsilon),
        feature_names=tuple(data.feature_names),
        rounds=rounds,
        training_meta=meta,
    )


def predict_score(model: StumpEnsemble, row) -> float:
    row = np.asarray(row, dtype=np.float64)
    if row.shape != (model.n_features,):
        raise ValueError(f"row has shape {row.shape}, model expects ({model.n_features},)")
    return float(model.scores(row[np.newaxis, :])[0])


def save_model(model: StumpEnsemble, path: Union[str, Path]) -> None:
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "rounds": model.rounds,
        "transform": {
            "norm_min": model.norm_min,
            "norm_max": model.norm_max,
            "delta": model.delta,
            "epsilon": model.epsilon,
        },
        "feature_names": list(model.feature_names),
        "stumps": [asdict(s) for s in model.stumps],
        "training_meta": model.training_meta,
    }
    # json writes floats with repr(), so thresholds and weights round-trip bit-exact
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def load_model(path: Union[str, Path]) -> StumpEnsemble:
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: cannot parse model file ({exc.msg})") from None
    if not isinstance(doc, dict) or doc.get("format") != MODEL_FORMAT:
        raise ModelFormatError(f"{path}: not a {MODEL_FORMAT} file")
    if doc.get("version") != MODEL_VERSION:
        raise ModelFormatError(
            f"{path}: model version {doc.get('version')!r} unsupported (expected {MODEL_VERSION})"
        )
    try:
        tr = doc["transform"]
        stumps = [
            Stump(int(s["feature_index"]), float(s["threshold"]), str(s["polarity"]), float(s["weight"]))
            for s in doc["stumps"]
        ]
        return StumpEnsemble(
            stumps=stumps,
            norm_min=float(tr["norm_min"]),
            norm_max=float(tr["norm_max"]),
            delta=float(tr["delta"]),
            epsilon=float(tr["epsilon"]),
            feature_names=tuple(doc["feature_names"]),
            rounds=int(doc.get("rounds", len(stumps))),
            training_meta=doc.get("training_meta", {}),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"{path}: malformed model ({exc})") from None
