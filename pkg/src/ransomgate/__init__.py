"""Ransomware execution detection from resource-counter rate ratios."""

from .boost import Stump, StumpEnsemble, load_model, predict_score, save_model, train_adaboost
from .evaluate import (
    DetectionReport,
    SweepGrid,
    ThresholdCurves,
    cross_fold_accuracy,
    delay_histogram,
    detect_online,
    sweep_gates,
    threshold_curves,
)
from .gate import DecisionGate, LabeledStateSet, build_training_set, gate_indices, sample_benign
from .simulator import SimConfig, expected_ratio_jump, generate_corpus, make_schedule, simulate_trace
from .trace import Trace, label_trace, read_trace, write_trace
from .transform import (
    RateRatioMatrix,
    TransformParams,
    affine_normalize,
    exp_smooth,
    first_difference,
    rate_ratios,
    ratio_of_rates_transform,
    streaming_transform_step,
)

__version__ = "0.1.0"
