"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``criterion N: PASS|FAIL - detail`` line; the lines
are repeated in the terminal summary.
"""

import time

import numpy as np

from conftest import ACCEPTANCE_SEED, record_criterion, sim_corpus
from oracles import adaboost_replay_errors
from ransomgate.boost import train_adaboost
from ransomgate.evaluate import delay_histogram, sweep_gates, threshold_curves
from ransomgate.gate import DecisionGate, LabeledStateSet, build_training_set
from ransomgate.simulator import (
    APPLICATION,
    IDLE,
    EventSchedule,
    ProcessProfile,
    ScheduledEvent,
    SimConfig,
    expected_ratio_jump,
    simulate_trace,
)
from ransomgate.transform import (
    TransformParams,
    exp_smooth,
    first_difference,
    rate_ratios,
    ratio_of_rates_transform,
    stream_rows,
)

TAU_GRID = [round(i * 0.01, 2) for i in range(101)]
SWEEP_ALPHAS = [2, 8]
SWEEP_BETAS = [4, 6]
SWEEP_DELTAS = [0.0, 0.02, 1.0]


def random_counters(rng):
    M = int(rng.integers(2, 120))
    N = int(rng.integers(2, 24))
    scale = rng.lognormal(0.0, 2.0, size=N)
    inc = rng.random((M, N)) * scale
    inc[rng.random((M, N)) < 0.05] = 0.0  # idle counters
    return np.cumsum(inc, axis=0)


def test_criterion_1_transform_invariants():
    rng = np.random.default_rng(ACCEPTANCE_SEED)
    t0 = time.perf_counter()
    failures = []
    for i in range(1000):
        X = random_counters(rng)
        delta = float(rng.choice([0.0, 1.0, rng.random()]))
        out = ratio_of_rates_transform(X, TransformParams(delta=delta))
        if not np.all((out.A >= 0) & (out.A <= 1)):
            failures.append((i, "A outside [0, 1]"))
        if not np.array_equal(exp_smooth(out.A, 0.0), out.A):
            failures.append((i, "smoothing at 0 changed A"))
        if np.max(np.abs(np.prod(out.C, axis=1) - 1.0)) > 1e-9:
            failures.append((i, "cyclic product"))
        k = int(rng.integers(out.B.shape[0]))
        c = float(rng.uniform(0.5, 1e3))
        Bp = np.maximum(out.B, 1e-6)
        scaled = Bp.copy()
        scaled[k] *= c
        ref = rate_ratios(Bp)[k]
        if np.max(np.abs(rate_ratios(scaled)[k] - ref) / ref) > 1e-9:
            failures.append((i, "row scaling"))
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 30
    record_criterion(1, ok, f"1000 traces, {len(failures)} violations, {elapsed:.2f}s (limit 30s)")
    assert ok, failures[:5]


def test_criterion_2_stream_matches_batch():
    rng = np.random.default_rng(ACCEPTANCE_SEED + 2)
    worst = 0.0
    for _ in range(100):
        X = random_counters(rng)
        params = TransformParams(delta=float(rng.random()))
        batch = ratio_of_rates_transform(X, params)
        rows = stream_rows(X, (batch.norm_min, batch.norm_max), params)
        worst = max(worst, float(np.max(np.abs(rows - batch.C))))
    ok = worst <= 1e-12
    record_criterion(2, ok, f"100 traces, max |stream - batch| = {worst:.3g} (limit 1e-12)")
    assert ok


def test_criterion_3_boosting_matches_exhaustive_search():
    rng = np.random.default_rng(ACCEPTANCE_SEED + 3)
    worst = 0.0
    rounds_checked = 0
    bad_rounds = 0
    for i in range(200):
        n = int(rng.integers(6, 30))
        d = int(rng.integers(1, 5))
        if i % 2:
            X = rng.integers(0, 5, size=(n, d)).astype(float)  # plenty of ties
        else:
            X = rng.normal(size=(n, d))
        y = rng.random(n) < 0.5
        y[0], y[1] = True, False
        data = LabeledStateSet(X, y.astype(int), [("r", k, "x") for k in range(n)],
                               tuple(f"c{j}" for j in range(d)))
        model = train_adaboost(data, rounds=15, rng_seed=i)
        accepted = [s for s in model.stumps if s.weight > 0]
        bad_rounds += sum(e >= 0.5 for s, e in zip(model.stumps, model.training_meta["round_errors"])
                          if s.weight > 0)
        replay = [(s.feature_index, s.threshold, s.polarity, s.weight) for s in accepted]
        for err, oracle in adaboost_replay_errors(X.tolist(), y.tolist(), replay):
            worst = max(worst, abs(err - oracle))
            rounds_checked += 1
    ok = worst <= 1e-12 and bad_rounds == 0
    record_criterion(3, ok, f"200 datasets, {rounds_checked} rounds, max |err - oracle| = {worst:.3g}, "
                            f"{bad_rounds} accepted rounds with err >= 0.5")
    assert ok


def test_criterion_4_injected_process_jump():
    rng = np.random.default_rng(ACCEPTANCE_SEED + 4)
    worst = 0.0
    for _ in range(50):
        N = int(rng.integers(2, 10))
        M = int(rng.integers(10, 60))
        k0 = int(rng.integers(2, M - 2))
        n_base = int(rng.integers(1, 4))
        base = [rng.uniform(0.5, 20.0, size=N) for _ in range(n_base)]
        new = rng.uniform(0.0, 40.0, size=N)
        new[0] += 1.0
        events = [ScheduledEvent(0, ProcessProfile(f"p{i}", r), IDLE) for i, r in enumerate(base)]
        events.append(ScheduledEvent(k0, ProcessProfile("new", new), APPLICATION))
        cfg = SimConfig(n_features=N, noise_std=0.0)
        t = simulate_trace(cfg, EventSchedule(tuple(events), M))
        # per-process average rates before the injection
        A = np.mean(base, axis=0)
        dX = first_difference(t.samples)
        # C with an offset-free normalization keeps per-feature rate ratios
        C = ratio_of_rates_transform(t, TransformParams(0.0), norm=(0.0, float(dX.max()))).C
        for a in range(N):
            for b in range(N):
                if a == b or new[b] + n_base * A[b] == 0:
                    continue
                want = expected_ratio_jump(n_base, A[a], A[b], new[a], new[b])
                got = dX[k0, a] / dX[k0, b]
                worst = max(worst, abs(got - want) / max(1.0, abs(want)))
            b = (a + 1) % N
            want = expected_ratio_jump(n_base, A[a], A[b], new[a], new[b])
            worst = max(worst, abs(C[k0, a] - want) / max(1.0, abs(want)))
    ok = worst <= 1e-9
    record_criterion(4, ok, f"50 zero-noise injections, max relative deviation {worst:.3g} (limit 1e-9)")
    assert ok


def detection_run(positives, negatives, out_dir):
    """Train on four positives at <8, 4, 0.02>, score everything, write CSVs."""
    gate = DecisionGate(8, 4, 0.02)
    data = build_training_set(positives[:4], gate, rng_seed=ACCEPTANCE_SEED)
    model = train_adaboost(data, rng_seed=ACCEPTANCE_SEED)
    curves = threshold_curves(model, positives, negatives, TAU_GRID)
    curves.to_csv(out_dir / "curves.csv")
    delay_histogram(curves.positive_reports[0.75]).to_csv(out_dir / "delays.csv")
    return model, curves


def qualifying_taus(curves):
    """Thresholds meeting the detection, false-alarm and latency targets together."""
    out = []
    for tau, p, n in zip(curves.taus, curves.positive_rate, curves.negative_rate):
        if p < 0.9 or n != 0:
            continue
        hist = delay_histogram(curves.positive_reports[tau])
        fired = sum(hist.counts.values()) + hist.early
        quick = sum(c for d, c in hist.counts.items() if d <= 10)
        if fired and quick / fired >= 0.9:
            out.append(tau)
    return out


def test_criterion_5_end_to_end_detection(positives, negatives, tmp_path):
    t0 = time.perf_counter()
    _, curves = detection_run(positives, negatives, tmp_path)
    taus = qualifying_taus(curves)
    elapsed = time.perf_counter() - t0
    ok = bool(taus) and elapsed < 300
    i = curves.taus.index(0.75)
    hist = delay_histogram(curves.positive_reports[0.75])
    ref = (f"at tau=0.75: positives {curves.positive_rate[i]:.3f}, negatives "
           f"{curves.negative_rate[i]:.3f}, delay mode {hist.mode}")
    if taus:
        detail = f"{len(taus)} qualifying taus in [{taus[0]:.2f}, {taus[-1]:.2f}]; {ref}; {elapsed:.1f}s"
    else:
        detail = f"no tau on the 0.01 grid meets all three targets; {ref}; {elapsed:.1f}s"
    record_criterion(5, ok, detail)
    assert ok


def test_criterion_6_curves_monotone_and_nested(positives, negatives, tmp_path):
    _, curves = detection_run(positives, negatives, tmp_path)
    violations = 0
    for rates in (curves.positive_rate, curves.negative_rate):
        violations += sum(a < b for a, b in zip(rates, rates[1:]))
    for reports in (curves.positive_reports, curves.negative_reports):
        for lo, hi in zip(curves.taus, curves.taus[1:]):
            for a, b in zip(reports[lo], reports[hi]):
                if b.fired and not (a.fired and a.first_fire_index <= b.first_fire_index):
                    violations += 1
    ok = violations == 0
    record_criterion(6, ok, f"{len(curves.taus)} thresholds x 76 traces, {violations} violations")
    assert ok


def sweep_run(positives, negatives, out_path):
    traces = list(positives[:8]) + list(negatives[:4])
    grid = sweep_gates(traces, SWEEP_ALPHAS, SWEEP_BETAS, SWEEP_DELTAS, folds=10,
                       rng_seed=ACCEPTANCE_SEED, balance=True)
    grid.to_csv(out_path)
    return grid


def test_criterion_7_sweep_structure(positives, negatives, tmp_path):
    t0 = time.perf_counter()
    grid = sweep_run(positives, negatives, tmp_path / "heatmap.csv")
    elapsed = time.perf_counter() - t0
    (best_cell, best), collapsed = grid.best(), [v for (a, b, d), v in grid.cells.items() if d == 1.0]
    slice_mean = float(np.mean(collapsed)) if collapsed else float("nan")
    ok = best >= 0.9 and collapsed and slice_mean <= 0.6 and elapsed < 300
    record_criterion(7, bool(ok), f"best cell {best_cell} = {best:.3f}, delta=1.0 slice mean "
                                  f"{slice_mean:.3f} (limit 0.6); {elapsed:.1f}s")
    assert ok


def test_criterion_8_repeat_runs_are_byte_identical(tmp_path):
    outputs = []
    for run in ("a", "b"):
        d = tmp_path / run
        d.mkdir()
        pos, neg = sim_corpus()
        detection_run(pos, neg, d)
        sweep_run(pos, neg, d / "heatmap.csv")
        outputs.append({name: (d / name).read_bytes() for name in ("curves.csv", "delays.csv", "heatmap.csv")})
    same = outputs[0] == outputs[1]
    ok = same and all(outputs[0].values())
    record_criterion(8, ok, "curves, delays and heatmap CSVs identical across two seeded runs"
                     if ok else "repeated runs differ")
    assert ok
